#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "primeforms/arith.hpp"
#include "primeforms/forms.hpp"
#include "primeforms/geometry.hpp"

namespace primeforms {

enum class WeightKind {
    von_mangoldt,        // Lambda
    von_mangoldt_prime,  // Lambda'
    mobius,
    liouville,
    w_trick,             // (phi(W)/W) Lambda(W n + b); primed variant via `primed`
    prime_indicator,
    one,
    custom,
};

struct Weight {
    WeightKind kind = WeightKind::one;
    std::uint64_t W = 1, b = 1, phi = 1;
    bool primed = false;
    std::function<double(std::int64_t)> fn;  // custom only
    std::string label;

    static Weight von_mangoldt() { return of(WeightKind::von_mangoldt); }
    static Weight von_mangoldt_prime() { return of(WeightKind::von_mangoldt_prime); }
    static Weight mobius() { return of(WeightKind::mobius); }
    static Weight liouville() { return of(WeightKind::liouville); }
    static Weight prime_indicator() { return of(WeightKind::prime_indicator); }
    static Weight one() { return of(WeightKind::one); }
    static Weight w_trick(const WTrickParams& p, std::uint64_t b, bool primed);
    static Weight custom(std::function<double(std::int64_t)> f, std::string label);

    std::string name() const;

private:
    static Weight of(WeightKind k) {
        Weight w;
        w.kind = k;
        return w;
    }
};

Weight weight_from_name(const std::string& name);

struct CountOptions {
    unsigned threads = 1;
};

double weighted_count(const FormSystem& sys, const ConvexBody& body, const std::vector<Weight>& weights,
                      const ArithTables& tables, const CountOptions& opt = {});

std::uint64_t prime_point_count(const FormSystem& sys, const ConvexBody& body, const ArithTables& tables,
                                const CountOptions& opt = {});

// sum over K of prod_i 1_{psi_i > 2} / log psi_i; innermost sums use Euler-Maclaurin.
double log_density_sum(const FormSystem& sys, const ConvexBody& body, const CountOptions& opt = {});

enum class PredictMode { log_power, integral };

struct Prediction {
    double value = 0;
    double singular_product = 0;
    double beta_infinity = 0;
    bool vanishing = false;
};

Prediction predict(const FormSystem& sys, const ConvexBody& body, std::int64_t N, std::uint64_t p_max,
                   PredictMode mode, const CountOptions& opt = {});

struct CorrelationReport {
    std::int64_t N = 0;
    double empirical = 0;             // count of n in K with every psi_i(n) prime
    double lambda_weighted = 0;       // sum of prod Lambda(psi_i(n))
    double predicted_log_power = 0;   // beta_inf prod beta_p / log^t N
    double predicted_integral = 0;    // prod beta_p * sum 1/prod log psi_i
    double predicted_weighted = 0;    // beta_inf prod beta_p, the target of lambda_weighted
    double ratio_log_power = 0;
    double ratio_integral = 0;
    double ratio_weighted = 0;
    double singular_product = 0;
    double beta_infinity = 0;
    std::uint64_t p_max = 0;
    bool vanishing = false;
    double seconds = 0;
};

CorrelationReport compare(const FormSystem& sys, const ConvexBody& body, std::int64_t N, std::uint64_t p_max,
                          const ArithTables& tables, const CountOptions& opt = {});

std::string correlation_csv(const std::vector<CorrelationReport>& rows);

double mobius_correlation(const FormSystem& sys, const ConvexBody& body, std::int64_t N, bool liouville,
                          const ArithTables& tables, const CountOptions& opt = {});

// E_{1 <= y1, y2 <= N} lambda(prod of linear factors), factors in two variables with zero constant.
double chowla_check(const std::vector<AffineForm>& factors, std::int64_t N, const ArithTables& tables,
                    const CountOptions& opt = {});

}  // namespace primeforms
