#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "primeforms/arith.hpp"
#include "primeforms/forms.hpp"
#include "primeforms/geometry.hpp"

namespace primeforms {

// Even cutoff supported in [-1, 1]; value and derivative given on [0, 1], extended evenly.
struct SmoothCutoff {
    std::string family_id;
    std::function<double(double)> value_pos;  // x in [0, 1]
    std::function<double(double)> deriv_pos;  // right derivative at 0
    std::vector<double> breakpoints;          // interior points where the formula switches
    double support_radius = 1.0;

    double operator()(double x) const;
    double derivative(double x) const;
};

// A*(1 - x^2)^3 with A chosen so that the integral of chi'^2 over [0,1] is 1.
SmoothCutoff normalized_bump();
// 1 - x on [0, 1 - 2 delta], then a quintic landing flat (C^2) at x = 1.
// chi(0) = 1 and chi'(0+) = -1.
SmoothCutoff smoothed_tent(double delta = 0.05);
SmoothCutoff scaled_cutoff(const SmoothCutoff& chi, double factor);

// a = 1: -chi'(0); a = 2: integral of chi'^2 over [0, 1].
double sieve_factor(const SmoothCutoff& chi, int a);

// log R (sum_{d | n, d <= R} mu(d) chi(log d / log R))^a; n < 0 uses |n|.
double truncated_divisor_sum(std::int64_t n, const SmoothCutoff& chi, double R, int a, const ArithTables& tables);

// Smooth partition of the identity x = sharp(x) + flat(x) on [0, inf):
// sharp vanishes for x >= 1, flat vanishes for x <= 1/2.
struct SharpFlatSplit {
    std::function<double(double)> sharp;
    std::function<double(double)> flat;
};
SharpFlatSplit split_sharp_flat();

// -log R sum_{d | n} mu(d) part(log d / log R) over squarefree divisors.
double lambda_sharp(std::int64_t n, double R, const ArithTables& tables);
double lambda_flat(std::int64_t n, double R, const ArithTables& tables);

struct EnvelopingSieve {
    std::int64_t N = 0;
    std::int64_t N_prime = 0;
    double C = 20;
    double gamma = 0.05;
    double R = 0;
    double w = 0;
    std::uint64_t W = 1;
    std::uint64_t phi = 1;
    std::vector<std::uint64_t> b_list;
    std::vector<double> nu;  // indexed by Z_{N'} representatives 0..N'-1

    double at(std::int64_t n) const;  // n reduced mod N'
    double mean() const;
};

std::int64_t least_prime_at_least(std::int64_t n);

EnvelopingSieve build_enveloping_sieve(std::int64_t N, double gamma, double w, const std::vector<std::uint64_t>& b_list,
                                       double C, const ArithTables& tables);

void save_sieve(const EnvelopingSieve& s, const std::string& path);
EnvelopingSieve load_sieve(const std::string& path);

struct DominationReport {
    double C_dom = 0;
    std::int64_t argmax = 0;
    std::int64_t from = 0;
};
// max of (1 + sum_i Lambda'_{b_i,W}(n)) / nu(n) over [N^{3/5}, N].
DominationReport domination_constant(const EnvelopingSieve& s, const ArithTables& tables);

struct LinearFormsDeviation {
    double mean = 0;       // estimate of E prod nu(psi_i(n)) over Z_{N'}^d
    double deviation = 0;  // |mean - 1|
    double std_error = 0;  // 0 for full enumeration
    std::uint64_t samples = 0;
    bool exhaustive = false;
};
LinearFormsDeviation linear_forms_check(const EnvelopingSieve& s, const FormSystem& sys, std::uint64_t sample_budget,
                                        std::uint64_t seed = 1);

struct TauParams {
    double kappa = 1.0;
    double cap = 0;  // 0 means (log N)^2
};

// sum over ordered residue pairs (i, j) of exp(kappa sum_{p > w, p | W h + b_i - b_j} p^{-1/2}),
// with a zero argument contributing the cap.
double tau_weight(std::int64_t h, const EnvelopingSieve& s, const TauParams& tp, const ArithTables& tables);

struct CorrelationCheck {
    double lhs = 0;
    double rhs = 0;
    bool holds = false;
};
CorrelationCheck correlation_check(const EnvelopingSieve& s, const std::vector<std::int64_t>& shifts, const TauParams& tp,
                                   const ArithTables& tables);

// E_{n in [-N, N]} tau(n)^q.
std::vector<double> tau_moments(const EnvelopingSieve& s, const std::vector<int>& qs, const TauParams& tp,
                                const ArithTables& tables);

struct GYReport {
    std::int64_t N = 0;
    double R = 0;
    double empirical = 0;
    double predicted = 0;
    double ratio = 0;
    double sieve_factor_product = 0;
    double volume = 0;  // lattice point count of K
    double singular_product = 0;
    double exceptional_X = 0;
};

GYReport gy_estimate_check(const FormSystem& sys, const ConvexBody& body, std::int64_t N,
                           const std::vector<SmoothCutoff>& chis, const std::vector<int>& a_list, double gamma,
                           std::uint64_t p_max, const ArithTables& tables, unsigned threads = 1);

// (phi(W)/W) Lambda^sharp(W n + b) - 1 for n = 1..N.
std::vector<double> sharp_deviation(std::int64_t N, std::uint64_t b, std::uint64_t W, double gamma,
                                    const ArithTables& tables);
// Lambda'_{b,W}(n) - 1 for n = 1..N.
std::vector<double> w_tricked_deviation(std::int64_t N, std::uint64_t b, std::uint64_t W, const ArithTables& tables);

double default_sharp_gamma(int s);

// ||(phi(W)/W) Lambda^sharp(W n + b) - 1||_{U^{s+1}[N]}.
double sharp_gowers_check(std::int64_t N, std::uint64_t b, std::uint64_t W, int s, double gamma,
                          const ArithTables& tables, unsigned threads = 1);

}  // namespace primeforms
