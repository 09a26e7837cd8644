#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "primeforms/forms.hpp"

namespace primeforms {

mpq_class local_von_mangoldt(std::uint64_t q, std::int64_t b);

// beta_p via inclusion-exclusion over subsets of forms (ranks mod p).
mpq_class local_factor(const FormSystem& sys, std::uint64_t p);
// Same quantity by enumerating Z_q^d; guarded at q^d <= 1e6.
mpq_class local_factor_direct(const FormSystem& sys, std::uint64_t q);
// beta_q = prod_{p | q} beta_p.
mpq_class local_factor_q(const FormSystem& sys, std::uint64_t q);

mpq_class ap_k_local_factor(int k, std::uint64_t p);

struct LocalProfile {
    std::vector<std::uint32_t> primes;
    std::vector<mpq_class> beta;
};

struct SingularSeries {
    double truncated_product = 0;
    std::uint64_t p_max = 0;
    double envelope_constant = 0;  // max p^2 |beta_p - 1| over primes in (P_max/10, P_max]
    double tail_log_bound = 0;     // envelope_constant * sum_{p > P_max} p^-2 (heuristic)
    bool vanishing = false;
    bool pairwise_independent = true;
    LocalProfile profile;  // filled when requested
};

SingularSeries singular_series(const FormSystem& sys, std::uint64_t p_max, bool keep_profile = false,
                               unsigned threads = 1);

// alpha_p of A x = b through the parameterization.
mpq_class alpha_p(const std::vector<std::vector<std::int64_t>>& A, const std::vector<std::int64_t>& b,
                  std::uint64_t p);
// Truncated-limit evaluation: average of prod Lambda_{Z_p}(x_i) over x in [-M, M]^t with A x = b.
double alpha_p_truncated(const std::vector<std::vector<std::int64_t>>& A, const std::vector<std::int64_t>& b,
                         std::uint64_t p, std::int64_t M);

struct ExceptionalPrimeSet {
    std::vector<std::uint64_t> primes;
    double X = 0;  // sum of p^{-1/2}
};

ExceptionalPrimeSet exceptional_primes(const FormSystem& sys, std::uint64_t p_limit);

std::string local_profile_csv(const LocalProfile& profile);

}  // namespace primeforms
