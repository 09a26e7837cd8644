#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace primeforms {

struct ArithTables {
    std::uint64_t n_max = 0;
    std::vector<std::uint32_t> spf;   // spf[1] = 1, spf[0] = 0
    std::vector<double> von_mangoldt;
    std::vector<double> von_mangoldt_prime;
    std::vector<std::int8_t> mobius;
    std::vector<std::int8_t> liouville;
    std::vector<std::uint32_t> primes;        // ascending
    std::vector<std::uint32_t> prime_powers;  // ascending, p^k with k >= 1

    bool is_prime(std::int64_t n) const {
        return n >= 2 && static_cast<std::uint64_t>(n) <= n_max && spf[n] == n;
    }
    void check_range(std::int64_t n) const;
};

ArithTables build_tables(std::uint64_t n_max, std::uint64_t block = 1u << 20, unsigned threads = 1);

void save_tables(const ArithTables& t, const std::string& path);
ArithTables load_tables(const std::string& path);

// Primes up to n by a plain sieve, independent of the tables.
std::vector<std::uint32_t> primes_up_to(std::uint64_t n);

// Distinct prime factors of n (n <= n_max) via the spf table.
std::vector<std::uint32_t> distinct_prime_factors(const ArithTables& t, std::uint64_t n);

struct WTrickParams {
    double w = 0;
    std::uint64_t W = 1;
    std::uint64_t phi = 1;
    std::vector<std::uint64_t> residues;  // b in [1, W] coprime to W
};

WTrickParams w_trick(double w);
WTrickParams w_trick_explicit(std::uint64_t W);

double lambda_bw(std::int64_t n, std::uint64_t b, const WTrickParams& params, const ArithTables& tables,
                 bool primed);

}  // namespace primeforms
