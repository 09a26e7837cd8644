#include "primeforms/arith.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <thread>

#include "primeforms/errors.hpp"

namespace primeforms {

namespace {

constexpr char kMagic[8] = {'P', 'F', 'T', 'A', 'B', 'L', 'E', '1'};

void sieve_segment(ArithTables& t, const std::vector<std::uint32_t>& base, std::uint64_t lo, std::uint64_t hi) {
    const std::uint64_t len = hi - lo;
    std::vector<std::uint64_t> rem(len);
    std::vector<std::uint32_t> last(len, 0);
    std::vector<std::uint8_t> distinct(len, 0);
    for (std::uint64_t i = 0; i < len; ++i) {
        rem[i] = lo + i;
        t.mobius[lo + i] = 1;
        t.liouville[lo + i] = 1;
        t.spf[lo + i] = 0;
    }
    for (std::uint32_t p : base) {
        if (static_cast<std::uint64_t>(p) * p > hi) break;
        std::uint64_t start = std::max<std::uint64_t>((lo + p - 1) / p * p, p);
        for (std::uint64_t m = start; m < hi; m += p) {
            std::uint64_t i = m - lo;
            if (t.spf[m] == 0) t.spf[m] = p;
            int e = 0;
            while (rem[i] % p == 0) {
                rem[i] /= p;
                ++e;
            }
            t.mobius[m] = e >= 2 ? 0 : static_cast<std::int8_t>(-t.mobius[m]);
            if (e & 1) t.liouville[m] = static_cast<std::int8_t>(-t.liouville[m]);
            ++distinct[i];
            last[i] = p;
        }
    }
    for (std::uint64_t i = 0; i < len; ++i) {
        std::uint64_t n = lo + i;
        if (n < 2) continue;
        if (rem[i] > 1) {
            if (t.spf[n] == 0) t.spf[n] = static_cast<std::uint32_t>(rem[i]);
            t.mobius[n] = static_cast<std::int8_t>(-t.mobius[n]);
            t.liouville[n] = static_cast<std::int8_t>(-t.liouville[n]);
            ++distinct[i];
            last[i] = static_cast<std::uint32_t>(rem[i]);
        }
        if (distinct[i] == 1) {
            double lg = std::log(static_cast<double>(last[i]));
            t.von_mangoldt[n] = lg;
            if (t.spf[n] == n) t.von_mangoldt_prime[n] = lg;
        }
    }
}

}  // namespace

void ArithTables::check_range(std::int64_t n) const {
    if (n > 0 && static_cast<std::uint64_t>(n) > n_max)
        throw resource_error("arithmetic table overflow: need " + std::to_string(n) + " > n_max " +
                             std::to_string(n_max));
}

std::vector<std::uint32_t> primes_up_to(std::uint64_t n) {
    std::vector<std::uint32_t> out;
    if (n < 2) return out;
    std::vector<bool> comp(n + 1, false);
    for (std::uint64_t p = 2; p <= n; ++p) {
        if (comp[p]) continue;
        out.push_back(static_cast<std::uint32_t>(p));
        for (std::uint64_t m = p * p; m <= n; m += p) comp[m] = true;
    }
    return out;
}

ArithTables build_tables(std::uint64_t n_max, std::uint64_t block, unsigned threads) {
    if (n_max < 2) throw validation_error("build_tables: n_max must be at least 2");
    if (n_max > (1ull << 31)) throw resource_error("build_tables: n_max above 2^31");
    if (block == 0) block = 1u << 20;
    ArithTables t;
    t.n_max = n_max;
    t.spf.assign(n_max + 1, 0);
    t.von_mangoldt.assign(n_max + 1, 0.0);
    t.von_mangoldt_prime.assign(n_max + 1, 0.0);
    t.mobius.assign(n_max + 1, 0);
    t.liouville.assign(n_max + 1, 0);
    std::uint64_t root = static_cast<std::uint64_t>(std::sqrt(static_cast<double>(n_max))) + 1;
    auto base = primes_up_to(root);
    std::vector<std::pair<std::uint64_t, std::uint64_t>> segments;
    for (std::uint64_t lo = 0; lo <= n_max; lo += block) segments.emplace_back(lo, std::min(lo + block, n_max + 1));
    threads = std::max(1u, threads);
    if (threads == 1 || segments.size() == 1) {
        for (auto [lo, hi] : segments) sieve_segment(t, base, lo, hi);
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < threads; ++w)
            pool.emplace_back([&, w] {
                for (size_t s = w; s < segments.size(); s += threads)
                    sieve_segment(t, base, segments[s].first, segments[s].second);
            });
        for (auto& th : pool) th.join();
    }
    t.spf[0] = 0;
    t.mobius[0] = 0;
    t.liouville[0] = 0;
    t.spf[1] = 1;
    t.mobius[1] = 1;
    t.liouville[1] = 1;
    for (std::uint64_t n = 2; n <= n_max; ++n) {
        if (t.spf[n] == n) t.primes.push_back(static_cast<std::uint32_t>(n));
        if (t.von_mangoldt[n] > 0) t.prime_powers.push_back(static_cast<std::uint32_t>(n));
    }
    return t;
}

namespace {

template <class T>
void write_array(std::ofstream& os, const std::vector<T>& v) {
    // host is little-endian (x86-64); arrays are written verbatim
    os.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(T)));
}

template <class T>
void read_array(std::ifstream& is, std::vector<T>& v, std::uint64_t n) {
    v.resize(n);
    is.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(T)));
    if (!is) throw validation_error("table cache truncated");
}

}  // namespace

void save_tables(const ArithTables& t, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw validation_error("cannot write table cache " + path);
    os.write(kMagic, 8);
    std::uint64_t n = t.n_max;
    os.write(reinterpret_cast<const char*>(&n), 8);
    write_array(os, t.spf);
    write_array(os, t.mobius);
    write_array(os, t.liouville);
    write_array(os, t.von_mangoldt);
    write_array(os, t.von_mangoldt_prime);
}

ArithTables load_tables(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw validation_error("cannot read table cache " + path);
    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, kMagic, 8) != 0) throw validation_error("table cache has a bad header");
    std::uint64_t n = 0;
    is.read(reinterpret_cast<char*>(&n), 8);
    if (n < 2 || n > (1ull << 31)) throw validation_error("table cache has a bad size");
    ArithTables t;
    t.n_max = n;
    read_array(is, t.spf, n + 1);
    read_array(is, t.mobius, n + 1);
    read_array(is, t.liouville, n + 1);
    read_array(is, t.von_mangoldt, n + 1);
    read_array(is, t.von_mangoldt_prime, n + 1);
    for (std::uint64_t k = 2; k <= n; ++k) {
        if (t.spf[k] == k) t.primes.push_back(static_cast<std::uint32_t>(k));
        if (t.von_mangoldt[k] > 0) t.prime_powers.push_back(static_cast<std::uint32_t>(k));
    }
    return t;
}

std::vector<std::uint32_t> distinct_prime_factors(const ArithTables& t, std::uint64_t n) {
    std::vector<std::uint32_t> out;
    if (n > t.n_max) throw resource_error("distinct_prime_factors: beyond table");
    while (n > 1) {
        std::uint32_t p = t.spf[n];
        out.push_back(p);
        while (n % p == 0) n /= p;
    }
    return out;
}

namespace {

WTrickParams from_primes(double w, const std::vector<std::uint32_t>& ps) {
    WTrickParams r;
    r.w = w;
    for (auto p : ps) {
        if (r.W > (1ull << 40) / p) throw resource_error("w_trick: W too large");
        r.W *= p;
        r.phi *= (p - 1);
    }
    for (std::uint64_t b = 1; b <= r.W; ++b)
        if (std::gcd(b, r.W) == 1) r.residues.push_back(b);
    return r;
}

}  // namespace

WTrickParams w_trick(double w) {
    if (!(w >= 2)) throw validation_error("w_trick: w must be at least 2");
    return from_primes(w, primes_up_to(static_cast<std::uint64_t>(std::floor(w))));
}

WTrickParams w_trick_explicit(std::uint64_t W) {
    if (W < 2) throw validation_error("w_trick: W must be at least 2");
    std::uint64_t prod = 1;
    std::vector<std::uint32_t> ps;
    for (std::uint32_t p : primes_up_to(64)) {
        if (prod == W) break;
        prod *= p;
        ps.push_back(p);
        if (prod > W) break;
    }
    if (prod != W) throw validation_error("w_trick: W = " + std::to_string(W) + " is not a primorial");
    return from_primes(static_cast<double>(ps.back()), ps);
}

double lambda_bw(std::int64_t n, std::uint64_t b, const WTrickParams& params, const ArithTables& tables,
                 bool primed) {
    if (std::gcd(b, params.W) != 1) throw validation_error("lambda_bw: residue not coprime to W");
    std::int64_t m = static_cast<std::int64_t>(params.W) * n + static_cast<std::int64_t>(b);
    if (m <= 0) return 0.0;
    tables.check_range(m);
    double v = primed ? tables.von_mangoldt_prime[m] : tables.von_mangoldt[m];
    return static_cast<double>(params.phi) / static_cast<double>(params.W) * v;
}

}  // namespace primeforms
