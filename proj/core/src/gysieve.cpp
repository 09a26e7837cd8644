#include "primeforms/gysieve.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "primeforms/counting.hpp"
#include "primeforms/errors.hpp"
#include "primeforms/gowers.hpp"
#include "primeforms/local_factors.hpp"

namespace primeforms {

namespace {

// Visits squarefree divisors d <= limit of |n| with their Mobius sign.
template <class Fn>
void for_each_squarefree_divisor(std::int64_t n, double limit, const ArithTables& t, Fn fn) {
    std::uint64_t m = static_cast<std::uint64_t>(n < 0 ? -n : n);
    t.check_range(static_cast<std::int64_t>(m));
    auto primes = distinct_prime_factors(t, m);
    std::sort(primes.begin(), primes.end());
    // depth-first over prime subsets; primes ascending so products can be pruned
    struct Frame {
        std::size_t next;
        double d;
        int sign;
    };
    std::vector<Frame> stack{{0, 1.0, 1}};
    while (!stack.empty()) {
        Frame f = stack.back();
        stack.pop_back();
        fn(f.d, f.sign);
        for (std::size_t i = f.next; i < primes.size(); ++i) {
            double d = f.d * primes[i];
            if (d > limit * (1 + 1e-12)) break;
            stack.push_back({i + 1, d, -f.sign});
        }
    }
}

double smooth_drop(double x) {
    // 1 on (-inf, 1/2], 0 on [1, inf), C-infinity in between
    if (x <= 0.5) return 1.0;
    if (x >= 1.0) return 0.0;
    double t = 2.0 * (x - 0.5);
    auto g = [](double u) { return u > 0 ? std::exp(-1.0 / u) : 0.0; };
    double a = g(1.0 - t), b = g(t);
    return a / (a + b);
}

std::uint64_t phi_of_primorial(std::uint64_t W) { return w_trick_explicit(W).phi; }

}  // namespace

double SmoothCutoff::operator()(double x) const {
    double a = std::fabs(x);
    return a >= support_radius ? 0.0 : value_pos(a);
}

double SmoothCutoff::derivative(double x) const {
    double a = std::fabs(x);
    if (a >= support_radius) return 0.0;
    return x >= 0 ? deriv_pos(a) : -deriv_pos(a);
}

SmoothCutoff normalized_bump() {
    // integral_0^1 36 x^2 (1 - x^2)^4 dx = 4608 / 3465
    const double amp = std::sqrt(3465.0 / 4608.0);
    SmoothCutoff c;
    c.family_id = "bump3";
    c.value_pos = [amp](double x) {
        double u = 1 - x * x;
        return amp * u * u * u;
    };
    c.deriv_pos = [amp](double x) {
        double u = 1 - x * x;
        return -6.0 * amp * x * u * u;
    };
    return c;
}

SmoothCutoff smoothed_tent(double delta) {
    if (!(delta > 0 && delta < 0.5)) throw validation_error("smoothed_tent: delta must lie in (0, 1/2)");
    const double x0 = 1 - 2 * delta, len = 2 * delta;
    SmoothCutoff c;
    c.family_id = "tent(delta=" + std::to_string(delta) + ")";
    c.value_pos = [=](double x) {
        if (x <= x0) return 1 - x;
        double t = (x - x0) / len;
        return len * (1 - t - 4 * t * t * t + 7 * t * t * t * t - 3 * t * t * t * t * t);
    };
    c.deriv_pos = [=](double x) {
        if (x <= x0) return -1.0;
        double t = (x - x0) / len;
        return -1 - 12 * t * t + 28 * t * t * t - 15 * t * t * t * t;
    };
    c.breakpoints = {x0};
    return c;
}

SmoothCutoff scaled_cutoff(const SmoothCutoff& chi, double factor) {
    SmoothCutoff c = chi;
    c.family_id = chi.family_id + "*" + std::to_string(factor);
    c.value_pos = [f = chi.value_pos, factor](double x) { return factor * f(x); };
    c.deriv_pos = [f = chi.deriv_pos, factor](double x) { return factor * f(x); };
    return c;
}

double sieve_factor(const SmoothCutoff& chi, int a) {
    if (a == 1) return -chi.deriv_pos(0.0);
    if (a != 2) throw validation_error("sieve_factor: only a = 1 and a = 2 are supported");
    std::vector<double> cuts{0.0};
    for (double b : chi.breakpoints)
        if (b > 0 && b < chi.support_radius) cuts.push_back(b);
    cuts.push_back(chi.support_radius);
    std::sort(cuts.begin(), cuts.end());
    double total = 0;
    auto sq = [&](double x) {
        double d = chi.deriv_pos(x);
        return d * d;
    };
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
        total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(sq, cuts[i], cuts[i + 1], 15, 1e-15);
    return total;
}

double truncated_divisor_sum(std::int64_t n, const SmoothCutoff& chi, double R, int a, const ArithTables& tables) {
    if (n == 0) throw validation_error("truncated_divisor_sum: n = 0");
    if (a < 1) throw validation_error("truncated_divisor_sum: a must be positive");
    if (!(R > 1)) throw validation_error("truncated_divisor_sum: R must exceed 1");
    const double L = std::log(R);
    double s = 0;
    for_each_squarefree_divisor(n, R * chi.support_radius, tables,
                                [&](double d, int mu) { s += mu * chi(std::log(d) / L); });
    return L * std::pow(s, a);
}

SharpFlatSplit split_sharp_flat() {
    return {[](double x) { return x * smooth_drop(x); }, [](double x) { return x * (1.0 - smooth_drop(x)); }};
}

double lambda_sharp(std::int64_t n, double R, const ArithTables& tables) {
    if (n < 1) throw validation_error("lambda_sharp: n must be positive");
    const double L = std::log(R);
    double s = 0;
    for_each_squarefree_divisor(n, R, tables, [&](double d, int mu) {
        double x = std::log(d) / L;
        s += mu * x * smooth_drop(x);
    });
    return -L * s;
}

double lambda_flat(std::int64_t n, double R, const ArithTables& tables) {
    if (n < 1) throw validation_error("lambda_flat: n must be positive");
    const double L = std::log(R);
    double s = 0;
    for_each_squarefree_divisor(n, HUGE_VAL, tables, [&](double d, int mu) {
        double x = std::log(d) / L;
        s += mu * x * (1.0 - smooth_drop(x));
    });
    return -L * s;
}

double EnvelopingSieve::at(std::int64_t n) const {
    std::int64_t r = n % N_prime;
    if (r < 0) r += N_prime;
    return nu[static_cast<std::size_t>(r)];
}

double EnvelopingSieve::mean() const {
    long double s = 0;
    for (double v : nu) s += v;
    return static_cast<double>(s / nu.size());
}

std::int64_t least_prime_at_least(std::int64_t n) {
    auto prime = [](std::int64_t m) {
        if (m < 2) return false;
        if (m % 2 == 0) return m == 2;
        for (std::int64_t q = 3; q * q <= m; q += 2)
            if (m % q == 0) return false;
        return true;
    };
    std::int64_t m = std::max<std::int64_t>(n, 2);
    while (!prime(m)) ++m;
    return m;
}

EnvelopingSieve build_enveloping_sieve(std::int64_t N, double gamma, double w, const std::vector<std::uint64_t>& b_list,
                                       double C, const ArithTables& tables) {
    if (N < 2) throw validation_error("enveloping sieve: N must be at least 2");
    if (C < 20) throw validation_error("enveloping sieve: C must be at least 20");
    if (!(gamma > 0 && gamma < 0.6)) throw validation_error("enveloping sieve: gamma must lie in (0, 3/5)");
    if (b_list.empty()) throw validation_error("enveloping sieve: empty residue list");
    auto wp = w_trick(w);
    for (auto b : b_list)
        if (std::gcd(b, wp.W) != 1) throw validation_error("enveloping sieve: residue " + std::to_string(b) + " not coprime to W");
    EnvelopingSieve s;
    s.N = N;
    s.C = C;
    s.gamma = gamma;
    s.R = std::pow(static_cast<double>(N), gamma);
    s.w = w;
    s.W = wp.W;
    s.phi = wp.phi;
    s.b_list = b_list;
    s.N_prime = least_prime_at_least(static_cast<std::int64_t>(std::ceil(C * static_cast<double>(N))));
    tables.check_range(static_cast<std::int64_t>(wp.W) * N + static_cast<std::int64_t>(*std::max_element(b_list.begin(), b_list.end())));
    const auto chi = normalized_bump();
    const double scale = static_cast<double>(wp.phi) / static_cast<double>(wp.W);
    s.nu.assign(static_cast<std::size_t>(s.N_prime), 1.0);
    for (std::int64_t n = 1; n <= N; ++n) {
        double acc = 0;
        for (auto b : b_list)
            acc += scale * truncated_divisor_sum(static_cast<std::int64_t>(wp.W) * n + static_cast<std::int64_t>(b), chi, s.R, 2, tables);
        s.nu[static_cast<std::size_t>(n)] = 0.5 + 0.5 * acc / static_cast<double>(b_list.size());
    }
    return s;
}

namespace {
constexpr char kSieveMagic[8] = {'P', 'F', 'S', 'I', 'E', 'V', 'E', '1'};
}

void save_sieve(const EnvelopingSieve& s, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw validation_error("cannot write " + path);
    os.write(kSieveMagic, 8);
    auto put = [&](const auto& v) { os.write(reinterpret_cast<const char*>(&v), sizeof(v)); };
    put(s.N);
    put(s.N_prime);
    put(s.C);
    put(s.gamma);
    put(s.R);
    put(s.w);
    put(s.W);
    put(s.phi);
    std::uint64_t nb = s.b_list.size();
    put(nb);
    os.write(reinterpret_cast<const char*>(s.b_list.data()), static_cast<std::streamsize>(nb * sizeof(std::uint64_t)));
    os.write(reinterpret_cast<const char*>(s.nu.data()), static_cast<std::streamsize>(s.nu.size() * sizeof(double)));
}

EnvelopingSieve load_sieve(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw validation_error("cannot read " + path);
    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, kSieveMagic, 8) != 0) throw validation_error(path + ": not a sieve cache");
    EnvelopingSieve s;
    auto get = [&](auto& v) { is.read(reinterpret_cast<char*>(&v), sizeof(v)); };
    get(s.N);
    get(s.N_prime);
    get(s.C);
    get(s.gamma);
    get(s.R);
    get(s.w);
    get(s.W);
    get(s.phi);
    std::uint64_t nb = 0;
    get(nb);
    if (!is || nb > 1u << 20 || s.N_prime <= 0) throw validation_error(path + ": corrupt header");
    s.b_list.resize(nb);
    is.read(reinterpret_cast<char*>(s.b_list.data()), static_cast<std::streamsize>(nb * sizeof(std::uint64_t)));
    s.nu.resize(static_cast<std::size_t>(s.N_prime));
    is.read(reinterpret_cast<char*>(s.nu.data()), static_cast<std::streamsize>(s.nu.size() * sizeof(double)));
    if (!is) throw validation_error(path + ": truncated sieve cache");
    return s;
}

DominationReport domination_constant(const EnvelopingSieve& s, const ArithTables& tables) {
    DominationReport r;
    r.from = static_cast<std::int64_t>(std::ceil(std::pow(static_cast<double>(s.N), 0.6)));
    const double scale = static_cast<double>(s.phi) / static_cast<double>(s.W);
    for (std::int64_t n = r.from; n <= s.N; ++n) {
        double lhs = 1;
        for (auto b : s.b_list) {
            std::int64_t m = static_cast<std::int64_t>(s.W) * n + static_cast<std::int64_t>(b);
            tables.check_range(m);
            lhs += scale * tables.von_mangoldt_prime[m];
        }
        double ratio = lhs / s.at(n);
        if (ratio > r.C_dom) {
            r.C_dom = ratio;
            r.argmax = n;
        }
    }
    return r;
}

LinearFormsDeviation linear_forms_check(const EnvelopingSieve& s, const FormSystem& sys, std::uint64_t sample_budget,
                                        std::uint64_t seed) {
    sys.validate();
    const std::int64_t P = s.N_prime;
    auto form_mod = [&](const AffineForm& f, const std::vector<std::int64_t>& n) {
        __int128 v = f.constant;
        for (std::size_t j = 0; j < n.size(); ++j) v += static_cast<__int128>(f.coeffs[j]) * n[j];
        std::int64_t r = static_cast<std::int64_t>(v % P);
        return r < 0 ? r + P : r;
    };
    auto prod_at = [&](const std::vector<std::int64_t>& n) {
        double p = 1;
        for (const auto& f : sys.forms) p *= s.nu[static_cast<std::size_t>(form_mod(f, n))];
        return p;
    };
    LinearFormsDeviation out;
    const double space = std::pow(static_cast<double>(P), sys.d);
    std::vector<std::int64_t> n(sys.d, 0);
    if (sys.d <= 2 && space <= static_cast<double>(sample_budget)) {
        long double acc = 0;
        while (true) {
            acc += prod_at(n);
            int j = sys.d - 1;
            while (j >= 0 && ++n[j] == P) n[j--] = 0;
            if (j < 0) break;
        }
        out.mean = static_cast<double>(acc / space);
        out.samples = static_cast<std::uint64_t>(space);
        out.exhaustive = true;
    } else {
        if (sample_budget == 0) throw validation_error("linear_forms_check: zero sample budget");
        std::mt19937_64 rng(seed);
        std::uniform_int_distribution<std::int64_t> pick(0, P - 1);
        long double s1 = 0, s2 = 0;
        for (std::uint64_t k = 0; k < sample_budget; ++k) {
            for (auto& x : n) x = pick(rng);
            double v = prod_at(n);
            s1 += v;
            s2 += static_cast<long double>(v) * v;
        }
        long double m = s1 / sample_budget;
        long double var = std::max<long double>(0, s2 / sample_budget - m * m);
        out.mean = static_cast<double>(m);
        out.std_error = static_cast<double>(std::sqrt(var / sample_budget));
        out.samples = sample_budget;
    }
    out.deviation = std::fabs(out.mean - 1.0);
    return out;
}

double tau_weight(std::int64_t h, const EnvelopingSieve& s, const TauParams& tp, const ArithTables& tables) {
    const double cap = tp.cap > 0 ? tp.cap : std::pow(std::log(static_cast<double>(s.N)), 2);
    double total = 0;
    for (auto bi : s.b_list)
        for (auto bj : s.b_list) {
            std::int64_t v = static_cast<std::int64_t>(s.W) * h + static_cast<std::int64_t>(bi) - static_cast<std::int64_t>(bj);
            if (v == 0) {
                total += cap;
                continue;
            }
            std::uint64_t m = static_cast<std::uint64_t>(v < 0 ? -v : v);
            tables.check_range(static_cast<std::int64_t>(m));
            double e = 0;
            for (auto p : distinct_prime_factors(tables, m))
                if (p > s.w) e += 1.0 / std::sqrt(static_cast<double>(p));
            total += std::exp(tp.kappa * e);
        }
    return total;
}

CorrelationCheck correlation_check(const EnvelopingSieve& s, const std::vector<std::int64_t>& shifts, const TauParams& tp,
                                   const ArithTables& tables) {
    if (shifts.size() < 2) throw validation_error("correlation_check: need at least two shifts");
    CorrelationCheck r;
    long double acc = 0;
    for (std::int64_t n = 0; n < s.N_prime; ++n) {
        double p = 1;
        for (auto h : shifts) p *= s.at(n + h);
        acc += p;
    }
    r.lhs = static_cast<double>(acc / s.N_prime);
    for (std::size_t i = 0; i < shifts.size(); ++i)
        for (std::size_t j = i + 1; j < shifts.size(); ++j) r.rhs += tau_weight(shifts[i] - shifts[j], s, tp, tables);
    r.holds = r.lhs <= r.rhs;
    return r;
}

std::vector<double> tau_moments(const EnvelopingSieve& s, const std::vector<int>& qs, const TauParams& tp,
                                const ArithTables& tables) {
    std::vector<long double> acc(qs.size(), 0);
    for (std::int64_t n = -s.N; n <= s.N; ++n) {
        double t = tau_weight(n, s, tp, tables);
        for (std::size_t k = 0; k < qs.size(); ++k) acc[k] += std::pow(static_cast<long double>(t), qs[k]);
    }
    std::vector<double> out;
    for (auto a : acc) out.push_back(static_cast<double>(a / (2 * s.N + 1)));
    return out;
}

GYReport gy_estimate_check(const FormSystem& sys, const ConvexBody& body, std::int64_t N,
                           const std::vector<SmoothCutoff>& chis, const std::vector<int>& a_list, double gamma,
                           std::uint64_t p_max, const ArithTables& tables, unsigned threads) {
    sys.validate();
    if (static_cast<int>(chis.size()) != sys.t() || static_cast<int>(a_list.size()) != sys.t())
        throw validation_error("gy_estimate_check: one cutoff and one exponent per form");
    if (!sys.pairwise_independent()) throw validation_error("gy_estimate_check: two forms are rational multiples");
    GYReport r;
    r.N = N;
    r.R = std::pow(static_cast<double>(N), gamma);
    const double L = std::log(r.R);
    std::vector<Weight> weights;
    r.sieve_factor_product = 1;
    for (int i = 0; i < sys.t(); ++i) {
        const SmoothCutoff chi = chis[i];
        const int a = a_list[i];
        // value at 0 of the periodic extension: every d <= R divides 0
        double zero_sum = 0;
        for (std::int64_t d = 1; d <= static_cast<std::int64_t>(r.R); ++d)
            zero_sum += tables.mobius[d] * chi(std::log(static_cast<double>(d)) / L);
        const double at_zero = L * std::pow(zero_sum, a);
        const double Rv = r.R;
        weights.push_back(Weight::custom(
            [chi, a, Rv, at_zero, &tables](std::int64_t v) {
                return v == 0 ? at_zero : truncated_divisor_sum(v, chi, Rv, a, tables);
            },
            "gy(" + chi.family_id + ",a=" + std::to_string(a) + ")"));
        r.sieve_factor_product *= sieve_factor(chi, a);
    }
    r.empirical = weighted_count(sys, body, weights, tables, {threads});
    r.volume = static_cast<double>(lattice_count(body));
    r.singular_product = singular_series(sys, p_max, false, threads).truncated_product;
    r.exceptional_X = exceptional_primes(sys, p_max).X;
    r.predicted = r.sieve_factor_product * r.volume * r.singular_product;
    r.ratio = r.predicted != 0 ? r.empirical / r.predicted : 0.0;
    return r;
}

std::vector<double> sharp_deviation(std::int64_t N, std::uint64_t b, std::uint64_t W, double gamma,
                                    const ArithTables& tables) {
    const double scale = static_cast<double>(phi_of_primorial(W)) / static_cast<double>(W);
    if (std::gcd(b, W) != 1) throw validation_error("sharp_deviation: b not coprime to W");
    const double R = std::pow(static_cast<double>(N), gamma);
    tables.check_range(static_cast<std::int64_t>(W) * N + static_cast<std::int64_t>(b));
    std::vector<double> f(static_cast<std::size_t>(N));
    for (std::int64_t n = 1; n <= N; ++n)
        f[n - 1] = scale * lambda_sharp(static_cast<std::int64_t>(W) * n + static_cast<std::int64_t>(b), R, tables) - 1.0;
    return f;
}

std::vector<double> w_tricked_deviation(std::int64_t N, std::uint64_t b, std::uint64_t W, const ArithTables& tables) {
    auto params = w_trick_explicit(W);
    std::vector<double> f(static_cast<std::size_t>(N));
    for (std::int64_t n = 1; n <= N; ++n) f[n - 1] = lambda_bw(n, b, params, tables, true) - 1.0;
    return f;
}

double default_sharp_gamma(int s) { return 0.1 * std::ldexp(1.0, -s); }

double sharp_gowers_check(std::int64_t N, std::uint64_t b, std::uint64_t W, int s, double gamma,
                          const ArithTables& tables, unsigned threads) {
    if (s != 1 && s != 2) throw validation_error("sharp_gowers_check: s must be 1 or 2");
    const double n2 = 2.0 * static_cast<double>(N);
    if (std::pow(n2, s) * std::log2(n2) > 1e10) throw resource_error("sharp_gowers_check: work guard exceeded");
    auto f = sharp_deviation(N, b, W, gamma, tables);
    std::vector<cplx> fc(f.begin(), f.end());
    return gowers_norm_local(fc, s, s == 1 ? GowersMethod::fourier : GowersMethod::recursive, threads).norm;
}

}  // namespace primeforms
