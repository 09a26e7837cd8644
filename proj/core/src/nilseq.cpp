#include "primeforms/nilseq.hpp"

#include <numbers>

#include "primeforms/errors.hpp"
#include "primeforms/parallel.hpp"

namespace primeforms {

namespace {

std::complex<double> e_of(double t) { return std::polar(1.0, 2 * std::numbers::pi * t); }

double cos2_bump(double u, double centre) {
    double d = std::fabs(centered_frac(u - centre));
    if (d >= 0.25) return 0.0;
    double c = std::cos(2 * std::numbers::pi * d);
    return c * c;
}

Heisenberg<double> reduced_power(const Heisenberg<double>& g, const Heisenberg<double>& x0, std::int64_t n) {
    // exact in rationals so large n keeps full precision
    Heisenberg<mpq_class> gq{mpq_class(g.x), mpq_class(g.y), mpq_class(g.z)};
    Heisenberg<mpq_class> xq{mpq_class(x0.x), mpq_class(x0.y), mpq_class(x0.z)};
    auto p = reduce_to_fundamental_domain(gq.pow(n) * xq).point;
    return {p.x.get_d(), p.y.get_d(), p.z.get_d()};
}

}  // namespace

NilFunction cell_phase_function(int j, int k) {
    if (((k % 4) + 4) % 4 == 2) throw validation_error("cell_phase_function: the y-cell at 1/2 is not continuous on the quotient");
    const double cx = j / 4.0, cy = k / 4.0;
    return [cx, cy](double x, double y, double z) { return cos2_bump(x, cx) * cos2_bump(y, cy) * e_of(z); };
}

double mobius_nil_correlation(std::int64_t N, const Heisenberg<double>& g, const Heisenberg<double>& x0, const NilFunction& F,
                              const ArithTables& tables, unsigned threads) {
    if (N < 1) return 0.0;
    tables.check_range(N);
    const std::int64_t block = 1 << 14;
    const std::size_t chunks = static_cast<std::size_t>((N + block - 1) / block);
    struct Part {
        double re = 0, im = 0;
    };
    auto parts = map_chunks<Part>(chunks, threads, [&](std::size_t c) {
        std::int64_t lo = 1 + static_cast<std::int64_t>(c) * block, hi = std::min(N, lo + block - 1);
        Heisenberg<double> p = reduced_power(g, x0, lo);
        Part s;
        for (std::int64_t n = lo; n <= hi; ++n) {
            int mu = tables.mobius[n];
            if (mu) {
                auto v = F(p.x, p.y, p.z);
                s.re += mu * v.real();
                s.im += mu * v.imag();
            }
            p = reduce_to_fundamental_domain(g * p).point;
        }
        return s;
    });
    std::vector<double> re, im;
    for (auto& p : parts) {
        re.push_back(p.re);
        im.push_back(p.im);
    }
    return std::abs(std::complex<double>(pairwise_total(re), pairwise_total(im))) / static_cast<double>(N);
}

double mobius_phase_correlation(std::int64_t N, double alpha, const ArithTables& tables) {
    if (N < 1) return 0.0;
    tables.check_range(N);
    std::complex<long double> s = 0;
    for (std::int64_t n = 1; n <= N; ++n)
        if (int mu = tables.mobius[n]) {
            auto v = e_of(centered_frac(alpha * static_cast<double>(n % (1ll << 40))));
            s += std::complex<long double>(mu * v.real(), mu * v.imag());
        }
    return static_cast<double>(std::abs(s)) / static_cast<double>(N);
}

PhaseScan mobius_phase_scan(std::int64_t N, int K, const ArithTables& tables) {
    if (K < 1) throw validation_error("mobius_phase_scan: grid size must be positive");
    tables.check_range(N);
    std::vector<long double> bucket(K, 0);
    for (std::int64_t n = 1; n <= N; ++n) bucket[n % K] += tables.mobius[n];
    PhaseScan out;
    for (int j = 0; j < K; ++j) {
        std::complex<long double> s = 0;
        for (int r = 0; r < K; ++r) {
            if (bucket[r] == 0) continue;
            auto v = e_of(static_cast<double>((static_cast<std::int64_t>(j) * r) % K) / K);
            s += bucket[r] * std::complex<long double>(v.real(), v.imag());
        }
        double a = static_cast<double>(std::abs(s)) / static_cast<double>(N);
        if (a > out.max_abs) {
            out.max_abs = a;
            out.argmax_alpha = static_cast<double>(j) / K;
        }
    }
    return out;
}

}  // namespace primeforms
