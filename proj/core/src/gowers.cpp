#include "primeforms/gowers.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <mutex>

#include <fftw3.h>

#include "primeforms/errors.hpp"
#include "primeforms/parallel.hpp"

namespace primeforms {

namespace {

constexpr double kWorkGuard = 1e9;
using lcplx = std::complex<long double>;

std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

GowersResult finish(long double raw, int k, GowersMethod m, double scale) {
    GowersResult r;
    r.raw = static_cast<double>(raw);
    r.method = m;
    if (r.raw < -1e-9 * std::max(scale, 1.0)) r.negative_raw = true;
    r.norm = r.raw > 0 ? std::pow(r.raw, 1.0 / std::ldexp(1.0, k)) : 0.0;
    return r;
}

double sup_power(const std::vector<cplx>& v, int k) {
    double m = 0;
    for (const auto& z : v) m = std::max(m, std::abs(z));
    return std::pow(m, std::ldexp(1.0, k));
}

// Sum_xi |fhat(xi)|^4 with fhat = E_x f(x) e(-x xi / N).
double u2_fourier_raw(const std::vector<cplx>& f) {
    const int n = static_cast<int>(f.size());
    auto* in = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
    auto* out = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        plan = fftw_plan_dft_1d(n, in, out, FFTW_FORWARD, FFTW_ESTIMATE);
    }
    for (int i = 0; i < n; ++i) {
        in[i][0] = f[i].real();
        in[i][1] = f[i].imag();
    }
    fftw_execute(plan);
    const long double n4 = std::pow(static_cast<long double>(n), 4);
    PairwiseSum acc;
    for (int i = 0; i < n; ++i) {
        double a2 = out[i][0] * out[i][0] + out[i][1] * out[i][1];
        acc.add(a2 * a2);
    }
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        fftw_destroy_plan(plan);
    }
    fftw_free(in);
    fftw_free(out);
    return static_cast<double>(acc.value() / n4);
}

double cyclic_naive_raw(const std::vector<cplx>& f, int s) {
    const std::size_t n = f.size();
    const int k = s + 1;
    const std::size_t corners = std::size_t{1} << k;
    std::vector<std::size_t> h(k, 0);
    lcplx total = 0;
    for (std::size_t x = 0; x < n; ++x) {
        std::fill(h.begin(), h.end(), 0);
        while (true) {
            lcplx prod = 1;
            for (std::size_t w = 0; w < corners; ++w) {
                std::size_t pos = x;
                for (int j = 0; j < k; ++j)
                    if (w >> j & 1) pos += h[j];
                cplx v = f[pos % n];
                prod *= lcplx(std::popcount(w) & 1 ? std::conj(v) : v);
            }
            total += prod;
            int j = 0;
            while (j < k && ++h[j] == n) h[j++] = 0;
            if (j == k) break;
        }
    }
    return static_cast<double>(total.real() / std::pow(static_cast<long double>(n), k + 1));
}

double cyclic_recursive_raw(const std::vector<cplx>& f, int s, unsigned threads) {
    if (s == 1) return u2_fourier_raw(f);
    const std::size_t n = f.size();
    auto parts = map_chunks<double>(n, threads, [&](std::size_t h) {
        std::vector<cplx> g(n);
        for (std::size_t x = 0; x < n; ++x) g[x] = f[x] * std::conj(f[(x + h) % n]);
        return cyclic_recursive_raw(g, s - 1, 1);
    });
    return pairwise_total(parts) / static_cast<double>(n);
}

double cyclic_raw(const std::vector<cplx>& f, int s, GowersMethod method, unsigned threads) {
    switch (method) {
        case GowersMethod::naive:
            if (std::pow(static_cast<double>(f.size()), s + 2) > kWorkGuard)
                throw resource_error("naive Gowers norm: N^(s+2) above 1e9");
            return cyclic_naive_raw(f, s);
        case GowersMethod::fourier:
            if (s != 1) throw validation_error("fourier method only for U^2 (s = 1)");
            return u2_fourier_raw(f);
        case GowersMethod::recursive: return cyclic_recursive_raw(f, s, threads);
    }
    return 0;
}

// strides of the sub-box over the axes in mask (last axis fastest); zero for axes outside
std::vector<std::size_t> sub_strides(const std::vector<std::size_t>& axes, unsigned mask) {
    std::vector<std::size_t> st(axes.size(), 0);
    std::size_t s = 1;
    for (int a = static_cast<int>(axes.size()) - 1; a >= 0; --a)
        if (mask >> a & 1) {
            st[a] = s;
            s *= axes[a];
        }
    return st;
}

std::size_t sub_size(const std::vector<std::size_t>& axes, unsigned mask) {
    std::size_t s = 1;
    for (std::size_t a = 0; a < axes.size(); ++a)
        if (mask >> a & 1) s *= axes[a];
    return s;
}

// Visits every pair (x0, x1) over the axes of mask.
template <class Fn>
void for_each_pair(const std::vector<std::size_t>& axes, unsigned mask, Fn fn) {
    const int k = static_cast<int>(axes.size());
    std::vector<std::size_t> c0(k, 0), c1(k, 0);
    std::vector<int> active;
    for (int a = 0; a < k; ++a)
        if (mask >> a & 1) active.push_back(a);
    while (true) {
        fn(c0, c1);
        std::size_t j = 0;
        for (; j < 2 * active.size(); ++j) {
            auto& c = j < active.size() ? c0[active[j]] : c1[active[j - active.size()]];
            std::size_t lim = axes[j < active.size() ? active[j] : active[j - active.size()]];
            if (++c < lim) break;
            c = 0;
        }
        if (j == 2 * active.size()) break;
    }
}

double pair_work(const std::vector<std::size_t>& axes, unsigned mask) {
    double s = static_cast<double>(sub_size(axes, mask));
    return s * s;
}

// index of the corner selecting x^{(omega_a)}_a for a in sub, with omega a mask over axes
inline std::size_t corner_index(const std::vector<std::size_t>& st, unsigned sub, unsigned omega,
                                const std::vector<std::size_t>& c0, const std::vector<std::size_t>& c1) {
    std::size_t idx = 0;
    for (std::size_t a = 0; a < st.size(); ++a)
        if (sub >> a & 1) idx += st[a] * ((omega >> a & 1) ? c1[a] : c0[a]);
    return idx;
}

// Iterates submasks of mask (including 0 and mask).
template <class Fn>
void for_each_submask(unsigned mask, Fn fn) {
    unsigned sub = mask;
    while (true) {
        fn(sub);
        if (sub == 0) break;
        sub = (sub - 1) & mask;
    }
}

long double box_naive_raw(const std::vector<std::size_t>& axes, const std::vector<cplx>& v) {
    const unsigned all = (1u << axes.size()) - 1;
    auto st = sub_strides(axes, all);
    lcplx total = 0;
    for_each_pair(axes, all, [&](const auto& c0, const auto& c1) {
        lcplx prod = 1;
        for_each_submask(all, [&](unsigned w) {
            cplx z = v[corner_index(st, all, w, c0, c1)];
            prod *= lcplx(std::popcount(w) & 1 ? std::conj(z) : z);
        });
        total += prod;
    });
    return total.real() / static_cast<long double>(pair_work(axes, all));
}

long double box_recursive_raw(const std::vector<std::size_t>& axes, const std::vector<cplx>& v) {
    if (axes.size() == 1) {
        lcplx m = 0;
        for (const auto& z : v) m += lcplx(z);
        m /= static_cast<long double>(v.size());
        return std::norm(m);
    }
    const std::size_t n0 = axes[0], rest = v.size() / n0;
    std::vector<std::size_t> sub(axes.begin() + 1, axes.end());
    std::vector<cplx> g(rest);
    PairwiseSum acc;
    for (std::size_t a = 0; a < n0; ++a)
        for (std::size_t b = 0; b < n0; ++b) {
            for (std::size_t i = 0; i < rest; ++i) g[i] = v[a * rest + i] * std::conj(v[b * rest + i]);
            acc.add(static_cast<double>(box_recursive_raw(sub, g)));
        }
    return acc.value() / static_cast<long double>(n0 * n0);
}

double box_norm_of(const std::vector<std::size_t>& axes, unsigned mask, const std::vector<cplx>& v) {
    std::vector<std::size_t> sub;
    for (std::size_t a = 0; a < axes.size(); ++a)
        if (mask >> a & 1) sub.push_back(axes[a]);
    BoxInput b{sub, v};
    return box_norm(b, GowersMethod::recursive).norm;
}

long double weighted_raw(const BoxFamily& nu, unsigned mask, const std::vector<cplx>* g) {
    const auto& axes = nu.axes;
    std::vector<std::vector<std::size_t>> st(nu.f.size());
    for (unsigned c = 0; c < nu.f.size(); ++c) st[c] = sub_strides(axes, c);
    if (pair_work(axes, mask) * std::ldexp(1.0, std::popcount(mask)) > kWorkGuard)
        throw resource_error("weighted box norm: work guard exceeded");
    lcplx total = 0;
    for_each_pair(axes, mask, [&](const auto& c0, const auto& c1) {
        lcplx prod = 1;
        for_each_submask(mask, [&](unsigned c) {
            if (c == mask && g) {
                for_each_submask(mask, [&](unsigned w) {
                    cplx z = (*g)[corner_index(st[mask], mask, w, c0, c1)];
                    prod *= lcplx(std::popcount(w) & 1 ? std::conj(z) : z);
                });
                return;
            }
            const auto& vals = nu.f[c];
            for_each_submask(c, [&](unsigned w) { prod *= static_cast<long double>(vals[corner_index(st[c], c, w, c0, c1)].real()); });
        });
        total += prod;
    });
    return total.real() / static_cast<long double>(pair_work(axes, mask));
}

}  // namespace

const char* method_name(GowersMethod m) {
    switch (m) {
        case GowersMethod::naive: return "naive";
        case GowersMethod::recursive: return "recursive";
        case GowersMethod::fourier: return "fourier";
    }
    return "?";
}

std::size_t BoxInput::size() const {
    std::size_t s = 1;
    for (auto a : axes) s *= a;
    return s;
}

void BoxInput::check() const {
    if (axes.empty()) throw validation_error("box norm needs at least one axis");
    for (auto a : axes)
        if (a == 0) throw validation_error("box axis of size zero");
    if (values.size() != size()) throw validation_error("box values do not match the axis sizes");
}

void BoxFamily::check() const {
    if (axes.empty() || axes.size() > 16) throw validation_error("box family needs 1..16 axes");
    if (f.size() != (std::size_t{1} << axes.size())) throw validation_error("box family needs one function per subset");
    for (unsigned m = 0; m < f.size(); ++m)
        if (f[m].size() != sub_size(axes, m)) throw validation_error("box family function has the wrong size");
}

GowersResult box_norm(const BoxInput& f, GowersMethod method) {
    f.check();
    const int k = static_cast<int>(f.axes.size());
    const double scale = sup_power(f.values, k);
    const double work = static_cast<double>(f.size()) * static_cast<double>(f.size());
    if (method == GowersMethod::naive) {
        if (work > kWorkGuard) throw resource_error("naive box norm: work guard exceeded");
        return finish(box_naive_raw(f.axes, f.values), k, method, scale);
    }
    if (method == GowersMethod::fourier) throw validation_error("fourier method is for cyclic U^2 only");
    if (work > kWorkGuard) throw resource_error("recursive box norm: work guard exceeded");
    return finish(box_recursive_raw(f.axes, f.values), k, method, scale);
}

GowersResult gowers_norm_cyclic(const std::vector<cplx>& f, int s, GowersMethod method, unsigned threads) {
    if (s < 1) throw validation_error("gowers_norm_cyclic: s must be at least 1");
    if (f.empty()) throw validation_error("gowers_norm_cyclic: empty array");
    return finish(cyclic_raw(f, s, method, threads), s + 1, method, sup_power(f, s + 1));
}

GowersResult gowers_norm_local(const std::vector<cplx>& f, int s, GowersMethod method, unsigned threads) {
    if (s < 1) throw validation_error("gowers_norm_local: s must be at least 1");
    if (f.empty()) throw validation_error("gowers_norm_local: empty interval");
    const std::int64_t n = static_cast<std::int64_t>(f.size());
    const int k = s + 1;
    const double scale = sup_power(f, k);
    if (method == GowersMethod::naive) {
        if (static_cast<double>(n) * std::pow(2.0 * n - 1, k) > kWorkGuard)
            throw resource_error("naive local Gowers norm: work guard exceeded");
        const std::size_t corners = std::size_t{1} << k;
        std::vector<std::int64_t> h(k, -(n - 1));
        lcplx total = 0;
        long double count = 0;
        for (std::int64_t x = 0; x < n; ++x) {
            std::fill(h.begin(), h.end(), -(n - 1));
            while (true) {
                lcplx prod = 1;
                bool inside = true;
                for (std::size_t w = 0; w < corners && inside; ++w) {
                    std::int64_t pos = x;
                    for (int j = 0; j < k; ++j)
                        if (w >> j & 1) pos += h[j];
                    if (pos < 0 || pos >= n) {
                        inside = false;
                        break;
                    }
                    cplx v = f[pos];
                    prod *= lcplx(std::popcount(w) & 1 ? std::conj(v) : v);
                }
                if (inside) {
                    total += prod;
                    count += 1;
                }
                int j = 0;
                while (j < k && ++h[j] == n) h[j++] = -(n - 1);
                if (j == k) break;
            }
        }
        return finish(total.real() / count, k, method, scale);
    }
    // an interval of length at most N'/2 is Freiman-isomorphic to its image in Z_{N'}
    std::vector<cplx> padded(2 * f.size(), 0.0), ones(2 * f.size(), 0.0);
    std::copy(f.begin(), f.end(), padded.begin());
    std::fill(ones.begin(), ones.begin() + n, 1.0);
    double num = cyclic_raw(padded, s, method, threads);
    double den = cyclic_raw(ones, s, method, threads);
    return finish(num / den, k, method, scale);
}

InequalityCheck gcs_check_cyclic(const std::vector<std::vector<cplx>>& family, int s) {
    if (s < 1) throw validation_error("gcs_check: s must be at least 1");
    const int k = s + 1;
    if (family.size() != (std::size_t{1} << k)) throw validation_error("gcs_check: need 2^(s+1) functions");
    const std::size_t n = family[0].size();
    for (const auto& f : family)
        if (f.size() != n || n == 0) throw validation_error("gcs_check: functions must share one nonempty domain");
    if (std::pow(static_cast<double>(n), k + 1) > kWorkGuard) throw resource_error("gcs_check: work guard exceeded");
    std::vector<std::size_t> h(k, 0);
    lcplx total = 0;
    for (std::size_t x = 0; x < n; ++x) {
        std::fill(h.begin(), h.end(), 0);
        while (true) {
            lcplx prod = 1;
            for (std::size_t w = 0; w < family.size(); ++w) {
                std::size_t pos = x;
                for (int j = 0; j < k; ++j)
                    if (w >> j & 1) pos += h[j];
                cplx v = family[w][pos % n];
                prod *= lcplx(std::popcount(w) & 1 ? std::conj(v) : v);
            }
            total += prod;
            int j = 0;
            while (j < k && ++h[j] == n) h[j++] = 0;
            if (j == k) break;
        }
    }
    InequalityCheck r;
    r.lhs = static_cast<double>(std::abs(total / std::pow(static_cast<long double>(n), k + 1)));
    r.rhs = 1;
    for (const auto& f : family) r.rhs *= gowers_norm_cyclic(f, s, GowersMethod::recursive).norm;
    r.holds = r.lhs <= r.rhs + 1e-9;
    return r;
}

InequalityCheck gcs_check_box(const std::vector<BoxInput>& family) {
    if (family.empty()) throw validation_error("gcs_check: empty family");
    const auto& axes = family[0].axes;
    for (const auto& f : family) {
        f.check();
        if (f.axes != axes) throw validation_error("gcs_check: functions must share one box");
    }
    if (family.size() != (std::size_t{1} << axes.size())) throw validation_error("gcs_check: need 2^k functions");
    const unsigned all = (1u << axes.size()) - 1;
    if (pair_work(axes, all) > kWorkGuard) throw resource_error("gcs_check: work guard exceeded");
    auto st = sub_strides(axes, all);
    lcplx total = 0;
    for_each_pair(axes, all, [&](const auto& c0, const auto& c1) {
        lcplx prod = 1;
        for_each_submask(all, [&](unsigned w) {
            cplx z = family[w].values[corner_index(st, all, w, c0, c1)];
            prod *= lcplx(std::popcount(w) & 1 ? std::conj(z) : z);
        });
        total += prod;
    });
    InequalityCheck r;
    r.lhs = static_cast<double>(std::abs(total / static_cast<long double>(pair_work(axes, all))));
    r.rhs = 1;
    for (const auto& f : family) r.rhs *= box_norm(f, GowersMethod::recursive).norm;
    r.holds = r.lhs <= r.rhs + 1e-9;
    return r;
}

InequalityCheck second_gcs_check(const BoxFamily& fam) {
    fam.check();
    const auto& axes = fam.axes;
    const int k = static_cast<int>(axes.size());
    const unsigned all = (1u << k) - 1;
    if (static_cast<double>(sub_size(axes, all)) * fam.f.size() > kWorkGuard)
        throw resource_error("second_gcs_check: work guard exceeded");
    std::vector<std::vector<std::size_t>> st(fam.f.size());
    for (unsigned c = 0; c < fam.f.size(); ++c) st[c] = sub_strides(axes, c);
    // mixed-radix walk over X_A
    std::vector<std::size_t> x(k, 0);
    lcplx total = 0;
    while (true) {
        lcplx prod = 1;
        for (unsigned b = 0; b <= all; ++b) prod *= lcplx(fam.f[b][corner_index(st[b], b, 0, x, x)]);
        total += prod;
        int j = k - 1;
        while (j >= 0 && ++x[j] == axes[j]) x[j--] = 0;
        if (j < 0) break;
    }
    InequalityCheck r;
    r.lhs = static_cast<double>(std::abs(total / static_cast<long double>(sub_size(axes, all))));
    r.rhs = 1;
    for (unsigned b = 0; b <= all; ++b) {
        int gap = k - std::popcount(b);
        if (b == 0) {
            r.rhs *= std::abs(fam.f[0][0]);
            continue;
        }
        if (gap == 0) {
            r.rhs *= box_norm_of(axes, b, fam.f[b]);
            continue;
        }
        std::vector<cplx> powered(fam.f[b].size());
        const double e = std::ldexp(1.0, gap);
        for (std::size_t i = 0; i < powered.size(); ++i) powered[i] = std::pow(std::abs(fam.f[b][i]), e);
        r.rhs *= std::pow(box_norm_of(axes, b, powered), 1.0 / e);
    }
    r.holds = r.lhs <= r.rhs + 1e-9;
    return r;
}

GowersResult weighted_box_norm(const BoxInput& g, const BoxFamily& nu) {
    g.check();
    nu.check();
    if (g.axes != nu.axes) throw validation_error("weighted_box_norm: g and nu must share one box");
    const unsigned all = (1u << g.axes.size()) - 1;
    double scale = sup_power(g.values, static_cast<int>(g.axes.size()));
    for (unsigned c = 0; c < all; ++c) scale *= std::pow(sup_power(nu.f[c], 0), std::ldexp(1.0, std::popcount(c)));
    return finish(weighted_raw(nu, all, &g.values), static_cast<int>(g.axes.size()), GowersMethod::naive, scale);
}

GowersResult weighted_self_norm(const BoxFamily& nu, unsigned mask) {
    nu.check();
    if (mask == 0) return {nu.f[0][0].real(), nu.f[0][0].real(), GowersMethod::naive, nu.f[0][0].real() < 0};
    return finish(weighted_raw(nu, mask, nullptr), std::popcount(mask), GowersMethod::naive, 1.0);
}

InequalityCheck weighted_von_neumann_check(const BoxFamily& f, const BoxFamily& nu) {
    f.check();
    nu.check();
    if (f.axes != nu.axes) throw validation_error("weighted_von_neumann_check: families must share one box");
    for (std::size_t c = 0; c < nu.f.size(); ++c)
        for (std::size_t i = 0; i < nu.f[c].size(); ++i) {
            if (nu.f[c][i].real() < 0 || nu.f[c][i].imag() != 0)
                throw validation_error("weighted_von_neumann_check: weights must be nonnegative reals");
            if (std::abs(f.f[c][i]) > nu.f[c][i].real() * (1 + 1e-12))
                throw validation_error("weighted_von_neumann_check: |f_B| must not exceed nu_B");
        }
    const int k = static_cast<int>(f.axes.size());
    const unsigned all = (1u << k) - 1;
    InequalityCheck r = second_gcs_check(f);  // reuse the left-hand side
    BoxInput top;
    for (int a = 0; a < k; ++a) top.axes.push_back(f.axes[a]);
    top.values = f.f[all];
    r.rhs = weighted_box_norm(top, nu).norm;
    for (unsigned b = 0; b < all; ++b)
        r.rhs *= std::pow(weighted_self_norm(nu, b).norm, 1.0 / std::ldexp(1.0, k - std::popcount(b)));
    r.holds = r.lhs <= r.rhs + 1e-9;
    return r;
}

double dual_norm_lower_bound(const std::vector<cplx>& F, const std::vector<std::vector<cplx>>& witnesses, int s) {
    if (witnesses.empty()) throw validation_error("dual_norm_lower_bound: no witnesses");
    double best = 0;
    for (const auto& w : witnesses) {
        if (w.size() != F.size()) throw validation_error("dual_norm_lower_bound: witness length differs from F");
        double nrm = gowers_norm_local(w, s, s == 1 ? GowersMethod::fourier : GowersMethod::recursive).norm;
        if (nrm <= 0) continue;
        lcplx acc = 0;
        for (std::size_t i = 0; i < F.size(); ++i) acc += lcplx(F[i] * std::conj(w[i]));
        best = std::max(best, static_cast<double>(std::abs(acc) / F.size()) / nrm);
    }
    return best;
}

}  // namespace primeforms
