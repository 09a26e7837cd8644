#include "primeforms/counting.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "primeforms/errors.hpp"
#include "primeforms/local_factors.hpp"
#include "primeforms/parallel.hpp"

namespace primeforms {

Weight Weight::w_trick(const WTrickParams& p, std::uint64_t b, bool primed) {
    if (std::gcd(b, p.W) != 1) throw validation_error("w-trick weight: residue not coprime to W");
    Weight w;
    w.kind = WeightKind::w_trick;
    w.W = p.W;
    w.b = b;
    w.phi = p.phi;
    w.primed = primed;
    return w;
}

Weight Weight::custom(std::function<double(std::int64_t)> f, std::string label) {
    Weight w;
    w.kind = WeightKind::custom;
    w.fn = std::move(f);
    w.label = std::move(label);
    return w;
}

std::string Weight::name() const {
    switch (kind) {
        case WeightKind::von_mangoldt: return "lambda";
        case WeightKind::von_mangoldt_prime: return "lambda_prime";
        case WeightKind::mobius: return "mobius";
        case WeightKind::liouville: return "liouville";
        case WeightKind::w_trick:
            return std::string(primed ? "lambda_prime_bw" : "lambda_bw") + "(b=" + std::to_string(b) +
                   ",W=" + std::to_string(W) + ")";
        case WeightKind::prime_indicator: return "prime";
        case WeightKind::one: return "one";
        case WeightKind::custom: return label.empty() ? "custom" : label;
    }
    return "?";
}

Weight weight_from_name(const std::string& name) {
    if (name == "lambda") return Weight::von_mangoldt();
    if (name == "lambda_prime") return Weight::von_mangoldt_prime();
    if (name == "mobius") return Weight::mobius();
    if (name == "liouville") return Weight::liouville();
    if (name == "prime") return Weight::prime_indicator();
    if (name == "one") return Weight::one();
    throw validation_error("unknown weight '" + name + "'");
}

namespace {

inline double eval_weight(const Weight& w, std::int64_t v, const ArithTables& t) {
    switch (w.kind) {
        case WeightKind::von_mangoldt: return v > 0 ? t.von_mangoldt[v] : 0.0;
        case WeightKind::von_mangoldt_prime: return v > 0 ? t.von_mangoldt_prime[v] : 0.0;
        case WeightKind::prime_indicator: return (v > 1 && t.spf[v] == static_cast<std::uint64_t>(v)) ? 1.0 : 0.0;
        case WeightKind::mobius: return t.mobius[v < 0 ? -v : v];
        case WeightKind::liouville: return t.liouville[v < 0 ? -v : v];
        case WeightKind::w_trick: {
            std::int64_t m = static_cast<std::int64_t>(w.W) * v + static_cast<std::int64_t>(w.b);
            if (m <= 0) return 0.0;
            double lg = w.primed ? t.von_mangoldt_prime[m] : t.von_mangoldt[m];
            return static_cast<double>(w.phi) / static_cast<double>(w.W) * lg;
        }
        case WeightKind::one: return 1.0;
        case WeightKind::custom: return w.fn(v);
    }
    return 0.0;
}

const std::vector<std::uint32_t>* sparse_support(const Weight& w, const ArithTables& t) {
    switch (w.kind) {
        case WeightKind::von_mangoldt: return &t.prime_powers;
        case WeightKind::von_mangoldt_prime:
        case WeightKind::prime_indicator: return &t.primes;
        default: return nullptr;
    }
}

void check_table_range(const FormSystem& sys, const ConvexBody& body, const std::vector<Weight>& weights,
                       const ArithTables& t) {
    for (int i = 0; i < sys.t(); ++i) {
        const Weight& w = weights[i];
        if (w.kind == WeightKind::one || w.kind == WeightKind::custom) continue;
        auto r = form_range(body, sys.forms[i]);
        if (!r) return;  // empty body
        mpz_class lo, hi;
        mpz_fdiv_q(lo.get_mpz_t(), r->first.get_num_mpz_t(), r->first.get_den_mpz_t());
        mpz_fdiv_q(hi.get_mpz_t(), r->second.get_num_mpz_t(), r->second.get_den_mpz_t());
        mpz_class need = hi;
        if (w.kind == WeightKind::mobius || w.kind == WeightKind::liouville) {
            mpz_class alo = abs(lo);
            if (alo > need) need = alo;
        } else if (w.kind == WeightKind::w_trick) {
            need = hi * static_cast<unsigned long>(w.W) + static_cast<unsigned long>(w.b);
        }
        if (need > static_cast<unsigned long>(t.n_max))
            throw resource_error("table overflow: form " + std::to_string(i) + " reaches " + need.get_str() +
                                 " > n_max " + std::to_string(t.n_max));
    }
}

struct Layout {
    int d = 0, t = 0;
    std::vector<int> depth;                  // last coordinate each form depends on
    std::vector<std::vector<int>> at_level;  // forms whose depth is k
};

Layout make_layout(const FormSystem& sys) {
    Layout L;
    L.d = sys.d;
    L.t = sys.t();
    L.at_level.resize(sys.d);
    for (int i = 0; i < sys.t(); ++i) {
        int dep = -1;
        for (int j = 0; j < sys.d; ++j)
            if (sys.forms[i].coeffs[j] != 0) dep = j;
        if (dep < 0) throw validation_error("constant form in system");
        L.depth.push_back(dep);
        L.at_level[dep].push_back(i);
    }
    return L;
}

// Row functor signature: double(lo, hi, partial values, prefix weight).
// Level functor: double(form index, value) multiplies into the prefix at outer levels.
template <class LevelWeight, class Row>
double run_engine(const FormSystem& sys, const ConvexBody& body, unsigned threads, LevelWeight level_weight,
                  Row row) {
    if (sys.d != body.dim) throw validation_error("system and body dimensions differ");
    LatticeWalker walker(body);
    if (walker.empty()) return 0.0;
    const Layout L = make_layout(sys);
    const int d = L.d;
    std::int64_t lo0, hi0;
    if (!walker.bounds(0, nullptr, lo0, hi0)) return 0.0;
    std::vector<std::int64_t> base(L.t);
    for (int i = 0; i < L.t; ++i) base[i] = sys.forms[i].constant;

    if (d == 1) {
        const std::int64_t block = 1 << 16;
        std::size_t chunks = static_cast<std::size_t>((hi0 - lo0) / block + 1);
        auto parts = map_chunks<double>(chunks, threads, [&](std::size_t c) {
            std::int64_t a = lo0 + static_cast<std::int64_t>(c) * block;
            std::int64_t b = std::min(hi0, a + block - 1);
            return row(a, b, base, 1.0);
        });
        return pairwise_total(parts);
    }

    const std::int64_t block = 64;
    std::size_t chunks = static_cast<std::size_t>((hi0 - lo0) / block + 1);
    auto parts = map_chunks<double>(chunks, threads, [&](std::size_t c) {
        PairwiseSum acc;
        std::vector<std::int64_t> x(d, 0);
        std::vector<std::vector<std::int64_t>> partial(d, base);
        // recursive walk over levels 0..d-2, rows at level d-1
        std::function<void(int, double)> walk = [&](int k, double prefix) {
            std::int64_t lo, hi;
            if (k == 0) {
                lo = lo0 + static_cast<std::int64_t>(c) * block;
                hi = std::min(hi0, lo + block - 1);
            } else if (!walker.bounds(k, x.data(), lo, hi)) {
                return;
            }
            if (k == d - 1) {
                acc.add(row(lo, hi, partial[k], prefix));
                return;
            }
            const auto& src = partial[k];
            auto& dst = partial[k + 1];
            for (std::int64_t v = lo; v <= hi; ++v) {
                x[k] = v;
                for (int i = 0; i < L.t; ++i) dst[i] = src[i] + sys.forms[i].coeffs[k] * v;
                double w = prefix;
                for (int i : L.at_level[k]) {
                    w *= level_weight(i, dst[i]);
                    if (w == 0.0) break;
                }
                if (w == 0.0) continue;
                walk(k + 1, w);
            }
        };
        walk(0, 1.0);
        return acc.value();
    });
    return pairwise_total(parts);
}

}  // namespace

double weighted_count(const FormSystem& sys, const ConvexBody& body, const std::vector<Weight>& weights,
                      const ArithTables& tables, const CountOptions& opt) {
    sys.validate();
    if (static_cast<int>(weights.size()) != sys.t()) throw validation_error("one weight per form required");
    check_table_range(sys, body, weights, tables);
    const Layout L = make_layout(sys);
    const int last = sys.d - 1;
    const auto& inner = L.at_level[last];

    int sparse = -1;
    for (int i : inner) {
        if (std::llabs(sys.forms[i].coeffs[last]) != 1) continue;
        const auto* sup = sparse_support(weights[i], tables);
        if (!sup) continue;
        if (sparse < 0 || (sup == &tables.primes && sparse_support(weights[sparse], tables) != &tables.primes))
            sparse = i;
    }
    bool int8_rows = !inner.empty() && std::all_of(inner.begin(), inner.end(), [&](int i) {
        return weights[i].kind == WeightKind::mobius || weights[i].kind == WeightKind::liouville;
    });

    auto level_weight = [&](int i, std::int64_t v) { return eval_weight(weights[i], v, tables); };
    auto row = [&](std::int64_t lo, std::int64_t hi, const std::vector<std::int64_t>& r, double prefix) -> double {
        if (lo > hi) return 0.0;
        if (inner.empty()) return prefix * static_cast<double>(hi - lo + 1);
        if (sparse >= 0) {
            const auto& sup = *sparse_support(weights[sparse], tables);
            const std::int64_t a = sys.forms[sparse].coeffs[last], rs = r[sparse];
            std::int64_t vlo = a > 0 ? rs + lo : rs - hi, vhi = a > 0 ? rs + hi : rs - lo;
            if (vhi < 2) return 0.0;
            auto it = std::lower_bound(sup.begin(), sup.end(), static_cast<std::uint32_t>(std::max<std::int64_t>(vlo, 2)));
            double s = 0;
            for (; it != sup.end() && *it <= vhi; ++it) {
                std::int64_t x = a * (static_cast<std::int64_t>(*it) - rs);
                double w = 1.0;
                for (int i : inner) {
                    w *= eval_weight(weights[i], r[i] + sys.forms[i].coeffs[last] * x, tables);
                    if (w == 0.0) break;
                }
                s += w;
            }
            return prefix * s;
        }
        if (int8_rows) {
            bool positive = true;
            for (int i : inner) {
                std::int64_t a = sys.forms[i].coeffs[last];
                if (std::min(r[i] + a * lo, r[i] + a * hi) < 1) positive = false;
            }
            if (positive) {
                const int m = static_cast<int>(inner.size());
                std::vector<const std::int8_t*> tab(m);
                std::vector<std::int64_t> a(m), off(m);
                for (int k = 0; k < m; ++k) {
                    int i = inner[k];
                    tab[k] = weights[i].kind == WeightKind::mobius ? tables.mobius.data() : tables.liouville.data();
                    a[k] = sys.forms[i].coeffs[last];
                    off[k] = r[i];
                }
                std::int64_t s = 0;
                if (m == 3) {
                    for (std::int64_t x = lo; x <= hi; ++x)
                        s += tab[0][off[0] + a[0] * x] * tab[1][off[1] + a[1] * x] * tab[2][off[2] + a[2] * x];
                } else {
                    for (std::int64_t x = lo; x <= hi; ++x) {
                        std::int64_t p = 1;
                        for (int k = 0; k < m && p; ++k) p *= tab[k][off[k] + a[k] * x];
                        s += p;
                    }
                }
                return prefix * static_cast<double>(s);
            }
        }
        double s = 0;
        for (std::int64_t x = lo; x <= hi; ++x) {
            double w = 1.0;
            for (int i : inner) {
                w *= eval_weight(weights[i], r[i] + sys.forms[i].coeffs[last] * x, tables);
                if (w == 0.0) break;
            }
            s += w;
        }
        return prefix * s;
    };
    return run_engine(sys, body, opt.threads, level_weight, row);
}

std::uint64_t prime_point_count(const FormSystem& sys, const ConvexBody& body, const ArithTables& tables,
                                const CountOptions& opt) {
    std::vector<Weight> w(sys.t(), Weight::prime_indicator());
    double c = weighted_count(sys, body, w, tables, opt);
    return static_cast<std::uint64_t>(std::llround(c));
}

double log_density_sum(const FormSystem& sys, const ConvexBody& body, const CountOptions& opt) {
    sys.validate();
    const Layout L = make_layout(sys);
    const int last = sys.d - 1;
    const auto& inner = L.at_level[last];
    constexpr std::int64_t edge = 32;

    auto level_weight = [](int, std::int64_t v) { return v > 2 ? 1.0 / std::log(static_cast<double>(v)) : 0.0; };
    auto row = [&](std::int64_t lo, std::int64_t hi, const std::vector<std::int64_t>& r, double prefix) -> double {
        if (inner.empty()) return lo <= hi ? prefix * static_cast<double>(hi - lo + 1) : 0.0;
        const int m = static_cast<int>(inner.size());
        std::vector<double> a(m), off(m);
        for (int k = 0; k < m; ++k) {
            int i = inner[k];
            std::int64_t ai = sys.forms[i].coeffs[last];
            a[k] = static_cast<double>(ai);
            off[k] = static_cast<double>(r[i]);
            // restrict to a_i x + r_i >= 3
            if (ai > 0) {
                std::int64_t need = 3 - r[i];
                std::int64_t xl = need >= 0 ? (need + ai - 1) / ai : -((-need) / ai);
                lo = std::max(lo, xl);
            } else {
                std::int64_t num = r[i] - 3, den = -ai;
                std::int64_t xh = num >= 0 ? num / den : -((-num + den - 1) / den);
                hi = std::min(hi, xh);
            }
        }
        if (lo > hi) return 0.0;
        auto f = [&](double x) {
            double v = 1.0;
            for (int k = 0; k < m; ++k) v /= std::log(a[k] * x + off[k]);
            return v;
        };
        auto fprime = [&](double x) {
            double g = 0;
            for (int k = 0; k < m; ++k) {
                double psi = a[k] * x + off[k];
                g -= a[k] / (psi * std::log(psi));
            }
            return f(x) * g;
        };
        double s = 0;
        if (hi - lo + 1 <= 2 * edge + 8) {
            for (std::int64_t x = lo; x <= hi; ++x) s += f(static_cast<double>(x));
            return prefix * s;
        }
        for (std::int64_t x = lo; x < lo + edge; ++x) s += f(static_cast<double>(x));
        for (std::int64_t x = hi - edge + 1; x <= hi; ++x) s += f(static_cast<double>(x));
        double A = static_cast<double>(lo + edge), B = static_cast<double>(hi - edge);
        double integral = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, A, B, 12, 1e-12);
        s += integral + 0.5 * (f(A) + f(B)) + (fprime(B) - fprime(A)) / 12.0;
        return prefix * s;
    };
    return run_engine(sys, body, opt.threads, level_weight, row);
}

Prediction predict(const FormSystem& sys, const ConvexBody& body, std::int64_t N, std::uint64_t p_max,
                   PredictMode mode, const CountOptions& opt) {
    Prediction out;
    auto ss = singular_series(sys, p_max, false, opt.threads);
    out.singular_product = ss.truncated_product;
    out.vanishing = ss.vanishing;
    out.beta_infinity = archimedean_factor(body, sys, N).count.get_d();
    if (out.vanishing) return out;
    if (mode == PredictMode::log_power)
        out.value = out.beta_infinity / std::pow(std::log(static_cast<double>(N)), sys.t()) * out.singular_product;
    else
        out.value = out.singular_product * log_density_sum(sys, body, opt);
    return out;
}

CorrelationReport compare(const FormSystem& sys, const ConvexBody& body, std::int64_t N, std::uint64_t p_max,
                          const ArithTables& tables, const CountOptions& opt) {
    auto t0 = std::chrono::steady_clock::now();
    CorrelationReport r;
    r.N = N;
    r.p_max = p_max;
    r.empirical = static_cast<double>(prime_point_count(sys, body, tables, opt));
    r.lambda_weighted = weighted_count(sys, body, std::vector<Weight>(sys.t(), Weight::von_mangoldt()), tables, opt);
    auto ss = singular_series(sys, p_max, false, opt.threads);
    r.singular_product = ss.truncated_product;
    r.vanishing = ss.vanishing;
    r.beta_infinity = archimedean_factor(body, sys, N).count.get_d();
    if (!r.vanishing) {
        r.predicted_log_power = r.beta_infinity / std::pow(std::log(static_cast<double>(N)), sys.t()) * r.singular_product;
        r.predicted_integral = r.singular_product * log_density_sum(sys, body, opt);
        r.predicted_weighted = r.beta_infinity * r.singular_product;
    }
    auto ratio = [](double a, double b) { return b != 0 ? a / b : 0.0; };
    r.ratio_log_power = ratio(r.empirical, r.predicted_log_power);
    r.ratio_integral = ratio(r.empirical, r.predicted_integral);
    r.ratio_weighted = ratio(r.lambda_weighted, r.predicted_weighted);
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

std::string correlation_csv(const std::vector<CorrelationReport>& rows) {
    std::ostringstream os;
    os.precision(17);
    os << "N,empirical,pred_log,pred_int,ratio_log,ratio_int,seconds\r\n";
    for (const auto& r : rows)
        os << r.N << ',' << r.empirical << ',' << r.predicted_log_power << ',' << r.predicted_integral << ','
           << r.ratio_log_power << ',' << r.ratio_integral << ',' << r.seconds << "\r\n";
    return os.str();
}

double mobius_correlation(const FormSystem& sys, const ConvexBody& body, std::int64_t N, bool liouville,
                          const ArithTables& tables, const CountOptions& opt) {
    std::vector<Weight> w(sys.t(), liouville ? Weight::liouville() : Weight::mobius());
    double s = weighted_count(sys, body, w, tables, opt);
    return s / std::pow(static_cast<double>(N), sys.d);
}

double chowla_check(const std::vector<AffineForm>& factors, std::int64_t N, const ArithTables& tables,
                    const CountOptions& opt) {
    if (factors.empty()) throw validation_error("chowla_check: no factors");
    std::map<std::vector<std::int64_t>, int> mult;
    double constant = 1.0;
    for (const auto& f : factors) {
        if (f.coeffs.size() != 2 || f.constant != 0)
            throw validation_error("chowla_check: factors must be homogeneous linear forms in two variables");
        if (f.is_constant()) throw validation_error("chowla_check: zero factor");
        std::int64_t g = std::gcd(std::llabs(f.coeffs[0]), std::llabs(f.coeffs[1]));
        std::vector<std::int64_t> prim = {f.coeffs[0] / g, f.coeffs[1] / g};
        if (prim[0] < 0 || (prim[0] == 0 && prim[1] < 0)) {
            prim[0] = -prim[0];
            prim[1] = -prim[1];
        }
        tables.check_range(g);
        constant *= tables.liouville[g];
        ++mult[prim];
    }
    FormSystem sys;
    sys.d = 2;
    std::vector<Weight> weights;
    bool any_odd = false;
    for (const auto& [prim, m] : mult) {
        sys.forms.push_back({prim, 0});
        if (m % 2) {
            any_odd = true;
            weights.push_back(Weight::liouville());
        } else {
            weights.push_back(Weight::custom([](std::int64_t v) { return v != 0 ? 1.0 : 0.0; }, "nonzero"));
        }
    }
    if (!any_odd) throw validation_error("chowla_check: product is a constant times a perfect square");
    auto body = box_body(2, 1, N);
    double s = weighted_count(sys, body, weights, tables, opt);
    return constant * s / (static_cast<double>(N) * static_cast<double>(N));
}

}  // namespace primeforms
