#include <doctest.h>

#include <bit>
#include <cmath>
#include <numbers>
#include <random>

#include "primeforms/errors.hpp"
#include "primeforms/gowers.hpp"

using namespace primeforms;

namespace {

cplx phase(double t) { return std::polar(1.0, 2 * std::numbers::pi * t); }

std::vector<cplx> random_complex(std::size_t n, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    std::vector<cplx> v(n);
    for (auto& z : v) z = {g(rng), g(rng)};
    return v;
}

std::vector<cplx> random_sign(std::size_t n, std::mt19937_64& rng) {
    std::bernoulli_distribution b;
    std::vector<cplx> v(n);
    for (auto& z : v) z = b(rng) ? 1.0 : -1.0;
    return v;
}

// plain loops over x and h in Z_N^{s+1}
double oracle_cyclic_raw(const std::vector<cplx>& f, int s) {
    const std::size_t n = f.size();
    const int k = s + 1;
    std::vector<std::size_t> h(k, 0);
    std::complex<long double> total = 0;
    std::size_t cells = 1;
    for (int j = 0; j < k; ++j) cells *= n;
    for (std::size_t x = 0; x < n; ++x)
        for (std::size_t idx = 0; idx < cells; ++idx) {
            std::size_t r = idx;
            for (int j = 0; j < k; ++j) h[j] = r % n, r /= n;
            std::complex<long double> prod = 1;
            for (unsigned w = 0; w < (1u << k); ++w) {
                std::size_t pos = x;
                for (int j = 0; j < k; ++j)
                    if (w >> j & 1) pos += h[j];
                cplx v = f[pos % n];
                prod *= std::complex<long double>(std::popcount(w) % 2 ? std::conj(v) : v);
            }
            total += prod;
        }
    return static_cast<double>(total.real() / (static_cast<long double>(n) * cells));
}

// two-axis box norm straight from the definition
double oracle_box2_raw(std::size_t n0, std::size_t n1, const std::vector<cplx>& v) {
    std::complex<long double> total = 0;
    for (std::size_t a0 = 0; a0 < n0; ++a0)
        for (std::size_t a1 = 0; a1 < n0; ++a1)
            for (std::size_t b0 = 0; b0 < n1; ++b0)
                for (std::size_t b1 = 0; b1 < n1; ++b1) {
                    cplx p = v[a0 * n1 + b0] * std::conj(v[a1 * n1 + b0]) * std::conj(v[a0 * n1 + b1]) * v[a1 * n1 + b1];
                    total += std::complex<long double>(p);
                }
    return static_cast<double>(total.real() / static_cast<long double>(n0 * n0 * n1 * n1));
}

double rel(double a, double b) { return std::fabs(a - b) / std::max(std::fabs(b), 1e-300); }

std::size_t sub_size(const std::vector<std::size_t>& axes, unsigned mask) {
    std::size_t s = 1;
    for (std::size_t a = 0; a < axes.size(); ++a)
        if (mask >> a & 1) s *= axes[a];
    return s;
}

BoxFamily positive_family(const std::vector<std::size_t>& axes, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.5, 2.0);
    BoxFamily nu{axes, {}};
    for (unsigned m = 0; m < (1u << axes.size()); ++m) {
        std::vector<cplx> v(sub_size(axes, m));
        for (auto& z : v) z = u(rng);
        nu.f.push_back(v);
    }
    return nu;
}

// |f_B| <= nu_B pointwise with random complex phases
BoxFamily dominated_family(const BoxFamily& nu, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> r(0, 1), t(0, 1);
    BoxFamily f{nu.axes, {}};
    for (const auto& v : nu.f) {
        std::vector<cplx> w(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) w[i] = v[i].real() * r(rng) * phase(t(rng));
        f.f.push_back(w);
    }
    return f;
}

}  // namespace

TEST_SUITE("gowers") {
    TEST_CASE("delta function closed form") {
        for (int s : {1, 2})
            for (std::size_t N : {5u, 8u, 16u}) {
                CAPTURE(s);
                CAPTURE(N);
                std::vector<cplx> d(N, 0.0);
                d[0] = 1;
                const double expect = std::pow(double(N), -(s + 2) / std::ldexp(1.0, s + 1));
                CHECK(rel(gowers_norm_cyclic(d, s, GowersMethod::recursive).norm, expect) < 1e-12);
                if (std::pow(double(N), s + 2) <= 1e6) CHECK(rel(gowers_norm_cyclic(d, s, GowersMethod::naive).norm, expect) < 1e-12);
            }
        std::vector<cplx> d5(5, 0.0);
        d5[0] = 1;
        CHECK(gowers_norm_cyclic(d5, 1, GowersMethod::fourier).norm == doctest::Approx(std::pow(5.0, -0.75)).epsilon(1e-12));
    }

    TEST_CASE("constants and characters") {
        for (int s : {1, 2, 3}) {
            CHECK(gowers_norm_cyclic(std::vector<cplx>(12, 1.0), s, GowersMethod::recursive).norm == doctest::Approx(1).epsilon(1e-12));
            CHECK(gowers_norm_local(std::vector<cplx>(12, 1.0), s, GowersMethod::recursive).norm == doctest::Approx(1).epsilon(1e-12));
        }
        std::vector<cplx> e(20);
        for (int n = 0; n < 20; ++n) e[n] = phase(3.0 * n / 20);
        CHECK(gowers_norm_cyclic(e, 1, GowersMethod::fourier).norm == doctest::Approx(1).epsilon(1e-12));
        CHECK(gowers_norm_cyclic(e, 2, GowersMethod::recursive).norm == doctest::Approx(1).epsilon(1e-12));
    }

    TEST_CASE("transform U2 and recursive U3 agree with naive") {
        std::mt19937_64 rng(21);
        for (std::size_t N = 2; N <= 64; N += 3) {
            auto f = random_complex(N, rng);
            double nv = gowers_norm_cyclic(f, 1, GowersMethod::naive).raw;
            CHECK(rel(gowers_norm_cyclic(f, 1, GowersMethod::fourier).raw, nv) <= 1e-9);
            CHECK(rel(gowers_norm_cyclic(f, 1, GowersMethod::recursive).raw, nv) <= 1e-9);
            if (N <= 24) CHECK(rel(nv, oracle_cyclic_raw(f, 1)) <= 1e-9);
        }
        for (std::size_t N = 2; N <= 32; N += 2) {
            auto f = random_complex(N, rng);
            double nv = gowers_norm_cyclic(f, 2, GowersMethod::naive).raw;
            CHECK(rel(gowers_norm_cyclic(f, 2, GowersMethod::recursive).raw, nv) <= 1e-9);
            if (N <= 12) CHECK(rel(nv, oracle_cyclic_raw(f, 2)) <= 1e-9);
        }
        auto f = random_sign(10, rng);
        CHECK(rel(gowers_norm_cyclic(f, 3, GowersMethod::recursive).raw, oracle_cyclic_raw(f, 3)) <= 1e-9);
    }

    TEST_CASE("method guards") {
        CHECK_THROWS_AS(gowers_norm_cyclic(std::vector<cplx>(8, 1.0), 2, GowersMethod::fourier), validation_error);
        CHECK_THROWS_AS(gowers_norm_cyclic(std::vector<cplx>(2000, 1.0), 2, GowersMethod::naive), resource_error);
        CHECK_THROWS_AS(gowers_norm_cyclic({}, 1, GowersMethod::recursive), validation_error);
        CHECK_THROWS_AS(gowers_norm_local({}, 1, GowersMethod::recursive), validation_error);
        CHECK_THROWS_AS(gowers_norm_cyclic(std::vector<cplx>(8, 1.0), 0, GowersMethod::recursive), validation_error);
        CHECK_THROWS_AS(box_norm({{3, 3}, std::vector<cplx>(8)}, GowersMethod::naive), validation_error);
        CHECK_THROWS_AS(box_norm({{300, 300}, std::vector<cplx>(90000, 1.0)}, GowersMethod::naive), resource_error);
    }

    TEST_CASE("box norms") {
        std::mt19937_64 rng(4);
        auto f1 = random_complex(9, rng);
        cplx mean = 0;
        for (auto z : f1) mean += z;
        mean /= 9.0;
        CHECK(box_norm({{9}, f1}, GowersMethod::recursive).norm == doctest::Approx(std::abs(mean)).epsilon(1e-12));
        CHECK(box_norm({{9}, f1}, GowersMethod::naive).norm == doctest::Approx(std::abs(mean)).epsilon(1e-12));
        CHECK(box_norm({{3, 4, 2}, std::vector<cplx>(24, 1.0)}, GowersMethod::naive).norm == doctest::Approx(1));
        for (int trial = 0; trial < 20; ++trial) {
            auto pm = random_sign(64, rng);
            double oracle = oracle_box2_raw(8, 8, pm);
            CHECK(rel(box_norm({{8, 8}, pm}, GowersMethod::naive).raw, oracle) <= 1e-9);
            CHECK(rel(box_norm({{8, 8}, pm}, GowersMethod::recursive).raw, oracle) <= 1e-9);
            auto c = random_complex(5 * 7, rng);
            CHECK(rel(box_norm({{5, 7}, c}, GowersMethod::recursive).raw, oracle_box2_raw(5, 7, c)) <= 1e-9);
            auto c3 = random_complex(4 * 3 * 5, rng);
            CHECK(rel(box_norm({{4, 3, 5}, c3}, GowersMethod::recursive).raw, box_norm({{4, 3, 5}, c3}, GowersMethod::naive).raw) <= 1e-9);
        }
    }

    TEST_CASE("box norm ignores lower-order modulations") {
        std::mt19937_64 rng(8);
        std::uniform_real_distribution<double> u(0, 1);
        const std::vector<std::size_t> axes = {8, 7, 6};
        for (int trial = 0; trial < 10; ++trial) {
            auto f = random_complex(8 * 7 * 6, rng);
            auto g = f;
            // one random phase per proper subset (pairs and singletons)
            std::vector<double> p01(8 * 7), p02(8 * 6), p12(7 * 6), p0(8), p1(7), p2(6);
            for (auto* v : {&p01, &p02, &p12, &p0, &p1, &p2})
                for (auto& t : *v) t = u(rng);
            for (std::size_t a = 0; a < 8; ++a)
                for (std::size_t b = 0; b < 7; ++b)
                    for (std::size_t c = 0; c < 6; ++c)
                        g[(a * 7 + b) * 6 + c] *= phase(p01[a * 7 + b] + p02[a * 6 + c] + p12[b * 6 + c] + p0[a] + p1[b] + p2[c]);
            CHECK(rel(box_norm({axes, g}, GowersMethod::recursive).raw, box_norm({axes, f}, GowersMethod::recursive).raw) <= 1e-9);
        }
    }

    TEST_CASE("polynomial phase invariance") {
        std::mt19937_64 rng(12);
        std::uniform_real_distribution<double> u(0, 1);
        for (int trial = 0; trial < 30; ++trial) {
            const std::size_t N = 10 + trial % 13;
            auto f = random_complex(N, rng);
            for (int s : {1, 2}) {
                // cyclic: coefficients a_j / N keep e(phi) well defined on Z_N
                std::uniform_int_distribution<int> c(0, static_cast<int>(N) - 1);
                int a1 = c(rng), a2 = c(rng);
                auto g = f;
                for (std::size_t n = 0; n < N; ++n) {
                    double nn = static_cast<double>(n);
                    double ph = (a1 * nn + (s >= 2 ? a2 * nn * nn : 0.0)) / N;
                    g[n] *= phase(ph);
                }
                CHECK(rel(gowers_norm_cyclic(g, s, GowersMethod::recursive).raw, gowers_norm_cyclic(f, s, GowersMethod::recursive).raw) <= 1e-9);
                // local: arbitrary real coefficients
                double b0 = u(rng), b1 = u(rng), b2 = u(rng);
                auto h = f;
                for (std::size_t n = 0; n < N; ++n) {
                    double nn = static_cast<double>(n);
                    h[n] *= phase(b0 + b1 * nn + (s >= 2 ? b2 * nn * nn : 0.0));
                }
                CHECK(rel(gowers_norm_local(h, s, GowersMethod::recursive).raw, gowers_norm_local(f, s, GowersMethod::recursive).raw) <= 1e-9);
            }
        }
    }

    TEST_CASE("positivity and nesting") {
        std::mt19937_64 rng(13);
        std::normal_distribution<double> g;
        for (int trial = 0; trial < 40; ++trial) {
            const std::size_t N = 4 + trial % 29;
            std::vector<cplx> f(N);
            for (auto& z : f) z = g(rng);
            auto u2 = gowers_norm_cyclic(f, 1, GowersMethod::fourier);
            auto u3 = gowers_norm_cyclic(f, 2, GowersMethod::recursive);
            CHECK_FALSE(u2.negative_raw);
            CHECK_FALSE(u3.negative_raw);
            CHECK(u2.norm <= u3.norm + 1e-12);
            auto pm = random_sign(36, rng);
            CHECK_FALSE(box_norm({{6, 6}, pm}, GowersMethod::naive).negative_raw);
        }
    }

    TEST_CASE("triangle inequality") {
        std::mt19937_64 rng(14);
        int checked = 0;
        for (int s : {1, 2})
            for (int trial = 0; trial < 100; ++trial) {
                const std::size_t N = 8 + trial % 25;
                auto f = random_complex(N, rng), g = random_complex(N, rng);
                std::vector<cplx> sum(N);
                for (std::size_t i = 0; i < N; ++i) sum[i] = f[i] + g[i];
                auto m = s == 1 ? GowersMethod::fourier : GowersMethod::recursive;
                double lhs = gowers_norm_cyclic(sum, s, m).norm;
                double rhs = gowers_norm_cyclic(f, s, m).norm + gowers_norm_cyclic(g, s, m).norm;
                CHECK(lhs <= rhs + 1e-9);
                ++checked;
            }
        CHECK(checked >= 200);
    }

    TEST_CASE("Gowers-Cauchy-Schwarz") {
        std::mt19937_64 rng(15);
        int held = 0, total = 0;
        for (int trial = 0; trial < 200; ++trial) {
            std::vector<std::vector<cplx>> fam;
            for (int i = 0; i < 4; ++i) fam.push_back(random_sign(16, rng));
            auto r = gcs_check_cyclic(fam, 1);
            held += r.holds;
            ++total;
        }
        for (int trial = 0; trial < 100; ++trial) {
            std::vector<std::vector<cplx>> fam;
            for (int i = 0; i < 8; ++i) fam.push_back(random_complex(7, rng));
            held += gcs_check_cyclic(fam, 2).holds;
            ++total;
        }
        for (int trial = 0; trial < 200; ++trial) {
            std::vector<BoxInput> fam;
            for (int i = 0; i < 4; ++i) fam.push_back({{6, 5}, random_complex(30, rng)});
            held += gcs_check_box(fam).holds;
            ++total;
        }
        CHECK(held == total);
        CHECK(total >= 200);

        // equal functions: lhs is the defining power
        auto f = random_complex(12, rng);
        auto eq = gcs_check_cyclic(std::vector<std::vector<cplx>>(4, f), 1);
        CHECK(eq.lhs == doctest::Approx(gowers_norm_cyclic(f, 1, GowersMethod::naive).raw).epsilon(1e-9));
        CHECK(eq.rhs == doctest::Approx(eq.lhs).epsilon(1e-9));
        std::vector<std::vector<cplx>> zero(4, f);
        zero[2].assign(12, 0.0);
        CHECK(gcs_check_cyclic(zero, 1).lhs == 0);
        CHECK(gcs_check_cyclic(zero, 1).holds);
        CHECK_THROWS_AS(gcs_check_cyclic({f, f}, 1), validation_error);
    }

    TEST_CASE("second Gowers-Cauchy-Schwarz") {
        std::mt19937_64 rng(16);
        std::uniform_int_distribution<std::size_t> sz(1, 8);
        int held = 0;
        for (int trial = 0; trial < 200; ++trial) {
            std::vector<std::size_t> axes = {sz(rng), sz(rng)};
            BoxFamily fam{axes, {}};
            for (unsigned m = 0; m < 4; ++m) fam.f.push_back(random_complex(sub_size(axes, m), rng));
            auto r = second_gcs_check(fam);
            // independent left-hand side
            std::complex<long double> lhs = 0;
            for (std::size_t a = 0; a < axes[0]; ++a)
                for (std::size_t b = 0; b < axes[1]; ++b)
                    lhs += std::complex<long double>(fam.f[0][0] * fam.f[1][a] * fam.f[2][b] * fam.f[3][a * axes[1] + b]);
            CHECK(r.lhs == doctest::Approx(static_cast<double>(std::abs(lhs) / (axes[0] * axes[1]))).epsilon(1e-9));
            held += r.holds;
        }
        CHECK(held == 200);
    }

    TEST_CASE("weighted box norms") {
        std::mt19937_64 rng(17);
        const std::vector<std::size_t> axes = {6, 6};
        // unit weights give the plain box norm
        BoxFamily ones{axes, {}};
        for (unsigned m = 0; m < 4; ++m) ones.f.push_back(std::vector<cplx>(sub_size(axes, m), 1.0));
        auto g = random_complex(36, rng);
        CHECK(rel(weighted_box_norm({axes, g}, ones).raw, box_norm({axes, g}, GowersMethod::naive).raw) <= 1e-9);
        for (int trial = 0; trial < 20; ++trial) {
            auto nu = positive_family(axes, rng);
            // two routes to the self norm of nu_B
            CHECK(rel(weighted_box_norm({axes, nu.f[3]}, nu).raw, weighted_self_norm(nu, 3).raw) <= 1e-9);
            CHECK_FALSE(weighted_box_norm({axes, random_complex(36, rng)}, nu).negative_raw);
        }
        auto nu3 = positive_family({3, 4, 2}, rng);
        CHECK(rel(weighted_box_norm({{3, 4, 2}, nu3.f[7]}, nu3).raw, weighted_self_norm(nu3, 7).raw) <= 1e-9);
    }

    TEST_CASE("weighted von Neumann inequality") {
        std::mt19937_64 rng(18);
        int held = 0;
        for (int trial = 0; trial < 200; ++trial) {
            std::vector<std::size_t> axes = trial % 4 == 3 ? std::vector<std::size_t>{3, 3, 2} : std::vector<std::size_t>{6, 6};
            auto nu = positive_family(axes, rng);
            auto f = dominated_family(nu, rng);
            held += weighted_von_neumann_check(f, nu).holds;
        }
        CHECK(held == 200);
        auto nu = positive_family({4, 4}, rng);
        auto f = dominated_family(nu, rng);
        f.f[3][0] = 10.0 * nu.f[3][0];
        CHECK_THROWS_AS(weighted_von_neumann_check(f, nu), validation_error);
    }

    TEST_CASE("local norms and embeddings") {
        std::mt19937_64 rng(19);
        for (int s : {1, 2})
            for (std::size_t N : {6u, 9u, 12u}) {
                auto f = random_complex(N, rng), g = random_complex(N, rng);
                double nf = gowers_norm_local(f, s, GowersMethod::naive).raw;
                CHECK(rel(gowers_norm_local(f, s, GowersMethod::recursive).raw, nf) <= 1e-9);
                // the embedding ratio into Z_{N'} does not depend on the function
                for (std::size_t mult : {2u, 3u}) {
                    auto embed = [&](const std::vector<cplx>& v, std::size_t offset) {
                        std::vector<cplx> out(mult * N, 0.0);
                        for (std::size_t i = 0; i < N; ++i) out[(offset + i) % (mult * N)] = v[i];
                        return gowers_norm_cyclic(out, s, GowersMethod::naive).raw;
                    };
                    double rf = embed(f, 0) / nf;
                    double rg = embed(g, 0) / gowers_norm_local(g, s, GowersMethod::naive).raw;
                    CHECK(rel(rf, rg) <= 1e-9);
                    // translating A inside the group changes nothing
                    CHECK(rel(embed(f, N / 2 + 1), embed(f, 0)) <= 1e-9);
                    CHECK(rel(embed(std::vector<cplx>(N, 1.0), 0), rf) <= 1e-9);
                }
            }
    }

    TEST_CASE("threads do not change results") {
        std::mt19937_64 rng(20);
        auto f = random_complex(300, rng);
        CHECK(gowers_norm_cyclic(f, 2, GowersMethod::recursive, 1).raw == gowers_norm_cyclic(f, 2, GowersMethod::recursive, 4).raw);
        CHECK(gowers_norm_local(f, 2, GowersMethod::recursive, 1).raw == gowers_norm_local(f, 2, GowersMethod::recursive, 3).raw);
    }

    TEST_CASE("dual norm lower bounds") {
        const std::size_t N = 40;
        std::vector<cplx> one(N, 1.0), e(N);
        for (std::size_t n = 0; n < N; ++n) e[n] = phase(0.37 * n);
        for (int s : {1, 2}) {
            CHECK(dual_norm_lower_bound(one, {one}, s) == doctest::Approx(1).epsilon(1e-9));
            CHECK(dual_norm_lower_bound(e, {e}, s) == doctest::Approx(1).epsilon(1e-9));
        }
        std::mt19937_64 rng(22);
        for (int trial = 0; trial < 20; ++trial) {
            auto F = random_sign(N, rng);
            std::vector<std::vector<cplx>> ws;
            for (int k = 0; k < 5; ++k) ws.push_back(random_complex(N, rng));
            double lb = dual_norm_lower_bound(F, ws, 1);
            CHECK(lb <= 1.0);
            // the bound dominates each witness ratio
            for (const auto& w : ws) {
                cplx acc = 0;
                for (std::size_t i = 0; i < N; ++i) acc += F[i] * std::conj(w[i]);
                CHECK(lb >= std::abs(acc) / double(N) / gowers_norm_local(w, 1, GowersMethod::naive).norm - 1e-12);
            }
        }
        CHECK_THROWS_AS(dual_norm_lower_bound(one, {}, 1), validation_error);
        CHECK_THROWS_AS(dual_norm_lower_bound(one, {std::vector<cplx>(3, 1.0)}, 1), validation_error);
    }
}
