#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "primeforms/errors.hpp"
#include "primeforms/geometry.hpp"

using namespace primeforms;

namespace {

std::uint64_t brute_count(const ConvexBody& b, std::int64_t R) {
    std::uint64_t c = 0;
    if (b.dim == 1) {
        for (std::int64_t x = -R; x <= R; ++x) c += b.contains({x});
    } else {
        for (std::int64_t x = -R; x <= R; ++x)
            for (std::int64_t y = -R; y <= R; ++y) c += b.contains({x, y});
    }
    return c;
}

double simplex_volume(const std::vector<std::vector<std::int64_t>>& v) {
    const int d = static_cast<int>(v.size()) - 1;
    std::vector<std::vector<double>> m(d, std::vector<double>(d));
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) m[i][j] = static_cast<double>(v[i + 1][j] - v[0][j]);
    double det;
    if (d == 1) det = m[0][0];
    else if (d == 2) det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    else
        det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
              m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    double f = 1;
    for (int k = 2; k <= d; ++k) f *= k;
    return std::fabs(det) / f;
}

}  // namespace

TEST_SUITE("geometry") {
    TEST_CASE("contains") {
        CHECK(box_body(2, -2, 2).contains({0, 0}));
        auto half = make_body(2, {{{mpq_class(1), mpq_class(0)}, mpq_class(0)}}, 10);
        CHECK_FALSE(half.contains({1, 0}));
        CHECK(progression_body(4, 100).contains({1, 0}) == false);  // positive difference required
        CHECK(progression_body(4, 100).contains({1, 1}));
        CHECK_FALSE(progression_body(4, 100).contains({98, 1}));
    }

    TEST_CASE("lattice counts") {
        CHECK(lattice_count(box_body(1, 0, 2)) == 3);
        CHECK(lattice_count(simplex_body({{0, 0}, {2, 0}, {0, 2}}, 2)) == 6);
        auto empty = make_body(1, {{{mpq_class(1)}, mpq_class(-1)}, {{mpq_class(-1)}, mpq_class(-1)}}, 5);
        CHECK(lattice_count(empty) == 0);
        for (std::int64_t N : {1, 5, 17})
            for (int d = 1; d <= 3; ++d) {
                std::uint64_t e = 1;
                for (int k = 0; k < d; ++k) e *= static_cast<std::uint64_t>(N + 1);
                CHECK(lattice_count(box_body(d, 0, N)) == e);
            }
        CHECK(lattice_count_exact(box_body(2, 0, 9)) == 100);
    }

    TEST_CASE("dimension guard") { CHECK_THROWS_AS(lattice_count(box_body(7, 0, 1)), resource_error); }

    TEST_CASE("enumeration agrees with membership") {
        std::mt19937_64 rng(5);
        std::uniform_int_distribution<int> c(-3, 3);
        for (int trial = 0; trial < 40; ++trial) {
            const std::int64_t N = 12 + trial;
            std::vector<Halfspace> hs;
            for (int k = 0; k < 3; ++k) hs.push_back({{mpq_class(c(rng)), mpq_class(c(rng))}, mpq_class(c(rng) * N / 2 + 3)});
            auto body = make_body(2, hs, N);
            std::set<std::vector<std::int64_t>> seen;
            for_each_lattice_point(body, [&](const std::vector<std::int64_t>& p) {
                CHECK(body.contains(p));
                seen.insert(p);
            });
            CHECK(seen.size() == brute_count(body, N));
            CHECK(lattice_count(body) == seen.size());
        }
    }

    TEST_CASE("archimedean factor") {
        const std::int64_t N = 3000;
        auto af = archimedean_factor(progression_body(4, N), ap_system(4), N);
        CHECK(std::fabs(af.normalized - 1.0 / 6) / (1.0 / 6) < 0.01);
        auto full = archimedean_factor(box_body(2, 1, 200), identity_system(2), 200);
        CHECK(full.count == 200 * 200);
        FormSystem neg;
        neg.d = 1;
        neg.forms.push_back({{-1}, 0});
        CHECK(archimedean_factor(box_body(1, 1, 50), neg, 50).count == 0);
    }

    TEST_CASE("volume packing on random simplices") {
        std::mt19937_64 rng(9);
        for (int d = 1; d <= 3; ++d)
            for (int trial = 0; trial < 15; ++trial) {
                const std::int64_t N = 40;
                std::uniform_int_distribution<std::int64_t> u(-N, N);
                std::vector<std::vector<std::int64_t>> v(d + 1, std::vector<std::int64_t>(d));
                for (auto& p : v)
                    for (auto& x : p) x = u(rng);
                double vol = simplex_volume(v);
                if (vol < 1) continue;
                auto body = simplex_body(v, N);
                double err = std::fabs(static_cast<double>(lattice_count(body)) - vol);
                // faces of a simplex in [-N, N]^d carry O(N^{d-1}) points
                CHECK(err <= 4.0 * d * std::pow(2.0 * N + 1, d - 1));
            }
    }

    TEST_CASE("boundary shell") {
        // oracle: points inside every facet pushed out by eps N |a| but not inside every facet pulled in
        auto oracle = [](const ConvexBody& b, double eps, std::int64_t N, std::int64_t R) {
            std::uint64_t c = 0;
            for (std::int64_t x = -R; x <= R; ++x)
                for (std::int64_t y = -R; y <= R; ++y) {
                    bool outer = true, inner = true;
                    for (const auto& h : b.halfspaces) {
                        double ax = h.a[0].get_d() * x + h.a[1].get_d() * y;
                        double norm = std::sqrt(h.a[0].get_d() * h.a[0].get_d() + h.a[1].get_d() * h.a[1].get_d());
                        double slack = eps * static_cast<double>(N) * norm;
                        outer &= ax <= h.c.get_d() + slack;
                        inner &= ax <= h.c.get_d() - slack;
                    }
                    c += outer && !inner;
                }
            return c;
        };
        const std::int64_t N = 100;
        auto cube = box_body(2, 0, N);
        auto ap = progression_body(4, N);
        // continuous shell of [0, N]^2: (N + 2 eps N)^2 - (N - 2 eps N)^2 = 8 eps N^2; lattice points add O(N)
        CHECK(boundary_shell_count(cube, 0.1, N) == 121 * 121 - 81 * 81);
        for (double eps : {0.01, 0.05, 0.1}) {
            CAPTURE(eps);
            auto sc = boundary_shell_count(cube, eps, N);
            CHECK(sc == oracle(cube, eps, N, 2 * N));
            CHECK(sc <= 8 * eps * N * N + 8.0 * N);
            auto sa = boundary_shell_count(ap, eps, N);
            CHECK(sa == oracle(ap, eps, N, 2 * N));
            CHECK(sa <= 8 * eps * N * N + 8.0 * N);
        }
        CHECK(boundary_shell_count(cube, 0.99, N) <= lattice_count(box_body(2, -2 * N, 3 * N)));
        auto empty = make_body(1, {{{mpq_class(1)}, mpq_class(-1)}, {{mpq_class(-1)}, mpq_class(-1)}}, 5);
        CHECK(boundary_shell_count(empty, 0.1, 5) == 0);
        CHECK_THROWS_AS(boundary_shell_count(cube, 0, N), validation_error);
    }

    TEST_CASE("form range") {
        auto r = form_range(progression_body(4, 100), AffineForm{{1, 3}, 0});
        REQUIRE(r);
        CHECK(r->second == 100);
        CHECK(r->first == 4);
    }
}
