#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "primeforms/errors.hpp"
#include "primeforms/forms.hpp"

using namespace primeforms;

namespace {

FormSystem make(int d, std::vector<std::vector<std::int64_t>> rows) {
    // each row: d coefficients followed by the constant
    FormSystem s;
    s.d = d;
    for (auto& r : rows) {
        AffineForm f;
        f.constant = r.back();
        r.pop_back();
        f.coeffs = r;
        s.forms.push_back(f);
    }
    return s;
}

std::optional<int> overall(const FormSystem& s) { return complexity(s).overall; }

// Random unimodular matrix as a product of elementary moves.
std::vector<std::vector<std::int64_t>> random_unimodular(int d, std::mt19937_64& rng) {
    std::vector<std::vector<std::int64_t>> U(d, std::vector<std::int64_t>(d, 0));
    for (int i = 0; i < d; ++i) U[i][i] = 1;
    std::uniform_int_distribution<int> idx(0, d - 1), coef(-2, 2);
    for (int step = 0; step < 6; ++step) {
        int a = idx(rng), b = idx(rng);
        if (a == b) continue;
        int c = coef(rng);
        for (int r = 0; r < d; ++r) U[r][a] += c * U[r][b];
    }
    return U;
}

FormSystem substitute(const FormSystem& s, const std::vector<std::vector<std::int64_t>>& U) {
    // psi'(n) = psi(U n)
    FormSystem out = s;
    for (auto& f : out.forms) {
        std::vector<std::int64_t> c(s.d, 0);
        for (int j = 0; j < s.d; ++j)
            for (int k = 0; k < s.d; ++k) c[j] += f.coeffs[k] * U[k][j];
        f.coeffs = c;
    }
    return out;
}

FormSystem random_system(std::mt19937_64& rng, int d, int t) {
    std::uniform_int_distribution<int> coef(-2, 2);
    FormSystem s;
    s.d = d;
    while (static_cast<int>(s.forms.size()) < t) {
        AffineForm f;
        for (int j = 0; j < d; ++j) f.coeffs.push_back(coef(rng));
        f.constant = coef(rng);
        if (!f.is_constant()) s.forms.push_back(f);
    }
    return s;
}

bool some_pair_affinely_related(const FormSystem& s) {
    for (int i = 0; i < s.t(); ++i)
        for (int j = 0; j < s.t(); ++j)
            if (i != j && affine_span_member(s.forms[i], {s.forms[j]})) return true;
    return false;
}

}  // namespace

TEST_SUITE("forms") {
    TEST_CASE("size at scale") {
        CHECK(size_at_scale(ap_system(4), 1000) == 10);  // 1 + 2 + 3 + 4
        auto two = make(1, {{1, 0}, {-1, 50}});
        CHECK(size_at_scale(two, 50) == 3);
        auto three = make(2, {{1, 0, 0}, {0, 1, 0}, {-1, -1, 70}});
        CHECK(size_at_scale(three, 70) == 5);
    }

    TEST_CASE("affine span membership") {
        AffineForm n1{{1, 0}, 0}, n2{{0, 1}, 0}, s12{{1, 1}, 0};
        CHECK(affine_span_member({{1, 2}, 0}, {n1, s12}));
        CHECK_FALSE(affine_span_member(n1, {n2}));
        CHECK(affine_span_member({{1, 1}, 1}, {s12}));
        CHECK_FALSE(affine_span_member(n1, {}));
    }

    TEST_CASE("complexity goldens") {
        for (int k = 3; k <= 6; ++k) {
            CAPTURE(k);
            CHECK(overall(ap_system(k)) == k - 2);
            for (int i = 0; i < k; ++i) CHECK(i_complexity(ap_system(k), i).value == k - 2);
        }
        CHECK(overall(identity_system(3)) == 0);
        CHECK_FALSE(overall(shift_system(2)).has_value());
        CHECK_FALSE(i_complexity(shift_system(2), 0).value.has_value());
        CHECK(overall(balog_system(3)) == 1);
        CHECK(overall(cube_system(3)) == 1);
        CHECK(overall(cube_system(4)) == 2);
        CHECK(overall(make(2, {{1, 0, 0}, {0, 1, 0}, {-1, -1, 1000}})) == 1);
    }

    TEST_CASE("i_complexity index out of range") { CHECK_THROWS_AS(i_complexity(ap_system(3), 3), validation_error); }

    TEST_CASE("complexity invariant under permutation and unimodular change") {
        std::mt19937_64 rng(7);
        for (int trial = 0; trial < 60; ++trial) {
            int d = 2 + trial % 3, t = 3 + trial % 4;
            auto s = random_system(rng, d, t);
            auto base = overall(s);
            auto p = s;
            std::shuffle(p.forms.begin(), p.forms.end(), rng);
            CHECK(overall(p) == base);
            CHECK(overall(substitute(s, random_unimodular(d, rng))) == base);
        }
    }

    TEST_CASE("finite complexity iff no affinely related pair, and codimension bound") {
        std::mt19937_64 rng(11);
        for (int trial = 0; trial < 120; ++trial) {
            int d = 1 + trial % 4, t = 2 + trial % 5;
            auto s = random_system(rng, d, t);
            auto c = overall(s);
            CHECK(c.has_value() == !some_pair_affinely_related(s));
            if (c) CHECK(*c <= t - rank(s.linear_part(), d));
        }
    }

    TEST_CASE("normal form goldens") {
        auto ex = make(4, {{0, 1, 2, 3, 0}, {-1, 0, 1, 2, 0}, {-2, -1, 0, 1, 0}, {-3, -2, -1, 0, 0}});
        CHECK(is_normal_form(ex, 2).holds);
        CHECK(overall(ex) == 2);
        for (int s = 0; s <= 4; ++s) CHECK_FALSE(is_normal_form(ap_system(4), s).holds);
        auto id = is_normal_form(identity_system(3), 0);
        REQUIRE(id.holds);
        for (int i = 0; i < 3; ++i) CHECK(id.witness_sets[i] == std::vector<int>{i});

        // 1-normal Balog variant on 2d variables, d = 3
        const int d = 3;
        FormSystem bal;
        bal.d = 2 * d;
        for (int i = 0; i < d; ++i)
            for (int j = i; j < d; ++j) {
                AffineForm f;
                f.coeffs.assign(2 * d, 0);
                f.coeffs[i] += 1;
                f.coeffs[j] += 1;
                f.coeffs[d + i] += 1;
                f.coeffs[d + j] += 1;
                for (int k = d; k < 2 * d; ++k) f.coeffs[k] -= 1;
                f.constant = 1;
                bal.forms.push_back(f);
            }
        CHECK(is_normal_form(bal, 1).holds);
    }

    TEST_CASE("subsystems of a normal form stay normal") {
        auto ex = make(4, {{0, 1, 2, 3, 0}, {-1, 0, 1, 2, 0}, {-2, -1, 0, 1, 0}, {-3, -2, -1, 0, 0}});
        for (unsigned mask = 1; mask < 16; ++mask) {
            FormSystem sub;
            sub.d = 4;
            for (int i = 0; i < 4; ++i)
                if (mask >> i & 1) sub.forms.push_back(ex.forms[i]);
            CHECK(is_normal_form(sub, 2).holds);
        }
    }

    TEST_CASE("normal form extension on fixtures") {
        std::vector<std::pair<FormSystem, int>> fixtures = {
            {ap_system(3), 1}, {ap_system(4), 2}, {ap_system(5), 3}, {balog_system(2), 1},
            {balog_system(3), 1}, {cube_system(3), 1}, {cube_system(4), 2},
            {make(2, {{1, 0, 0}, {0, 1, 0}, {-1, -1, 101}}), 1},
        };
        for (const auto& [sys, s] : fixtures) {
            auto ext = normal_form_extension(sys, s);
            CHECK(is_normal_form(ext.system, s).holds);
            CHECK(same_image_lattice(sys, ext.system));
            CHECK(ext.system.d <= sys.d + sys.t() * (s + 1));
            // restriction to m = 0 recovers the original system
            for (int i = 0; i < sys.t(); ++i) {
                std::vector<std::int64_t> head(ext.system.forms[i].coeffs.begin(), ext.system.forms[i].coeffs.begin() + sys.d);
                CHECK(head == sys.forms[i].coeffs);
                CHECK(ext.system.forms[i].constant == sys.forms[i].constant);
            }
        }
        auto already = normal_form_extension(identity_system(3), 0);
        CHECK(already.unchanged);
        CHECK(already.system.d == 3);
        CHECK_THROWS_AS(normal_form_extension(shift_system(2), 1), validation_error);
    }

    TEST_CASE("matrix parameterization") {
        // single AP3 relation x1 + x3 = 2 x2
        auto ap = parameterize_matrix_system({{1, -2, 1}}, {0}, 100);
        CHECK(ap.system.d == 2);
        CHECK(same_image_lattice(ap.system, ap_system(3)));
        // three primes summing to N
        const std::int64_t N = 1001;
        auto vin = parameterize_matrix_system({{1, 1, 1}}, {N}, N);
        CHECK(vin.system.d == 2);
        std::mt19937_64 rng(3);
        std::uniform_int_distribution<std::int64_t> u(-50, 50);
        for (int k = 0; k < 200; ++k) {
            std::vector<std::int64_t> n = {u(rng), u(rng)};
            std::int64_t sum = 0;
            for (const auto& f : vin.system.forms) sum += f(n);
            CHECK(sum == N);
        }
        auto none = parameterize_matrix_system({}, {}, 10, 3);
        CHECK(none.system.d == 3);
        CHECK(same_image_lattice(none.system, identity_system(3)));
        CHECK_THROWS_AS(parameterize_matrix_system({}, {}, 10), validation_error);
        // the two-row AP3 presentation has (0, 3, -3) in its row space: binary, rejected
        CHECK_THROWS_AS(parameterize_matrix_system({{1, 1, -2}, {1, -2, 1}}, {0, 0}, 100), validation_error);
        CHECK_THROWS_AS(parameterize_matrix_system({{2, 2, 2}}, {3}, 10), validation_error);
        CHECK_THROWS_AS(parameterize_matrix_system({{1, 1, 1}, {2, 2, 2}}, {0, 0}, 10), validation_error);
    }

    TEST_CASE("validation") {
        FormSystem bad;
        bad.d = 2;
        bad.forms.push_back({{0, 0}, 5});
        CHECK_THROWS_AS(bad.validate(), validation_error);
        bad.forms[0] = {{1}, 0};
        CHECK_THROWS_AS(bad.validate(), validation_error);
        CHECK(ap_system(4).pairwise_independent());
        CHECK_FALSE(make(1, {{1, 0}, {2, 0}}).pairwise_independent());
    }
}
