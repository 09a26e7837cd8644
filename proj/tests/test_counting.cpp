#include <doctest.h>

#include <cmath>

#include "primeforms/arith.hpp"
#include "primeforms/counting.hpp"
#include "primeforms/errors.hpp"

using namespace primeforms;

namespace {

const ArithTables& tables() {
    static const ArithTables t = build_tables(2'000'000);
    return t;
}

}  // namespace

TEST_SUITE("counting") {
    TEST_CASE("twin primes below 100") {
        auto body = interval_body(1, 98);
        CHECK(prime_point_count(shift_system(2), body, tables()) == 8);
        std::vector<Weight> ind(2, Weight::prime_indicator());
        CHECK(weighted_count(shift_system(2), body, ind, tables()) == 8);
        CHECK(weight_from_name("prime").kind == WeightKind::prime_indicator);
    }

    TEST_CASE("constant weights count lattice points") {
        auto body = progression_body(4, 500);
        std::vector<Weight> ones(4, Weight::one());
        CHECK(weighted_count(ap_system(4), body, ones, tables()) == static_cast<double>(lattice_count(body)));
    }

    TEST_CASE("AP counts match brute force") {
        const auto& t = tables();
        for (int k : {3, 4}) {
            const std::int64_t N = k == 3 ? 10000 : 100;
            double lam = 0;
            std::uint64_t primes = 0;
            for (std::int64_t a = 1; a <= N; ++a)
                for (std::int64_t d = 1; a + (k - 1) * d <= N; ++d) {
                    double p = 1;
                    bool all = true;
                    for (int j = 0; j < k; ++j) {
                        p *= t.von_mangoldt[a + j * d];
                        all &= t.is_prime(a + j * d);
                    }
                    lam += p;
                    primes += all;
                }
            auto body = progression_body(k, N);
            std::vector<Weight> L(k, Weight::von_mangoldt());
            CHECK(weighted_count(ap_system(k), body, L, t) == doctest::Approx(lam).epsilon(1e-12));
            CHECK(prime_point_count(ap_system(k), body, t) == primes);
        }
    }

    TEST_CASE("empty body") {
        auto empty = make_body(1, {{{mpq_class(1)}, mpq_class(-1)}, {{mpq_class(-1)}, mpq_class(-1)}}, 5);
        CHECK(prime_point_count(identity_system(1), empty, tables()) == 0);
        CHECK(mobius_correlation(identity_system(1), empty, 5, false, tables()) == 0);
    }

    TEST_CASE("negative arguments carry zero von Mangoldt weight") {
        FormSystem s;
        s.d = 1;
        s.forms = {{{1}, -50}};
        std::vector<Weight> L{Weight::von_mangoldt()};
        double direct = 0;
        for (std::int64_t n = 51; n <= 100; ++n) direct += tables().von_mangoldt[n - 50];
        CHECK(weighted_count(s, interval_body(1, 100), L, tables()) == doctest::Approx(direct));
    }

    TEST_CASE("table overflow is reported") {
        std::vector<Weight> L(2, Weight::von_mangoldt());
        CHECK_THROWS_AS(weighted_count(shift_system(2), interval_body(1, 2'000'000), L, tables()), resource_error);
        CHECK_THROWS_AS(weight_from_name("zeta"), validation_error);
    }

    TEST_CASE("predictions") {
        auto vanish = predict(shift_system(1), interval_body(1, 1000), 1000, 100, PredictMode::log_power);
        CHECK(vanish.vanishing);
        CHECK(vanish.value == 0);
        // t = 1: N/log N and the log-integral
        const std::int64_t N = 1'000'000;
        auto lp = predict(identity_system(1), interval_body(1, N), N, 100, PredictMode::log_power);
        auto in = predict(identity_system(1), interval_body(1, N), N, 100, PredictMode::integral);
        CHECK(lp.value == doctest::Approx(N / std::log(double(N))).epsilon(1e-6));
        double li = 0;
        for (std::int64_t n = 3; n <= N; ++n) li += 1 / std::log(double(n));
        CHECK(in.value == doctest::Approx(li).epsilon(1e-7));
        double pi = static_cast<double>(prime_point_count(identity_system(1), interval_body(1, N), tables()));
        CHECK(std::fabs(in.value / pi - 1) < std::fabs(lp.value / pi - 1));
    }

    TEST_CASE("log density sum agrees with the plain lattice sum") {
        auto body = progression_body(3, 3000);
        double direct = 0;
        for (std::int64_t a = 1; a <= 3000; ++a)
            for (std::int64_t d = 1; a + 2 * d <= 3000; ++d) {
                double p = 1;
                for (int j = 0; j < 3; ++j) {
                    std::int64_t v = a + j * d;
                    p *= v > 2 ? 1 / std::log(double(v)) : 0.0;
                }
                direct += p;
            }
        CHECK(log_density_sum(ap_system(3), body) == doctest::Approx(direct).epsilon(1e-7));
    }

    TEST_CASE("compare report and ratios") {
        auto r = compare(ap_system(3), progression_body(3, 20000), 20000, 10000, tables());
        CHECK(r.ratio_integral == doctest::Approx(r.empirical / r.predicted_integral));
        CHECK(r.ratio_log_power == doctest::Approx(r.empirical / r.predicted_log_power));
        CHECK(r.ratio_weighted == doctest::Approx(r.lambda_weighted / r.predicted_weighted));
        CHECK(r.ratio_integral > 0.9);
        CHECK(r.ratio_integral < 1.1);
        auto csv = correlation_csv({r});
        CHECK(csv.rfind("N,empirical,pred_log,pred_int,ratio_log,ratio_int,seconds\r\n", 0) == 0);
    }

    TEST_CASE("lambda and lambda-prime weights differ by prime powers only") {
        std::vector<Weight> L(3, Weight::von_mangoldt()), Lp(3, Weight::von_mangoldt_prime());
        auto gap = [&](std::int64_t N) {
            auto body = progression_body(3, N);
            double a = weighted_count(ap_system(3), body, L, tables());
            double b = weighted_count(ap_system(3), body, Lp, tables());
            CHECK(a >= b);
            return (a - b) / a;
        };
        double small = gap(10000), large = gap(100000);
        CHECK(large < small);
        CHECK(large < 0.02);
    }

    TEST_CASE("weight concentration") {
        // forms in [N^0.95, N]: shift of the interval keeps every psi large
        const std::int64_t N = 1'000'000, lo = 500'000;
        auto body = interval_body(lo, N - 2);
        auto c = static_cast<double>(prime_point_count(shift_system(2), body, tables()));
        std::vector<Weight> Lp(2, Weight::von_mangoldt_prime());
        double w = weighted_count(shift_system(2), body, Lp, tables());
        CHECK(c * std::pow(std::log(double(N)), 2) / w == doctest::Approx(1).epsilon(0.06));
    }

    TEST_CASE("Mobius correlations") {
        // average over x, d in [1, N]
        CHECK(std::fabs(mobius_correlation(ap_system(4), box_body(2, 1, 10000), 10000, false, tables())) < 0.05);
        double m = mobius_correlation(identity_system(1), interval_body(1, 1'000'000), 1'000'000, false, tables());
        CHECK(std::fabs(m) < 0.005);
        double l = mobius_correlation(identity_system(1), interval_body(1, 1'000'000), 1'000'000, true, tables());
        double direct = 0;
        for (int n = 1; n <= 1'000'000; ++n) direct += tables().liouville[n];
        CHECK(l == doctest::Approx(direct / 1e6));
    }

    TEST_CASE("Chowla fixtures") {
        std::vector<AffineForm> f4 = {{{1, 0}, 0}, {{0, 1}, 0}, {{1, 1}, 0}, {{1, 2}, 0}};
        CHECK(std::fabs(chowla_check(f4, 3000, tables())) < 0.05);
        CHECK_THROWS_AS(chowla_check({{{1, 0}, 0}, {{1, 0}, 0}}, 100, tables()), validation_error);
        CHECK_THROWS_AS(chowla_check({{{2, 0}, 0}, {{3, 0}, 0}}, 100, tables()), validation_error);
        double one = chowla_check({{{1, 0}, 0}}, 1000, tables());
        CHECK(std::fabs(one) < 0.05);
        // brute force: lambda of the full product via complete multiplicativity
        const std::int64_t N = 200;
        double direct = 0;
        for (std::int64_t a = 1; a <= N; ++a)
            for (std::int64_t b = 1; b <= N; ++b) direct += tables().liouville[a] * tables().liouville[b] * tables().liouville[a + b];
        std::vector<AffineForm> f3 = {{{1, 0}, 0}, {{0, 1}, 0}, {{1, 1}, 0}};
        CHECK(chowla_check(f3, N, tables()) == doctest::Approx(direct / (N * N)));
        // repeated and scaled factors: y1^2 * 2 y2 -> lambda(2) lambda(y2) on y1 != 0
        std::vector<AffineForm> rep = {{{1, 0}, 0}, {{1, 0}, 0}, {{0, 2}, 0}};
        double d2 = 0;
        for (std::int64_t a = 1; a <= N; ++a)
            for (std::int64_t b = 1; b <= N; ++b) d2 += -tables().liouville[b];
        CHECK(chowla_check(rep, N, tables()) == doctest::Approx(d2 / (N * N)));
    }

    TEST_CASE("results are identical across thread counts") {
        auto body = progression_body(4, 20000);
        std::vector<Weight> L(4, Weight::von_mangoldt());
        double a = weighted_count(ap_system(4), body, L, tables(), {1});
        double b = weighted_count(ap_system(4), body, L, tables(), {3});
        double c = weighted_count(ap_system(4), body, L, tables(), {8});
        CHECK(a == b);
        CHECK(a == c);
        CHECK(log_density_sum(ap_system(4), body, {1}) == log_density_sum(ap_system(4), body, {5}));
        CHECK(mobius_correlation(ap_system(3), progression_body(3, 5000), 5000, false, tables(), {1}) ==
              mobius_correlation(ap_system(3), progression_body(3, 5000), 5000, false, tables(), {4}));
        auto t1 = weighted_count(identity_system(1), interval_body(1, 1'500'000), {Weight::von_mangoldt()}, tables(), {1});
        auto t4 = weighted_count(identity_system(1), interval_body(1, 1'500'000), {Weight::von_mangoldt()}, tables(), {4});
        CHECK(t1 == t4);
    }

    TEST_CASE("W-tricked weights") {
        auto p = w_trick(5);
        std::vector<Weight> w{Weight::w_trick(p, 7, false)};
        double direct = 0;
        for (std::int64_t n = 1; n <= 1000; ++n) direct += lambda_bw(n, 7, p, tables(), false);
        CHECK(weighted_count(identity_system(1), interval_body(1, 1000), w, tables()) == doctest::Approx(direct));
    }
}
