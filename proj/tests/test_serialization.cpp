#include <doctest.h>

#include <string>

#include "primeforms/errors.hpp"
#include "primeforms/serialization.hpp"

using namespace primeforms;

namespace {

std::string error_of(const std::string& text) {
    try {
        parse_json_text(text, "cfg.json");
    } catch (const validation_error& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_SUITE("serialization") {
    TEST_CASE("malformed JSON reports line and column") {
        CHECK(error_of("{\n  \"N\": 10,\n  oops\n}").rfind("cfg.json:3:", 0) == 0);
        CHECK(error_of("{\"a\": 1,}").rfind("cfg.json:1:", 0) == 0);
        CHECK(error_of("{\"a\": [1, 2}").find("malformed JSON") != std::string::npos);
        CHECK(error_of("{\"a\": 1}").empty());
        CHECK_THROWS_AS(load_json_file("/nonexistent/cfg.json"), validation_error);
    }

    TEST_CASE("parsed objects keep key order") {
        auto j = parse_json_text("{\"z\": 1, \"a\": 2, \"m\": 3}", "x");
        CHECK(j.dump() == "{\"z\":1,\"a\":2,\"m\":3}");
    }

    TEST_CASE("rationals") {
        CHECK(rational_from_json(ordered_json(7)) == 7);
        CHECK(rational_from_json(ordered_json("3/4")) == mpq_class(3, 4));
        CHECK(rational_from_json(ordered_json("-6/8")) == mpq_class(-3, 4));
        CHECK(rational_from_json(ordered_json("0.125")) == mpq_class(1, 8));
        CHECK(rational_from_json(ordered_json("-2.5")) == mpq_class(-5, 2));
        CHECK(rational_from_json(ordered_json("1e-3")) == mpq_class(1, 1000));
        CHECK_THROWS_AS(rational_from_json(ordered_json(0.5)), validation_error);
        CHECK_THROWS_AS(rational_from_json(ordered_json("1/0")), validation_error);
        CHECK_THROWS_AS(rational_from_json(ordered_json("abc")), validation_error);
        CHECK_THROWS_AS(rational_from_json(ordered_json::array()), validation_error);
        CHECK(rational_to_string(mpq_class(6, 4)) == "3/2");
        CHECK(rational_to_string(mpq_class(-5)) == "-5");
        for (auto q : {mpq_class(1, 3), mpq_class(-22, 7), mpq_class(0)})
            CHECK(rational_from_json(ordered_json(rational_to_string(q))) == q);
    }

    TEST_CASE("form system fixtures and explicit forms") {
        auto ap = form_system_from_json(parse_json_text("{\"fixture\": \"ap\", \"k\": 4}", "x"));
        CHECK(ap.t() == 4);
        CHECK(ap.forms[3].coeffs == ap_system(4).forms[3].coeffs);
        CHECK(form_system_from_json(parse_json_text("{\"fixture\": \"twin\"}", "x")).forms[1].constant == 2);
        CHECK(form_system_from_json(parse_json_text("{\"fixture\": \"identity\", \"d\": 3}", "x")).t() == 3);
        auto arr = form_system_from_json(parse_json_text("{\"forms\": [[1, 0, 0], [1, 1, 0], [0, 1, -1]]}", "x"));
        CHECK(arr.d == 2);
        CHECK(arr.forms[2].constant == -1);
        auto obj = form_system_from_json(
            parse_json_text("{\"d\": 2, \"t\": 2, \"forms\": [{\"coeffs\": [1, 0], \"const\": 0}, {\"coeffs\": [-1, -1], \"const\": {\"times_N\": \"1/2\"}}]}", "x"),
            1000);
        CHECK(obj.forms[1].constant == 500);
        CHECK_THROWS_AS(form_system_from_json(parse_json_text("{\"forms\": [{\"coeffs\": [1], \"const\": {\"times_N\": \"1/3\"}}]}", "x"), 1000), validation_error);
        CHECK_THROWS_AS(form_system_from_json(parse_json_text("{\"forms\": [{\"coeffs\": [1], \"const\": {\"times_N\": 1}}]}", "x")), validation_error);
        CHECK_THROWS_AS(form_system_from_json(parse_json_text("{\"t\": 3, \"forms\": [[1, 0]]}", "x")), validation_error);
        CHECK_THROWS_AS(form_system_from_json(parse_json_text("{\"fixture\": \"zeta\"}", "x")), validation_error);
        CHECK_THROWS_AS(form_system_from_json(parse_json_text("{\"forms\": [[1, 0], [1, 0, 0]]}", "x")), validation_error);
        CHECK_THROWS_AS(form_system_from_json(parse_json_text("{\"forms\": [[1.5, 0]]}", "x")), validation_error);
        CHECK_THROWS_AS(form_system_from_json(parse_json_text("[]", "x")), validation_error);
    }

    TEST_CASE("matrix systems") {
        auto vin = form_system_from_json(parse_json_text("{\"matrix\": [[1, 1, 1]], \"rhs\": [1001]}", "x"), 1001);
        CHECK(vin.d == 2);
        CHECK(vin.t() == 3);
        std::vector<std::int64_t> n{4, -9};
        std::int64_t s = 0;
        for (const auto& f : vin.forms) s += f(n);
        CHECK(s == 1001);
    }

    TEST_CASE("form system round trip") {
        auto sys = ap_system(5);
        auto j = to_json(sys);
        CHECK(j["d"] == 2);
        CHECK(j["forms"].size() == 5);
        CHECK(j["forms"][0].contains("text"));
        auto back = form_system_from_json(j);
        REQUIRE(back.t() == sys.t());
        for (int i = 0; i < sys.t(); ++i) {
            CHECK(back.forms[i].coeffs == sys.forms[i].coeffs);
            CHECK(back.forms[i].constant == sys.forms[i].constant);
        }
    }

    TEST_CASE("bodies") {
        auto ap = body_from_json(parse_json_text("{\"type\": \"progression\", \"k\": 4}", "x"), 2, 100);
        CHECK(lattice_count(ap) == lattice_count(progression_body(4, 100)));
        auto box = body_from_json(parse_json_text("{\"type\": \"box\", \"dim\": 2, \"lo\": 1, \"hi\": \"N\"}", "x"), 2, 7);
        CHECK(lattice_count(box) == 49);
        auto half = body_from_json(parse_json_text("{\"type\": \"interval\", \"lo\": 1, \"hi\": {\"times_N\": \"1/2\"}}", "x"), 1, 11);
        CHECK(lattice_count(half) == 5);
        auto simplex = body_from_json(parse_json_text("{\"type\": \"simplex\", \"vertices\": [[0, 0], [2, 0], [0, 2]]}", "x"), 2, 2);
        CHECK(lattice_count(simplex) == 6);
        auto hs = body_from_json(
            parse_json_text("{\"dim\": 1, \"N\": 10, \"halfspaces\": [{\"a\": [1], \"c\": {\"times_N\": 1}}, {\"a\": [-1], \"c\": \"-1/2\"}]}", "x"), 1, 999);
        // body scale 10 overrides the caller's 999
        CHECK(lattice_count(hs) == 10);
        CHECK_THROWS_AS(body_from_json(parse_json_text("{\"type\": \"torus\"}", "x"), 2, 10), validation_error);
        CHECK_THROWS_AS(body_from_json(parse_json_text("{\"dim\": 2, \"halfspaces\": [{\"a\": [1], \"c\": 0}]}", "x"), 2, 10), validation_error);
        CHECK_THROWS_AS(body_from_json(parse_json_text("3", "x"), 2, 10), validation_error);
        auto j = to_json(box);
        CHECK(j.contains("halfspaces"));
        CHECK(lattice_count(body_from_json(j, 2, 7)) == 49);
    }

    TEST_CASE("report serialisation") {
        auto ss = singular_series(ap_system(4), 100);
        auto j = to_json(ss);
        CHECK(j.contains("truncated_product"));
        CHECK(j["vanishing"] == false);
        GYReport gy;
        gy.volume = 42;
        CHECK(to_json(gy)["lattice_count"] == 42.0);
        CorrelationReport r;
        r.N = 10;
        CHECK(to_json(r)["N"] == 10);
    }
}
