#include "primeforms/serialization.hpp"

#include <fstream>
#include <sstream>

#include "primeforms/errors.hpp"

namespace primeforms {

ordered_json parse_json_text(const std::string& text, const std::string& source) {
    try {
        return ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        std::size_t line = 1, col = 1;
        const std::size_t stop = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
        for (std::size_t i = 0; i < stop; ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        std::string what = e.what();
        auto pos = what.find("syntax error");
        if (pos != std::string::npos) what = what.substr(pos);
        throw validation_error(source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": malformed JSON: " + what);
    }
}

ordered_json load_json_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw validation_error("cannot open config " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_json_text(ss.str(), path);
}

mpq_class rational_from_json(const ordered_json& j) {
    if (j.is_number_integer()) return mpq_class(mpz_class(std::to_string(j.get<std::int64_t>())));
    if (j.is_string()) {
        std::string s = j.get<std::string>();
        if (s.find('.') != std::string::npos || s.find('e') != std::string::npos) {
            // exact value of the decimal literal
            long exp10 = 0;
            auto epos = s.find_first_of("eE");
            std::string mant = s.substr(0, epos);
            if (epos != std::string::npos) exp10 = std::stol(s.substr(epos + 1));
            auto dot = mant.find('.');
            if (dot != std::string::npos) {
                exp10 -= static_cast<long>(mant.size() - dot - 1);
                mant.erase(dot, 1);
            }
            mpq_class q;
            try {
                q = mpq_class(mpz_class(mant, 10));  // base 0 would read a leading 0 as octal
            } catch (const std::invalid_argument&) {
                throw validation_error("bad rational '" + s + "'");
            }
            mpz_class p10;
            mpz_ui_pow_ui(p10.get_mpz_t(), 10, static_cast<unsigned long>(exp10 < 0 ? -exp10 : exp10));
            if (exp10 < 0) return mpq_class(q / p10);
            return mpq_class(q * p10);
        }
        try {
            mpq_class q(s, 10);
            if (q.get_den() == 0) throw validation_error("zero denominator in '" + s + "'");
            q.canonicalize();
            return q;
        } catch (const std::invalid_argument&) {
            throw validation_error("bad rational '" + s + "'");
        }
    }
    if (j.is_number_float()) throw validation_error("floating rationals must be written as strings, got " + j.dump());
    throw validation_error("expected a rational, got " + j.dump());
}

std::string rational_to_string(const mpq_class& q) {
    mpq_class c = q;
    c.canonicalize();
    return c.get_str();
}

namespace {

std::int64_t as_int(const ordered_json& j, const char* what) {
    if (!j.is_number_integer()) throw validation_error(std::string(what) + " must be an integer, got " + j.dump());
    return j.get<std::int64_t>();
}

std::int64_t endpoint(const ordered_json& j, std::int64_t N) {
    if (j.is_string() && j.get<std::string>() == "N") return N;
    if (j.is_object() && j.contains("times_N")) {
        mpq_class q = rational_from_json(j["times_N"]) * N;
        mpz_class f;
        mpz_fdiv_q(f.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
        return f.get_si();
    }
    return as_int(j, "endpoint");
}

std::vector<std::int64_t> int_vector(const ordered_json& j, const char* what) {
    if (!j.is_array()) throw validation_error(std::string(what) + " must be an array");
    std::vector<std::int64_t> v;
    for (const auto& x : j) v.push_back(as_int(x, what));
    return v;
}

}  // namespace

FormSystem form_system_from_json(const ordered_json& j, std::int64_t N) {
    if (!j.is_object()) throw validation_error("system must be a JSON object");
    if (j.contains("fixture")) {
        std::string f = j["fixture"].get<std::string>();
        auto geti = [&](const char* k, std::int64_t def) { return j.contains(k) ? as_int(j[k], k) : def; };
        if (f == "ap") return ap_system(static_cast<int>(geti("k", 3)));
        if (f == "twin") return shift_system(2);
        if (f == "shift") return shift_system(geti("h", 2));
        if (f == "balog") return balog_system(static_cast<int>(geti("d", 2)));
        if (f == "cube") return cube_system(static_cast<int>(geti("d", 3)));
        if (f == "identity") return identity_system(static_cast<int>(geti("d", 1)));
        throw validation_error("unknown system fixture '" + f + "'");
    }
    if (j.contains("matrix")) {
        std::vector<std::vector<std::int64_t>> A;
        for (const auto& row : j["matrix"]) A.push_back(int_vector(row, "matrix row"));
        std::vector<std::int64_t> b = j.contains("rhs") ? int_vector(j["rhs"], "rhs") : std::vector<std::int64_t>(A.size(), 0);
        return parameterize_matrix_system(A, b, N > 0 ? N : 1).system;
    }
    if (!j.contains("forms")) throw validation_error("system needs 'fixture', 'forms' or 'matrix'");
    FormSystem sys;
    for (const auto& f : j["forms"]) {
        AffineForm a;
        if (f.is_array()) {
            // [c_1, ..., c_d, constant]
            auto v = int_vector(f, "form");
            if (v.empty()) throw validation_error("empty form");
            a.constant = v.back();
            v.pop_back();
            a.coeffs = v;
        } else {
            a.coeffs = int_vector(f.at("coeffs"), "coeffs");
            const char* key = f.contains("const") ? "const" : "constant";
            if (f.contains(key)) {
                const auto& c = f[key];
                if (c.is_object()) {
                    if (N <= 0) throw validation_error("constant proportional to N needs a scale N");
                    mpq_class q = rational_from_json(c.at("times_N")) * N;
                    if (q.get_den() != 1) throw validation_error("constant " + c.dump() + " is not an integer at N = " + std::to_string(N));
                    a.constant = q.get_num().get_si();
                } else {
                    a.constant = as_int(c, key);
                }
            }
        }
        sys.forms.push_back(a);
    }
    sys.d = j.contains("d") ? static_cast<int>(as_int(j["d"], "d"))
                            : (sys.forms.empty() ? 0 : static_cast<int>(sys.forms[0].coeffs.size()));
    if (j.contains("t") && as_int(j["t"], "t") != sys.t()) throw validation_error("'t' does not match the number of forms");
    sys.validate();
    return sys;
}

ordered_json to_json(const FormSystem& sys) {
    ordered_json j;
    j["d"] = sys.d;
    j["forms"] = ordered_json::array();
    for (const auto& f : sys.forms) j["forms"].push_back({{"coeffs", f.coeffs}, {"constant", f.constant}, {"text", describe(f)}});
    return j;
}

ConvexBody body_from_json(const ordered_json& j, int dim_hint, std::int64_t N) {
    if (!j.is_object()) throw validation_error("body must be an object");
    if (j.contains("N")) N = as_int(j["N"], "N");
    std::string t = j.contains("type") ? j["type"].get<std::string>() : (j.contains("halfspaces") ? "halfspaces" : "");
    if (t.empty()) throw validation_error("body needs a 'type' or 'halfspaces'");
    if (t == "progression") return progression_body(static_cast<int>(as_int(j.at("k"), "k")), N);
    if (t == "interval") {
        return interval_body(j.contains("lo") ? endpoint(j["lo"], N) : 1, j.contains("hi") ? endpoint(j["hi"], N) : N);
    }
    if (t == "box") {
        int dim = j.contains("dim") ? static_cast<int>(as_int(j["dim"], "dim")) : dim_hint;
        return box_body(dim, j.contains("lo") ? endpoint(j["lo"], N) : 1, j.contains("hi") ? endpoint(j["hi"], N) : N);
    }
    if (t == "simplex") {
        std::vector<std::vector<std::int64_t>> v;
        for (const auto& row : j.at("vertices")) {
            std::vector<std::int64_t> p;
            for (const auto& x : row) p.push_back(endpoint(x, N));
            v.push_back(p);
        }
        return simplex_body(v, N);
    }
    if (t == "halfspaces") {
        int dim = j.contains("dim") ? static_cast<int>(as_int(j["dim"], "dim")) : dim_hint;
        std::vector<Halfspace> hs;
        for (const auto& h : j.at("halfspaces")) {
            Halfspace H;
            for (const auto& a : h.at("a")) H.a.push_back(rational_from_json(a));
            if (static_cast<int>(H.a.size()) != dim) throw validation_error("halfspace normal has the wrong dimension");
            const auto& c = h.at("c");
            H.c = c.is_object() ? mpq_class(rational_from_json(c.at("times_N")) * N) : rational_from_json(c);
            hs.push_back(H);
        }
        return make_body(dim, hs, N);
    }
    throw validation_error("unknown body type '" + t + "'");
}

ordered_json to_json(const ConvexBody& body) {
    ordered_json j;
    j["dim"] = body.dim;
    j["box_bound"] = body.box_bound;
    j["halfspaces"] = ordered_json::array();
    for (const auto& h : body.halfspaces) {
        ordered_json a = ordered_json::array();
        for (const auto& q : h.a) a.push_back(rational_to_string(q));
        j["halfspaces"].push_back({{"a", a}, {"c", rational_to_string(h.c)}});
    }
    return j;
}

ordered_json to_json(const CorrelationReport& r) {
    ordered_json j;
    j["N"] = r.N;
    j["empirical"] = r.empirical;
    j["lambda_weighted"] = r.lambda_weighted;
    j["predicted_log_power"] = r.predicted_log_power;
    j["predicted_integral"] = r.predicted_integral;
    j["predicted_weighted"] = r.predicted_weighted;
    j["ratio_log_power"] = r.ratio_log_power;
    j["ratio_integral"] = r.ratio_integral;
    j["ratio_weighted"] = r.ratio_weighted;
    j["singular_product"] = r.singular_product;
    j["beta_infinity"] = r.beta_infinity;
    j["p_max"] = r.p_max;
    j["vanishing"] = r.vanishing;
    return j;
}

ordered_json to_json(const SingularSeries& s) {
    ordered_json j;
    j["truncated_product"] = s.truncated_product;
    j["p_max"] = s.p_max;
    j["envelope_constant"] = s.envelope_constant;
    j["tail_log_bound"] = s.tail_log_bound;
    j["vanishing"] = s.vanishing;
    j["pairwise_independent"] = s.pairwise_independent;
    return j;
}

ordered_json to_json(const GYReport& r) {
    ordered_json j;
    j["N"] = r.N;
    j["R"] = r.R;
    j["empirical"] = r.empirical;
    j["predicted"] = r.predicted;
    j["ratio"] = r.ratio;
    j["sieve_factor_product"] = r.sieve_factor_product;
    j["lattice_count"] = r.volume;
    j["singular_product"] = r.singular_product;
    j["exceptional_X"] = r.exceptional_X;
    return j;
}

}  // namespace primeforms
