#pragma once

#include <cstdint>
#include <string>

#include <gmpxx.h>
#include <nlohmann/json.hpp>

#include "primeforms/counting.hpp"
#include "primeforms/forms.hpp"
#include "primeforms/geometry.hpp"
#include "primeforms/gysieve.hpp"
#include "primeforms/local_factors.hpp"

namespace primeforms {

using ordered_json = nlohmann::ordered_json;

// Parses text; syntax errors become validation_error "<source>:<line>:<col>: ...".
ordered_json parse_json_text(const std::string& text, const std::string& source);
ordered_json load_json_file(const std::string& path);

// Integer, "a/b" string, or decimal string.
mpq_class rational_from_json(const ordered_json& j);
std::string rational_to_string(const mpq_class& q);

// {"fixture": "ap", "k": 4} | {"fixture": "twin"} | {"fixture": "shift", "h": 2} | {"fixture": "balog", "d": 3}
// | {"fixture": "cube", "d": 4} | {"fixture": "identity", "d": 2}
// | {"d": 2, "t": 2, "forms": [{"coeffs": [1, 0], "const": 0}, ...]} | {"matrix": [[...]], "rhs": [...]}
// "const" may be {"times_N": "a/b"}; a form may also be the array [c_1, ..., c_d, const].
FormSystem form_system_from_json(const ordered_json& j, std::int64_t N = 0);
ordered_json to_json(const FormSystem& sys);

// {"type": "progression", "k": 4} | {"type": "box", "dim": 2, "lo": 1, "hi": "N"}
// | {"type": "interval", "lo": 1, "hi": "N"} | {"type": "simplex", "vertices": [[...]]}
// | {"dim": 2, "halfspaces": [{"a": [..], "c": "1/2" or {"times_N": "a/b"}}], "N": 100}
// Integer endpoints may be the string "N" or {"times_N": "a/b"}; a body "N" overrides the scale.
ConvexBody body_from_json(const ordered_json& j, int dim_hint, std::int64_t N);
ordered_json to_json(const ConvexBody& body);

ordered_json to_json(const CorrelationReport& r);
ordered_json to_json(const SingularSeries& s);
ordered_json to_json(const GYReport& r);

}  // namespace primeforms
