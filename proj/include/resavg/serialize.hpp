#ifndef RESAVG_SERIALIZE_HPP
#define RESAVG_SERIALIZE_HPP

// JSON encoding of polynomial-coefficient series:
//   {"n": 2, "reality": true,
//    "coeffs": [{"k": [1,0], "poly": [{"deg": [0,2], "re": 0.5, "im": 0}]}]}
// Modes and polynomial terms are emitted in sorted order, doubles with 17
// significant digits, so serialization is deterministic and round-trips
// bit-exactly. Rational coefficients (interned divisors) are runtime-only
// state and are rejected.

#include <json.hpp>

#include "series.hpp"

namespace resavg {

nlohmann::json series_to_json(const Series& f);
Series series_from_json(const nlohmann::json& j);

std::string series_to_string(const Series& f);
Series series_from_string(const std::string& text);

void save_series(const Series& f, const std::string& path);
Series load_series(const std::string& path);

}  // namespace resavg

#endif
