#pragma once

#include <string>

#include "json.hpp"

namespace algcalc::cli {

// Deterministic pretty printer: keys in insertion order, doubles with 17 significant digits,
// non-finite doubles as the strings "NaN", "Infinity", "-Infinity". Scalar-only arrays stay on
// one line.
std::string emit_json(const nlohmann::ordered_json& j);

}  // namespace algcalc::cli
