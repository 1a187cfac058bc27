#include "json_emit.hpp"

#include <cmath>
#include <cstdio>

namespace algcalc::cli {

namespace {

using nlohmann::ordered_json;

void scalar(const ordered_json& j, std::string& out) {
  char buf[40];
  switch (j.type()) {
    case ordered_json::value_t::number_float: {
      const double v = j.get<double>();
      if (std::isnan(v)) {
        out += "\"NaN\"";
      } else if (std::isinf(v)) {
        out += v > 0 ? "\"Infinity\"" : "\"-Infinity\"";
      } else {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out += buf;
      }
      break;
    }
    case ordered_json::value_t::number_integer:
      std::snprintf(buf, sizeof buf, "%lld", static_cast<long long>(j.get<std::int64_t>()));
      out += buf;
      break;
    case ordered_json::value_t::number_unsigned:
      std::snprintf(buf, sizeof buf, "%llu", static_cast<unsigned long long>(j.get<std::uint64_t>()));
      out += buf;
      break;
    default:
      out += j.dump();
  }
}

bool flat(const ordered_json& j) {
  for (const auto& e : j)
    if (e.is_structured()) return false;
  return true;
}

void write(const ordered_json& j, int depth, std::string& out) {
  const std::string pad(2 * (depth + 1), ' '), close(2 * depth, ' ');
  if (j.is_object()) {
    if (j.empty()) {
      out += "{}";
      return;
    }
    out += "{\n";
    bool first = true;
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (!first) out += ",\n";
      first = false;
      out += pad + ordered_json(it.key()).dump() + ": ";
      write(it.value(), depth + 1, out);
    }
    out += "\n" + close + "}";
  } else if (j.is_array()) {
    if (j.empty()) {
      out += "[]";
      return;
    }
    if (flat(j)) {
      out += "[";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ", ";
        scalar(j[i], out);
      }
      out += "]";
      return;
    }
    out += "[\n";
    for (std::size_t i = 0; i < j.size(); ++i) {
      if (i) out += ",\n";
      out += pad;
      write(j[i], depth + 1, out);
    }
    out += "\n" + close + "]";
  } else {
    scalar(j, out);
  }
}

}  // namespace

std::string emit_json(const ordered_json& j) {
  std::string out;
  write(j, 0, out);
  out += "\n";
  return out;
}

}  // namespace algcalc::cli
