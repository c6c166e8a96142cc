#pragma once

// Report values: exact JSON encodings and a plain-text rendering.

#include "ent/entropy_value.hpp"

#include <json.hpp>

#include <algorithm>
#include <sstream>
#include <string>
#include <vector>

namespace ent::cli {

using json = nlohmann::json;

enum class Format { text, json };

/// Integers that fit in 64 bits are JSON numbers, larger ones decimal strings.
inline json int_json(const Integer& n) {
  if (fits_int64(n)) return static_cast<std::int64_t>(n);
  return ent::to_string(n);
}

inline json seq_json(const std::vector<Integer>& s) {
  json out = json::array();
  for (const auto& n : s) out.push_back(int_json(n));
  return out;
}

inline json entropy_value_json(const EntropyValue& v, bool approx) {
  if (v.is_infinite()) return "infinite";
  json j{{"log_of", {{"num", int_json(v.numerator())}, {"den", int_json(v.denominator())}}}};
  if (approx) j["approx"] = v.approx();
  return j;
}

/// {"status": ..., "entropy": ...} when certified, {"status": ..., "budget": ...} otherwise.
inline json entropy_json(const EntropyResult& r, bool approx) {
  json j{{"status", ent::to_string(r.status)}};
  if (r.certified()) j["entropy"] = entropy_value_json(r.value, approx);
  else j["budget"] = r.budget;
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

inline Status worse(Status a, Status b) {
  auto rank = [](Status s) { return s == Status::hypothesis_failure ? 2 : s == Status::inconclusive ? 1 : 0; };
  return rank(a) >= rank(b) ? a : b;
}

namespace detail {

inline bool scalar(const json& j) { return !j.is_object() && !j.is_array(); }

inline std::string scalar_text(const json& j) { return j.is_string() ? j.get<std::string>() : j.dump(); }

inline void render(std::ostringstream& os, const json& j, int indent) {
  const std::string pad(static_cast<std::size_t>(indent), ' ');
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) {
      if (v.is_object() && v.contains("log_of")) {
        const auto& q = v["log_of"];
        os << pad << k << ": log " << scalar_text(q["num"]);
        if (q["den"] != 1) os << "/" << scalar_text(q["den"]);
        if (v.contains("approx")) os << " (" << v["approx"].get<double>() << ")";
        os << "\n";
      } else if (scalar(v)) {
        os << pad << k << ": " << scalar_text(v) << "\n";
      } else if (v.is_array() && std::all_of(v.begin(), v.end(), scalar)) {
        os << pad << k << ": [";
        for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << scalar_text(v[i]);
        os << "]\n";
      } else {
        os << pad << k << ":\n";
        render(os, v, indent + 2);
      }
    }
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) {
      os << pad << "- [" << i << "]\n";
      render(os, j[i], indent + 2);
    }
  } else {
    os << pad << scalar_text(j) << "\n";
  }
}

}  // namespace detail

/// JSON: sorted keys, compact, newline-terminated. Text: indented key/value lines.
inline std::string emit_report(const json& report, Format f) {
  if (f == Format::json) return report.dump() + "\n";
  std::ostringstream os;
  detail::render(os, report, 0);
  return os.str();
}

}  // namespace ent::cli
