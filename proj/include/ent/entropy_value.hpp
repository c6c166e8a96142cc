#pragma once

#include "ent/integer.hpp"

#include <cmath>
#include <string>

namespace ent {

/// log q for an exact positive rational q, or +infinity.
class EntropyValue {
 public:
  EntropyValue() = default;

  static EntropyValue log_of(Rational q) {
    if (q <= 0) throw Error("entropy argument must be positive");
    EntropyValue v;
    v.q_ = std::move(q);
    return v;
  }
  static EntropyValue log_of(const Integer& n) { return log_of(Rational(n)); }
  static EntropyValue zero() { return EntropyValue{}; }
  static EntropyValue infinite() {
    EntropyValue v;
    v.infinite_ = true;
    return v;
  }

  bool is_infinite() const { return infinite_; }
  const Rational& argument() const { return q_; }
  Integer numerator() const { return boost::multiprecision::numerator(q_); }
  Integer denominator() const { return boost::multiprecision::denominator(q_); }

  double approx() const {
    if (infinite_) return INFINITY;
    return log_of_int(numerator()) - log_of_int(denominator());
  }

  bool operator==(const EntropyValue& o) const { return infinite_ == o.infinite_ && (infinite_ || q_ == o.q_); }
  bool operator<(const EntropyValue& o) const {
    if (infinite_) return false;
    return o.infinite_ || q_ < o.q_;
  }

  std::string describe() const {
    if (infinite_) return "infinite";
    if (denominator() == 1) return "log " + to_string(numerator());
    return "log(" + to_string(numerator()) + "/" + to_string(denominator()) + ")";
  }

 private:
  static double log_of_int(const Integer& n) { return ent::log_of(n); }
  bool infinite_ = false;
  Rational q_{1};
};

/// Stabilization was not certified within the budget.
class InconclusiveError : public Error {
 public:
  using Error::Error;
};

enum class Status { certified, inconclusive, hypothesis_failure };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::certified: return "certified";
    case Status::inconclusive: return "inconclusive";
    case Status::hypothesis_failure: return "hypothesis_failure";
  }
  return "?";
}

/// When stabilization is declared: `max_n` steps at most, and every tracked
/// sequence must be constant over the last `stall` steps.
struct StabilizationPolicy {
  std::size_t max_n = 64;
  std::size_t stall = 3;
};

struct EntropyResult {
  Status status = Status::inconclusive;
  EntropyValue value;
  std::size_t budget = 0;
  std::string note;

  bool certified() const { return status == Status::certified; }
};

}  // namespace ent
