#pragma once

#include "ent/integer.hpp"

#include <algorithm>
#include <functional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

namespace ent::finabel {

using Element = std::vector<Coeff>;

class DimensionError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class AmbientMismatch : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class ContainmentError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Z/d_1 + ... + Z/d_k with elements stored as coordinate vectors reduced
/// into [0, d_i). A group with no coordinates is the trivial group.
class FiniteAbelianGroup {
 public:
  FiniteAbelianGroup() = default;

  explicit FiniteAbelianGroup(std::vector<Coeff> moduli) : moduli_(std::move(moduli)) {
    for (std::size_t i = 0; i < moduli_.size(); ++i) {
      if (moduli_[i] < 1 || moduli_[i] > kMaxModulus) {
        std::ostringstream os;
        os << "modulus " << moduli_[i] << " at coordinate " << i << " outside [1, " << kMaxModulus
           << "]";
        throw ValidationError(os.str());
      }
    }
  }

  static FiniteAbelianGroup direct_sum(const FiniteAbelianGroup& a, const FiniteAbelianGroup& b) {
    std::vector<Coeff> m = a.moduli_;
    m.insert(m.end(), b.moduli_.begin(), b.moduli_.end());
    return FiniteAbelianGroup(std::move(m));
  }

  std::size_t rank() const { return moduli_.size(); }
  const std::vector<Coeff>& moduli() const { return moduli_; }
  Coeff modulus(std::size_t i) const { return moduli_[i]; }

  Integer order() const {
    Integer n = 1;
    for (Coeff d : moduli_) n *= d;
    return n;
  }

  /// lcm of the moduli; every element is killed by it.
  Coeff exponent() const {
    Coeff e = 1;
    for (Coeff d : moduli_) {
      e = lcm(e, d);
      if (e > kMaxModulus) throw ValidationError("group exponent exceeds supported range");
    }
    return e;
  }

  Element zero() const { return Element(rank(), 0); }

  Element unit(std::size_t i) const {
    Element e = zero();
    e[i] = moduli_[i] == 1 ? 0 : 1;
    return e;
  }

  void check_dimension(std::span<const Coeff> x) const {
    if (x.size() != rank()) {
      std::ostringstream os;
      os << "element has " << x.size() << " coordinates, group has rank " << rank();
      throw DimensionError(os.str());
    }
  }

  Element reduce(std::span<const Coeff> x) const {
    check_dimension(x);
    Element out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = mod_floor(x[i], moduli_[i]);
    return out;
  }

  Element add(std::span<const Coeff> a, std::span<const Coeff> b) const {
    check_dimension(a);
    check_dimension(b);
    Element out(rank());
    for (std::size_t i = 0; i < rank(); ++i)
      out[i] = mod_floor(static_cast<__int128>(a[i]) + b[i], moduli_[i]);
    return out;
  }

  Element negate(std::span<const Coeff> a) const {
    check_dimension(a);
    Element out(rank());
    for (std::size_t i = 0; i < rank(); ++i) out[i] = mod_floor(-static_cast<__int128>(a[i]), moduli_[i]);
    return out;
  }

  Element scale(Coeff k, std::span<const Coeff> a) const {
    check_dimension(a);
    Element out(rank());
    for (std::size_t i = 0; i < rank(); ++i)
      out[i] = mod_floor(static_cast<__int128>(k) * a[i], moduli_[i]);
    return out;
  }

  bool is_zero(std::span<const Coeff> a) const {
    for (std::size_t i = 0; i < a.size(); ++i)
      if (mod_floor(a[i], moduli_[i]) != 0) return false;
    return true;
  }

  /// Visits every element in lexicographic order. Intended for small groups
  /// (test oracles); callers bound the order themselves.
  void for_each_element(const std::function<void(const Element&)>& f) const {
    Element x = zero();
    while (true) {
      f(x);
      std::size_t i = 0;
      while (i < rank()) {
        if (++x[i] < moduli_[i]) break;
        x[i] = 0;
        ++i;
      }
      if (i == rank()) return;
    }
  }

  bool operator==(const FiniteAbelianGroup&) const = default;

  std::string describe() const {
    if (moduli_.empty()) return "0";
    std::ostringstream os;
    for (std::size_t i = 0; i < moduli_.size(); ++i) os << (i ? " + " : "") << "Z/" << moduli_[i];
    return os.str();
  }

 private:
  std::vector<Coeff> moduli_;
};

}  // namespace ent::finabel
