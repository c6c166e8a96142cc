#pragma once

#include "ent/finabel/group.hpp"
#include "ent/finabel/lattice.hpp"

#include <sstream>
#include <vector>

namespace ent::finabel {

/// Subgroup of a FiniteAbelianGroup held in canonical (column Hermite)
/// form. Equal subgroups have identical bases, so == is structural.
class AbSubgroup {
 public:
  AbSubgroup() = default;

  /// Trivial subgroup of `ambient`.
  explicit AbSubgroup(FiniteAbelianGroup ambient)
      : ambient_(std::move(ambient)), basis_(ambient_.moduli()), order_(1) {}

  AbSubgroup(FiniteAbelianGroup ambient, TriangularLattice basis)
      : ambient_(std::move(ambient)), basis_(std::move(basis)) {
    basis_.normalize();
    order_ = basis_.subgroup_order();
  }

  static AbSubgroup whole(const FiniteAbelianGroup& ambient) {
    TriangularLattice lat(ambient.moduli());
    for (std::size_t i = 0; i < ambient.rank(); ++i) lat.insert(ambient.unit(i));
    return AbSubgroup(ambient, std::move(lat));
  }

  const FiniteAbelianGroup& ambient() const { return ambient_; }
  const TriangularLattice& basis() const { return basis_; }
  const Integer& order() const { return order_; }
  bool is_trivial() const { return order_ == 1; }

  bool contains(std::span<const Coeff> x) const {
    ambient_.check_dimension(x);
    return basis_.contains(x);
  }

  bool contains(const AbSubgroup& other) const {
    require_same_ambient(other);
    for (const auto& g : other.generators())
      if (!basis_.contains(g)) return false;
    return true;
  }

  std::vector<Element> generators() const { return basis_.generators(); }

  void require_same_ambient(const AbSubgroup& other) const {
    if (!(ambient_ == other.ambient_))
      throw AmbientMismatch("subgroups live in different ambient groups (" + ambient_.describe() +
                            " vs " + other.ambient_.describe() + ")");
  }

  bool operator==(const AbSubgroup& other) const {
    return ambient_ == other.ambient_ && basis_ == other.basis_;
  }

  std::string describe() const {
    std::ostringstream os;
    os << "<";
    bool first = true;
    for (const auto& g : generators()) {
      os << (first ? "" : ", ") << "(";
      for (std::size_t i = 0; i < g.size(); ++i) os << (i ? "," : "") << g[i];
      os << ")";
      first = false;
    }
    os << "> of order " << order_;
    return os.str();
  }

 private:
  FiniteAbelianGroup ambient_;
  TriangularLattice basis_;
  Integer order_ = 1;
};

/// Canonical subgroup generated by `gens` inside `ambient`.
inline AbSubgroup canonical_subgroup(const FiniteAbelianGroup& ambient, const std::vector<Element>& gens) {
  TriangularLattice lat(ambient.moduli());
  for (const auto& g : gens) {
    ambient.check_dimension(g);
    lat.insert(g);
  }
  return AbSubgroup(ambient, std::move(lat));
}

enum class Combine { sum, intersect };

namespace detail {

/// H intersect L as the preimage of L under the inclusion of H: the lattice
/// on A + A spanned by (h, h) and (l, 0) meets 0 + A exactly in H n L.
inline AbSubgroup intersect(const AbSubgroup& h, const AbSubgroup& l) {
  const auto& a = h.ambient();
  const std::size_t k = a.rank();
  std::vector<Coeff> m = a.moduli();
  m.insert(m.end(), a.moduli().begin(), a.moduli().end());
  TriangularLattice lat(m);
  Element v(2 * k, 0);
  for (const auto& g : l.generators()) {
    std::fill(v.begin(), v.end(), 0);
    std::copy(g.begin(), g.end(), v.begin());
    lat.insert(v);
  }
  for (const auto& g : h.generators()) {
    std::copy(g.begin(), g.end(), v.begin());
    std::copy(g.begin(), g.end(), v.begin() + static_cast<std::ptrdiff_t>(k));
    lat.insert(v);
  }
  lat.normalize();
  return AbSubgroup(a, lat.trailing(k));
}

}  // namespace detail

inline AbSubgroup subgroup_combine(const AbSubgroup& h, const AbSubgroup& l, Combine op) {
  h.require_same_ambient(l);
  if (op == Combine::sum) {
    if (l.is_trivial()) return h;
    if (h.is_trivial()) return l;
    TriangularLattice lat = h.basis();
    for (const auto& g : l.generators()) lat.insert(g);
    return AbSubgroup(h.ambient(), std::move(lat));
  }
  if (h.contains(l)) return l;
  if (l.contains(h)) return h;
  return detail::intersect(h, l);
}

inline AbSubgroup sum(const AbSubgroup& h, const AbSubgroup& l) { return subgroup_combine(h, l, Combine::sum); }
inline AbSubgroup intersect(const AbSubgroup& h, const AbSubgroup& l) {
  return subgroup_combine(h, l, Combine::intersect);
}

/// [L : H] for H contained in L.
inline Integer subgroup_index(const AbSubgroup& h, const AbSubgroup& l) {
  h.require_same_ambient(l);
  if (!l.contains(h)) throw ContainmentError("subgroup_index: H is not contained in L");
  return l.order() / h.order();
}

/// [A : H].
inline Integer index_in_ambient(const AbSubgroup& h) { return h.ambient().order() / h.order(); }

/// The same subgroup after adding unconstrained coordinates before and after
/// (cylinder extension). Extra coordinates are full, not zero.
inline AbSubgroup widen_full(const AbSubgroup& h, const std::vector<Coeff>& before, const std::vector<Coeff>& after) {
  std::vector<Coeff> m = before;
  m.insert(m.end(), h.ambient().moduli().begin(), h.ambient().moduli().end());
  m.insert(m.end(), after.begin(), after.end());
  return AbSubgroup(FiniteAbelianGroup(std::move(m)), h.basis().widened(before, after));
}

/// The same subgroup viewed inside a larger ambient, padded with zero
/// coordinates (direct-sum inclusion).
inline AbSubgroup widen_zero(const AbSubgroup& h, const std::vector<Coeff>& before, const std::vector<Coeff>& after) {
  std::vector<Coeff> m = before;
  m.insert(m.end(), h.ambient().moduli().begin(), h.ambient().moduli().end());
  m.insert(m.end(), after.begin(), after.end());
  FiniteAbelianGroup big(std::move(m));
  TriangularLattice lat(big.moduli());
  for (const auto& g : h.generators()) {
    Element v(big.rank(), 0);
    std::copy(g.begin(), g.end(), v.begin() + static_cast<std::ptrdiff_t>(before.size()));
    lat.insert(v);
  }
  return AbSubgroup(big, std::move(lat));
}

}  // namespace ent::finabel
