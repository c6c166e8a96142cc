#pragma once

// Small generic finite-group engine. Groups are anything with multiply,
// inverse and identity; subgroups are explicit sorted element sets.

#include "ent/integer.hpp"

#include <algorithm>
#include <concepts>
#include <cstdint>
#include <deque>
#include <set>
#include <sstream>
#include <vector>

namespace ent::gengroup {

class NormalityError : public HypothesisError {
 public:
  using HypothesisError::HypothesisError;
};

template <class G>
concept GroupLike = requires(const G& g, const typename G::value_type& a) {
  { g.multiply(a, a) } -> std::convertible_to<typename G::value_type>;
  { g.inverse(a) } -> std::convertible_to<typename G::value_type>;
  { g.identity() } -> std::convertible_to<typename G::value_type>;
};

/// Group given by its multiplication table on {0, ..., n-1}.
class FiniteGroup {
 public:
  using value_type = std::size_t;
  static constexpr std::size_t kMaxOrder = 512;

  FiniteGroup() : n_(1), table_{0}, inverse_{0} {}

  std::size_t order() const { return n_; }
  value_type multiply(value_type a, value_type b) const { return table_[a * n_ + b]; }
  value_type inverse(value_type a) const { return inverse_[a]; }
  value_type identity() const { return identity_; }

  std::vector<value_type> elements() const {
    std::vector<value_type> all(n_);
    for (std::size_t i = 0; i < n_; ++i) all[i] = i;
    return all;
  }

  bool is_abelian() const {
    for (std::size_t a = 0; a < n_; ++a)
      for (std::size_t b = a + 1; b < n_; ++b)
        if (multiply(a, b) != multiply(b, a)) return false;
    return true;
  }

  const std::vector<std::uint32_t>& table() const { return table_; }
  bool operator==(const FiniteGroup&) const = default;

 private:
  friend FiniteGroup cayley_group(const std::vector<std::vector<std::size_t>>& table);
  std::size_t n_;
  std::vector<std::uint32_t> table_;
  std::vector<std::uint32_t> inverse_;
  std::size_t identity_ = 0;
};

/// Validates a Cayley table: closure, identity, inverses, associativity.
inline FiniteGroup cayley_group(const std::vector<std::vector<std::size_t>>& table) {
  const std::size_t n = table.size();
  if (n == 0) throw ValidationError("Cayley table is empty");
  if (n > FiniteGroup::kMaxOrder) {
    std::ostringstream os;
    os << "Cayley table of order " << n << " exceeds the cap of " << FiniteGroup::kMaxOrder;
    throw ValidationError(os.str());
  }
  FiniteGroup g;
  g.n_ = n;
  g.table_.assign(n * n, 0);
  for (std::size_t a = 0; a < n; ++a) {
    if (table[a].size() != n) throw ValidationError("Cayley table is not square");
    for (std::size_t b = 0; b < n; ++b) {
      if (table[a][b] >= n) {
        std::ostringstream os;
        os << "Cayley table entry (" << a << "," << b << ") = " << table[a][b] << " is out of range";
        throw ValidationError(os.str());
      }
      g.table_[a * n + b] = static_cast<std::uint32_t>(table[a][b]);
    }
  }
  std::size_t e = n;
  for (std::size_t a = 0; a < n && e == n; ++a) {
    bool ok = true;
    for (std::size_t b = 0; b < n && ok; ++b) ok = table[a][b] == b && table[b][a] == b;
    if (ok) e = a;
  }
  if (e == n) throw ValidationError("Cayley table has no identity element");
  g.identity_ = e;
  g.inverse_.assign(n, 0);
  for (std::size_t a = 0; a < n; ++a) {
    std::size_t inv = n;
    for (std::size_t b = 0; b < n; ++b)
      if (table[a][b] == e && table[b][a] == e) {
        inv = b;
        break;
      }
    if (inv == n) {
      std::ostringstream os;
      os << "element " << a << " has no inverse";
      throw ValidationError(os.str());
    }
    g.inverse_[a] = static_cast<std::uint32_t>(inv);
  }
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) {
      const std::size_t ab = g.multiply(a, b);
      for (std::size_t c = 0; c < n; ++c)
        if (g.multiply(ab, c) != g.multiply(a, g.multiply(b, c))) {
          std::ostringstream os;
          os << "Cayley table is not associative: witness (" << a << "," << b << "," << c << ")";
          throw ValidationError(os.str());
        }
    }
  return g;
}

/// Subgroup stored as its sorted element list.
template <class T>
struct ElementSubgroup {
  std::vector<T> elements;

  std::size_t order() const { return elements.size(); }
  bool contains(const T& x) const { return std::binary_search(elements.begin(), elements.end(), x); }
  bool contains(const ElementSubgroup& other) const {
    return std::includes(elements.begin(), elements.end(), other.elements.begin(), other.elements.end());
  }
  bool operator==(const ElementSubgroup&) const = default;
};

using GenSubgroup = ElementSubgroup<std::size_t>;

template <class T>
ElementSubgroup<T> from_set(std::set<T> s) {
  return ElementSubgroup<T>{std::vector<T>(s.begin(), s.end())};
}

/// Smallest subgroup containing `gens` (breadth-first product closure; in a
/// finite group closure under multiplication suffices).
template <GroupLike G>
ElementSubgroup<typename G::value_type> closure(const G& g, const std::vector<typename G::value_type>& gens,
                                                std::size_t limit = SIZE_MAX) {
  using T = typename G::value_type;
  std::set<T> seen{g.identity()};
  std::deque<T> todo{g.identity()};
  while (!todo.empty()) {
    T x = todo.front();
    todo.pop_front();
    for (const auto& s : gens) {
      T y = g.multiply(x, s);
      if (seen.insert(y).second) {
        if (seen.size() > limit) throw Error("closure exceeded element budget");
        todo.push_back(y);
      }
    }
  }
  return from_set(std::move(seen));
}

/// True when c h c^-1 lies in H for every conjugator c and h in H.
template <GroupLike G>
bool normalized_by(const G& g, const ElementSubgroup<typename G::value_type>& h,
                   const std::vector<typename G::value_type>& conjugators) {
  for (const auto& c : conjugators) {
    const auto ci = g.inverse(c);
    for (const auto& x : h.elements)
      if (!h.contains(g.multiply(g.multiply(c, x), ci))) return false;
  }
  return true;
}

inline bool is_normal(const FiniteGroup& g, const GenSubgroup& h) { return normalized_by(g, h, g.elements()); }

/// Greatest normal subgroup of G inside H: the intersection of all conjugates.
inline GenSubgroup heart(const FiniteGroup& g, const GenSubgroup& h) {
  std::vector<std::size_t> core = h.elements;
  for (std::size_t c = 0; c < g.order() && core.size() > 1; ++c) {
    const std::size_t ci = g.inverse(c);
    std::vector<std::size_t> keep;
    // x stays iff c^-1 x c lies in H, i.e. x lies in c H c^-1
    for (std::size_t x : core)
      if (h.contains(g.multiply(g.multiply(ci, x), c))) keep.push_back(x);
    core = std::move(keep);
  }
  return GenSubgroup{core};
}

inline std::size_t index(const FiniteGroup& g, const GenSubgroup& h) { return g.order() / h.order(); }

enum class NormalQuery { is_normal, heart, index };

struct NormalAnswer {
  bool normal = false;
  GenSubgroup heart;
  std::size_t index = 0;
};

inline NormalAnswer normal_tools(const FiniteGroup& g, const GenSubgroup& h, NormalQuery q) {
  NormalAnswer a;
  switch (q) {
    case NormalQuery::is_normal: a.normal = is_normal(g, h); break;
    case NormalQuery::heart: a.heart = heart(g, h); break;
    case NormalQuery::index: a.index = index(g, h); break;
  }
  return a;
}

template <class T>
ElementSubgroup<T> intersect(const ElementSubgroup<T>& a, const ElementSubgroup<T>& b) {
  ElementSubgroup<T> out;
  std::set_intersection(a.elements.begin(), a.elements.end(), b.elements.begin(), b.elements.end(),
                        std::back_inserter(out.elements));
  return out;
}

/// H N as an element set; requires N to be normalized by H.
template <GroupLike G>
ElementSubgroup<typename G::value_type> subgroup_product(const G& g, const ElementSubgroup<typename G::value_type>& h,
                                                         const ElementSubgroup<typename G::value_type>& n) {
  if (!normalized_by(g, n, h.elements))
    throw NormalityError("subgroup_product: N is not normalized by H, so H*N need not be a subgroup");
  using T = typename G::value_type;
  std::set<T> prod;
  for (const auto& x : h.elements)
    for (const auto& y : n.elements) prod.insert(g.multiply(x, y));
  return from_set(std::move(prod));
}

/// Direct power G^W with coordinatewise multiplication; elements are index
/// tuples. Used for finite windows of restricted direct sums.
class PowerGroup {
 public:
  using value_type = std::vector<std::uint16_t>;

  PowerGroup(const FiniteGroup& base, std::size_t width) : base_(&base), width_(width) {}

  std::size_t width() const { return width_; }
  const FiniteGroup& base() const { return *base_; }

  value_type multiply(const value_type& a, const value_type& b) const {
    value_type c(width_);
    for (std::size_t i = 0; i < width_; ++i) c[i] = static_cast<std::uint16_t>(base_->multiply(a[i], b[i]));
    return c;
  }
  value_type inverse(const value_type& a) const {
    value_type c(width_);
    for (std::size_t i = 0; i < width_; ++i) c[i] = static_cast<std::uint16_t>(base_->inverse(a[i]));
    return c;
  }
  value_type identity() const { return value_type(width_, static_cast<std::uint16_t>(base_->identity())); }

 private:
  const FiniteGroup* base_;
  std::size_t width_;
};

}  // namespace ent::gengroup
