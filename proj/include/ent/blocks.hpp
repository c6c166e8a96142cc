#pragma once

// Periodic sequences of finite abelian blocks indexed by N, Z or a finite
// range, finite windows of them, and banded maps between windows.

#include "ent/finabel.hpp"

#include <algorithm>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace ent::blocks {

using finabel::Element;
using finabel::FiniteAbelianGroup;

enum class IndexKind { naturals, integers, finite };

struct IndexSet {
  IndexKind kind = IndexKind::naturals;
  std::int64_t size = 0;  // finite only

  static IndexSet naturals() { return {IndexKind::naturals, 0}; }
  static IndexSet integers() { return {IndexKind::integers, 0}; }
  static IndexSet finite(std::int64_t n) {
    if (n < 0) throw ValidationError("finite index set needs a nonnegative size");
    return {IndexKind::finite, n};
  }

  std::int64_t lower() const {
    return kind == IndexKind::integers ? std::numeric_limits<std::int64_t>::min() / 4 : 0;
  }
  std::int64_t upper() const {
    return kind == IndexKind::finite ? size : std::numeric_limits<std::int64_t>::max() / 4;
  }
  bool contains(std::int64_t i) const { return i >= lower() && i < upper(); }
  bool is_finite() const { return kind == IndexKind::finite; }

  std::string describe() const {
    switch (kind) {
      case IndexKind::naturals: return "N";
      case IndexKind::integers: return "Z";
      case IndexKind::finite: return "{0.." + std::to_string(size - 1) + "}";
    }
    return "?";
  }
  bool operator==(const IndexSet&) const = default;
};

/// Half-open index interval [lo, hi).
struct Window {
  std::int64_t lo = 0;
  std::int64_t hi = 0;

  std::int64_t length() const { return hi > lo ? hi - lo : 0; }
  bool empty() const { return hi <= lo; }
  bool contains(std::int64_t i) const { return i >= lo && i < hi; }
  bool contains(const Window& w) const { return w.empty() || (w.lo >= lo && w.hi <= hi); }

  static Window hull(const Window& a, const Window& b) {
    if (a.empty()) return b;
    if (b.empty()) return a;
    return {std::min(a.lo, b.lo), std::max(a.hi, b.hi)};
  }
  bool operator==(const Window&) const = default;
};

inline std::int64_t residue(std::int64_t i, std::size_t period) {
  const auto p = static_cast<std::int64_t>(period);
  return ((i % p) + p) % p;
}

/// Block B_i = types[i mod period], each a list of cyclic moduli.
class BlockSequence {
 public:
  BlockSequence() = default;

  BlockSequence(IndexSet index, std::vector<std::vector<Coeff>> types)
      : index_(index), types_(std::move(types)) {
    if (types_.empty()) throw ValidationError("block sequence needs at least one block type");
    for (std::size_t r = 0; r < types_.size(); ++r) {
      if (types_[r].empty()) throw ValidationError("block type " + std::to_string(r) + " has no components");
      for (Coeff d : types_[r])
        if (d < 1 || d > kMaxModulus)
          throw ValidationError("block type " + std::to_string(r) + " has modulus " + std::to_string(d) +
                                " outside [1, 2^31-1]");
    }
  }

  const IndexSet& index_set() const { return index_; }
  std::size_t period() const { return types_.size(); }
  const std::vector<std::vector<Coeff>>& types() const { return types_; }
  const std::vector<Coeff>& block(std::int64_t i) const { return types_[residue(i, period())]; }
  std::size_t block_rank(std::int64_t i) const { return block(i).size(); }
  Coeff modulus(std::int64_t i, std::size_t c) const { return block(i)[c]; }

  Window clip(Window w) const {
    w.lo = std::max(w.lo, index_.lower());
    w.hi = std::min(w.hi, index_.upper());
    if (w.hi < w.lo) w.hi = w.lo;
    return w;
  }

  std::vector<Coeff> moduli(const Window& w) const {
    std::vector<Coeff> m;
    for (std::int64_t i = w.lo; i < w.hi; ++i) m.insert(m.end(), block(i).begin(), block(i).end());
    return m;
  }

  FiniteAbelianGroup window_group(const Window& w) const { return FiniteAbelianGroup(moduli(w)); }

  /// Flat coordinate of (i, c) inside the window group of w.
  std::size_t coord(const Window& w, std::int64_t i, std::size_t c) const {
    return prefix(w.lo, i) + c;
  }

  /// Number of flat coordinates for indices in [from, to).
  std::size_t prefix(std::int64_t from, std::int64_t to) const {
    if (to <= from) return 0;
    std::size_t per = 0;
    for (const auto& t : types_) per += t.size();
    const auto p = static_cast<std::int64_t>(period());
    const std::int64_t full = (to - from) / p;
    std::size_t n = static_cast<std::size_t>(full) * per;
    for (std::int64_t i = from + full * p; i < to; ++i) n += block_rank(i);
    return n;
  }

  /// Moves x from window `from` into the larger window `to`, padding with zeros.
  Element embed(const Window& from, const Window& to, const Element& x) const {
    Element y(prefix(to.lo, to.hi), 0);
    const std::size_t off = prefix(to.lo, from.lo);
    std::copy(x.begin(), x.end(), y.begin() + static_cast<std::ptrdiff_t>(off));
    return y;
  }

  /// Coordinates of x (on window `from`) restricted to the sub-window `to`.
  Element restrict(const Window& from, const Window& to, const Element& x) const {
    const std::size_t off = prefix(from.lo, to.lo);
    const std::size_t len = prefix(to.lo, to.hi);
    return Element(x.begin() + static_cast<std::ptrdiff_t>(off), x.begin() + static_cast<std::ptrdiff_t>(off + len));
  }

  std::string describe() const {
    std::ostringstream os;
    os << "blocks over " << index_.describe() << " with period " << period() << ": ";
    for (std::size_t r = 0; r < types_.size(); ++r) {
      os << (r ? ", " : "") << FiniteAbelianGroup(types_[r]).describe();
    }
    return os.str();
  }

  bool operator==(const BlockSequence&) const = default;

 private:
  IndexSet index_;
  std::vector<std::vector<Coeff>> types_;
};

struct Term {
  std::int64_t offset = 0;
  std::size_t component = 0;
  Coeff coeff = 0;
  bool operator==(const Term&) const = default;
};

/// terms[i mod period][c] lists the (offset, component, coeff) entries of
/// index i, component c. Read as generator images (column-finite maps) or as
/// coordinate formulas (row-finite maps) depending on the caller.
struct BandedMap {
  std::size_t period = 1;
  std::vector<std::vector<std::vector<Term>>> terms;

  const std::vector<Term>& at(std::int64_t i, std::size_t c) const { return terms[residue(i, period)][c]; }

  /// Smallest and largest offset used (0 for a map without terms).
  std::int64_t min_offset() const { return offset_bound(false); }
  std::int64_t max_offset() const { return offset_bound(true); }
  bool operator==(const BandedMap&) const = default;

 private:
  std::int64_t offset_bound(bool upper) const {
    std::optional<std::int64_t> m;
    for (const auto& r : terms)
      for (const auto& c : r)
        for (const auto& t : c)
          if (!m || (upper ? t.offset > *m : t.offset < *m)) m = t.offset;
    return m.value_or(0);
  }
};

enum class Reading { columns, rows };

/// Shape and well-definedness check. Columns: e_{i,c} -> sum coeff e_{i+o,c'}
/// needs d_{i,c} coeff = 0 mod d_{i+o,c'}. Rows: psi(x)_{i,c} = sum coeff
/// x_{i+o,c'} needs d_{i+o,c'} coeff = 0 mod d_{i,c}.
inline BandedMap validate_banded(const BlockSequence& b, BandedMap m, Reading reading) {
  if (m.period == 0 || m.period % b.period() != 0)
    throw ValidationError("map period " + std::to_string(m.period) + " is not a multiple of the block period " +
                          std::to_string(b.period()));
  if (m.terms.size() != m.period)
    throw ValidationError("map lists " + std::to_string(m.terms.size()) + " residues, expected " +
                          std::to_string(m.period));
  for (std::size_t r = 0; r < m.period; ++r) {
    const auto i = static_cast<std::int64_t>(r);
    if (m.terms[r].size() != b.block_rank(i))
      throw ValidationError("residue " + std::to_string(r) + " lists " + std::to_string(m.terms[r].size()) +
                            " components, block has " + std::to_string(b.block_rank(i)));
    for (std::size_t c = 0; c < m.terms[r].size(); ++c) {
      auto& list = m.terms[r][c];
      for (auto& t : list) {
        const std::int64_t j = i + t.offset;
        if (t.component >= b.block_rank(j)) {
          std::ostringstream os;
          os << "generator (residue " << r << ", component " << c << "): term at offset " << t.offset
             << " names component " << t.component << " but that block has " << b.block_rank(j);
          throw ValidationError(os.str());
        }
        const Coeff src = reading == Reading::columns ? b.modulus(i, c) : b.modulus(j, t.component);
        const Coeff dst = reading == Reading::columns ? b.modulus(j, t.component) : b.modulus(i, c);
        t.coeff = mod_floor(t.coeff, dst);
        if (mod_floor(static_cast<__int128>(src) * t.coeff, dst) != 0) {
          std::ostringstream os;
          os << "ill-defined map at generator (residue " << r << ", component " << c << "): coefficient "
             << t.coeff << " at offset " << t.offset << " sends an element of order dividing " << src
             << " into Z/" << dst << " without respecting the relation";
          throw ValidationError(os.str());
        }
      }
      std::sort(list.begin(), list.end(), [](const Term& x, const Term& y) {
        return std::tie(x.offset, x.component) < std::tie(y.offset, y.component);
      });
      // merge repeated (offset, component) pairs
      std::vector<Term> merged;
      for (const auto& t : list) {
        if (!merged.empty() && merged.back().offset == t.offset && merged.back().component == t.component) {
          const Coeff dst = reading == Reading::columns ? b.modulus(i + t.offset, t.component) : b.modulus(i, c);
          merged.back().coeff = mod_floor(static_cast<__int128>(merged.back().coeff) + t.coeff, dst);
        } else {
          merged.push_back(t);
        }
      }
      std::erase_if(merged, [](const Term& t) { return t.coeff == 0; });
      list = std::move(merged);
    }
  }
  return m;
}

/// Identity map in either reading.
inline BandedMap identity_map(const BlockSequence& b) {
  BandedMap m{b.period(), {}};
  m.terms.resize(b.period());
  for (std::size_t r = 0; r < b.period(); ++r)
    for (std::size_t c = 0; c < b.types()[r].size(); ++c) m.terms[r].push_back({Term{0, c, 1}});
  return m;
}

inline BandedMap zero_map(const BlockSequence& b) {
  BandedMap m{b.period(), {}};
  m.terms.resize(b.period());
  for (std::size_t r = 0; r < b.period(); ++r) m.terms[r].resize(b.types()[r].size());
  return m;
}

/// Every component c of index i goes to offset `shift`, same component.
/// Needs a block sequence invariant under the shift.
inline BandedMap shift_map(const BlockSequence& b, std::int64_t shift) {
  BandedMap m{b.period(), {}};
  m.terms.resize(b.period());
  for (std::size_t r = 0; r < b.period(); ++r)
    for (std::size_t c = 0; c < b.types()[r].size(); ++c) m.terms[r].push_back({Term{shift, c, 1}});
  return m;
}

/// Columns reading: the map restricted to A_W, landing in A_{W'} where W'
/// is W grown by the band and clipped to the index set.
struct WindowHom {
  Window source;
  Window target;
  finabel::Hom hom;
};

inline WindowHom column_window_map(const BlockSequence& b, const BandedMap& m, const Window& w) {
  const Window out = b.clip({w.lo + std::min<std::int64_t>(0, m.min_offset()),
                             w.hi + std::max<std::int64_t>(0, m.max_offset())});
  const Window tgt = Window::hull(out, w);
  Matrix<Coeff> mat(b.prefix(tgt.lo, tgt.hi), b.prefix(w.lo, w.hi));
  std::size_t col = 0;
  for (std::int64_t i = w.lo; i < w.hi; ++i)
    for (std::size_t c = 0; c < b.block_rank(i); ++c, ++col)
      for (const auto& t : m.at(i, c)) {
        const std::int64_t j = i + t.offset;
        if (!b.index_set().contains(j)) continue;
        const std::size_t row = b.coord(tgt, j, t.component);
        mat(row, col) = mod_floor(static_cast<__int128>(mat(row, col)) + t.coeff, b.modulus(j, t.component));
      }
  return {w, tgt, finabel::hom_unchecked(std::move(mat), b.window_group(w), b.window_group(tgt))};
}

/// Rows reading: the coordinates of psi(x) on W as a map from A_{W'}, W'
/// the dependency window (always containing W).
inline WindowHom row_window_map(const BlockSequence& b, const BandedMap& m, const Window& w) {
  const Window src = Window::hull(w, b.clip({w.lo + m.min_offset(), w.hi + m.max_offset()}));
  Matrix<Coeff> mat(b.prefix(w.lo, w.hi), b.prefix(src.lo, src.hi));
  std::size_t row = 0;
  for (std::int64_t i = w.lo; i < w.hi; ++i)
    for (std::size_t c = 0; c < b.block_rank(i); ++c, ++row)
      for (const auto& t : m.at(i, c)) {
        const std::int64_t j = i + t.offset;
        if (!b.index_set().contains(j)) continue;
        const std::size_t col = b.coord(src, j, t.component);
        mat(row, col) = mod_floor(static_cast<__int128>(mat(row, col)) + t.coeff, b.modulus(i, c));
      }
  return {src, w, finabel::hom_unchecked(std::move(mat), b.window_group(src), b.window_group(w))};
}

}  // namespace ent::blocks
