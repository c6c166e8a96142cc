#pragma once

#include "ent/finabel/group.hpp"

#include <algorithm>
#include <cassert>
#include <span>
#include <vector>

namespace ent::finabel {

/// Lower-triangular basis of a lattice L with diag(d) Z^k <= L <= Z^k, i.e.
/// of a subgroup of Z/d_1 + ... + Z/d_k.
///
/// Column j has its pivot on row j. The pivot h_j divides d_j, and a column
/// whose pivot equals d_j with an all-zero tail is the bare relation d_j e_j;
/// those are not stored. After normalize() every entry below a pivot row r
/// lies in [0, h_r), which is the column Hermite normal form and therefore
/// unique per subgroup. All coordinates are kept reduced modulo d.
class TriangularLattice {
 public:
  TriangularLattice() = default;

  explicit TriangularLattice(std::vector<Coeff> moduli)
      : moduli_(std::move(moduli)), cols_(moduli_.size()) {}

  std::size_t rank() const { return moduli_.size(); }
  const std::vector<Coeff>& moduli() const { return moduli_; }

  Coeff pivot(std::size_t j) const { return cols_[j].empty() ? moduli_[j] : cols_[j][0]; }

  /// Entry of column j on row r (r >= j).
  Coeff entry(std::size_t r, std::size_t j) const {
    if (r < j) return 0;
    if (cols_[j].empty()) return r == j ? moduli_[j] : 0;
    std::size_t t = r - j;
    return t < cols_[j].size() ? cols_[j][t] : 0;
  }

  bool is_relation_column(std::size_t j) const { return cols_[j].empty(); }

  /// Full column j as a reduced element (the pivot d_j of a relation column
  /// reduces to 0).
  Element column_element(std::size_t j) const {
    Element e(rank(), 0);
    for (std::size_t t = 0; t < cols_[j].size(); ++t) e[j + t] = mod_floor(cols_[j][t], moduli_[j + t]);
    return e;
  }

  /// Subgroup order prod d_j / h_j.
  Integer subgroup_order() const {
    Integer n = 1;
    for (std::size_t j = 0; j < rank(); ++j) n *= moduli_[j] / pivot(j);
    return n;
  }

  /// Columns with a proper pivot; together they generate the subgroup.
  std::vector<Element> generators() const {
    std::vector<Element> gens;
    for (std::size_t j = 0; j < rank(); ++j)
      if (pivot(j) < moduli_[j]) gens.push_back(column_element(j));
    return gens;
  }

  void insert(std::span<const Coeff> x) {
    assert(x.size() == rank());
    std::vector<Coeff> v(rank());
    std::size_t last = 0;
    bool any = false;
    for (std::size_t i = 0; i < rank(); ++i) {
      v[i] = mod_floor(x[i], moduli_[i]);
      if (v[i] != 0) {
        last = i;
        any = true;
      }
    }
    if (!any) return;
    normalized_ = false;
    for (std::size_t j = 0; j < rank() && j <= last; ++j) {
      if (v[j] == 0) continue;
      const Coeff d = moduli_[j];
      auto& col = cols_[j];
      if (col.empty()) {
        // Combine v with d_j e_j: the new column is a*v with pivot g, the
        // remainder is (d_j/g) v with row j cleared.
        auto [g, a, b] = xgcd(v[j], d);
        (void)b;
        col.assign(last - j + 1, 0);
        col[0] = g;
        for (std::size_t r = j + 1; r <= last; ++r)
          col[r - j] = mod_floor(static_cast<__int128>(a) * v[r], moduli_[r]);
        trim(col);
        const Coeff s = d / g;
        v[j] = 0;
        last = scale_tail(v, j + 1, last, s);
        if (col.size() == 1 && col[0] == d) col.clear();
        continue;
      }
      const Coeff h = col[0];
      const std::size_t end = std::max(last, j + col.size() - 1);
      if (v[j] % h == 0) {
        const Coeff q = v[j] / h;
        for (std::size_t r = j; r <= end; ++r) {
          Coeff c = r - j < col.size() ? col[r - j] : 0;
          if (c != 0) v[r] = mod_floor(static_cast<__int128>(v[r]) - static_cast<__int128>(q) * c, moduli_[r]);
        }
        last = last_nonzero(v, j, end);
        if (v[last] == 0) return;
        continue;
      }
      auto [g, a, b] = xgcd(v[j], h);
      const Coeff vj = v[j];
      std::vector<Coeff> fresh(end - j + 1, 0);
      for (std::size_t r = j; r <= end; ++r) {
        const Coeff c = r - j < col.size() ? col[r - j] : 0;
        const Coeff m = moduli_[r];
        fresh[r - j] = mod_floor(static_cast<__int128>(a) * v[r] + static_cast<__int128>(b) * c, m);
        v[r] = mod_floor(static_cast<__int128>(h / g) * v[r] - static_cast<__int128>(vj / g) * c, m);
      }
      fresh[0] = g;
      trim(fresh);
      col = std::move(fresh);
      last = last_nonzero(v, j, end);
      if (v[last] == 0) return;
    }
  }

  bool contains(std::span<const Coeff> x) const {
    assert(x.size() == rank());
    std::vector<Coeff> v(rank());
    for (std::size_t i = 0; i < rank(); ++i) v[i] = mod_floor(x[i], moduli_[i]);
    for (std::size_t j = 0; j < rank(); ++j) {
      if (v[j] == 0) continue;
      const Coeff h = pivot(j);
      if (v[j] % h != 0) return false;
      const Coeff q = v[j] / h;
      const auto& col = cols_[j];
      for (std::size_t t = 0; t < col.size(); ++t) {
        const std::size_t r = j + t;
        v[r] = mod_floor(static_cast<__int128>(v[r]) - static_cast<__int128>(q) * col[t], moduli_[r]);
      }
    }
    return true;
  }

  /// Brings the basis to column Hermite normal form.
  void normalize() {
    if (normalized_) return;
    for (std::size_t j = 0; j < rank(); ++j) {
      auto& col = cols_[j];
      if (col.empty()) continue;
      for (std::size_t t = 1; t < col.size(); ++t) {
        const std::size_t r = j + t;
        if (col[t] == 0 || cols_[r].empty()) continue;
        const auto& red = cols_[r];
        const Coeff q = div_floor(col[t], red[0]);
        if (q == 0) continue;
        if (j + col.size() < r + red.size()) col.resize(r + red.size() - j, 0);
        for (std::size_t u = 0; u < red.size(); ++u) {
          const std::size_t row = r + u;
          col[row - j] = mod_floor(static_cast<__int128>(col[row - j]) - static_cast<__int128>(q) * red[u],
                                   moduli_[row]);
        }
      }
      trim(col);
      if (col.size() == 1 && col[0] == moduli_[j]) col.clear();
    }
    normalized_ = true;
  }

  bool normalized() const { return normalized_; }

  /// Sub-lattice of vectors vanishing on rows [0, offset), restricted to the
  /// remaining rows. For a graph lattice on B + A this is the preimage step.
  TriangularLattice trailing(std::size_t offset) const {
    TriangularLattice out(std::vector<Coeff>(moduli_.begin() + static_cast<std::ptrdiff_t>(offset), moduli_.end()));
    for (std::size_t j = offset; j < rank(); ++j) out.cols_[j - offset] = cols_[j];
    out.normalized_ = normalized_;
    return out;
  }

  /// Same subgroup inside the ambient obtained by adding `before` coordinates
  /// in front and `after` coordinates at the back, all unconstrained (full).
  TriangularLattice widened(std::span<const Coeff> before, std::span<const Coeff> after) const {
    std::vector<Coeff> m(before.begin(), before.end());
    m.insert(m.end(), moduli_.begin(), moduli_.end());
    m.insert(m.end(), after.begin(), after.end());
    TriangularLattice out(std::move(m));
    for (std::size_t j = 0; j < before.size(); ++j)
      if (before[j] > 1) out.cols_[j] = {1};
    for (std::size_t j = 0; j < rank(); ++j) out.cols_[before.size() + j] = cols_[j];
    for (std::size_t j = 0; j < after.size(); ++j)
      if (after[j] > 1) out.cols_[before.size() + rank() + j] = {1};
    out.normalized_ = normalized_;
    return out;
  }

  bool operator==(const TriangularLattice& other) const {
    assert(normalized_ && other.normalized_);
    return moduli_ == other.moduli_ && cols_ == other.cols_;
  }

 private:
  static void trim(std::vector<Coeff>& col) {
    while (col.size() > 1 && col.back() == 0) col.pop_back();
  }

  std::size_t scale_tail(std::vector<Coeff>& v, std::size_t from, std::size_t last, Coeff s) const {
    std::size_t new_last = from == 0 ? 0 : from - 1;
    for (std::size_t r = from; r <= last; ++r) {
      if (v[r] == 0) continue;
      v[r] = mod_floor(static_cast<__int128>(v[r]) * s, moduli_[r]);
      if (v[r] != 0) new_last = r;
    }
    return new_last;
  }

  static std::size_t last_nonzero(const std::vector<Coeff>& v, std::size_t from, std::size_t end) {
    for (std::size_t r = end + 1; r-- > from;)
      if (v[r] != 0) return r;
    return from;
  }

  std::vector<Coeff> moduli_;
  std::vector<std::vector<Coeff>> cols_;
  bool normalized_ = true;
};

}  // namespace ent::finabel
