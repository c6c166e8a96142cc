#pragma once

#include "ent/finabel/hom.hpp"
#include "ent/integer.hpp"
#include "ent/matrix.hpp"

#include <utility>

namespace ent::finabel {

struct SmithForm {
  Matrix<Integer> s;  ///< diagonal, s_1 | s_2 | ..., nonnegative
  Matrix<Integer> u;  ///< unimodular, rows(M) x rows(M)
  Matrix<Integer> v;  ///< unimodular, cols(M) x cols(M)
};

namespace detail {

inline void swap_rows(Matrix<Integer>& m, std::size_t a, std::size_t b) {
  for (std::size_t c = 0; c < m.cols(); ++c) std::swap(m(a, c), m(b, c));
}
inline void swap_cols(Matrix<Integer>& m, std::size_t a, std::size_t b) {
  for (std::size_t r = 0; r < m.rows(); ++r) std::swap(m(r, a), m(r, b));
}
// rows (a, b) <- (x*a + y*b, z*a + w*b)
inline void mix_rows(Matrix<Integer>& m, std::size_t a, std::size_t b, const Integer& x, const Integer& y,
                     const Integer& z, const Integer& w) {
  for (std::size_t c = 0; c < m.cols(); ++c) {
    Integer ra = m(a, c), rb = m(b, c);
    m(a, c) = x * ra + y * rb;
    m(b, c) = z * ra + w * rb;
  }
}
inline void mix_cols(Matrix<Integer>& m, std::size_t a, std::size_t b, const Integer& x, const Integer& y,
                     const Integer& z, const Integer& w) {
  for (std::size_t r = 0; r < m.rows(); ++r) {
    Integer ca = m(r, a), cb = m(r, b);
    m(r, a) = x * ca + y * cb;
    m(r, b) = z * ca + w * cb;
  }
}

}  // namespace detail

/// U M V = S with S in Smith normal form. Works on arbitrary integer
/// matrices with exact big-integer arithmetic.
inline SmithForm smith_normal_form(const Matrix<Integer>& m) {
  using detail::mix_cols;
  using detail::mix_rows;
  const std::size_t rows = m.rows(), cols = m.cols();
  SmithForm out{m, Matrix<Integer>::identity(rows), Matrix<Integer>::identity(cols)};
  auto& s = out.s;
  const std::size_t n = std::min(rows, cols);

  for (std::size_t t = 0; t < n; ++t) {
    // pivot: smallest nonzero |entry| in the lower-right block
    std::size_t pr = rows, pc = cols;
    for (std::size_t r = t; r < rows; ++r)
      for (std::size_t c = t; c < cols; ++c)
        if (s(r, c) != 0 && (pr == rows || abs(s(r, c)) < abs(s(pr, pc)))) {
          pr = r;
          pc = c;
        }
    if (pr == rows) break;
    detail::swap_rows(s, t, pr);
    detail::swap_rows(out.u, t, pr);
    detail::swap_cols(s, t, pc);
    detail::swap_cols(out.v, t, pc);

    while (true) {
      for (std::size_t r = t + 1; r < rows; ++r) {
        if (s(r, t) == 0) continue;
        if (s(r, t) % s(t, t) == 0) {
          Integer q = s(r, t) / s(t, t);
          mix_rows(s, t, r, 1, 0, -q, 1);
          mix_rows(out.u, t, r, 1, 0, -q, 1);
          continue;
        }
        Integer x, y;
        Integer g = xgcd_big(s(t, t), s(r, t), x, y);
        Integer a = s(t, t) / g, b = s(r, t) / g;
        mix_rows(s, t, r, x, y, -b, a);
        mix_rows(out.u, t, r, x, y, -b, a);
      }
      bool row_touched = false;
      for (std::size_t c = t + 1; c < cols; ++c) {
        if (s(t, c) == 0) continue;
        if (s(t, c) % s(t, t) == 0) {
          Integer q = s(t, c) / s(t, t);
          mix_cols(s, t, c, 1, 0, -q, 1);
          mix_cols(out.v, t, c, 1, 0, -q, 1);
          continue;
        }
        Integer x, y;
        Integer g = xgcd_big(s(t, t), s(t, c), x, y);
        Integer a = s(t, t) / g, b = s(t, c) / g;
        mix_cols(s, t, c, x, y, -b, a);
        mix_cols(out.v, t, c, x, y, -b, a);
        row_touched = true;
      }
      if (row_touched) continue;  // column ops may refill column t
      // the pivot must divide the whole remaining block
      std::size_t bad = rows;
      for (std::size_t r = t + 1; r < rows && bad == rows; ++r)
        for (std::size_t c = t + 1; c < cols; ++c)
          if (s(r, c) % s(t, t) != 0) {
            bad = r;
            break;
          }
      if (bad == rows) break;
      mix_rows(s, t, bad, 1, 1, 0, 1);
      mix_rows(out.u, t, bad, 1, 1, 0, 1);
    }
    if (s(t, t) < 0) {
      for (std::size_t c = 0; c < cols; ++c) s(t, c) = -s(t, c);
      for (std::size_t c = 0; c < rows; ++c) out.u(t, c) = -out.u(t, c);
    }
  }
  return out;
}

/// A/H presented with diagonal moduli (nontrivial invariant factors only),
/// together with the projection A -> A/H.
struct Quotient {
  FiniteAbelianGroup group;
  Hom projection;
};

inline Quotient quotient(const AbSubgroup& h) {
  const auto& a = h.ambient();
  const std::size_t k = a.rank();
  Matrix<Integer> basis(k, k);
  for (std::size_t j = 0; j < k; ++j)
    for (std::size_t r = j; r < k; ++r) basis(r, j) = h.basis().entry(r, j);
  SmithForm f = smith_normal_form(basis);
  // Z^k / basis Z^k ~ (+) Z/s_i via x -> U x.
  std::vector<Coeff> moduli;
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < k; ++i)
    if (f.s(i, i) != 1) {
      moduli.push_back(f.s(i, i).convert_to<Coeff>());
      rows.push_back(i);
    }
  FiniteAbelianGroup q(moduli);
  Matrix<Coeff> proj(rows.size(), k);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t c = 0; c < k; ++c) {
      Integer e = f.u(rows[i], c) % moduli[i];
      if (e < 0) e += moduli[i];
      proj(i, c) = e.convert_to<Coeff>();
    }
  return {q, hom_unchecked(std::move(proj), a, q)};
}

}  // namespace ent::finabel
