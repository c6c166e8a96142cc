#pragma once

#include "ent/finabel/subgroup.hpp"
#include "ent/matrix.hpp"

#include <optional>
#include <sstream>
#include <variant>

namespace ent::finabel {

/// Homomorphism between finite abelian groups, x -> M x with M of shape
/// rank(target) x rank(source). Row r of M is stored modulo the r-th target
/// modulus. Construct through hom_validate.
class Hom {
 public:
  Hom() = default;

  const FiniteAbelianGroup& source() const { return source_; }
  const FiniteAbelianGroup& target() const { return target_; }
  const Matrix<Coeff>& matrix() const { return matrix_; }

  Element apply(std::span<const Coeff> x) const {
    source_.check_dimension(x);
    Element y(target_.rank(), 0);
    for (std::size_t r = 0; r < target_.rank(); ++r) {
      __int128 acc = 0;
      const Coeff m = target_.modulus(r);
      for (std::size_t c = 0; c < source_.rank(); ++c) {
        const Coeff e = matrix_(r, c);
        if (e == 0 || x[c] == 0) continue;
        acc = (acc + static_cast<__int128>(e) * x[c]) % m;
      }
      y[r] = mod_floor(acc, m);
    }
    return y;
  }

  bool operator==(const Hom&) const = default;

 private:
  friend Hom hom_validate(const Matrix<Coeff>&, const FiniteAbelianGroup&, const FiniteAbelianGroup&);
  friend Hom hom_unchecked(Matrix<Coeff>, FiniteAbelianGroup, FiniteAbelianGroup);
  FiniteAbelianGroup source_;
  FiniteAbelianGroup target_;
  Matrix<Coeff> matrix_;
};

/// Index of the first source generator whose relation is not respected, if any.
inline std::optional<std::size_t> first_violation(const Matrix<Coeff>& m, const FiniteAbelianGroup& a,
                                                  const FiniteAbelianGroup& b) {
  for (std::size_t c = 0; c < a.rank(); ++c)
    for (std::size_t r = 0; r < b.rank(); ++r)
      if (mod_floor(static_cast<__int128>(a.modulus(c)) * m(r, c), b.modulus(r)) != 0) return c;
  return std::nullopt;
}

/// Checks that d_i * M e_i vanishes in the target for every source generator.
inline Hom hom_validate(const Matrix<Coeff>& m, const FiniteAbelianGroup& a, const FiniteAbelianGroup& b) {
  if (m.rows() != b.rank() || m.cols() != a.rank()) {
    std::ostringstream os;
    os << "matrix is " << m.rows() << "x" << m.cols() << ", expected " << b.rank() << "x" << a.rank();
    throw DimensionError(os.str());
  }
  if (auto bad = first_violation(m, a, b)) {
    std::ostringstream os;
    os << "ill-defined homomorphism: generator " << *bad << " has order " << a.modulus(*bad)
       << " but its image (";
    for (std::size_t r = 0; r < b.rank(); ++r) os << (r ? "," : "") << m(r, *bad);
    os << ") is not killed by " << a.modulus(*bad) << " in " << b.describe();
    throw ValidationError(os.str());
  }
  Hom f;
  f.source_ = a;
  f.target_ = b;
  f.matrix_ = Matrix<Coeff>(b.rank(), a.rank());
  for (std::size_t r = 0; r < b.rank(); ++r)
    for (std::size_t c = 0; c < a.rank(); ++c) f.matrix_(r, c) = mod_floor(m(r, c), b.modulus(r));
  return f;
}

/// For matrices produced internally from already-validated data.
inline Hom hom_unchecked(Matrix<Coeff> m, FiniteAbelianGroup a, FiniteAbelianGroup b) {
  Hom f;
  f.source_ = std::move(a);
  f.target_ = std::move(b);
  for (std::size_t r = 0; r < f.target_.rank(); ++r)
    for (std::size_t c = 0; c < f.source_.rank(); ++c) m(r, c) = mod_floor(m(r, c), f.target_.modulus(r));
  f.matrix_ = std::move(m);
  return f;
}

inline Hom identity_hom(const FiniteAbelianGroup& a) {
  return hom_unchecked(Matrix<Coeff>::identity(a.rank()), a, a);
}

inline Hom zero_hom(const FiniteAbelianGroup& a, const FiniteAbelianGroup& b) {
  return hom_unchecked(Matrix<Coeff>(b.rank(), a.rank()), a, b);
}

/// g o f.
inline Hom compose(const Hom& g, const Hom& f) {
  if (!(f.target() == g.source())) throw AmbientMismatch("compose: target of f differs from source of g");
  Matrix<Coeff> m(g.target().rank(), f.source().rank());
  for (std::size_t c = 0; c < f.source().rank(); ++c) {
    Element col = g.apply(f.apply(f.source().unit(c)));
    if (f.source().modulus(c) == 1) continue;
    for (std::size_t r = 0; r < col.size(); ++r) m(r, c) = col[r];
  }
  return hom_unchecked(std::move(m), f.source(), g.target());
}

inline AbSubgroup image(const Hom& f, const AbSubgroup& h) {
  if (!(h.ambient() == f.source())) throw AmbientMismatch("image: subgroup is not in the source group");
  TriangularLattice lat(f.target().moduli());
  for (const auto& g : h.generators()) lat.insert(f.apply(g));
  return AbSubgroup(f.target(), std::move(lat));
}

/// {x in H : f(x) in S}. Builds the lattice on target + source spanned by
/// (f(h), h) and (s, 0) and keeps the part vanishing on the target rows.
inline AbSubgroup restricted_preimage(const Hom& f, const AbSubgroup& h, const AbSubgroup& s) {
  if (!(h.ambient() == f.source())) throw AmbientMismatch("preimage: subgroup H is not in the source group");
  if (!(s.ambient() == f.target())) throw AmbientMismatch("preimage: subgroup S is not in the target group");
  const std::size_t kb = f.target().rank();
  const std::size_t ka = f.source().rank();
  std::vector<Coeff> m = f.target().moduli();
  m.insert(m.end(), f.source().moduli().begin(), f.source().moduli().end());
  TriangularLattice lat(std::move(m));
  Element v(kb + ka, 0);
  for (const auto& g : s.generators()) {
    std::fill(v.begin(), v.end(), 0);
    std::copy(g.begin(), g.end(), v.begin());
    lat.insert(v);
  }
  for (const auto& g : h.generators()) {
    Element y = f.apply(g);
    std::copy(y.begin(), y.end(), v.begin());
    std::copy(g.begin(), g.end(), v.begin() + static_cast<std::ptrdiff_t>(kb));
    lat.insert(v);
  }
  lat.normalize();
  return AbSubgroup(f.source(), lat.trailing(kb));
}

inline AbSubgroup preimage(const Hom& f, const AbSubgroup& s) {
  return restricted_preimage(f, AbSubgroup::whole(f.source()), s);
}

inline AbSubgroup kernel(const Hom& f) { return preimage(f, AbSubgroup(f.target())); }

/// kernel of f restricted to H.
inline AbSubgroup kernel_on(const Hom& f, const AbSubgroup& h) {
  return restricted_preimage(f, h, AbSubgroup(f.target()));
}

struct KernelQuery {};
struct ImageQuery {
  AbSubgroup of;
};
struct PreimageQuery {
  AbSubgroup of;
};
using HomQuery = std::variant<KernelQuery, ImageQuery, PreimageQuery>;

inline AbSubgroup hom_calculus(const Hom& f, const HomQuery& q) {
  return std::visit(
      [&](const auto& query) -> AbSubgroup {
        using Q = std::decay_t<decltype(query)>;
        if constexpr (std::is_same_v<Q, KernelQuery>) return kernel(f);
        else if constexpr (std::is_same_v<Q, ImageQuery>) return image(f, query.of);
        else return preimage(f, query.of);
      },
      q);
}

/// Some x with f(x) = y, or nullopt when y is not in the image. Reduces
/// (y, 0) against the graph lattice on the target rows only.
inline std::optional<Element> solve(const Hom& f, std::span<const Coeff> y) {
  f.target().check_dimension(y);
  const std::size_t kb = f.target().rank();
  const std::size_t ka = f.source().rank();
  std::vector<Coeff> m = f.target().moduli();
  m.insert(m.end(), f.source().moduli().begin(), f.source().moduli().end());
  TriangularLattice lat(m);
  Element v(kb + ka, 0);
  for (std::size_t c = 0; c < ka; ++c) {
    if (f.source().modulus(c) == 1) continue;
    Element img = f.apply(f.source().unit(c));
    std::copy(img.begin(), img.end(), v.begin());
    std::fill(v.begin() + static_cast<std::ptrdiff_t>(kb), v.end(), 0);
    v[kb + c] = 1;
    lat.insert(v);
  }
  Element w(kb + ka, 0);
  for (std::size_t r = 0; r < kb; ++r) w[r] = mod_floor(y[r], m[r]);
  for (std::size_t j = 0; j < kb; ++j) {
    if (w[j] == 0) continue;
    const Coeff h = lat.pivot(j);
    if (w[j] % h != 0) return std::nullopt;
    const Coeff q = w[j] / h;
    for (std::size_t r = j; r < kb + ka; ++r) {
      const Coeff e = lat.entry(r, j);
      if (e != 0) w[r] = mod_floor(static_cast<__int128>(w[r]) - static_cast<__int128>(q) * e, m[r]);
    }
  }
  Element x(ka);
  for (std::size_t c = 0; c < ka; ++c) x[c] = mod_floor(-static_cast<__int128>(w[kb + c]), m[kb + c]);
  return x;
}

}  // namespace ent::finabel
