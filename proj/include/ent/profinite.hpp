#pragma once

// Profinite abelian groups as full products of periodic finite blocks, open
// cylinder subgroups, row-finite endomorphisms, cotrajectories and
// topological entropy.

#include "ent/blocks.hpp"
#include "ent/entropy_value.hpp"

#include <numeric>
#include <optional>
#include <sstream>
#include <vector>

namespace ent::profinite {

using blocks::BandedMap;
using blocks::BlockSequence;
using blocks::IndexSet;
using blocks::Window;
using finabel::AbSubgroup;
using finabel::Element;
using finabel::FiniteAbelianGroup;

/// Full product of the blocks of `blocks`.
class ProGroup {
 public:
  ProGroup() = default;
  explicit ProGroup(BlockSequence b) : blocks_(std::move(b)) {}
  const BlockSequence& blocks() const { return blocks_; }
  const IndexSet& index_set() const { return blocks_.index_set(); }
  bool is_finite() const { return index_set().is_finite(); }
  Window full_window() const {
    if (!is_finite()) throw ValidationError("full window exists only for a finite index set");
    return {0, index_set().size};
  }
  bool operator==(const ProGroup&) const = default;
  std::string describe() const { return "full product, " + blocks_.describe(); }

 private:
  BlockSequence blocks_;
};

inline ProGroup pro_group(BlockSequence b) { return ProGroup(std::move(b)); }

/// {x : x restricted to `window` lies in `core`}.
struct CylinderSubgroup {
  Window window;
  AbSubgroup core;
};

inline CylinderSubgroup cylinder(const ProGroup& k, Window w, const AbSubgroup& core) {
  if (w.empty()) w = {0, 0};
  if (k.blocks().clip(w) != w)
    throw ValidationError("cylinder window [" + std::to_string(w.lo) + "," + std::to_string(w.hi) +
                          ") leaves the index set " + k.index_set().describe());
  if (!(core.ambient() == k.blocks().window_group(w)))
    throw finabel::AmbientMismatch("cylinder core does not live in the window group " +
                                   k.blocks().window_group(w).describe());
  return {w, core};
}

/// Cylinder from generators of the core, given as flat window vectors.
inline CylinderSubgroup cylinder(const ProGroup& k, Window w, const std::vector<Element>& core_gens) {
  if (w.empty()) w = {0, 0};
  return cylinder(k, w, finabel::canonical_subgroup(k.blocks().window_group(w), core_gens));
}

inline CylinderSubgroup whole(const ProGroup& k) { return cylinder(k, Window{0, 0}, std::vector<Element>{}); }

/// [K : U].
inline Integer index(const CylinderSubgroup& u) { return finabel::index_in_ambient(u.core); }

/// Same cylinder described on a larger window.
inline CylinderSubgroup rewindow(const ProGroup& k, const CylinderSubgroup& u, const Window& w) {
  if (u.window == w) return u;
  if (u.window.empty()) return {w, AbSubgroup::whole(k.blocks().window_group(w))};
  if (!w.contains(u.window)) throw ValidationError("rewindow: target window does not contain the cylinder window");
  const auto& b = k.blocks();
  return {w, finabel::widen_full(u.core, b.moduli({w.lo, u.window.lo}), b.moduli({u.window.hi, w.hi}))};
}

inline Window hull(const CylinderSubgroup& u, const CylinderSubgroup& v) {
  if (u.window.empty()) return v.window;
  if (v.window.empty()) return u.window;
  return Window::hull(u.window, v.window);
}

inline bool same_cylinder(const ProGroup& k, const CylinderSubgroup& u, const CylinderSubgroup& v) {
  const Window w = hull(u, v);
  return rewindow(k, u, w).core == rewindow(k, v, w).core;
}

inline bool contains(const ProGroup& k, const CylinderSubgroup& big, const CylinderSubgroup& small) {
  const Window w = hull(big, small);
  return rewindow(k, big, w).core.contains(rewindow(k, small, w).core);
}

inline CylinderSubgroup intersect(const ProGroup& k, const CylinderSubgroup& u, const CylinderSubgroup& v) {
  const Window w = hull(u, v);
  return {w, finabel::intersect(rewindow(k, u, w).core, rewindow(k, v, w).core)};
}

inline CylinderSubgroup sum(const ProGroup& k, const CylinderSubgroup& u, const CylinderSubgroup& v) {
  const Window w = hull(u, v);
  return {w, finabel::sum(rewindow(k, u, w).core, rewindow(k, v, w).core)};
}

/// [V : U] for U inside V.
inline Integer relative_index(const ProGroup& k, const CylinderSubgroup& u, const CylinderSubgroup& v) {
  const Window w = hull(u, v);
  return finabel::subgroup_index(rewindow(k, u, w).core, rewindow(k, v, w).core);
}

/// psi(x)_{i,c} = sum over map.at(i, c) of coeff * x_{i+offset, component}.
class RowFiniteEndo {
 public:
  RowFiniteEndo() = default;
  const ProGroup& group() const { return group_; }
  const BandedMap& map() const { return map_; }
  blocks::WindowHom window_map(const Window& w) const { return blocks::row_window_map(group_.blocks(), map_, w); }
  bool operator==(const RowFiniteEndo&) const = default;

 private:
  friend RowFiniteEndo rowfinite_endo(const ProGroup&, BandedMap);
  ProGroup group_;
  BandedMap map_;
};

inline RowFiniteEndo rowfinite_endo(const ProGroup& k, BandedMap m) {
  RowFiniteEndo f;
  f.group_ = k;
  f.map_ = blocks::validate_banded(k.blocks(), std::move(m), blocks::Reading::rows);
  return f;
}

/// psi^{-1}(U), a cylinder on the dependency window of U's window.
inline CylinderSubgroup preimage(const RowFiniteEndo& psi, const CylinderSubgroup& u) {
  auto wh = psi.window_map(u.window);
  return {wh.source, finabel::preimage(wh.hom, u.core)};
}

/// The coordinates of psi(x) on w for x restricted to the dependency window.
inline Element apply_on_window(const RowFiniteEndo& psi, const Window& w, const Window& from, const Element& x) {
  auto wh = psi.window_map(w);
  if (!from.contains(wh.source)) throw ValidationError("apply_on_window: input window too small");
  return wh.hom.apply(psi.group().blocks().restrict(from, wh.source, x));
}

/// psi o phi. Exact on Z, on a finite index set whose size divides the
/// period, and for maps without offsets; elsewhere truncation at the
/// boundary does not compose periodically.
inline RowFiniteEndo compose(const RowFiniteEndo& psi, const RowFiniteEndo& phi) {
  if (!(psi.group() == phi.group())) throw finabel::AmbientMismatch("compose: maps live on different groups");
  const auto& b = psi.group().blocks();
  const bool offset_free = psi.map().min_offset() == 0 && psi.map().max_offset() == 0 &&
                           phi.map().min_offset() == 0 && phi.map().max_offset() == 0;
  const std::size_t period = std::lcm(psi.map().period, phi.map().period);
  const bool covers_finite =
      b.index_set().is_finite() && b.index_set().size > 0 && period % static_cast<std::size_t>(b.index_set().size) == 0;
  if (b.index_set().kind != blocks::IndexKind::integers && !offset_free && !covers_finite)
    throw ValidationError("compose: banded maps with offsets compose exactly only over Z or with a full period");
  BandedMap m{period, std::vector<std::vector<std::vector<blocks::Term>>>(period)};
  for (std::size_t r = 0; r < period; ++r) {
    const auto i = static_cast<std::int64_t>(r);
    m.terms[r].resize(b.block_rank(i));
    for (std::size_t c = 0; c < b.block_rank(i); ++c)
      for (const auto& t : psi.map().at(i, c)) {
        if (!b.index_set().contains(i + t.offset)) continue;
        for (const auto& s : phi.map().at(i + t.offset, t.component))
          m.terms[r][c].push_back(
              {t.offset + s.offset, s.component,
               mod_floor(static_cast<__int128>(t.coeff) * s.coeff, b.modulus(i, c))});
      }
  }
  return rowfinite_endo(psi.group(), std::move(m));
}

inline RowFiniteEndo identity_endo(const ProGroup& k) { return rowfinite_endo(k, blocks::identity_map(k.blocks())); }

inline RowFiniteEndo power(const RowFiniteEndo& psi, std::size_t n) {
  RowFiniteEndo out = identity_endo(psi.group());
  for (std::size_t i = 0; i < n; ++i) out = compose(psi, out);
  return out;
}

/// C_n(psi, U) = U n psi^{-1}(U) n ... n psi^{-n+1}(U).
inline CylinderSubgroup cotrajectory(const RowFiniteEndo& psi, const CylinderSubgroup& u, std::size_t n) {
  if (n == 0) throw ValidationError("cotrajectory needs n >= 1");
  CylinderSubgroup c = u;
  for (std::size_t k = 1; k < n; ++k) c = intersect(psi.group(), u, preimage(psi, c));
  return c;
}

struct CotrajectoryReport {
  std::size_t n_max = 0;
  std::vector<Integer> indices;          ///< c_n = [K : C_n], n = 1, 2, ...
  std::vector<Integer> alphas;           ///< c_{n+1} / c_n
  std::vector<Integer> psi_inv_indices;  ///< [psi^{-1}(C_n) + U : U]
  std::vector<Integer> coker_indices;    ///< [K : Im psi + C_n]
  std::size_t n0 = 0;
  std::size_t n1 = 0;
  Integer alpha = 0;
  Integer psi_inv_c_mod_c = 0;  ///< |psi^{-1}(C) / C|
  Integer k_mod_l = 0;          ///< [K : Im psi + C]
  Status status = Status::inconclusive;
  std::string note;
  std::vector<CylinderSubgroup> stages;  ///< C_1, C_2, ...

  bool certified() const { return status == Status::certified; }
  /// C_n stopped shrinking, so C(psi, U) is the open subgroup stages.back().
  bool stabilized() const { return certified() && alpha == 1; }
};

namespace detail {

inline bool stalled(std::initializer_list<const std::vector<Integer>*> seqs, std::size_t w) {
  for (const auto* s : seqs) {
    if (w == 0 || s->size() < w) return false;
    for (std::size_t i = s->size() - w; i + 1 < s->size(); ++i)
      if ((*s)[i] != s->back()) return false;
  }
  return true;
}

inline std::size_t run_start(const std::vector<Integer>& s) {
  std::size_t i = s.size();
  while (i > 1 && s[i - 2] == s.back()) --i;
  return i;
}

/// [K : Im psi + C] for a cylinder C, inside the window group of C.
inline Integer coker_index(const RowFiniteEndo& psi, const CylinderSubgroup& c) {
  auto wh = psi.window_map(c.window);
  const AbSubgroup img = finabel::image(wh.hom, AbSubgroup::whole(wh.hom.source()));
  return finabel::index_in_ambient(finabel::sum(img, c.core));
}

}  // namespace detail

/// Iterates C_n until alpha_n, [psi^{-1}(C_n)+U : U] and [K : Im psi + C_n]
/// are constant for `stall` steps and |psi^{-1}(C)/C| = alpha [K : Im psi + C].
inline CotrajectoryReport cotrajectory_limits(const RowFiniteEndo& psi, const CylinderSubgroup& u,
                                              const StabilizationPolicy& p = {},
                                              std::size_t coord_budget = 4096) {
  const auto& k = psi.group();
  CotrajectoryReport r;
  CylinderSubgroup c = u;
  r.indices.push_back(index(c));
  r.stages.push_back(c);
  for (std::size_t n = 1; n <= p.max_n; ++n) {
    const CylinderSubgroup pre = preimage(psi, c);
    if (k.blocks().prefix(pre.window.lo, pre.window.hi) > coord_budget) {
      r.note = "window budget exhausted";
      return r;
    }
    CylinderSubgroup next = intersect(k, u, pre);
    r.psi_inv_indices.push_back(relative_index(k, u, sum(k, pre, u)));
    r.coker_indices.push_back(detail::coker_index(psi, c));
    r.indices.push_back(index(next));
    r.alphas.push_back(r.indices.back() / r.indices[r.indices.size() - 2]);
    r.stages.push_back(next);
    c = std::move(next);
    r.n_max = n;
    if (detail::stalled({&r.alphas, &r.psi_inv_indices, &r.coker_indices}, p.stall) &&
        r.psi_inv_indices.back() == r.alphas.back() * r.coker_indices.back()) {
      r.status = Status::certified;
      r.n0 = detail::run_start(r.alphas);
      r.n1 = detail::run_start(r.psi_inv_indices);
      r.alpha = r.alphas.back();
      r.psi_inv_c_mod_c = r.psi_inv_indices.back();
      r.k_mod_l = r.coker_indices.back();
      return r;
    }
  }
  const auto& l = r.coker_indices;
  if (l.size() >= 2 && p.stall >= 1 && l.back() != l[l.size() - std::min(l.size(), p.stall + 1)]) {
    r.status = Status::hypothesis_failure;
    r.note = "[K : Im psi + C_n] still growing at the budget; K/(Im psi + C) may be infinite";
  } else {
    r.note = "stall not reached within max_n";
  }
  return r;
}

/// Surjectivity on window quotients: psi maps onto every window of a fixed
/// length starting at each residue (the whole group when K is finite).
inline bool is_surjective(const RowFiniteEndo& psi) {
  const auto& k = psi.group();
  auto onto = [&](const Window& w) {
    auto wh = psi.window_map(w);
    return finabel::image(wh.hom, AbSubgroup::whole(wh.hom.source())).order() == wh.hom.target().order();
  };
  if (k.is_finite()) return onto(k.full_window());
  const std::int64_t span = psi.map().max_offset() - psi.map().min_offset() + 1;
  const auto period = static_cast<std::int64_t>(psi.map().period);
  const std::int64_t len = 4 * period * span;
  for (std::int64_t r = 0; r < period + span; ++r)
    if (!onto(k.blocks().clip({r, r + len}))) return false;
  if (k.index_set().kind == blocks::IndexKind::integers)
    for (std::int64_t r = 1; r <= period; ++r)
      if (!onto({-r, -r + len})) return false;
  return true;
}

enum class TopMethod { limit, limitfree, surjective };

/// [psi^{-1}(U_-) : U_-]: computed directly on the stable stage when C_n
/// stabilized, otherwise the stabilized [psi^{-1}(C_n)+U : U].
inline Integer minus_index(const RowFiniteEndo& psi, const CotrajectoryReport& r) {
  if (!r.certified()) throw InconclusiveError("U_- is not certified");
  if (r.stabilized()) {
    const auto& c = r.stages.back();
    return relative_index(psi.group(), c, preimage(psi, c));
  }
  return r.psi_inv_c_mod_c;
}

inline EntropyResult entropy_from(const RowFiniteEndo& psi, const CotrajectoryReport& r, TopMethod m,
                                  const StabilizationPolicy& p) {
  EntropyResult out;
  out.status = r.status;
  out.budget = p.max_n;
  out.note = r.note;
  if (!r.certified()) return out;
  switch (m) {
    case TopMethod::limit: out.value = EntropyValue::log_of(r.alpha); break;
    case TopMethod::limitfree: out.value = EntropyValue::log_of(Rational(r.psi_inv_c_mod_c, r.k_mod_l)); break;
    case TopMethod::surjective: out.value = EntropyValue::log_of(minus_index(psi, r)); break;
  }
  return out;
}

/// H_top(psi, U) by the limit (log alpha), the limit-free formula, or the
/// surjective-case formula log [psi^{-1}(U_-) : U_-].
inline EntropyResult topological_entropy(const RowFiniteEndo& psi, const CylinderSubgroup& u, TopMethod m,
                                         const StabilizationPolicy& p = {}) {
  if (m == TopMethod::surjective && !is_surjective(psi))
    throw HypothesisError("the surjective-case formula needs a surjective endomorphism");
  return entropy_from(psi, cotrajectory_limits(psi, u, p), m, p);
}

/// Maximum of H_top over an explicit base: a lower bound for h_top(psi).
inline EntropyResult h_top(const RowFiniteEndo& psi, const std::vector<CylinderSubgroup>& base,
                           const StabilizationPolicy& p = {}) {
  EntropyResult best;
  best.status = Status::certified;
  best.budget = p.max_n;
  for (const auto& u : base) {
    auto r = topological_entropy(psi, u, TopMethod::limit, p);
    if (!r.certified()) {
      best.status = r.status;
      best.note = r.note;
      continue;
    }
    if (best.value < r.value) best.value = r.value;
  }
  return best;
}

/// K_U = K/U_- with the induced endomorphism and the image of U. Explicit
/// when U_- is open; otherwise only the kernel and cokernel orders.
struct QuotientSystem {
  bool explicit_quotient = false;
  Window window;                 ///< window of the stable stage U_-
  FiniteAbelianGroup k_u;        ///< explicit case
  finabel::Hom psi_u;            ///< explicit case
  AbSubgroup image_of_u;         ///< explicit case
  Integer ker_order = 1;         ///< |ker psi_U| = |psi^{-1}(U_-)/U_-|
  Integer coker_order = 1;       ///< |coker psi_U| = [K : Im psi + U_-]
  EntropyValue entropy;          ///< log|ker| - log|coker|
  bool matches_entropy = false;  ///< equals H_top(psi, U)
};

inline QuotientSystem quotient_system(const RowFiniteEndo& psi, const CylinderSubgroup& u,
                                      const StabilizationPolicy& p = {}) {
  const auto r = cotrajectory_limits(psi, u, p);
  if (!r.certified()) throw InconclusiveError("quotient_system: U_- not certified (" + r.note + ")");
  QuotientSystem q;
  q.ker_order = r.psi_inv_c_mod_c;
  q.coker_order = r.k_mod_l;
  if (r.stabilized()) {
    const auto& b = psi.group().blocks();
    const auto& um = r.stages.back();
    const auto quo = finabel::quotient(um.core);
    auto wh = psi.window_map(um.window);
    Matrix<Coeff> m(quo.group.rank(), quo.group.rank());
    for (std::size_t i = 0; i < quo.group.rank(); ++i) {
      auto lift = finabel::solve(quo.projection, quo.group.unit(i));
      if (!lift) throw Error("internal: quotient projection is not onto");
      Element y = quo.projection.apply(wh.hom.apply(b.embed(um.window, wh.source, *lift)));
      for (std::size_t row = 0; row < y.size(); ++row) m(row, i) = y[row];
    }
    q.explicit_quotient = true;
    q.window = um.window;
    q.k_u = quo.group;
    q.psi_u = finabel::hom_validate(m, quo.group, quo.group);
    q.image_of_u = finabel::image(quo.projection, rewindow(psi.group(), u, um.window).core);
    q.ker_order = finabel::kernel(q.psi_u).order();
    q.coker_order = quo.group.order() / finabel::image(q.psi_u, AbSubgroup::whole(quo.group)).order();
  }
  q.entropy = EntropyValue::log_of(Rational(q.ker_order, q.coker_order));
  q.matches_entropy = q.entropy == EntropyValue::log_of(r.alpha);
  return q;
}

struct LogLawRecord {
  std::size_t k = 0;
  Integer lhs;  ///< [psi^{-k}(U_-) : U_-]
  Integer rhs;  ///< [psi^{-1}(U_-) : U_-]^k
  bool holds = false;
};

/// [psi^{-k}(C) : C] as the stabilized [psi^{-k}(C_n) + C_k : C_k], using
/// psi^{-k}(C) n C_k = C; compared with the k-th power of the base index.
inline LogLawRecord log_law_check(const RowFiniteEndo& psi, const CylinderSubgroup& u, std::size_t k,
                                  const StabilizationPolicy& p = {}) {
  if (k == 0) throw ValidationError("log law needs k >= 1");
  if (!is_surjective(psi)) throw HypothesisError("log law needs a surjective endomorphism");
  const auto& g = psi.group();
  const auto r = cotrajectory_limits(psi, u, p);
  if (!r.certified()) throw InconclusiveError("log law: cotrajectory not certified (" + r.note + ")");
  const CylinderSubgroup ck = cotrajectory(psi, u, k);
  std::vector<Integer> values;
  CylinderSubgroup c = u;
  for (std::size_t n = 1; n <= p.max_n; ++n) {
    CylinderSubgroup pre = c;
    for (std::size_t j = 0; j < k; ++j) pre = preimage(psi, pre);
    values.push_back(relative_index(g, ck, sum(g, pre, ck)));
    if (detail::stalled({&values}, p.stall)) {
      LogLawRecord rec{k, values.back(), boost::multiprecision::pow(r.psi_inv_c_mod_c, static_cast<unsigned>(k)),
                       false};
      rec.holds = rec.lhs == rec.rhs;
      return rec;
    }
    c = intersect(g, u, preimage(psi, c));
  }
  throw InconclusiveError("log law: [psi^-k(C_n)+C_k : C_k] did not stabilize");
}

}  // namespace ent::profinite
