#pragma once

// Pontryagin duality for finite abelian groups, and the passage from a
// banded endomorphism of a direct sum to its adjoint on the full product.

#include "ent/discrete.hpp"
#include "ent/profinite.hpp"

#include <numeric>

namespace ent::duality {

using finabel::AbSubgroup;
using finabel::Element;
using finabel::FiniteAbelianGroup;
using finabel::Hom;

/// Characters of A = sum Z/d_i written as vectors chi with the same moduli;
/// <x, chi> = sum x_i chi_i (m / d_i) in Z/m, m the exponent of A.
struct DualPairing {
  FiniteAbelianGroup group;
  Coeff modulus = 1;

  Coeff weight(std::size_t i) const { return modulus / group.modulus(i); }

  Coeff operator()(std::span<const Coeff> x, std::span<const Coeff> chi) const {
    group.check_dimension(x);
    group.check_dimension(chi);
    __int128 acc = 0;
    for (std::size_t i = 0; i < group.rank(); ++i)
      acc = (acc + static_cast<__int128>(x[i]) * chi[i] % modulus * weight(i)) % modulus;
    return static_cast<Coeff>(acc);
  }
};

/// The dual group, identified with A itself through the pairing above.
inline DualPairing dual_group(const FiniteAbelianGroup& a) { return {a, a.exponent()}; }

/// f^ : B^ -> A^ with <f(x), chi> = <x, f^(chi)>.
inline Hom dual_hom(const Hom& f) {
  const auto& a = f.source();
  const auto& b = f.target();
  Matrix<Coeff> n(a.rank(), b.rank());
  for (std::size_t c = 0; c < a.rank(); ++c)
    for (std::size_t r = 0; r < b.rank(); ++r) {
      const __int128 num = static_cast<__int128>(a.modulus(c)) * f.matrix()(r, c);
      n(c, r) = static_cast<Coeff>(num / b.modulus(r) % a.modulus(c));
    }
  return finabel::hom_validate(n, b, a);
}

/// H^perp = {chi : <h, chi> = 0 for all h in H}.
inline AbSubgroup annihilator(const AbSubgroup& h, const DualPairing& p) {
  if (!(h.ambient() == p.group)) throw finabel::AmbientMismatch("annihilator: subgroup is not in the paired group");
  const auto gens = h.generators();
  if (gens.empty()) return AbSubgroup::whole(p.group);
  Matrix<Coeff> m(gens.size(), p.group.rank());
  for (std::size_t j = 0; j < gens.size(); ++j)
    for (std::size_t i = 0; i < p.group.rank(); ++i)
      m(j, i) = static_cast<Coeff>(static_cast<__int128>(gens[j][i]) * p.weight(i) % p.modulus);
  const FiniteAbelianGroup target(std::vector<Coeff>(gens.size(), p.modulus));
  return finabel::kernel(finabel::hom_validate(m, p.group, target));
}

inline AbSubgroup annihilator(const AbSubgroup& h) { return annihilator(h, dual_group(h.ambient())); }

struct DualityFacts {
  bool sum_intersection = false;  ///< (H+L)^perp = H^perp n L^perp and (H n L)^perp = H^perp + L^perp
  bool order_law = false;         ///< |H^perp| = [A : H]
  bool powers = false;            ///< (f^n H)^perp = (f^)^{-n}(H^perp)
  bool kernel_image = false;      ///< (ker f)^perp = Im f^
  bool relative = false;          ///< |H^perp / L^perp| = |L / H|
  bool all() const { return sum_intersection && order_law && powers && kernel_image && relative; }
};

inline DualityFacts verify_duality_facts(const FiniteAbelianGroup& a, const Hom& f, const AbSubgroup& h,
                                         const AbSubgroup& l, std::size_t n) {
  if (!(f.source() == a) || !(f.target() == a)) throw finabel::AmbientMismatch("duality facts need f: A -> A");
  if (!l.contains(h)) throw finabel::ContainmentError("duality facts need H inside L");
  const auto p = dual_group(a);
  const auto hp = annihilator(h, p);
  const auto lp = annihilator(l, p);
  DualityFacts r;
  r.sum_intersection = annihilator(finabel::sum(h, l), p) == finabel::intersect(hp, lp) &&
                       annihilator(finabel::intersect(h, l), p) == finabel::sum(hp, lp);
  r.order_law = hp.order() * h.order() == a.order();
  Hom fn = finabel::identity_hom(a);
  for (std::size_t k = 0; k < n; ++k) fn = finabel::compose(f, fn);
  r.powers = annihilator(finabel::image(fn, h), p) == finabel::preimage(dual_hom(fn), hp);
  const Hom fd = dual_hom(f);
  r.kernel_image = annihilator(finabel::kernel(f), p) == finabel::image(fd, AbSubgroup::whole(a));
  r.relative = hp.order() / lp.order() == l.order() / h.order();
  return r;
}

/// Dual data of (G, phi, F): K = product of the dual blocks, psi = phi^, U = F^perp.
struct Bridge {
  profinite::ProGroup k;
  profinite::RowFiniteEndo psi;
  profinite::CylinderSubgroup u;
};

/// Transposes a column-finite band into the row-finite band of the adjoint.
inline blocks::BandedMap dual_band(const blocks::BlockSequence& b, const blocks::BandedMap& m) {
  const std::size_t period = std::lcm(m.period, b.period());
  blocks::BandedMap out{period, std::vector<std::vector<std::vector<blocks::Term>>>(period)};
  for (std::size_t r = 0; r < period; ++r) {
    const auto i = static_cast<std::int64_t>(r);
    out.terms[r].resize(b.block_rank(i));
    for (std::size_t c = 0; c < b.block_rank(i); ++c)
      for (const auto& t : m.at(i, c)) {
        const __int128 num = static_cast<__int128>(b.modulus(i, c)) * t.coeff;
        out.terms[r][c].push_back(
            {t.offset, t.component, static_cast<Coeff>(num / b.modulus(i + t.offset, t.component) % b.modulus(i, c))});
      }
  }
  return out;
}

inline Bridge bridge(const discrete::BandedEndo& phi, const discrete::WindowedSubgroup& f) {
  if (!phi.group().is_abelian()) throw ValidationError("bridge needs an abelian group");
  const auto& b = phi.group().blocks();
  Bridge out;
  out.k = profinite::pro_group(b);
  out.psi = profinite::rowfinite_endo(out.k, dual_band(b, phi.map()));
  out.u = f.window.empty() ? profinite::whole(out.k) : profinite::cylinder(out.k, f.window, annihilator(f.sub));
  return out;
}

inline Bridge bridge(const discrete::BandedEndo& phi, const std::vector<discrete::Supported>& gens) {
  return bridge(phi, discrete::finite_subgroup(phi.group(), gens));
}

/// T^perp as a cylinder of K.
inline profinite::CylinderSubgroup perp(const profinite::ProGroup& k, const discrete::WindowedSubgroup& t) {
  if (t.window.empty()) return profinite::whole(k);
  return profinite::cylinder(k, t.window, annihilator(t.sub));
}

struct BridgeRecord {
  std::size_t checked_steps = 0;
  bool trajectories_dual = false;  ///< T_n^perp = C_n for every checked n
  bool kernel_coker = false;       ///< |ker phi n T| = [K : Im psi + C]
  bool quotients = false;          ///< |T / phi T| = |psi^{-1}(C) / C|
  EntropyResult alg;
  EntropyResult top;
  bool entropy_equal = false;
  bool holds() const { return trajectories_dual && kernel_coker && quotients && entropy_equal; }
};

struct BridgeCheck {
  std::vector<BridgeRecord> members;
  EntropyResult h_alg;
  EntropyResult h_top;
  Status status = Status::certified;
  bool holds = false;
};

inline BridgeRecord bridge_record(const discrete::BandedEndo& phi, const std::vector<discrete::Supported>& gens,
                                  const StabilizationPolicy& p = {}, std::size_t steps = 8) {
  const auto& b = phi.group().blocks();
  const auto f = discrete::finite_subgroup(phi.group(), gens);
  const Bridge dual = bridge(phi, f);
  BridgeRecord rec;
  rec.trajectories_dual = true;
  discrete::WindowedSubgroup t = f;
  profinite::CylinderSubgroup c = dual.u;
  for (std::size_t n = 1; n <= steps; ++n) {
    if (!profinite::same_cylinder(dual.k, perp(dual.k, t), c)) rec.trajectories_dual = false;
    rec.checked_steps = n;
    if (n == steps || t.window.empty()) continue;
    auto wh = blocks::column_window_map(b, phi.map(), t.window);
    t = {wh.target, finabel::sum(discrete::rewindow(b, f, wh.target).sub, finabel::image(wh.hom, t.sub))};
    c = profinite::intersect(dual.k, dual.u, profinite::preimage(dual.psi, c));
  }
  const auto tr = discrete::trajectory_limits(phi, gens, p);
  const auto co = profinite::cotrajectory_limits(dual.psi, dual.u, p);
  rec.alg = discrete::entropy_from(tr, discrete::AlgMethod::limit, p);
  rec.top = profinite::entropy_from(dual.psi, co, profinite::TopMethod::limit, p);
  if (tr.certified() && co.certified()) {
    rec.kernel_coker = tr.ker_cap_t == co.k_mod_l;
    rec.quotients = tr.t_mod_phi_t == co.psi_inv_c_mod_c;
    rec.entropy_equal = rec.alg.value == rec.top.value;
  }
  return rec;
}

/// h_alg(phi) = h_top(phi^) over an explicit family, member by member.
inline BridgeCheck weiss_bridge_check(const discrete::BandedEndo& phi,
                                      const std::vector<std::vector<discrete::Supported>>& family,
                                      const StabilizationPolicy& p = {}) {
  BridgeCheck out;
  out.h_alg.status = out.h_top.status = Status::certified;
  out.h_alg.budget = out.h_top.budget = p.max_n;
  bool ok = true;
  for (const auto& gens : family) {
    auto rec = bridge_record(phi, gens, p);
    for (auto [mine, total] : {std::pair{&rec.alg, &out.h_alg}, std::pair{&rec.top, &out.h_top}}) {
      if (!mine->certified()) {
        total->status = mine->status;
        total->note = mine->note;
      } else if (total->value < mine->value) {
        total->value = mine->value;
      }
    }
    if (!rec.alg.certified() || !rec.top.certified()) {
      out.status = rec.alg.certified() ? rec.top.status : rec.alg.status;
    }
    ok = ok && rec.holds();
    out.members.push_back(std::move(rec));
  }
  out.holds = ok && out.status == Status::certified && out.h_alg.value == out.h_top.value;
  return out;
}

}  // namespace ent::duality
