#pragma once

// Topological automorphisms of full products: banded inverses, antistable
// subgroups, U_+ and U_-, and depth.

#include "ent/profinite.hpp"

#include <future>
#include <optional>

namespace ent::depth {

using blocks::BandedMap;
using blocks::Term;
using blocks::Window;
using profinite::CylinderSubgroup;
using profinite::ProGroup;
using profinite::RowFiniteEndo;

/// psi is not an automorphism, or its inverse is not banded within budget.
class InversionError : public HypothesisError {
 public:
  using HypothesisError::HypothesisError;
};

namespace detail {

inline bool is_identity_band(const blocks::BlockSequence& b, const BandedMap& m) {
  for (std::size_t r = 0; r < m.period; ++r) {
    if (!b.index_set().contains(static_cast<std::int64_t>(r))) break;
    for (std::size_t c = 0; c < m.terms[r].size(); ++c) {
      const auto& ts = m.terms[r][c];
      const bool trivial_block = b.modulus(static_cast<std::int64_t>(r), c) == 1;
      if (trivial_block ? !ts.empty() : ts != std::vector<Term>{Term{0, c, 1}}) return false;
    }
  }
  return true;
}

/// Inverse over a finite index set, from the full window map.
inline RowFiniteEndo invert_finite(const RowFiniteEndo& psi) {
  const auto& k = psi.group();
  const auto& b = k.blocks();
  const Window full = k.full_window();
  const auto wh = psi.window_map(full);
  if (!finabel::kernel(wh.hom).is_trivial()) throw InversionError("not injective");
  const std::size_t n = static_cast<std::size_t>(std::max<std::int64_t>(full.hi, 1));
  BandedMap inv{n, std::vector<std::vector<std::vector<Term>>>(n)};
  for (std::int64_t i = 0; i < full.hi; ++i) inv.terms[static_cast<std::size_t>(i)].resize(b.block_rank(i));
  for (std::int64_t j = 0; j < full.hi; ++j)
    for (std::size_t cj = 0; cj < b.block_rank(j); ++cj) {
      auto x = finabel::solve(wh.hom, wh.hom.target().unit(b.coord(full, j, cj)));
      if (!x) throw InversionError("not surjective");
      for (std::int64_t i = 0; i < full.hi; ++i)
        for (std::size_t c = 0; c < b.block_rank(i); ++c)
          if (Coeff v = (*x)[b.coord(full, i, c)]; v != 0)
            inv.terms[static_cast<std::size_t>(i)][c].push_back({j - i, cj, v});
    }
  auto out = profinite::rowfinite_endo(k, std::move(inv));
  const auto back = out.window_map(full);
  if (!(finabel::compose(wh.hom, back.hom) == finabel::identity_hom(wh.hom.target())))
    throw Error("internal: finite inverse does not compose to the identity");
  return out;
}

}  // namespace detail

/// psi^{-1} as a row-finite map, solved window by window on Z. Coordinate
/// (r, c) of psi^{-1}(y) is read off y on [r - R, r + R] once no kernel
/// element of that window map touches it; R grows to `band_factor` times
/// the forward radius.
inline RowFiniteEndo invert(const RowFiniteEndo& psi, std::int64_t band_factor = 4) {
  const auto& k = psi.group();
  const auto& b = k.blocks();
  if (k.is_finite()) return detail::invert_finite(psi);
  if (k.index_set().kind != blocks::IndexKind::integers)
    throw InversionError("banded automorphisms are only handled over Z or a finite index set");
  const std::int64_t radius =
      std::max<std::int64_t>({1, std::abs(psi.map().min_offset()), std::abs(psi.map().max_offset())});
  const std::size_t period = std::lcm(psi.map().period, b.period());
  BandedMap inv{period, std::vector<std::vector<std::vector<Term>>>(period)};
  for (std::size_t r = 0; r < period; ++r) {
    const auto i = static_cast<std::int64_t>(r);
    inv.terms[r].resize(b.block_rank(i));
    for (std::size_t c = 0; c < b.block_rank(i); ++c) {
      bool found = false;
      for (std::int64_t big_r = radius; big_r <= band_factor * radius && !found; ++big_r) {
        const Window w{i - big_r, i + big_r + 1};
        const auto wh = psi.window_map(w);
        const std::size_t at = b.coord(wh.source, i, c);
        bool determined = true;
        for (const auto& g : finabel::kernel(wh.hom).generators()) determined = determined && g[at] == 0;
        if (!determined) continue;
        std::vector<Term> terms;
        for (std::int64_t j = w.lo; j < w.hi; ++j)
          for (std::size_t cj = 0; cj < b.block_rank(j); ++cj) {
            auto x = finabel::solve(wh.hom, wh.hom.target().unit(b.coord(w, j, cj)));
            if (!x) throw InversionError("not surjective: window map misses a unit vector");
            if ((*x)[at] != 0) terms.push_back({j - i, cj, (*x)[at]});
          }
        inv.terms[r][c] = std::move(terms);
        found = true;
      }
      if (!found)
        throw InversionError("inverse is not banded within " + std::to_string(band_factor) +
                             " times the forward band (coordinate " + std::to_string(i) + "," + std::to_string(c) +
                             " never determined)");
    }
  }
  auto out = profinite::rowfinite_endo(k, std::move(inv));
  if (!detail::is_identity_band(b, profinite::compose(psi, out).map()) ||
      !detail::is_identity_band(b, profinite::compose(out, psi).map()))
    throw InversionError("solved band does not compose to the identity");
  return out;
}

/// An automorphism with its banded inverse.
struct Automorphism {
  RowFiniteEndo forward;
  RowFiniteEndo backward;
};

inline Automorphism automorphism(const RowFiniteEndo& psi) { return {psi, invert(psi)}; }

enum class Verdict { antistable, not_antistable, unknown };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::antistable: return "antistable";
    case Verdict::not_antistable: return "not_antistable";
    case Verdict::unknown: return "unknown";
  }
  return "?";
}

struct AntistableCertificate {
  Verdict verdict = Verdict::unknown;
  std::size_t n = 0;  ///< U_n at which the verdict was reached
  Window pinned;      ///< indices forced to 0 in U_n
  std::string reason;
};

/// U_n = C_n(psi, U) n C_n(psi^{-1}, U).
inline CylinderSubgroup base_member(const Automorphism& a, const CylinderSubgroup& u, std::size_t n) {
  return profinite::intersect(a.forward.group(), profinite::cotrajectory(a.forward, u, n),
                              profinite::cotrajectory(a.backward, u, n));
}

inline std::vector<CylinderSubgroup> base_sequence(const Automorphism& a, const CylinderSubgroup& u, std::size_t n) {
  std::vector<CylinderSubgroup> out;
  const auto& k = a.forward.group();
  CylinderSubgroup minus = u;
  CylinderSubgroup plus = u;
  for (std::size_t j = 1; j <= n; ++j) {
    if (j > 1) {
      minus = profinite::intersect(k, u, profinite::preimage(a.forward, minus));
      plus = profinite::intersect(k, u, profinite::preimage(a.backward, plus));
    }
    out.push_back(profinite::intersect(k, minus, plus));
  }
  return out;
}

namespace detail {

/// Longest run of indices in u.window on which the core is zero.
inline Window pinned_run(const ProGroup& k, const CylinderSubgroup& u) {
  const auto& b = k.blocks();
  const auto gens = u.core.generators();
  Window best, run{u.window.lo, u.window.lo};
  for (std::int64_t i = u.window.lo; i < u.window.hi; ++i) {
    bool zero = true;
    for (std::size_t c = 0; c < b.block_rank(i) && zero; ++c)
      for (const auto& g : gens) zero = zero && g[b.coord(u.window, i, c)] == 0;
    if (zero) {
      run.hi = i + 1;
      if (run.length() > best.length()) best = run;
    } else {
      run = {i + 1, i + 1};
    }
  }
  return best;
}

inline bool is_trivial(const ProGroup& k, const CylinderSubgroup& u) {
  const Window full = k.full_window();
  return profinite::index(profinite::rewindow(k, u, full)) == k.blocks().window_group(full).order();
}

inline std::optional<std::size_t> stabilizes(const RowFiniteEndo& psi, const CylinderSubgroup& u, std::size_t max_n) {
  CylinderSubgroup c = u;
  for (std::size_t n = 1; n <= max_n; ++n) {
    CylinderSubgroup next = profinite::intersect(psi.group(), u, profinite::preimage(psi, c));
    if (profinite::same_cylinder(psi.group(), next, c)) return n;
    c = std::move(next);
  }
  return std::nullopt;
}

}  // namespace detail

/// Antistability of U under a banded automorphism. Certified when the zero
/// run of U_n grows on both sides at every step of the stall window and
/// covers the window of U (on finite K: when U_n is trivial); refuted when
/// both one-sided cotrajectories become stationary with a nontrivial
/// intersection.
inline AntistableCertificate antistable_check(const Automorphism& a, const CylinderSubgroup& u,
                                              const StabilizationPolicy& p = {}) {
  const auto& k = a.forward.group();
  AntistableCertificate cert;
  std::size_t grew = 0;
  CylinderSubgroup minus = u;
  CylinderSubgroup plus = u;
  Window prev;
  for (std::size_t n = 1; n <= p.max_n; ++n) {
    if (n > 1) {
      minus = profinite::intersect(k, u, profinite::preimage(a.forward, minus));
      plus = profinite::intersect(k, u, profinite::preimage(a.backward, plus));
    }
    const auto un = profinite::intersect(k, minus, plus);
    const Window pin = detail::pinned_run(k, un);
    if (k.is_finite() && detail::is_trivial(k, un)) {
      cert = {Verdict::antistable, n, pin, "U_n is trivial"};
      return cert;
    }
    if (n > 1) grew = (!pin.empty() && pin.lo < prev.lo && pin.hi > prev.hi) ? grew + 1 : 0;
    prev = pin;
    cert.n = n;
    if (!k.is_finite() && grew >= p.stall && !u.window.empty() && pin.contains(u.window)) {
      cert = {Verdict::antistable, n, pin,
              "zero run of U_n grew on both sides for " + std::to_string(grew) + " steps"};
      return cert;
    }
    if (k.blocks().prefix(un.window.lo, un.window.hi) > 4096) break;
  }
  const auto sm = detail::stabilizes(a.forward, u, p.max_n);
  const auto sp = detail::stabilizes(a.backward, u, p.max_n);
  if (sm && sp) {
    const auto lim = base_member(a, u, std::max(*sm, *sp));
    if (!(k.is_finite() && detail::is_trivial(k, lim))) {
      cert = {Verdict::not_antistable, std::max(*sm, *sp), detail::pinned_run(k, lim),
              "both cotrajectories are stationary with nontrivial intersection"};
      return cert;
    }
  }
  cert.pinned = prev;
  cert.reason = "no certificate within max_n";
  return cert;
}

/// U_- = C(psi, U) or U_+ = C(psi^{-1}, U), with the index of the step
/// [psi^{-1}(U_-) : U_-] or [psi(U_+) : U_+]. `open` is set when the
/// cotrajectory is stationary; otherwise U_-/U_+ is only known through its
/// stages.
struct OneSided {
  profinite::CotrajectoryReport report;
  std::optional<CylinderSubgroup> open;
  Integer step_index = 0;
};

struct PlusMinus {
  OneSided minus;
  OneSided plus;
};

inline OneSided one_sided(const RowFiniteEndo& psi, const CylinderSubgroup& u, const StabilizationPolicy& p) {
  OneSided s;
  s.report = profinite::cotrajectory_limits(psi, u, p);
  if (!s.report.certified()) throw InconclusiveError("cotrajectory not certified (" + s.report.note + ")");
  if (s.report.stabilized()) s.open = s.report.stages.back();
  s.step_index = profinite::minus_index(psi, s.report);
  return s;
}

inline PlusMinus plus_minus(const Automorphism& a, const CylinderSubgroup& u, const StabilizationPolicy& p = {}) {
  return {one_sided(a.forward, u, p), one_sided(a.backward, u, p)};
}

struct DepthValue {
  Integer via_plus;   ///< [psi(U_+) : U_+]
  Integer via_minus;  ///< [psi^{-1}(U_-) : U_-]
  Integer value() const { return via_plus; }
};

/// depth(psi) = [psi(U_+) : U_+] for an antistable U, checked against
/// [psi^{-1}(U_-) : U_-].
inline DepthValue depth_value(const Automorphism& a, const CylinderSubgroup& u, const StabilizationPolicy& p = {}) {
  const auto pm = plus_minus(a, u, p);
  DepthValue d{pm.plus.step_index, pm.minus.step_index};
  if (d.via_plus != d.via_minus)
    throw Error("internal: [psi(U_+):U_+] = " + ent::to_string(d.via_plus) + " but [psi^-1(U_-):U_-] = " +
                ent::to_string(d.via_minus));
  return d;
}

struct CandidateRecord {
  CylinderSubgroup u;
  AntistableCertificate certificate;
  std::optional<DepthValue> depth;
  std::string note;
};

struct DepthReport {
  Automorphism map;
  std::vector<CandidateRecord> candidates;
  Status status = Status::inconclusive;
  std::string note;
  std::optional<Integer> depth;
  std::optional<Integer> depth_inverse;
  bool invariant = false;               ///< all certified candidates agree
  std::vector<CylinderSubgroup> base;   ///< U_1, ..., U_n of the first certified candidate
  std::vector<EntropyResult> base_entropies;
  EntropyResult h_top;                  ///< over `base`
  bool h_top_is_log_depth = false;
  bool inverse_depth_agrees = false;
  bool infinite_depth_above_one = true;  ///< K infinite implies depth > 1
};

inline CandidateRecord examine(const Automorphism& a, const CylinderSubgroup& u, const StabilizationPolicy& p) {
  CandidateRecord rec{u, antistable_check(a, u, p), std::nullopt, {}};
  if (rec.certificate.verdict != Verdict::antistable) return rec;
  try {
    rec.depth = depth_value(a, u, p);
  } catch (const InconclusiveError& e) {
    rec.note = e.what();
  }
  return rec;
}

inline DepthReport depth_report(const RowFiniteEndo& psi, const std::vector<CylinderSubgroup>& candidates,
                                const StabilizationPolicy& p = {}, std::size_t base_length = 3,
                                std::size_t jobs = 1) {
  DepthReport r;
  r.map = automorphism(psi);
  r.candidates.resize(candidates.size());
  if (jobs <= 1) {
    for (std::size_t i = 0; i < candidates.size(); ++i) r.candidates[i] = examine(r.map, candidates[i], p);
  } else {
    for (std::size_t start = 0; start < candidates.size(); start += jobs) {
      std::vector<std::future<CandidateRecord>> batch;
      for (std::size_t i = start; i < std::min(candidates.size(), start + jobs); ++i)
        batch.push_back(std::async(std::launch::async, [&, i] { return examine(r.map, candidates[i], p); }));
      for (std::size_t i = 0; i < batch.size(); ++i) r.candidates[start + i] = batch[i].get();
    }
  }
  const CandidateRecord* first = nullptr;
  r.invariant = true;
  for (const auto& c : r.candidates) {
    if (!c.depth) continue;
    if (!first) first = &c;
    r.invariant = r.invariant && c.depth->value() == first->depth->value();
  }
  if (!first) {
    r.status = Status::hypothesis_failure;
    r.note = "no candidate is certified antistable; the pair may not have finite depth";
    r.invariant = false;
    return r;
  }
  r.depth = first->depth->value();
  const Automorphism inverse{r.map.backward, r.map.forward};
  r.depth_inverse = depth_value(inverse, first->u, p).value();
  r.inverse_depth_agrees = *r.depth == *r.depth_inverse;
  r.base = base_sequence(r.map, first->u, base_length);
  for (const auto& un : r.base) r.base_entropies.push_back(profinite::topological_entropy(psi, un, profinite::TopMethod::limit, p));
  r.h_top = profinite::h_top(psi, r.base, p);
  const auto log_depth = EntropyValue::log_of(*r.depth);
  r.h_top_is_log_depth = r.h_top.certified() && r.h_top.value == log_depth;
  for (const auto& e : r.base_entropies) r.h_top_is_log_depth = r.h_top_is_log_depth && e.certified() && e.value == log_depth;
  r.infinite_depth_above_one = psi.group().is_finite() || *r.depth > 1;
  const bool ok = r.invariant && r.inverse_depth_agrees && r.h_top_is_log_depth && r.infinite_depth_above_one;
  r.status = r.h_top.certified() ? Status::certified : r.h_top.status;
  if (!ok && r.status == Status::certified) r.note = "an invariant failed";
  return r;
}

}  // namespace ent::depth
