#pragma once

// Locally finite groups as restricted direct sums of finite blocks,
// endomorphisms with banded generator images, trajectories and algebraic
// entropy.

#include "ent/blocks.hpp"
#include "ent/entropy_value.hpp"
#include "ent/gengroup.hpp"

#include <memory>
#include <optional>
#include <sstream>
#include <variant>
#include <vector>

namespace ent::discrete {

using blocks::BandedMap;
using blocks::BlockSequence;
using blocks::IndexSet;
using blocks::Window;
using finabel::AbSubgroup;
using finabel::Element;

/// One coordinate block of a finite-support element. For Cayley blocks the
/// value has a single entry, the element index.
struct Entry {
  std::int64_t at = 0;
  Element value;
  bool operator==(const Entry&) const = default;
};
using Supported = std::vector<Entry>;

/// Restricted direct sum of blocks: abelian (periodic FiniteAbelianGroup
/// blocks) or copies of one Cayley group.
class LFGroup {
 public:
  LFGroup() = default;

  static LFGroup abelian(BlockSequence b) {
    LFGroup g;
    g.blocks_ = std::move(b);
    return g;
  }
  static LFGroup cayley(IndexSet index, gengroup::FiniteGroup block) {
    LFGroup g;
    g.blocks_ = BlockSequence(index, {{1}});
    g.cayley_ = std::make_shared<const gengroup::FiniteGroup>(std::move(block));
    return g;
  }

  bool is_abelian() const { return !cayley_; }
  const IndexSet& index_set() const { return blocks_.index_set(); }
  const BlockSequence& blocks() const {
    if (!is_abelian()) throw ValidationError("operation needs an abelian block sequence");
    return blocks_;
  }
  /// Index layout; Cayley blocks count as one coordinate per index.
  const BlockSequence& layout() const { return blocks_; }
  const gengroup::FiniteGroup& block_group() const {
    if (is_abelian()) throw ValidationError("operation needs Cayley blocks");
    return *cayley_;
  }

  bool operator==(const LFGroup& o) const {
    if (is_abelian() != o.is_abelian()) return false;
    if (is_abelian()) return blocks_ == o.blocks_;
    return index_set() == o.index_set() && *cayley_ == *o.cayley_;
  }

  std::string describe() const {
    if (is_abelian()) return "restricted sum, " + blocks_.describe();
    return "restricted sum of copies of a group of order " + std::to_string(cayley_->order()) + " over " +
           index_set().describe();
  }

 private:
  BlockSequence blocks_;
  std::shared_ptr<const gengroup::FiniteGroup> cayley_;
};

inline LFGroup locally_finite_group(BlockSequence b) { return LFGroup::abelian(std::move(b)); }
inline LFGroup locally_finite_group(IndexSet index, gengroup::FiniteGroup g) {
  return LFGroup::cayley(index, std::move(g));
}

/// Block endomorphism of a Cayley block placed at a fixed offset: the value
/// g at index i contributes images[g] at index i + offset.
struct BlockEndo {
  std::int64_t offset = 0;
  std::vector<std::size_t> images;
  bool operator==(const BlockEndo&) const = default;
};

/// phi on an LFGroup. Abelian: generator e_{i,c} goes to the banded image
/// map.at(i, c). Cayley: phi(x)_j = prod_o f_o(x_{j-o}) in offset order.
class BandedEndo {
 public:
  BandedEndo() = default;
  const LFGroup& group() const { return group_; }
  const BandedMap& map() const { return map_; }
  const std::vector<BlockEndo>& block_maps() const { return block_maps_; }

  std::int64_t min_offset() const {
    if (group_.is_abelian()) return map_.min_offset();
    std::int64_t m = 0;
    for (std::size_t k = 0; k < block_maps_.size(); ++k)
      m = k ? std::min(m, block_maps_[k].offset) : block_maps_[k].offset;
    return m;
  }
  std::int64_t max_offset() const {
    if (group_.is_abelian()) return map_.max_offset();
    std::int64_t m = 0;
    for (std::size_t k = 0; k < block_maps_.size(); ++k)
      m = k ? std::max(m, block_maps_[k].offset) : block_maps_[k].offset;
    return m;
  }

  /// Window holding phi of anything supported on w.
  Window image_window(const Window& w) const {
    const Window out = group_.layout().clip(
        {w.lo + std::min<std::int64_t>(0, min_offset()), w.hi + std::max<std::int64_t>(0, max_offset())});
    return Window::hull(out, w);
  }

  bool operator==(const BandedEndo&) const = default;

 private:
  friend BandedEndo banded_endo(const LFGroup&, BandedMap);
  friend BandedEndo banded_endo(const LFGroup&, std::vector<BlockEndo>);
  LFGroup group_;
  BandedMap map_;
  std::vector<BlockEndo> block_maps_;
};

inline BandedEndo banded_endo(const LFGroup& g, BandedMap map) {
  BandedEndo f;
  f.group_ = g;
  f.map_ = blocks::validate_banded(g.blocks(), std::move(map), blocks::Reading::columns);
  return f;
}

/// Cayley variant: each f_o must be a block endomorphism and images under
/// different offsets must commute, so that phi is a homomorphism.
inline BandedEndo banded_endo(const LFGroup& g, std::vector<BlockEndo> maps) {
  const auto& G = g.block_group();
  const std::size_t n = G.order();
  for (std::size_t k = 0; k < maps.size(); ++k) {
    const auto& f = maps[k].images;
    if (f.size() != n)
      throw ValidationError("block map " + std::to_string(k) + " lists " + std::to_string(f.size()) +
                            " images, block has order " + std::to_string(n));
    for (std::size_t a = 0; a < n; ++a)
      if (f[a] >= n) throw ValidationError("block map " + std::to_string(k) + ": image of " + std::to_string(a) + " out of range");
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b)
        if (f[G.multiply(a, b)] != G.multiply(f[a], f[b])) {
          std::ostringstream os;
          os << "block map " << k << " is not a homomorphism: f(" << a << "*" << b << ") != f(" << a << ")*f(" << b
             << ")";
          throw ValidationError(os.str());
        }
  }
  for (std::size_t k = 0; k < maps.size(); ++k)
    for (std::size_t l = k + 1; l < maps.size(); ++l)
      for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) {
          const auto x = maps[k].images[a], y = maps[l].images[b];
          if (G.multiply(x, y) != G.multiply(y, x)) {
            std::ostringstream os;
            os << "block maps " << k << " and " << l << " have non-commuting images (" << x << ", " << y
               << "), so the product map is not a homomorphism";
            throw ValidationError(os.str());
          }
        }
  std::stable_sort(maps.begin(), maps.end(), [](const BlockEndo& x, const BlockEndo& y) { return x.offset < y.offset; });
  BandedEndo f;
  f.group_ = g;
  f.block_maps_ = std::move(maps);
  return f;
}

/// Finite-support element flattened onto the smallest window holding it.
struct WindowElement {
  Window window;
  Element coords;
};

inline Window support_window(const LFGroup& g, const Supported& x) {
  Window w;
  for (const auto& e : x) {
    if (!g.index_set().contains(e.at))
      throw ValidationError("index " + std::to_string(e.at) + " is outside " + g.index_set().describe());
    w = Window::hull(w, Window{e.at, e.at + 1});
  }
  return w;
}

/// Abelian: coordinates summed per block. Cayley: block values multiplied in
/// list order.
inline Element flatten(const LFGroup& g, const Supported& x, const Window& w) {
  const auto& lay = g.layout();
  Element out(lay.prefix(w.lo, w.hi), 0);
  if (!g.is_abelian()) {
    const auto& G = g.block_group();
    std::fill(out.begin(), out.end(), static_cast<Coeff>(G.identity()));
    for (const auto& e : x) {
      if (e.value.size() != 1 || e.value[0] < 0 || static_cast<std::size_t>(e.value[0]) >= G.order())
        throw ValidationError("entry at index " + std::to_string(e.at) + " is not an element of the block group");
      auto& slot = out[lay.coord(w, e.at, 0)];
      slot = static_cast<Coeff>(G.multiply(static_cast<std::size_t>(slot), static_cast<std::size_t>(e.value[0])));
    }
    return out;
  }
  for (const auto& e : x) {
    if (e.value.size() != lay.block_rank(e.at))
      throw finabel::DimensionError("entry at index " + std::to_string(e.at) + " has " +
                                    std::to_string(e.value.size()) + " coordinates, block has " +
                                    std::to_string(lay.block_rank(e.at)));
    for (std::size_t c = 0; c < e.value.size(); ++c) {
      auto& slot = out[lay.coord(w, e.at, c)];
      slot = mod_floor(static_cast<__int128>(slot) + e.value[c], lay.modulus(e.at, c));
    }
  }
  return out;
}

/// Back to entries, dropping identity blocks.
inline Supported unflatten(const LFGroup& g, const Window& w, const Element& x) {
  const auto& lay = g.layout();
  Supported out;
  std::size_t pos = 0;
  for (std::int64_t i = w.lo; i < w.hi; ++i) {
    Element v(x.begin() + static_cast<std::ptrdiff_t>(pos),
              x.begin() + static_cast<std::ptrdiff_t>(pos + lay.block_rank(i)));
    pos += lay.block_rank(i);
    const bool trivial = g.is_abelian() ? std::all_of(v.begin(), v.end(), [](Coeff c) { return c == 0; })
                                        : static_cast<std::size_t>(v[0]) == g.block_group().identity();
    if (!trivial) out.push_back({i, std::move(v)});
  }
  return out;
}

namespace detail {

using CayleyTuple = std::vector<std::uint16_t>;

inline CayleyTuple cayley_apply(const BandedEndo& phi, const Window& from, const Window& to, const CayleyTuple& x) {
  const auto& G = phi.group().block_group();
  CayleyTuple y(static_cast<std::size_t>(to.length()), static_cast<std::uint16_t>(G.identity()));
  for (std::int64_t j = to.lo; j < to.hi; ++j) {
    std::size_t v = G.identity();
    for (const auto& f : phi.block_maps()) {
      const std::int64_t src = j - f.offset;
      if (!from.contains(src)) continue;
      v = G.multiply(v, f.images[x[static_cast<std::size_t>(src - from.lo)]]);
    }
    y[static_cast<std::size_t>(j - to.lo)] = static_cast<std::uint16_t>(v);
  }
  return y;
}

}  // namespace detail

/// phi(x), exactly.
inline Supported evaluate(const BandedEndo& phi, const Supported& x) {
  const auto& g = phi.group();
  const Window w = support_window(g, x);
  const Element flat = flatten(g, x, w);
  if (g.is_abelian()) {
    auto wh = blocks::column_window_map(g.blocks(), phi.map(), w);
    return unflatten(g, wh.target, wh.hom.apply(flat));
  }
  const Window to = phi.image_window(w);
  detail::CayleyTuple t(flat.begin(), flat.end());
  auto y = detail::cayley_apply(phi, w, to, t);
  return unflatten(g, to, Element(y.begin(), y.end()));
}

/// Finite subgroup of an abelian LFGroup, supported on `window`.
struct WindowedSubgroup {
  Window window;
  AbSubgroup sub;
};

inline WindowedSubgroup rewindow(const BlockSequence& b, const WindowedSubgroup& h, const Window& w) {
  if (h.window == w) return h;
  if (!w.contains(h.window)) throw ValidationError("rewindow: target window does not contain the support");
  const Window from = h.window.empty() ? Window{w.lo, w.lo} : h.window;
  return {w, finabel::widen_zero(h.sub, b.moduli({w.lo, from.lo}), b.moduli({from.hi, w.hi}))};
}

inline bool same_subgroup(const BlockSequence& b, const WindowedSubgroup& x, const WindowedSubgroup& y) {
  const Window w = Window::hull(x.window, y.window);
  return rewindow(b, x, w).sub == rewindow(b, y, w).sub;
}

inline WindowedSubgroup finite_subgroup(const LFGroup& g, const std::vector<Supported>& gens) {
  const auto& b = g.blocks();
  Window w;
  for (const auto& x : gens) w = Window::hull(w, support_window(g, x));
  std::vector<Element> flat;
  for (const auto& x : gens) flat.push_back(flatten(g, x, w));
  return {w, finabel::canonical_subgroup(b.window_group(w), flat)};
}

struct TrajectoryReport {
  std::size_t n_max = 0;              ///< steps taken
  std::vector<Integer> orders;        ///< |T_1|, |T_2|, ...
  std::vector<Integer> alphas;        ///< [T_{n+1}:T_n]
  std::vector<Integer> f_indices;     ///< |F / (F n phi(T_n))|
  std::vector<Integer> kernel_orders; ///< |ker phi n T_n|
  std::size_t n0 = 0;
  Integer alpha = 0;
  Integer t_mod_phi_t = 0;
  Integer ker_cap_t = 0;
  Status status = Status::inconclusive;
  std::string note;
  std::vector<WindowedSubgroup> stages;  ///< abelian only: T_1, T_2, ...

  bool certified() const { return status == Status::certified; }
};

namespace detail {

/// True when the last `w` entries of every sequence agree.
inline bool stalled(std::initializer_list<const std::vector<Integer>*> seqs, std::size_t w) {
  for (const auto* s : seqs) {
    if (s->size() < w || w == 0) return false;
    for (std::size_t i = s->size() - w; i + 1 < s->size(); ++i)
      if ((*s)[i] != s->back()) return false;
  }
  return true;
}

inline std::size_t run_start(const std::vector<Integer>& s) {
  std::size_t i = s.size();
  while (i > 1 && s[i - 2] == s.back()) --i;
  return i;  // 1-based index of the first term of the final constant run
}

inline bool record_step(TrajectoryReport& r, Integer alpha, Integer f, Integer k, const StabilizationPolicy& p) {
  if (alpha * k != f) throw Error("internal: finite-level identity |F/(F n phi T_n)| = alpha_n |ker n T_n| failed");
  r.alphas.push_back(std::move(alpha));
  r.f_indices.push_back(std::move(f));
  r.kernel_orders.push_back(std::move(k));
  r.n_max = r.alphas.size();
  if (stalled({&r.alphas, &r.f_indices, &r.kernel_orders}, p.stall) &&
      r.f_indices.back() == r.alphas.back() * r.kernel_orders.back()) {
    r.status = Status::certified;
    r.n0 = run_start(r.alphas);
    r.alpha = r.alphas.back();
    r.t_mod_phi_t = r.f_indices.back();
    r.ker_cap_t = r.kernel_orders.back();
    return true;
  }
  return false;
}

inline void trivial_report(TrajectoryReport& r) {
  r.status = Status::certified;
  r.alpha = r.t_mod_phi_t = r.ker_cap_t = 1;
  r.orders = {1};
  r.note = "trivial F";
}

inline TrajectoryReport abelian_trajectory(const BandedEndo& phi, const WindowedSubgroup& f,
                                           const StabilizationPolicy& p, std::size_t coord_budget, bool keep_stages) {
  const auto& b = phi.group().blocks();
  TrajectoryReport r;
  if (f.sub.is_trivial()) {
    trivial_report(r);
    if (keep_stages) r.stages = {f};
    return r;
  }
  WindowedSubgroup t = f;
  r.orders.push_back(t.sub.order());
  if (keep_stages) r.stages.push_back(t);
  for (std::size_t n = 1; n <= p.max_n; ++n) {
    auto wh = blocks::column_window_map(b, phi.map(), t.window);
    if (b.prefix(wh.target.lo, wh.target.hi) > coord_budget) {
      r.note = "window budget exhausted";
      return r;
    }
    const AbSubgroup phi_t = finabel::image(wh.hom, t.sub);
    const AbSubgroup fw = rewindow(b, f, wh.target).sub;
    WindowedSubgroup next{wh.target, finabel::sum(fw, phi_t)};
    Integer k = finabel::kernel_on(wh.hom, t.sub).order();
    Integer fi = f.sub.order() / finabel::intersect(fw, phi_t).order();
    Integer alpha = next.sub.order() / t.sub.order();
    r.orders.push_back(next.sub.order());
    if (keep_stages) r.stages.push_back(next);
    t = std::move(next);
    if (record_step(r, std::move(alpha), std::move(fi), std::move(k), p)) return r;
  }
  r.note = "stall not reached within max_n";
  return r;
}

inline TrajectoryReport cayley_trajectory(const BandedEndo& phi, const std::vector<Supported>& gens,
                                          const StabilizationPolicy& p, std::size_t element_budget) {
  const auto& g = phi.group();
  const auto& G = g.block_group();
  TrajectoryReport r;
  Window w;
  for (const auto& x : gens) w = Window::hull(w, support_window(g, x));
  std::vector<CayleyTuple> flat;
  for (const auto& x : gens) {
    Element e = flatten(g, x, w);
    flat.emplace_back(e.begin(), e.end());
  }
  gengroup::PowerGroup pw(G, static_cast<std::size_t>(w.length()));
  auto f = gengroup::closure(pw, flat, element_budget);
  if (f.order() == 1) {
    trivial_report(r);
    return r;
  }
  auto pad = [&](const gengroup::ElementSubgroup<CayleyTuple>& h, const Window& from, const Window& to) {
    gengroup::ElementSubgroup<CayleyTuple> out;
    for (const auto& x : h.elements) {
      CayleyTuple y(static_cast<std::size_t>(to.length()), static_cast<std::uint16_t>(G.identity()));
      std::copy(x.begin(), x.end(), y.begin() + (from.lo - to.lo));
      out.elements.push_back(std::move(y));
    }
    std::sort(out.elements.begin(), out.elements.end());
    return out;
  };
  const Window fwin = w;
  auto t = f;
  r.orders.push_back(t.order());
  for (std::size_t n = 1; n <= p.max_n; ++n) {
    const Window to = phi.image_window(w);
    gengroup::PowerGroup pt(G, static_cast<std::size_t>(to.length()));
    std::set<CayleyTuple> image;
    std::size_t kernel = 0;
    const CayleyTuple e = pt.identity();
    for (const auto& x : t.elements) {
      auto y = cayley_apply(phi, w, to, x);
      if (y == e) ++kernel;
      image.insert(std::move(y));
    }
    auto phi_t = gengroup::from_set(std::move(image));
    auto fw = pad(f, fwin, to);
    auto next = gengroup::subgroup_product(pt, phi_t, fw);
    if (next.order() > element_budget) {
      r.note = "element budget exhausted";
      return r;
    }
    Integer fi = Integer(f.order()) / gengroup::intersect(fw, phi_t).order();
    Integer alpha = Integer(next.order()) / t.order();
    r.orders.push_back(next.order());
    t = std::move(next);
    w = to;
    if (record_step(r, std::move(alpha), std::move(fi), Integer(kernel), p)) return r;
  }
  r.note = "stall not reached within max_n";
  return r;
}

}  // namespace detail

/// Coordinate budget for abelian windows and element budget for Cayley
/// trajectories.
struct TrajectoryBudget {
  std::size_t coordinates = 4096;
  std::size_t elements = 1u << 18;
};

/// T_n(phi, F) = F + phi(F) + ... + phi^{n-1}(F), abelian case.
inline WindowedSubgroup trajectory(const BandedEndo& phi, const std::vector<Supported>& gens, std::size_t n) {
  if (n == 0) throw ValidationError("trajectory needs n >= 1");
  const auto& b = phi.group().blocks();
  const WindowedSubgroup f = finite_subgroup(phi.group(), gens);
  WindowedSubgroup t = f;
  for (std::size_t k = 1; k < n; ++k) {
    auto wh = blocks::column_window_map(b, phi.map(), t.window);
    t = {wh.target, finabel::sum(rewindow(b, f, wh.target).sub, finabel::image(wh.hom, t.sub))};
  }
  return t;
}

/// |T_n(phi, F)| for either kind of group.
inline Integer trajectory_order(const BandedEndo& phi, const std::vector<Supported>& gens, std::size_t n) {
  if (phi.group().is_abelian()) return trajectory(phi, gens, n).sub.order();
  StabilizationPolicy p{n - 1, n + 1};
  auto r = detail::cayley_trajectory(phi, gens, p, TrajectoryBudget{}.elements);
  if (r.orders.size() < n) throw Error("trajectory did not reach the requested length");
  return r.orders[n - 1];
}

/// Runs T_n until alpha_n, |F/(F n phi T_n)| and |ker phi n T_n| have all
/// been constant for `stall` steps and the identity |T/phi T| = alpha |ker n T|
/// holds; otherwise the report stays inconclusive.
inline TrajectoryReport trajectory_limits(const BandedEndo& phi, const std::vector<Supported>& gens,
                                          const StabilizationPolicy& policy = {}, TrajectoryBudget budget = {},
                                          bool keep_stages = false) {
  if (phi.group().is_abelian())
    return detail::abelian_trajectory(phi, finite_subgroup(phi.group(), gens), policy, budget.coordinates,
                                      keep_stages);
  return detail::cayley_trajectory(phi, gens, policy, budget.elements);
}

enum class AlgMethod { limit, limitfree };

inline EntropyResult entropy_from(const TrajectoryReport& r, AlgMethod m, const StabilizationPolicy& p) {
  EntropyResult out;
  out.status = r.status;
  out.budget = p.max_n;
  out.note = r.note;
  if (!r.certified()) return out;
  out.value = m == AlgMethod::limit ? EntropyValue::log_of(r.alpha)
                                    : EntropyValue::log_of(Rational(r.t_mod_phi_t, r.ker_cap_t));
  return out;
}

/// H_alg(phi, F): log alpha (limit) or log|T/phi T| - log|ker phi n T| (limitfree).
inline EntropyResult algebraic_entropy(const BandedEndo& phi, const std::vector<Supported>& gens, AlgMethod m,
                                       const StabilizationPolicy& p = {}) {
  return entropy_from(trajectory_limits(phi, gens, p), m, p);
}

/// Maximum of H_alg over an explicit family: a lower bound for h_alg(phi).
inline EntropyResult h_alg(const BandedEndo& phi, const std::vector<std::vector<Supported>>& family,
                           const StabilizationPolicy& p = {}) {
  EntropyResult best;
  best.status = Status::certified;
  best.budget = p.max_n;
  for (const auto& f : family) {
    auto r = algebraic_entropy(phi, f, AlgMethod::limit, p);
    if (!r.certified()) {
      best.status = r.status;
      best.note = r.note;
      continue;
    }
    if (best.value < r.value) best.value = r.value;
  }
  return best;
}

/// log|T/phi(T)| alone, the quantity Yuzvinski's formula would report.
inline EntropyResult yuzvinski_gap(const BandedEndo& phi, const std::vector<Supported>& gens,
                                   const StabilizationPolicy& p = {}) {
  auto r = trajectory_limits(phi, gens, p);
  EntropyResult out;
  out.status = r.status;
  out.budget = p.max_n;
  out.note = r.note;
  if (r.certified()) out.value = EntropyValue::log_of(r.t_mod_phi_t);
  return out;
}

}  // namespace ent::discrete
