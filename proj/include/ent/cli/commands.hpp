#pragma once

// Command dispatch: each command turns an Instance into a JSON report.

#include "ent/cli/instance.hpp"
#include "ent/cli/report.hpp"

#include <future>

namespace ent::cli {

enum class Command { alg_entropy, top_entropy, bridge_check, depth, verify };

inline const char* to_string(Command c) {
  switch (c) {
    case Command::alg_entropy: return "alg-entropy";
    case Command::top_entropy: return "top-entropy";
    case Command::bridge_check: return "bridge-check";
    case Command::depth: return "depth";
    case Command::verify: return "verify";
  }
  return "?";
}

inline std::optional<Command> command_from(const std::string& s) {
  for (Command c : {Command::alg_entropy, Command::top_entropy, Command::bridge_check, Command::depth, Command::verify})
    if (s == to_string(c)) return c;
  return std::nullopt;
}

enum class Method { limit, limitfree, surjective };

inline const char* to_string(Method m) {
  switch (m) {
    case Method::limit: return "limit";
    case Method::limitfree: return "limitfree";
    case Method::surjective: return "surjective";
  }
  return "?";
}

struct Options {
  Method method = Method::limit;
  std::size_t jobs = 1;
  bool approx = false;
};

/// A report plus the process exit code it implies.
struct Outcome {
  json report;
  int exit_code = 0;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitInconclusive = 2;
inline constexpr int kExitValidation = 3;
inline constexpr int kExitHypothesis = 4;

namespace detail {

/// fn(0..n-1) in batches of `jobs` threads; results in index order.
template <class Fn>
auto parallel_map(std::size_t n, std::size_t jobs, Fn fn) -> std::vector<decltype(fn(std::size_t{}))> {
  std::vector<decltype(fn(std::size_t{}))> out(n);
  if (jobs <= 1) {
    for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
    return out;
  }
  for (std::size_t start = 0; start < n; start += jobs) {
    std::vector<std::future<decltype(fn(std::size_t{}))>> batch;
    for (std::size_t i = start; i < std::min(n, start + jobs); ++i) batch.push_back(std::async(std::launch::async, fn, i));
    for (std::size_t i = 0; i < batch.size(); ++i) out[start + i] = batch[i].get();
  }
  return out;
}

inline void require_kind(Command c, const Instance& inst, std::initializer_list<Kind> kinds) {
  for (Kind k : kinds)
    if (inst.kind == k) return;
  throw ValidationError(std::string("command ") + to_string(c) + " does not apply to a " + to_string(inst.kind) +
                        " instance");
}

inline json window_json(const blocks::Window& w) { return json::array({w.lo, w.hi}); }

inline json cylinder_json(const profinite::CylinderSubgroup& u) {
  return {{"window", window_json(u.window)}, {"generators", u.core.generators()}, {"index", int_json(profinite::index(u))}};
}

inline json trajectory_json(const discrete::TrajectoryReport& r) {
  json j{{"status", to_string(r.status)},
         {"steps", r.n_max},
         {"orders", seq_json(r.orders)},
         {"alphas", seq_json(r.alphas)},
         {"f_indices", seq_json(r.f_indices)},
         {"kernel_orders", seq_json(r.kernel_orders)}};
  if (r.certified()) {
    j["n0"] = r.n0;
    j["alpha"] = int_json(r.alpha);
    j["t_mod_phi_t"] = int_json(r.t_mod_phi_t);
    j["ker_cap_t"] = int_json(r.ker_cap_t);
  }
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

inline json cotrajectory_json(const profinite::CotrajectoryReport& r) {
  json j{{"status", to_string(r.status)},
         {"steps", r.n_max},
         {"indices", seq_json(r.indices)},
         {"alphas", seq_json(r.alphas)},
         {"psi_inv_indices", seq_json(r.psi_inv_indices)},
         {"coker_indices", seq_json(r.coker_indices)}};
  if (r.certified()) {
    j["n0"] = r.n0;
    j["n1"] = r.n1;
    j["alpha"] = int_json(r.alpha);
    j["psi_inv_c_mod_c"] = int_json(r.psi_inv_c_mod_c);
    j["k_mod_l"] = int_json(r.k_mod_l);
  }
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

inline int exit_for(Status s) {
  switch (s) {
    case Status::certified: return kExitOk;
    case Status::inconclusive: return kExitInconclusive;
    case Status::hypothesis_failure: return kExitHypothesis;
  }
  return kExitOk;
}

inline json header(Command c, const Instance& inst) {
  json j{{"command", to_string(c)}, {"kind", to_string(inst.kind)}};
  if (!inst.name.empty()) j["instance"] = inst.name;
  j["policy"] = {{"max_n", inst.policy.max_n}, {"stall_window", inst.policy.stall},
                 {"window_budget", inst.policy.window_budget}};
  return j;
}

struct AlgMember {
  discrete::TrajectoryReport report;
  EntropyResult entropy;
};

inline std::vector<AlgMember> alg_members(const Instance& inst, discrete::AlgMethod m, std::size_t jobs) {
  const auto phi = inst.banded_endo();
  const auto p = inst.policy.stabilization();
  discrete::TrajectoryBudget budget;
  budget.coordinates = inst.policy.window_budget;
  return parallel_map(inst.family.size(), jobs, [&](std::size_t i) {
    AlgMember a;
    a.report = discrete::trajectory_limits(phi, inst.family[i], p, budget);
    a.entropy = discrete::entropy_from(a.report, m, p);
    return a;
  });
}

/// The dual side of a bridge instance: psi = phi^ and U_i = F_i^perp.
struct DualSide {
  profinite::RowFiniteEndo psi;
  std::vector<profinite::CylinderSubgroup> subgroups;
};

inline DualSide dual_side(const Instance& inst) {
  if (inst.kind != Kind::bridge) return {inst.rowfinite_endo(), inst.cylinders()};
  const auto phi = inst.banded_endo();
  DualSide d;
  for (const auto& gens : inst.family) {
    auto b = duality::bridge(phi, gens);
    d.psi = b.psi;
    d.subgroups.push_back(b.u);
  }
  if (inst.family.empty()) d.psi = duality::bridge(phi, discrete::WindowedSubgroup{}).psi;
  return d;
}

struct TopMember {
  profinite::CotrajectoryReport report;
  EntropyResult entropy;
};

inline std::vector<TopMember> top_members(const DualSide& d, const Instance& inst, profinite::TopMethod m,
                                          std::size_t jobs) {
  const auto p = inst.policy.stabilization();
  return parallel_map(d.subgroups.size(), jobs, [&](std::size_t i) {
    TopMember t;
    t.report = profinite::cotrajectory_limits(d.psi, d.subgroups[i], p, inst.policy.window_budget);
    t.entropy = profinite::entropy_from(d.psi, t.report, m, p);
    return t;
  });
}

inline EntropyResult sup(const std::vector<EntropyResult>& rs, std::size_t budget) {
  EntropyResult best;
  best.status = Status::certified;
  best.budget = budget;
  for (const auto& r : rs) {
    if (!r.certified()) {
      best.status = worse(best.status, r.status);
      continue;
    }
    if (best.value < r.value) best.value = r.value;
  }
  return best;
}

inline Outcome alg_entropy(const Instance& inst, const Options& o) {
  require_kind(Command::alg_entropy, inst, {Kind::discrete, Kind::bridge});
  if (o.method == Method::surjective) throw ValidationError("alg-entropy takes --method limit or limitfree");
  const auto m = o.method == Method::limit ? discrete::AlgMethod::limit : discrete::AlgMethod::limitfree;
  const auto members = alg_members(inst, m, o.jobs);
  json report = header(Command::alg_entropy, inst);
  report["method"] = to_string(o.method);
  json list = json::array();
  std::vector<EntropyResult> values;
  for (const auto& a : members) {
    list.push_back({{"entropy", entropy_json(a.entropy, o.approx)}, {"trajectory", trajectory_json(a.report)}});
    values.push_back(a.entropy);
  }
  const auto h = sup(values, inst.policy.max_n);
  report["members"] = list;
  report["h_alg"] = entropy_json(h, o.approx);
  report["status"] = to_string(h.status);
  return {report, exit_for(h.status)};
}

inline Outcome top_entropy(const Instance& inst, const Options& o) {
  require_kind(Command::top_entropy, inst, {Kind::profinite, Kind::bridge, Kind::depth});
  const auto d = dual_side(inst);
  const auto m = o.method == Method::limit       ? profinite::TopMethod::limit
                 : o.method == Method::limitfree ? profinite::TopMethod::limitfree
                                                 : profinite::TopMethod::surjective;
  if (m == profinite::TopMethod::surjective && !profinite::is_surjective(d.psi))
    throw HypothesisError("--method surjective needs a surjective endomorphism");
  const auto members = top_members(d, inst, m, o.jobs);
  json report = header(Command::top_entropy, inst);
  report["method"] = to_string(o.method);
  json list = json::array();
  std::vector<EntropyResult> values;
  for (std::size_t i = 0; i < members.size(); ++i) {
    list.push_back({{"subgroup", cylinder_json(d.subgroups[i])},
                    {"entropy", entropy_json(members[i].entropy, o.approx)},
                    {"cotrajectory", cotrajectory_json(members[i].report)}});
    values.push_back(members[i].entropy);
  }
  const auto h = sup(values, inst.policy.max_n);
  report["members"] = list;
  report["h_top"] = entropy_json(h, o.approx);
  report["status"] = to_string(h.status);
  return {report, exit_for(h.status)};
}

inline json bridge_record_json(const duality::BridgeRecord& r, bool approx) {
  return {{"checked_steps", r.checked_steps},
          {"trajectories_dual", r.trajectories_dual},
          {"kernel_coker", r.kernel_coker},
          {"quotients", r.quotients},
          {"h_alg", entropy_json(r.alg, approx)},
          {"h_top", entropy_json(r.top, approx)},
          {"entropy_equal", r.entropy_equal},
          {"holds", r.holds()}};
}

inline Outcome bridge_check(const Instance& inst, const Options& o) {
  require_kind(Command::bridge_check, inst, {Kind::bridge, Kind::discrete});
  if (!inst.group.is_abelian()) throw ValidationError("bridge-check needs abelian blocks");
  const auto phi = inst.banded_endo();
  const auto p = inst.policy.stabilization();
  const auto records = parallel_map(inst.family.size(), o.jobs,
                                    [&](std::size_t i) { return duality::bridge_record(phi, inst.family[i], p); });
  json report = header(Command::bridge_check, inst);
  report["dual_endomorphism"] = detail::banded_json(duality::dual_band(inst.blocks(), phi.map()));
  json list = json::array();
  std::vector<EntropyResult> alg, top;
  Status status = Status::certified;
  bool holds = true;
  for (const auto& r : records) {
    list.push_back(bridge_record_json(r, o.approx));
    alg.push_back(r.alg);
    top.push_back(r.top);
    status = worse(status, worse(r.alg.status, r.top.status));
    holds = holds && r.holds();
  }
  const auto ha = sup(alg, inst.policy.max_n);
  const auto ht = sup(top, inst.policy.max_n);
  holds = holds && status == Status::certified && ha.value == ht.value;
  report["members"] = list;
  report["h_alg"] = entropy_json(ha, o.approx);
  report["h_top"] = entropy_json(ht, o.approx);
  report["holds"] = holds;
  report["status"] = to_string(status);
  int code = exit_for(status);
  if (code == kExitOk && !holds) code = kExitCheckFailed;
  return {report, code};
}

inline json depth_json(const depth::DepthReport& r, bool approx) {
  json cands = json::array();
  for (const auto& c : r.candidates) {
    json j{{"subgroup", cylinder_json(c.u)},
           {"verdict", depth::to_string(c.certificate.verdict)},
           {"n", c.certificate.n},
           {"pinned", window_json(c.certificate.pinned)},
           {"reason", c.certificate.reason}};
    if (c.depth) {
      j["depth_via_plus"] = int_json(c.depth->via_plus);
      j["depth_via_minus"] = int_json(c.depth->via_minus);
    }
    if (!c.note.empty()) j["note"] = c.note;
    cands.push_back(j);
  }
  json j{{"status", to_string(r.status)}, {"candidates", cands}, {"inverse", detail::banded_json(r.map.backward.map())}};
  if (!r.note.empty()) j["note"] = r.note;
  if (r.depth) {
    j["depth"] = int_json(*r.depth);
    j["depth_inverse"] = int_json(*r.depth_inverse);
    j["invariant"] = r.invariant;
    j["inverse_depth_agrees"] = r.inverse_depth_agrees;
    j["h_top"] = entropy_json(r.h_top, approx);
    json base = json::array();
    for (std::size_t i = 0; i < r.base.size(); ++i)
      base.push_back({{"subgroup", cylinder_json(r.base[i])}, {"entropy", entropy_json(r.base_entropies[i], approx)}});
    j["base"] = base;
    j["h_top_is_log_depth"] = r.h_top_is_log_depth;
    j["infinite_depth_above_one"] = r.infinite_depth_above_one;
  }
  return j;
}

inline bool depth_holds(const depth::DepthReport& r) {
  return r.depth && r.invariant && r.inverse_depth_agrees && r.h_top_is_log_depth && r.infinite_depth_above_one;
}

inline Outcome depth_command(const Instance& inst, const Options& o) {
  require_kind(Command::depth, inst, {Kind::depth, Kind::profinite});
  const auto r = depth::depth_report(inst.rowfinite_endo(), inst.cylinders(), inst.policy.stabilization(), 3, o.jobs);
  json report = header(Command::depth, inst);
  report["depth"] = depth_json(r, o.approx);
  report["status"] = to_string(r.status);
  int code = exit_for(r.status);
  if (code == kExitOk && !depth_holds(r)) code = kExitCheckFailed;
  return {report, code};
}

struct Checks {
  json list = json::array();
  bool ok = true;
  Status status = Status::certified;

  void add(std::string name, bool passed, json detail = nullptr) {
    json j{{"name", std::move(name)}, {"passed", passed}};
    if (!detail.is_null()) j["detail"] = std::move(detail);
    list.push_back(std::move(j));
    ok = ok && passed;
  }
};

inline bool chain_divides(const std::vector<Integer>& growing, const std::vector<Integer>& shrinking) {
  for (std::size_t i = 0; i + 1 < growing.size(); ++i)
    if (growing[i + 1] % growing[i] != 0) return false;
  for (std::size_t i = 0; i + 1 < shrinking.size(); ++i)
    if (shrinking[i] % shrinking[i + 1] != 0) return false;
  return true;
}

inline void verify_discrete(const Instance& inst, const Options& o, Checks& c) {
  const auto members = alg_members(inst, discrete::AlgMethod::limit, o.jobs);
  for (std::size_t i = 0; i < members.size(); ++i) {
    const auto& r = members[i].report;
    const std::string tag = "member " + std::to_string(i) + ": ";
    c.status = worse(c.status, r.status);
    bool identity = r.f_indices.size() == r.alphas.size() && r.kernel_orders.size() == r.alphas.size();
    for (std::size_t n = 0; identity && n < r.alphas.size(); ++n)
      identity = r.f_indices[n] == r.alphas[n] * r.kernel_orders[n];
    c.add(tag + "trajectory divisibility", chain_divides(r.orders, r.alphas));
    c.add(tag + "|F/(F n phi T_n)| = alpha_n |ker phi n T_n|", identity);
    if (!r.certified()) continue;
    const auto p = inst.policy.stabilization();
    const auto lim = discrete::entropy_from(r, discrete::AlgMethod::limit, p);
    const auto free = discrete::entropy_from(r, discrete::AlgMethod::limitfree, p);
    c.add(tag + "limit = limit-free", lim.value == free.value);
    const auto gap = EntropyValue::log_of(r.t_mod_phi_t);
    c.add(tag + "yuzvinski gap", r.t_mod_phi_t == r.alpha * r.ker_cap_t,
          {{"gap", entropy_value_json(gap, o.approx)},
           {"entropy", entropy_value_json(lim.value, o.approx)},
           {"ker_cap_t", int_json(r.ker_cap_t)},
           {"differs", !(gap == lim.value)}});
  }
}

inline void verify_profinite(const Instance& inst, const Options& o, Checks& c) {
  const auto d = dual_side(inst);
  const auto members = top_members(d, inst, profinite::TopMethod::limit, o.jobs);
  const bool surjective = profinite::is_surjective(d.psi);
  const auto p = inst.policy.stabilization();
  for (std::size_t i = 0; i < members.size(); ++i) {
    const auto& r = members[i].report;
    const std::string tag = "subgroup " + std::to_string(i) + ": ";
    c.status = worse(c.status, r.status);
    c.add(tag + "cotrajectory divisibility", chain_divides(r.indices, r.alphas));
    if (!r.certified()) continue;
    const auto lim = profinite::entropy_from(d.psi, r, profinite::TopMethod::limit, p);
    const auto free = profinite::entropy_from(d.psi, r, profinite::TopMethod::limitfree, p);
    c.add(tag + "limit = limit-free", lim.value == free.value);
    if (surjective) {
      const auto sur = profinite::entropy_from(d.psi, r, profinite::TopMethod::surjective, p);
      c.add(tag + "surjective formula", sur.value == lim.value);
      for (std::size_t k = 2; k <= 4; ++k) {
        try {
          const auto law = profinite::log_law_check(d.psi, d.subgroups[i], k, p);
          c.add(tag + "log law k=" + std::to_string(k), law.holds,
                {{"lhs", int_json(law.lhs)}, {"rhs", int_json(law.rhs)}});
        } catch (const InconclusiveError& e) {
          c.status = worse(c.status, Status::inconclusive);
          c.add(tag + "log law k=" + std::to_string(k) + " (inconclusive)", true, e.what());
        }
      }
    }
    const auto q = profinite::quotient_system(d.psi, d.subgroups[i], p);
    c.add(tag + "quotient system entropy", q.matches_entropy,
          {{"explicit", q.explicit_quotient}, {"ker", int_json(q.ker_order)}, {"coker", int_json(q.coker_order)}});
  }
}

inline void verify_bridge(const Instance& inst, const Options& o, Checks& c) {
  const auto phi = inst.banded_endo();
  const auto p = inst.policy.stabilization();
  for (std::size_t i = 0; i < inst.family.size(); ++i) {
    const std::string tag = "member " + std::to_string(i) + ": ";
    const auto f = discrete::finite_subgroup(phi.group(), inst.family[i]);
    const auto fp = duality::annihilator(f.sub);
    c.add(tag + "|F| |F^perp| = |A_W|", f.sub.order() * fp.order() == f.sub.ambient().order());
    c.add(tag + "F^perp^perp = F", duality::annihilator(fp) == f.sub);
    const auto r = duality::bridge_record(phi, inst.family[i], p);
    c.status = worse(c.status, worse(r.alg.status, r.top.status));
    c.add(tag + "T_n^perp = C_n", r.trajectories_dual, {{"checked_steps", r.checked_steps}});
    if (r.alg.certified() && r.top.certified()) {
      c.add(tag + "|ker phi n T| = [K : Im psi + C]", r.kernel_coker);
      c.add(tag + "|T/phi T| = |psi^-1(C)/C|", r.quotients);
      c.add(tag + "H_alg = H_top", r.entropy_equal,
            {{"h_alg", entropy_json(r.alg, o.approx)}, {"h_top", entropy_json(r.top, o.approx)}});
    }
  }
}

inline Outcome verify(const Instance& inst, const Options& o) {
  Checks c;
  switch (inst.kind) {
    case Kind::discrete: verify_discrete(inst, o, c); break;
    case Kind::profinite: verify_profinite(inst, o, c); break;
    case Kind::bridge:
      verify_discrete(inst, o, c);
      verify_profinite(inst, o, c);
      verify_bridge(inst, o, c);
      break;
    case Kind::depth: {
      verify_profinite(inst, o, c);
      const auto r = depth::depth_report(inst.rowfinite_endo(), inst.cylinders(), inst.policy.stabilization(), 3, o.jobs);
      c.status = worse(c.status, r.status);
      if (r.depth) {
        c.add("depth agrees across candidates", r.invariant);
        c.add("depth(psi) = depth(psi^-1)", r.inverse_depth_agrees,
              {{"depth", int_json(*r.depth)}, {"depth_inverse", int_json(*r.depth_inverse)}});
        c.add("h_top = log depth", r.h_top_is_log_depth);
        c.add("K infinite implies depth > 1", r.infinite_depth_above_one);
      }
      break;
    }
  }
  json report = header(Command::verify, inst);
  report["checks"] = c.list;
  report["all_passed"] = c.ok;
  report["status"] = to_string(c.status);
  int code = c.ok ? exit_for(c.status) : kExitCheckFailed;
  return {report, code};
}

}  // namespace detail

/// Runs `cmd`; validation and hypothesis errors become failure reports.
inline Outcome run_command(Command cmd, const Instance& inst, const Options& o = {}) {
  try {
    switch (cmd) {
      case Command::alg_entropy: return detail::alg_entropy(inst, o);
      case Command::top_entropy: return detail::top_entropy(inst, o);
      case Command::bridge_check: return detail::bridge_check(inst, o);
      case Command::depth: return detail::depth_command(inst, o);
      case Command::verify: return detail::verify(inst, o);
    }
  } catch (const ValidationError& e) {
    json r = detail::header(cmd, inst);
    r["status"] = "validation_error";
    r["error"] = e.what();
    return {r, kExitValidation};
  } catch (const HypothesisError& e) {
    json r = detail::header(cmd, inst);
    r["status"] = to_string(Status::hypothesis_failure);
    r["error"] = e.what();
    return {r, kExitHypothesis};
  } catch (const InconclusiveError& e) {
    json r = detail::header(cmd, inst);
    r["status"] = to_string(Status::inconclusive);
    r["error"] = e.what();
    return {r, kExitInconclusive};
  }
  return {};
}

}  // namespace ent::cli
