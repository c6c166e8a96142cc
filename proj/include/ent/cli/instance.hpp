#pragma once

// Instance files: a JSON document with schema "entctl-instance/1".

#include "ent/depth.hpp"
#include "ent/discrete.hpp"
#include "ent/duality.hpp"
#include "ent/profinite.hpp"

#include <json.hpp>

#include <fstream>
#include <optional>
#include <sstream>

namespace ent::cli {

using json = nlohmann::json;

inline constexpr const char* kInstanceSchema = "entctl-instance/1";

/// A malformed instance file; `what()` names the offending field.
class SchemaError : public ValidationError {
 public:
  SchemaError(const std::string& path, const std::string& msg)
      : ValidationError(path.empty() ? msg : path + ": " + msg), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

enum class Kind { discrete, profinite, bridge, depth };

inline const char* to_string(Kind k) {
  switch (k) {
    case Kind::discrete: return "discrete";
    case Kind::profinite: return "profinite";
    case Kind::bridge: return "bridge";
    case Kind::depth: return "depth";
  }
  return "?";
}

struct Policy {
  std::size_t max_n = 64;
  std::size_t stall = 3;
  std::size_t window_budget = 4096;
  bool operator==(const Policy&) const = default;
  StabilizationPolicy stabilization() const { return {max_n, stall}; }
};

struct GroupSpec {
  blocks::IndexSet index_set;
  std::vector<std::vector<Coeff>> types;          ///< abelian blocks, one list of moduli per residue
  std::vector<std::vector<std::size_t>> cayley;  ///< non-abelian block table; empty when abelian
  bool operator==(const GroupSpec&) const = default;
  bool is_abelian() const { return cayley.empty(); }
};

struct CylinderSpec {
  blocks::Window window;
  std::vector<finabel::Element> generators;
  bool operator==(const CylinderSpec&) const = default;
};

struct Instance {
  std::string name;
  Kind kind = Kind::discrete;
  GroupSpec group;
  blocks::BandedMap map;                          ///< abelian endomorphism
  std::vector<discrete::BlockEndo> block_maps;    ///< non-abelian endomorphism
  std::vector<std::vector<discrete::Supported>> family;
  std::vector<CylinderSpec> subgroups;
  Policy policy;
  bool operator==(const Instance&) const = default;

  blocks::BlockSequence blocks() const { return blocks::BlockSequence(group.index_set, group.types); }
  discrete::LFGroup lf_group() const {
    if (group.is_abelian()) return discrete::locally_finite_group(blocks());
    return discrete::locally_finite_group(group.index_set, gengroup::cayley_group(group.cayley));
  }
  discrete::BandedEndo banded_endo() const {
    const auto g = lf_group();
    return group.is_abelian() ? discrete::banded_endo(g, map) : discrete::banded_endo(g, block_maps);
  }
  profinite::ProGroup pro_group() const { return profinite::pro_group(blocks()); }
  profinite::RowFiniteEndo rowfinite_endo() const { return profinite::rowfinite_endo(pro_group(), map); }
  std::vector<profinite::CylinderSubgroup> cylinders() const {
    const auto k = pro_group();
    std::vector<profinite::CylinderSubgroup> out;
    for (const auto& s : subgroups) out.push_back(profinite::cylinder(k, s.window, s.generators));
    return out;
  }
};

namespace detail {

inline std::string at(const std::string& path, const std::string& key) { return path + "/" + key; }
inline std::string at(const std::string& path, std::size_t i) { return path + "/" + std::to_string(i); }

inline const json& field(const json& j, const std::string& path, const char* key) {
  if (!j.is_object()) throw SchemaError(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw SchemaError(at(path, key), "missing field");
  return *it;
}

inline const json& array(const json& j, const std::string& path) {
  if (!j.is_array()) throw SchemaError(path, "expected an array");
  return j;
}

inline std::int64_t integer(const json& j, const std::string& path) {
  if (!j.is_number_integer()) throw SchemaError(path, "expected an integer");
  return j.get<std::int64_t>();
}

inline std::size_t count(const json& j, const std::string& path) {
  const auto v = integer(j, path);
  if (v < 0) throw SchemaError(path, "expected a nonnegative integer");
  return static_cast<std::size_t>(v);
}

inline void only_keys(const json& j, const std::string& path, std::initializer_list<const char*> keys) {
  for (const auto& [k, v] : j.items()) {
    bool known = false;
    for (const char* allowed : keys) known = known || k == allowed;
    if (!known) throw SchemaError(at(path, k), "unknown field");
  }
}

inline std::vector<Coeff> coeffs(const json& j, const std::string& path) {
  std::vector<Coeff> out;
  for (std::size_t i = 0; i < array(j, path).size(); ++i) out.push_back(integer(j[i], at(path, i)));
  return out;
}

inline blocks::IndexSet index_set(const json& j, const std::string& path) {
  if (j == "N") return blocks::IndexSet::naturals();
  if (j == "Z") return blocks::IndexSet::integers();
  if (j.is_object() && j.contains("finite")) {
    only_keys(j, path, {"finite"});
    return blocks::IndexSet::finite(integer(j["finite"], at(path, "finite")));
  }
  throw SchemaError(path, R"(expected "N", "Z" or {"finite": n})");
}

inline json index_set_json(const blocks::IndexSet& s) {
  switch (s.kind) {
    case blocks::IndexKind::naturals: return "N";
    case blocks::IndexKind::integers: return "Z";
    case blocks::IndexKind::finite: return json{{"finite", s.size}};
  }
  return nullptr;
}

inline GroupSpec group(const json& j, const std::string& path) {
  GroupSpec g;
  only_keys(j, path, {"index_set", "blocks", "cayley"});
  g.index_set = index_set(field(j, path, "index_set"), at(path, "index_set"));
  if (j.contains("cayley") == j.contains("blocks")) throw SchemaError(path, R"(give exactly one of "blocks" or "cayley")");
  if (j.contains("blocks")) {
    const auto p = at(path, "blocks");
    const auto& b = j["blocks"];
    only_keys(b, p, {"period", "types"});
    const auto period = count(field(b, p, "period"), at(p, "period"));
    const auto& types = array(field(b, p, "types"), at(p, "types"));
    if (types.size() != period) throw SchemaError(at(p, "types"), "expected one block type per residue of the period");
    for (std::size_t i = 0; i < types.size(); ++i) g.types.push_back(coeffs(types[i], at(at(p, "types"), i)));
  } else {
    const auto p = at(path, "cayley");
    const auto& t = array(j["cayley"], p);
    for (std::size_t i = 0; i < t.size(); ++i) {
      std::vector<std::size_t> row;
      for (std::size_t k = 0; k < array(t[i], at(p, i)).size(); ++k) row.push_back(count(t[i][k], at(at(p, i), k)));
      g.cayley.push_back(std::move(row));
    }
    g.types = {{static_cast<Coeff>(g.cayley.size())}};
  }
  return g;
}

inline json group_json(const GroupSpec& g) {
  json j{{"index_set", index_set_json(g.index_set)}};
  if (g.is_abelian()) j["blocks"] = {{"period", g.types.size()}, {"types", g.types}};
  else j["cayley"] = g.cayley;
  return j;
}

inline blocks::BandedMap banded(const json& j, const std::string& path) {
  only_keys(j, path, {"period", "terms"});
  blocks::BandedMap m;
  m.period = count(field(j, path, "period"), at(path, "period"));
  const auto tp = at(path, "terms");
  const auto& residues = array(field(j, path, "terms"), tp);
  if (residues.size() != m.period) throw SchemaError(tp, "expected one entry per residue of the period");
  for (std::size_t r = 0; r < residues.size(); ++r) {
    std::vector<std::vector<blocks::Term>> comps;
    const auto rp = at(tp, r);
    for (std::size_t c = 0; c < array(residues[r], rp).size(); ++c) {
      std::vector<blocks::Term> ts;
      const auto cp = at(rp, c);
      for (std::size_t k = 0; k < array(residues[r][c], cp).size(); ++k) {
        const auto& t = residues[r][c][k];
        const auto p = at(cp, k);
        only_keys(t, p, {"offset", "component", "coeff"});
        ts.push_back({integer(field(t, p, "offset"), at(p, "offset")),
                      count(field(t, p, "component"), at(p, "component")),
                      integer(field(t, p, "coeff"), at(p, "coeff"))});
      }
      comps.push_back(std::move(ts));
    }
    m.terms.push_back(std::move(comps));
  }
  return m;
}

inline json banded_json(const blocks::BandedMap& m) {
  json terms = json::array();
  for (const auto& residue : m.terms) {
    json comps = json::array();
    for (const auto& ts : residue) {
      json list = json::array();
      for (const auto& t : ts) list.push_back({{"offset", t.offset}, {"component", t.component}, {"coeff", t.coeff}});
      comps.push_back(list);
    }
    terms.push_back(comps);
  }
  return {{"period", m.period}, {"terms", terms}};
}

inline std::vector<discrete::BlockEndo> block_endos(const json& j, const std::string& path) {
  only_keys(j, path, {"blocks"});
  std::vector<discrete::BlockEndo> out;
  const auto bp = at(path, "blocks");
  const auto& list = array(field(j, path, "blocks"), bp);
  for (std::size_t i = 0; i < list.size(); ++i) {
    const auto p = at(bp, i);
    only_keys(list[i], p, {"offset", "images"});
    discrete::BlockEndo e;
    e.offset = integer(field(list[i], p, "offset"), at(p, "offset"));
    const auto& im = array(field(list[i], p, "images"), at(p, "images"));
    for (std::size_t k = 0; k < im.size(); ++k) e.images.push_back(count(im[k], at(at(p, "images"), k)));
    out.push_back(std::move(e));
  }
  return out;
}

inline json block_endos_json(const std::vector<discrete::BlockEndo>& maps) {
  json list = json::array();
  for (const auto& e : maps) list.push_back({{"offset", e.offset}, {"images", e.images}});
  return {{"blocks", list}};
}

inline std::vector<std::vector<discrete::Supported>> family(const json& j, const std::string& path) {
  std::vector<std::vector<discrete::Supported>> out;
  for (std::size_t f = 0; f < array(j, path).size(); ++f) {
    const auto fp = at(path, f);
    std::vector<discrete::Supported> gens;
    for (std::size_t g = 0; g < array(j[f], fp).size(); ++g) {
      const auto gp = at(fp, g);
      discrete::Supported x;
      for (std::size_t e = 0; e < array(j[f][g], gp).size(); ++e) {
        const auto ep = at(gp, e);
        const auto& entry = j[f][g][e];
        only_keys(entry, ep, {"at", "value"});
        x.push_back({integer(field(entry, ep, "at"), at(ep, "at")), coeffs(field(entry, ep, "value"), at(ep, "value"))});
      }
      gens.push_back(std::move(x));
    }
    out.push_back(std::move(gens));
  }
  return out;
}

inline json family_json(const std::vector<std::vector<discrete::Supported>>& fam) {
  json out = json::array();
  for (const auto& gens : fam) {
    json g = json::array();
    for (const auto& x : gens) {
      json entries = json::array();
      for (const auto& e : x) entries.push_back({{"at", e.at}, {"value", e.value}});
      g.push_back(entries);
    }
    out.push_back(g);
  }
  return out;
}

inline std::vector<CylinderSpec> cylinders(const json& j, const std::string& path) {
  std::vector<CylinderSpec> out;
  for (std::size_t i = 0; i < array(j, path).size(); ++i) {
    const auto p = at(path, i);
    only_keys(j[i], p, {"window", "generators"});
    const auto w = coeffs(field(j[i], p, "window"), at(p, "window"));
    if (w.size() != 2) throw SchemaError(at(p, "window"), "expected [lo, hi]");
    CylinderSpec s{{w[0], w[1]}, {}};
    const auto gp = at(p, "generators");
    if (j[i].contains("generators"))
      for (std::size_t g = 0; g < array(j[i]["generators"], gp).size(); ++g)
        s.generators.push_back(coeffs(j[i]["generators"][g], at(gp, g)));
    out.push_back(std::move(s));
  }
  return out;
}

inline json cylinders_json(const std::vector<CylinderSpec>& subs) {
  json out = json::array();
  for (const auto& s : subs) out.push_back({{"window", {s.window.lo, s.window.hi}}, {"generators", s.generators}});
  return out;
}

inline Kind kind(const json& j, const std::string& path) {
  for (Kind k : {Kind::discrete, Kind::profinite, Kind::bridge, Kind::depth})
    if (j == to_string(k)) return k;
  throw SchemaError(path, R"(expected "discrete", "profinite", "bridge" or "depth")");
}

/// Builds every typed object once so that invalid data fails at load time.
inline void validate(const Instance& inst) {
  switch (inst.kind) {
    case Kind::discrete:
    case Kind::bridge: {
      const auto phi = inst.banded_endo();
      for (const auto& gens : inst.family)
        for (const auto& x : gens) discrete::support_window(phi.group(), x);
      if (inst.kind == Kind::bridge && !inst.group.is_abelian())
        throw SchemaError("/group", "bridge instances need abelian blocks");
      break;
    }
    case Kind::profinite:
    case Kind::depth:
      if (!inst.group.is_abelian()) throw SchemaError("/group", "profinite instances need abelian blocks");
      inst.rowfinite_endo();
      inst.cylinders();
      break;
  }
}

}  // namespace detail

inline Instance instance_from_json(const json& j) {
  if (!j.is_object()) throw SchemaError("", "instance must be a JSON object");
  detail::only_keys(j, "", {"schema", "name", "kind", "group", "endomorphism", "family", "subgroups", "policy"});
  const auto& schema = detail::field(j, "", "schema");
  if (schema != kInstanceSchema) throw SchemaError("/schema", std::string("expected \"") + kInstanceSchema + "\"");
  Instance inst;
  if (j.contains("name")) {
    if (!j["name"].is_string()) throw SchemaError("/name", "expected a string");
    inst.name = j["name"].get<std::string>();
  }
  inst.kind = detail::kind(detail::field(j, "", "kind"), "/kind");
  inst.group = detail::group(detail::field(j, "", "group"), "/group");
  const auto& endo = detail::field(j, "", "endomorphism");
  if (inst.group.is_abelian()) inst.map = detail::banded(endo, "/endomorphism");
  else inst.block_maps = detail::block_endos(endo, "/endomorphism");
  if (j.contains("family")) inst.family = detail::family(j["family"], "/family");
  if (j.contains("subgroups")) inst.subgroups = detail::cylinders(j["subgroups"], "/subgroups");
  if (j.contains("policy")) {
    const auto& p = j["policy"];
    detail::only_keys(p, "/policy", {"max_n", "stall_window", "window_budget"});
    if (p.contains("max_n")) inst.policy.max_n = detail::count(p["max_n"], "/policy/max_n");
    if (p.contains("stall_window")) inst.policy.stall = detail::count(p["stall_window"], "/policy/stall_window");
    if (p.contains("window_budget"))
      inst.policy.window_budget = detail::count(p["window_budget"], "/policy/window_budget");
  }
  detail::validate(inst);
  return inst;
}

inline json instance_to_json(const Instance& inst) {
  json j{{"schema", kInstanceSchema},
         {"kind", to_string(inst.kind)},
         {"group", detail::group_json(inst.group)},
         {"endomorphism", inst.group.is_abelian() ? detail::banded_json(inst.map) : detail::block_endos_json(inst.block_maps)},
         {"policy", {{"max_n", inst.policy.max_n}, {"stall_window", inst.policy.stall}, {"window_budget", inst.policy.window_budget}}}};
  if (!inst.name.empty()) j["name"] = inst.name;
  if (!inst.family.empty()) j["family"] = detail::family_json(inst.family);
  if (!inst.subgroups.empty()) j["subgroups"] = detail::cylinders_json(inst.subgroups);
  return j;
}

inline Instance parse_instance_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError("", e.what());
  }
  return instance_from_json(j);
}

inline Instance parse_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("", "cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_instance_text(buf.str());
}

}  // namespace ent::cli
