#include "ent/cli/commands.hpp"

#include <gtest/gtest.h>

#include <filesystem>

using namespace ent;
using namespace ent::cli;

namespace {

std::string instance_path(const std::string& name) { return std::string(ENT_INSTANCE_DIR) + "/" + name; }

std::vector<std::string> bundled() {
  std::vector<std::string> out;
  for (const auto& e : std::filesystem::directory_iterator(ENT_INSTANCE_DIR))
    if (e.path().extension() == ".json") out.push_back(e.path().filename().string());
  std::sort(out.begin(), out.end());
  return out;
}

std::string schema_error(const std::string& text) {
  try {
    parse_instance_text(text);
  } catch (const SchemaError& e) {
    return e.path();
  } catch (const ValidationError& e) {
    return std::string("validation: ") + e.what();
  }
  return "no error";
}

}  // namespace

TEST(Instance, RoundTripOfBundledInstances) {
  int parsed = 0;
  for (const auto& name : bundled()) {
    if (name == "ill_defined.json") continue;
    const Instance inst = parse_instance(instance_path(name));
    EXPECT_EQ(instance_from_json(instance_to_json(inst)), inst) << name;
    EXPECT_EQ(instance_to_json(instance_from_json(instance_to_json(inst))), instance_to_json(inst)) << name;
    ++parsed;
  }
  EXPECT_GE(parsed, 10);
  EXPECT_EQ(parse_instance(instance_path("beta_shift.json")).kind, Kind::discrete);
  EXPECT_EQ(parse_instance(instance_path("depth_shift_z3.json")).kind, Kind::depth);
}

TEST(Instance, IllDefinedMapNamesGenerator) {
  try {
    parse_instance(instance_path("ill_defined.json"));
    FAIL() << "expected a validation error";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("generator (residue 0, component 0)"), std::string::npos) << e.what();
  }
}

TEST(Instance, SchemaDiagnostics) {
  const std::string head = R"({"schema":"entctl-instance/1","kind":"discrete",)";
  const std::string group = R"("group":{"index_set":"N","blocks":{"period":1,"types":[[2]]}},)";
  EXPECT_EQ(schema_error(R"({"schema":"other"})"), "/schema");
  EXPECT_EQ(schema_error(head + R"("group":{"index_set":"Q","blocks":{"period":1,"types":[[2]]}}})"), "/group/index_set");
  EXPECT_EQ(schema_error(head + group + R"("endomorphism":{"period":1,"terms":[[[{"offset":1,"component":0,"coeff":"x"}]]]}})"),
            "/endomorphism/terms/0/0/0/coeff");
  EXPECT_EQ(schema_error(head + group + R"("endomorphism":{"period":1,"terms":[[[]]]},"colour":1})"), "/colour");
  EXPECT_EQ(schema_error(head + group + R"("endomorphism":{"period":1,"terms":[[[]]]},"policy":{"max_n":-1}})"),
            "/policy/max_n");
  EXPECT_EQ(schema_error(head + group.substr(0, group.size() - 1) + "}"), "/endomorphism");
  try {
    parse_instance_text("{\n  \"schema\": \n}");
    FAIL();
  } catch (const SchemaError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(Commands, SpecExamples) {
  const auto beta = parse_instance(instance_path("beta_shift.json"));
  const auto alg = run_command(Command::alg_entropy, beta);
  EXPECT_EQ(alg.exit_code, kExitOk);
  EXPECT_EQ(alg.report["h_alg"]["entropy"], json::parse(R"({"log_of":{"num":2,"den":1}})"));
  EXPECT_EQ(alg.report["h_alg"]["status"], "certified");

  const auto bridge = parse_instance(instance_path("bridge_beta.json"));
  const auto bc = run_command(Command::bridge_check, bridge);
  EXPECT_EQ(bc.exit_code, kExitOk);
  EXPECT_TRUE(bc.report["holds"].get<bool>());
  EXPECT_EQ(bc.report["h_alg"]["entropy"], bc.report["h_top"]["entropy"]);
  for (const auto& m : bc.report["members"]) {
    EXPECT_TRUE(m["kernel_coker"].get<bool>());
    EXPECT_TRUE(m["quotients"].get<bool>());
  }

  const auto zero = parse_instance(instance_path("zero_endo.json"));
  const auto v = run_command(Command::verify, zero);
  EXPECT_EQ(v.exit_code, kExitOk);
  bool flagged = false;
  for (const auto& c : v.report["checks"])
    if (c["name"].get<std::string>().find("yuzvinski") != std::string::npos) {
      flagged = c["detail"]["differs"].get<bool>();
      EXPECT_EQ(c["detail"]["gap"], json::parse(R"({"log_of":{"num":8,"den":1}})"));
      EXPECT_EQ(c["detail"]["entropy"], json::parse(R"({"log_of":{"num":1,"den":1}})"));
    }
  EXPECT_TRUE(flagged);

  const auto d = run_command(Command::depth, parse_instance(instance_path("depth_shift_z3.json")));
  EXPECT_EQ(d.exit_code, kExitOk);
  EXPECT_EQ(d.report["depth"]["depth"], 3);
  EXPECT_EQ(d.report["depth"]["h_top"]["entropy"], json::parse(R"({"log_of":{"num":3,"den":1}})"));
}

TEST(Commands, ExitCodes) {
  const auto beta = parse_instance(instance_path("beta_shift.json"));
  EXPECT_EQ(run_command(Command::depth, beta).exit_code, kExitValidation);
  Options surj;
  surj.method = Method::surjective;
  EXPECT_EQ(run_command(Command::alg_entropy, beta, surj).exit_code, kExitValidation);
  const auto rho = parse_instance(instance_path("right_shift.json"));
  EXPECT_EQ(run_command(Command::top_entropy, rho, surj).exit_code, kExitHypothesis);
  const auto sum = parse_instance(instance_path("depth_not_invertible.json"));
  EXPECT_EQ(run_command(Command::depth, sum).exit_code, kExitHypothesis);
  auto tight = beta;
  tight.policy.max_n = 2;
  const auto inc = run_command(Command::alg_entropy, tight);
  EXPECT_EQ(inc.exit_code, kExitInconclusive);
  EXPECT_EQ(inc.report["h_alg"], json::parse(R"({"status":"inconclusive","budget":2})"));
}

TEST(Report, EntropyEncodings) {
  EXPECT_EQ(entropy_value_json(EntropyValue::infinite(), false), "infinite");
  EXPECT_EQ(entropy_value_json(EntropyValue::log_of(Rational(3, 2)), false),
            json::parse(R"({"log_of":{"num":3,"den":2}})"));
  EXPECT_TRUE(entropy_value_json(EntropyValue::log_of(Integer(2)), true).contains("approx"));
  Integer big = 1;
  for (int i = 0; i < 80; ++i) big *= 2;
  EXPECT_EQ(int_json(big), "1208925819614629174706176");
  EXPECT_EQ(int_json(Integer(7)), 7);
}

TEST(Report, NoFloatsWithoutApprox) {
  std::function<bool(const json&)> has_float = [&](const json& j) {
    if (j.is_number_float()) return true;
    if (j.is_structured())
      for (const auto& v : j) if (has_float(v)) return true;
    return false;
  };
  for (const auto& name : bundled()) {
    if (name == "ill_defined.json") continue;
    const auto inst = parse_instance(instance_path(name));
    for (Command c : {Command::alg_entropy, Command::top_entropy, Command::bridge_check, Command::depth, Command::verify})
      EXPECT_FALSE(has_float(run_command(c, inst).report)) << name << " " << to_string(c);
  }
}

TEST(Report, DeterministicAndJobsIndependent) {
  for (const auto& name : bundled()) {
    if (name == "ill_defined.json") continue;
    const auto inst = parse_instance(instance_path(name));
    Options par;
    par.jobs = 3;
    for (Command c : {Command::alg_entropy, Command::top_entropy, Command::bridge_check, Command::depth, Command::verify}) {
      const auto a = emit_report(run_command(c, inst).report, Format::json);
      EXPECT_EQ(a, emit_report(run_command(c, inst).report, Format::json)) << name;
      EXPECT_EQ(a, emit_report(run_command(c, inst, par).report, Format::json)) << name;
    }
  }
  const auto text = emit_report(run_command(Command::alg_entropy, parse_instance(instance_path("beta_shift.json"))).report,
                                Format::text);
  EXPECT_NE(text.find("entropy: log 2"), std::string::npos) << text;
}
