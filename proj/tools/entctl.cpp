#include "ent/cli/commands.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <map>

int main(int argc, char** argv) {
  using namespace ent::cli;
  CLI::App app{"entctl: exact entropy of banded endomorphisms"};
  app.require_subcommand(1);

  std::string path;
  std::string method = "limit";
  std::string format = "text";
  std::optional<std::size_t> max_n, stall;
  std::size_t jobs = 1;
  bool approx = false;

  const std::map<std::string, std::string> help = {
      {"alg-entropy", "algebraic entropy of each finite subgroup in the family"},
      {"top-entropy", "topological entropy of each open subgroup (or F^perp for bridge instances)"},
      {"bridge-check", "compare both sides of the duality member by member"},
      {"depth", "antistable candidates, depth and h_top over the base"},
      {"verify", "run every invariant that applies to the instance"}};
  for (const auto& [name, text] : help) {
    auto* sub = app.add_subcommand(name, text);
    sub->add_option("instance", path, "instance file (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--method", method, "limit, limitfree or surjective")
        ->check(CLI::IsMember({"limit", "limitfree", "surjective"}));
    sub->add_option("--max-n", max_n, "stabilization budget (overrides the instance policy)");
    sub->add_option("--stall", stall, "stall window (overrides the instance policy)");
    sub->add_option("--format", format, "text or json")->check(CLI::IsMember({"text", "json"}));
    sub->add_option("--jobs", jobs, "threads for independent members")->check(CLI::PositiveNumber);
    sub->add_flag("--approx", approx, "add decimal approximations of entropies");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  const auto cmd = command_from(app.get_subcommands().front()->get_name());
  Options opts;
  opts.method = method == "limit" ? Method::limit : method == "limitfree" ? Method::limitfree : Method::surjective;
  opts.jobs = jobs;
  opts.approx = approx;

  Instance inst;
  try {
    inst = parse_instance(path);
    if (max_n) inst.policy.max_n = *max_n;
    if (stall) inst.policy.stall = *stall;
  } catch (const ent::ValidationError& e) {
    std::cerr << "entctl: " << path << ": " << e.what() << "\n";
    return kExitValidation;
  }

  const Outcome out = run_command(*cmd, inst, opts);
  std::cout << emit_report(out.report, format == "json" ? Format::json : Format::text);
  if (out.report.contains("error")) std::cerr << "entctl: " << out.report["error"].get<std::string>() << "\n";
  return out.exit_code;
}
