#include "awaitmc/explorer.hpp"
#include "awaitmc/generator.hpp"
#include "awaitmc/oracle.hpp"
#include "awaitmc/parser.hpp"
#include "awaitmc/plp.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

namespace {

using namespace awaitmc;

struct RunConfig {
  std::string input;
  bool plp = false;          // insert purity assumes
  bool await_rewrite = false; // rewrite assumes into awaits
  bool ifaa = false;
  int unroll = 0;
  long max_steps = 1'000'000;
  long max_execs = 10'000'000;
  bool keep_traces = false;
  bool no_sleep_sets = false; // mutation hook: skip the redundancy guard
  bool json = false;
  std::string dot_path;
};

void add_common(CLI::App* cmd, RunConfig& cfg, bool with_input = true) {
  if (with_input)
    cmd->add_option("input", cfg.input, "program file")->required();
  cmd->add_flag("--plp", cfg.plp, "insert purity assumes into pure loops");
  cmd->add_flag("--await-rewrite", cfg.await_rewrite,
                "rewrite access+assume pairs into awaits");
  cmd->add_flag("--ifaa", cfg.ifaa,
                "treat fetch-and-adds with dead results as independent");
  cmd->add_option("--unroll", cfg.unroll, "loop unroll bound (0 = unbounded)")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--max-steps", cfg.max_steps, "per-execution step budget");
  cmd->add_option("--max-execs", cfg.max_execs, "maximal-execution budget");
  cmd->add_flag("--keep-traces", cfg.keep_traces, "retain explored schedules");
  cmd->add_flag("--no-sleep-sets", cfg.no_sleep_sets,
                "disable the sleep-set redundancy guard (for audit demos; "
                "pair with --max-execs)");
  cmd->add_flag("--json", cfg.json, "machine-readable report");
  cmd->add_option("--dot", cfg.dot_path, "write the explored tree as DOT");
}

Program load(const RunConfig& cfg) {
  Program p = parse_program_file(cfg.input);
  if (cfg.plp || cfg.await_rewrite) {
    PlpOptions opts;
    opts.insert_assumes = cfg.plp;
    opts.await_rewrite = cfg.await_rewrite;
    p = transform(p, opts).first;
  }
  return p;
}

ExplorerOptions explorer_options(const RunConfig& cfg) {
  ExplorerOptions opts;
  opts.pol.ifaa = cfg.ifaa;
  opts.unroll = cfg.unroll;
  opts.max_steps = cfg.max_steps;
  opts.max_executions = cfg.max_execs;
  opts.keep_traces = cfg.keep_traces;
  opts.use_sleep_sets = !cfg.no_sleep_sets;
  opts.collect_dot = !cfg.dot_path.empty();
  return opts;
}

std::string schedule_names(const Program& p, const std::vector<int>& sched) {
  std::string out;
  for (int t : sched) {
    if (!out.empty()) out += '.';
    out += p.threads[t].name;
  }
  return out;
}

int run_explore(const RunConfig& cfg) {
  Program p = load(cfg);
  ExplorerOptions opts = explorer_options(cfg);
  if (!opts.keep_traces)
    opts.keep_traces = true; // needed for the assertion witness
  ExplorationReport rep = explore(p, opts);

  if (!cfg.dot_path.empty()) {
    std::ofstream out(cfg.dot_path);
    out << rep.dot;
  }
  bool assertion = !rep.assertion_failure_schedules.empty();
  if (cfg.json) {
    nlohmann::json j;
    j["complete"] = rep.complete_count;
    j["blocked"] = rep.blocked_count;
    j["time"] = rep.seconds;
    j["incomplete"] = rep.incomplete;
    j["events_stepped"] = rep.events_stepped;
    j["races_processed"] = rep.races_processed;
    j["wut_insertions"] = rep.wut_insertions;
    j["pure_iterations"] = rep.pure_iterations;
    j["assertion_failure"] = assertion;
    if (assertion)
      j["witness"] = schedule_names(p, rep.assertion_failure_schedules.front());
    std::cout << j.dump(2) << "\n";
  } else {
    std::printf("complete=%ld blocked=%ld time=%.3f\n", rep.complete_count,
                rep.blocked_count, rep.seconds);
    if (assertion)
      std::cout << "assertion failure witness: "
                << schedule_names(p, rep.assertion_failure_schedules.front())
                << "\n";
  }
  if (assertion) return 1;
  if (rep.incomplete) return 3;
  return 0;
}

int run_oracle_audit(const RunConfig& cfg) {
  Program p = load(cfg);
  ExplorerOptions opts = explorer_options(cfg);
  opts.keep_traces = true;
  ExplorationReport rep = explore(p, opts);
  if (rep.incomplete) {
    std::cerr << "exploration budget exhausted; audit skipped\n";
    return 3;
  }
  InterpOptions iopts;
  iopts.unroll = cfg.unroll;
  iopts.max_steps = cfg.max_steps;
  Interpreter interp(p, iopts);
  OracleOptions oopts;
  oopts.max_executions = cfg.max_execs;
  ClassPartition part = partition_classes(interp, opts.pol, oopts);
  OracleVerdict v = audit(interp, opts.pol, rep.schedules, oopts);
  if (cfg.json) {
    nlohmann::json j;
    j["classes"] = part.classes.size();
    j["complete_classes"] = part.complete_classes();
    j["blocked_classes"] = part.blocked_classes();
    j["interleavings"] = part.total_executions;
    j["explored"] = rep.total();
    j["correct"] = v.correct;
    j["optimal"] = v.optimal;
    j["mismatches"] = v.mismatches;
    std::cout << j.dump(2) << "\n";
  } else {
    std::printf("classes=%zu explored=%ld interleavings=%ld correct=%d optimal=%d\n",
                part.classes.size(), rep.total(), part.total_executions,
                v.correct ? 1 : 0, v.optimal ? 1 : 0);
    for (const auto& m : v.mismatches) std::cout << "  mismatch: " << m << "\n";
  }
  return (v.correct && v.optimal) ? 0 : 1;
}

int run_transform_only(const RunConfig& cfg) {
  Program p = parse_program_file(cfg.input);
  PlpOptions opts;
  opts.insert_assumes = true; // transform-only implies the analysis pass
  opts.await_rewrite = cfg.await_rewrite;
  auto [q, rep] = transform(p, opts);
  std::cout << format_program(q);
  std::cout << "\n# purity analysis\n" << rep.to_string(p);
  return 0;
}

int run_fpc_report(const RunConfig& cfg) {
  Program p = parse_program_file(cfg.input);
  PurityReport rep = analyze(p);
  std::cout << rep.to_string(p);
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"stateless model checker with partial-loop-purity elimination"};
  app.require_subcommand(1);

  RunConfig cfg;
  auto* explore_cmd =
      app.add_subcommand("explore", "run the DPOR exploration");
  add_common(explore_cmd, cfg);
  auto* audit_cmd = app.add_subcommand(
      "oracle-audit", "compare exploration against brute-force enumeration");
  add_common(audit_cmd, cfg);
  auto* transform_cmd = app.add_subcommand(
      "transform-only", "print the transformed program and purity tables");
  add_common(transform_cmd, cfg);
  auto* fpc_cmd =
      app.add_subcommand("fpc-report", "print the purity analysis only");
  add_common(fpc_cmd, cfg);

  GeneratorOptions gen;
  auto* gen_cmd =
      app.add_subcommand("generate", "emit a seeded random program");
  gen_cmd->add_option("--seed", gen.seed, "generator seed");
  gen_cmd->add_option("--threads", gen.max_threads, "maximum thread count")
      ->check(CLI::Range(2, 3));
  gen_cmd->add_option("--events", gen.max_events, "maximum events per thread")
      ->check(CLI::Range(1, 5));
  gen_cmd->add_option("--vars", gen.num_vars, "shared variable count")
      ->check(CLI::PositiveNumber);

  int rounds = 1;
  auto* sortnet_cmd =
      app.add_subcommand("sortnet", "emit a k-round sorting-network program");
  sortnet_cmd->add_option("k", rounds, "handshake rounds")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (explore_cmd->parsed()) return run_explore(cfg);
    if (audit_cmd->parsed()) return run_oracle_audit(cfg);
    if (transform_cmd->parsed()) return run_transform_only(cfg);
    if (fpc_cmd->parsed()) return run_fpc_report(cfg);
    if (gen_cmd->parsed()) {
      std::cout << generate_program_text(gen);
      return 0;
    }
    if (sortnet_cmd->parsed()) {
      std::cout << sortnet_text(rounds);
      return 0;
    }
  } catch (const ParseError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
