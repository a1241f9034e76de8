#ifndef AWAITMC_ORACLE_HPP
#define AWAITMC_ORACLE_HPP

#include "awaitmc/hb.hpp"
#include "awaitmc/interp.hpp"

#include <functional>
#include <set>
#include <string>
#include <vector>

namespace awaitmc {

struct OracleOptions {
  long max_executions = 1'000'000;
};

struct OracleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Calls `visit` once for every maximal execution (exhaustive DFS over enabled
/// choices, lowest thread id first). Throws OracleError past the bound.
void for_each_maximal(const Interpreter& interp,
                      const std::function<void(const Execution&)>& visit,
                      const OracleOptions& opts = {});

/// All maximal schedules; convenience wrapper for small programs.
std::vector<std::vector<int>> enumerate_maximal(const Interpreter& interp,
                                                const OracleOptions& opts = {});

struct ClassInfo {
  std::string key;                 // canonical happens-before form
  std::vector<int> representative; // schedule of the first member seen
  long members = 0;
  bool complete = false; // all threads exited (vs. some thread blocked)
};

struct ClassPartition {
  std::vector<ClassInfo> classes;
  long total_executions = 0;
  long pure_iterations = 0; // summed over all enumerated executions
  bool assertion_failure = false;

  long complete_classes() const;
  long blocked_classes() const;
};

/// Partitions all maximal executions by happens-before equivalence. Streaming:
/// executions are not retained.
ClassPartition partition_classes(const Interpreter& interp,
                                 const ConflictPolicy& pol,
                                 const OracleOptions& opts = {});

struct OracleVerdict {
  bool correct = false; // every equivalence class explored at least once
  bool optimal = false; // no equivalence class explored twice
  std::vector<std::string> mismatches;
};

/// Compares the schedules an exploration visited against the ground-truth
/// partition.
OracleVerdict audit(const Interpreter& interp, const ConflictPolicy& pol,
                    const std::vector<std::vector<int>>& explored_schedules,
                    const OracleOptions& opts = {});

/// Final local states of exited threads over all maximal executions, with each
/// thread's register file projected onto `regs[t]`. Encoded as
/// "thread|block-label|r1=v1,r2=v2".
std::set<std::string> final_local_states(
    const Interpreter& interp, const std::vector<std::set<std::string>>& regs,
    const OracleOptions& opts = {});

} // namespace awaitmc

#endif
