#ifndef AWAITMC_EXPLORER_HPP
#define AWAITMC_EXPLORER_HPP

#include "awaitmc/hb.hpp"
#include "awaitmc/interp.hpp"

#include <memory>
#include <set>
#include <string>
#include <vector>

namespace awaitmc {

struct ExplorerOptions {
  ConflictPolicy pol;
  int unroll = 0;
  long max_steps = 1'000'000;
  long max_executions = 10'000'000; // maximal executions before giving up
  bool keep_traces = false;
  /// Mutation hook for tests: disables the sleep-set redundancy guard, so
  /// already-explored reversals are re-grafted and equivalence classes are
  /// revisited. Only meaningful together with a max_executions budget, since
  /// the re-grafting can regenerate explored subtrees forever.
  bool use_sleep_sets = true;
  bool collect_dot = false;
};

struct ExplorationReport {
  long complete_count = 0; // maximal executions with all threads exited
  long blocked_count = 0;  // maximal executions with some thread still blocked
  bool incomplete = false; // a budget was exhausted; counts are partial
  std::vector<std::vector<int>> schedules; // retained when keep_traces
  std::vector<std::vector<int>> assertion_failure_schedules;
  long events_stepped = 0;
  long races_processed = 0;
  long wut_insertions = 0;
  long pure_iterations = 0; // summed over explored maximal executions
  double seconds = 0;
  std::string dot; // explored-schedule trie, when collect_dot

  long total() const { return complete_count + blocked_count; }
};

/// Depth-first stateless exploration with sleep sets and wakeup trees; visits
/// exactly one maximal execution per happens-before equivalence class.
ExplorationReport explore(const Program& p, const ExplorerOptions& opts = {});

// --- exposed for unit tests -------------------------------------------------

/// Ordered wakeup tree node; children are kept in insertion order.
struct WutNode {
  int thread = -1; // -1 for the root
  std::vector<std::unique_ptr<WutNode>> children;
  bool is_leaf() const { return children.empty(); }
};

/// The wakeup-tree insertion routine: descends along weak-initial children,
/// stripping matched threads from `v`; grafts the remainder as a new rightmost
/// leaf when no child matches. Returns true when something was grafted.
bool wut_insert(const Interpreter& interp, const Execution& at, WutNode& wut,
                std::vector<Event> v, const ConflictPolicy& pol);

} // namespace awaitmc

#endif
