#include "awaitmc/oracle.hpp"

#include <map>
#include <sstream>

namespace awaitmc {

namespace {

void dfs(const Interpreter& interp, const Execution& e, long& count,
         const std::function<void(const Execution&)>& visit,
         const OracleOptions& opts) {
  auto en = interp.enabled(e.end_state);
  if (en.empty()) {
    if (++count > opts.max_executions)
      throw OracleError("oracle bound exceeded: more than " +
                        std::to_string(opts.max_executions) +
                        " maximal executions");
    visit(e);
    return;
  }
  for (int t : en) dfs(interp, interp.extend(e, t), count, visit, opts);
}

} // namespace

void for_each_maximal(const Interpreter& interp,
                      const std::function<void(const Execution&)>& visit,
                      const OracleOptions& opts) {
  long count = 0;
  dfs(interp, interp.empty_execution(), count, visit, opts);
}

std::vector<std::vector<int>> enumerate_maximal(const Interpreter& interp,
                                                const OracleOptions& opts) {
  std::vector<std::vector<int>> out;
  for_each_maximal(
      interp, [&](const Execution& e) { out.push_back(e.schedule()); }, opts);
  return out;
}

long ClassPartition::complete_classes() const {
  long n = 0;
  for (const auto& c : classes)
    if (c.complete) n++;
  return n;
}

long ClassPartition::blocked_classes() const {
  return static_cast<long>(classes.size()) - complete_classes();
}

ClassPartition partition_classes(const Interpreter& interp,
                                 const ConflictPolicy& pol,
                                 const OracleOptions& opts) {
  const int num_threads = static_cast<int>(interp.program().threads.size());
  ClassPartition part;
  std::map<std::string, int> index;
  for_each_maximal(
      interp,
      [&](const Execution& e) {
        part.total_executions++;
        part.pure_iterations += e.end_state.pure_iterations;
        if (!e.assertion_failures.empty()) part.assertion_failure = true;
        std::string key = canonical_key(e.events, num_threads, pol);
        auto [it, fresh] = index.try_emplace(key, part.classes.size());
        if (fresh) {
          ClassInfo c;
          c.key = key;
          c.representative = e.schedule();
          c.complete = interp.is_complete(e.end_state);
          part.classes.push_back(std::move(c));
        }
        part.classes[it->second].members++;
      },
      opts);
  return part;
}

OracleVerdict audit(const Interpreter& interp, const ConflictPolicy& pol,
                    const std::vector<std::vector<int>>& explored_schedules,
                    const OracleOptions& opts) {
  const int num_threads = static_cast<int>(interp.program().threads.size());
  ClassPartition part = partition_classes(interp, pol, opts);
  std::map<std::string, long> hits;
  for (const auto& c : part.classes) hits[c.key] = 0;

  OracleVerdict v;
  v.correct = true;
  v.optimal = true;
  for (const auto& sched : explored_schedules) {
    Execution e;
    try {
      e = interp.replay(sched);
    } catch (const InterpError& err) {
      v.correct = v.optimal = false;
      v.mismatches.push_back(std::string("explored schedule not replayable: ") +
                             err.what());
      continue;
    }
    if (!interp.is_maximal(e.end_state)) {
      v.correct = v.optimal = false;
      v.mismatches.push_back("explored schedule not maximal");
      continue;
    }
    std::string key = canonical_key(e.events, num_threads, pol);
    auto it = hits.find(key);
    if (it == hits.end()) {
      v.correct = false;
      v.mismatches.push_back("explored execution outside oracle partition");
      continue;
    }
    it->second++;
  }
  for (const auto& [key, n] : hits) {
    if (n == 0) {
      v.correct = false;
      v.mismatches.push_back("missed class: " + key);
    } else if (n > 1) {
      v.optimal = false;
      v.mismatches.push_back("class explored " + std::to_string(n) +
                             " times: " + key);
    }
  }
  return v;
}

std::set<std::string> final_local_states(
    const Interpreter& interp, const std::vector<std::set<std::string>>& regs,
    const OracleOptions& opts) {
  std::set<std::string> out;
  for_each_maximal(
      interp,
      [&](const Execution& e) {
        for (int t = 0; t < static_cast<int>(e.end_state.threads.size()); ++t) {
          const ThreadState& ts = e.end_state.threads[t];
          if (ts.status != ThreadStatus::Exited) continue;
          std::ostringstream os;
          os << t << '|'
             << interp.program().threads[t].blocks[ts.block].label << '|';
          for (const std::string& r : regs[t]) {
            auto it = ts.regs.find(r);
            os << r << '=' << (it == ts.regs.end() ? 0 : it->second) << ',';
          }
          out.insert(os.str());
        }
      },
      opts);
  return out;
}

} // namespace awaitmc
