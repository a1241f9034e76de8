#ifndef AWAITMC_GENERATOR_HPP
#define AWAITMC_GENERATOR_HPP

#include "awaitmc/ir.hpp"

#include <cstdint>
#include <string>

namespace awaitmc {

/// Knobs for the random program generator. Every generated program parses and
/// validates; sizes stay small enough for brute-force enumeration.
struct GeneratorOptions {
  std::uint64_t seed = 1;
  int max_threads = 3;
  int max_events = 4; // statements per thread body
  int num_vars = 2;
  /// Probability (percent) that a thread starts with a polling loop, which
  /// gives the purity analysis something to chew on.
  int spin_percent = 25;
};

/// Textual form of a seeded random program.
std::string generate_program_text(const GeneratorOptions& opts);

/// Parsed and validated form of the same program.
Program generate_program(const GeneratorOptions& opts);

/// Sorting-network layer with `k` comparators: a signaller thread sorts the
/// first pair and raises y; k comparator threads each spin on y and then sort
/// their own disjoint pair. With awaits a single interleaving class remains;
/// with load+assume spinloops each comparator can independently block, giving
/// 2^k maximal executions.
std::string sortnet_text(int k);

} // namespace awaitmc

#endif
