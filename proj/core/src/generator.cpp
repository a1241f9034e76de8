#include "awaitmc/generator.hpp"

#include "awaitmc/parser.hpp"

#include <random>
#include <sstream>
#include <vector>

namespace awaitmc {

namespace {

// Raw engine draws with modulo keep the output a pure function of the seed,
// independent of the standard library's distribution implementations.
int draw(std::mt19937_64& rng, int n) {
  return static_cast<int>(rng() % static_cast<std::uint64_t>(n));
}

} // namespace

std::string generate_program_text(const GeneratorOptions& opts) {
  std::mt19937_64 rng(opts.seed);
  const int nv = std::max(1, opts.num_vars);
  const int nt = 2 + (opts.max_threads > 2 ? draw(rng, opts.max_threads - 1)
                                           : 0);

  std::ostringstream os;
  os << "# seed " << opts.seed << "\n";
  for (int v = 0; v < nv; ++v)
    os << "global x" << v << " = " << draw(rng, 3) << ";\n";
  os << "\n";

  for (int t = 0; t < nt; ++t) {
    os << "thread t" << t << " {\n";
    int reg = 0;
    std::vector<std::string> defined; // registers available to later uses
    auto var = [&] { return "x" + std::to_string(draw(rng, nv)); };

    const bool spin = draw(rng, 100) < opts.spin_percent;
    if (spin) {
      std::string r = "r" + std::to_string(reg++);
      os << "  spin: " << r << " := " << var() << ";\n";
      os << "    br " << r << " != " << draw(rng, 3) << ", spin, body;\n";
      os << "  body:\n";
    } else {
      os << "  body:\n";
    }

    // Bigger thread counts get shorter bodies to keep the interleaving count
    // within oracle reach.
    int cap = opts.max_events;
    if (nt >= 3) cap = std::min(cap, 2);
    const int n = 1 + draw(rng, std::max(1, cap));
    for (int i = 0; i < n; ++i) {
      int kind = draw(rng, 6);
      if (kind == 0) { // load
        std::string r = "r" + std::to_string(reg++);
        os << "    " << r << " := " << var() << ";\n";
        defined.push_back(r);
      } else if (kind == 1) { // store
        os << "    " << var() << " := ";
        if (!defined.empty() && draw(rng, 2) == 0)
          os << defined[draw(rng, static_cast<int>(defined.size()))];
        else
          os << draw(rng, 3);
        os << ";\n";
      } else if (kind == 2) { // fetch-and-add, result discarded
        os << "    " << var() << " +:= " << (draw(rng, 2) == 0 ? 1 : -1)
           << ";\n";
      } else if (kind == 3) { // fetch-and-add into a register
        std::string r = "r" + std::to_string(reg++);
        os << "    " << r << " := faa(" << var() << ", "
           << (draw(rng, 2) == 0 ? 1 : -1) << ");\n";
        defined.push_back(r);
      } else if (kind == 4 && !defined.empty()) { // assume on a local value
        static const char* cmps[] = {"==", "!=", "<=", ">="};
        os << "    assume("
           << defined[draw(rng, static_cast<int>(defined.size()))] << ' '
           << cmps[draw(rng, 4)] << ' ' << draw(rng, 3) << ");\n";
      } else { // await
        os << "    await(" << var() << " == " << draw(rng, 3) << ");\n";
      }
    }
    os << "    exit;\n";
    os << "}\n\n";
  }
  return os.str();
}

Program generate_program(const GeneratorOptions& opts) {
  return parse_program(generate_program_text(opts),
                       "<seed " + std::to_string(opts.seed) + ">");
}

std::string sortnet_text(int k) {
  std::ostringstream os;
  os << "# sorting-network layer with " << k << " comparator(s)\n";
  const int nv = 2 * k;
  for (int v = 0; v < nv; ++v)
    os << "global x" << v << " = " << (nv - v) << ";\n";
  os << "global y = 0;\n\n";

  int reg = 0;
  // Each helper closes the currently open block with a goto into its own
  // blocks and leaves its join block open for the caller to continue.
  // Compare-and-swap of two globals; the branch is local so it adds no
  // interleaving classes of its own.
  auto sort2 = [&](std::ostringstream& t, const std::string& a,
                   const std::string& b, const std::string& tag) {
    std::string r1 = "r" + std::to_string(reg++);
    std::string r2 = "r" + std::to_string(reg++);
    t << "    goto cs" << tag << ";\n";
    t << "  cs" << tag << ": " << r1 << " := " << a << ";\n";
    t << "    " << r2 << " := " << b << ";\n";
    t << "    br " << r1 << " > " << r2 << ", sw" << tag << ", jn" << tag
      << ";\n";
    t << "  sw" << tag << ": " << a << " := " << r2 << ";\n";
    t << "    " << b << " := " << r1 << ";\n";
    t << "    goto jn" << tag << ";\n";
    t << "  jn" << tag << ":\n";
  };
  auto spin = [&](std::ostringstream& t, int value, const std::string& tag) {
    std::string r = "r" + std::to_string(reg++);
    t << "    goto sp" << tag << ";\n";
    t << "  sp" << tag << ": " << r << " := y;\n";
    t << "    br " << r << " != " << value << ", sp" << tag << ", jn" << tag
      << ";\n";
    t << "  jn" << tag << ":\n";
  };

  // Thread p sorts the first pair and signals readiness; each comparator
  // thread waits for the signal and then sorts its own disjoint pair. With
  // awaits every cross-thread access is handshake-ordered, leaving a single
  // interleaving class; with assumes each comparator can independently block
  // on an early read of y, doubling the class count per comparator.
  std::ostringstream p;
  p << "  entry:\n";
  sort2(p, "x0", "x1", "a");
  p << "    y := 1;\n";
  p << "    exit;\n";
  os << "thread p {\n" << p.str() << "}\n\n";

  for (int i = 1; i <= k; ++i) {
    std::ostringstream c;
    std::string tag = std::to_string(i);
    c << "  entry:\n";
    spin(c, 1, "w" + tag);
    sort2(c, "x" + std::to_string(2 * i - 2), "x" + std::to_string(2 * i - 1),
          "s" + tag);
    c << "    exit;\n";
    os << "thread c" << i << " {\n" << c.str() << "}\n\n";
  }
  return os.str();
}

} // namespace awaitmc
