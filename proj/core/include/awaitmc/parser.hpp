#ifndef AWAITMC_PARSER_HPP
#define AWAITMC_PARSER_HPP

#include "awaitmc/ir.hpp"

#include <stdexcept>
#include <string>

namespace awaitmc {

struct SourceLocation {
  std::string file;
  int line = 1;
  int column = 1;
};

struct ParseError : std::runtime_error {
  SourceLocation location;
  ParseError(SourceLocation loc, const std::string& msg)
      : std::runtime_error(loc.file + ":" + std::to_string(loc.line) + ":" +
                           std::to_string(loc.column) + ": " + msg),
        location(std::move(loc)) {}
};

/// Parses the textual program format. The result always passes
/// validate_program; structural violations are reported as ParseError too.
Program parse_program(const std::string& text, const std::string& filename = "<input>");

/// Canonical text form; parse_program(format_program(p)) is structurally
/// identical to p.
std::string format_program(const Program& p);

std::string format_statement(const Program& p, const Statement& s);

Program parse_program_file(const std::string& path);

} // namespace awaitmc

#endif
