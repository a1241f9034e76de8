#include "awaitmc/parser.hpp"

#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>
#include <vector>

namespace awaitmc {

namespace {

enum class Tok { Ident, Int, Punct, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  Value value = 0;
  SourceLocation loc;
};

const char* kPuncts[] = {"+:=", ":=", "==", "!=", "<=", ">=", "&&", "||",
                         "(",   ")",  "{",  "}",  ",",  ";",  ":",  "<",
                         ">",   "+",  "-",  "*",  "/",  "%",  "=",  "!"};

struct Lexer {
  std::string text;
  SourceLocation loc;
  size_t pos = 0;
  Token cur;

  explicit Lexer(std::string t, std::string file) : text(std::move(t)) {
    loc.file = std::move(file);
    advance();
  }

  void skip_ws() {
    while (pos < text.size()) {
      char c = text[pos];
      if (c == '#') {
        while (pos < text.size() && text[pos] != '\n') bump();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        bump();
      } else {
        break;
      }
    }
  }

  void bump() {
    if (text[pos] == '\n') {
      loc.line++;
      loc.column = 1;
    } else {
      loc.column++;
    }
    pos++;
  }

  void advance() {
    skip_ws();
    cur.loc = loc;
    if (pos >= text.size()) {
      cur.kind = Tok::End;
      cur.text.clear();
      return;
    }
    char c = text[pos];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::string id;
      while (pos < text.size() &&
             (std::isalnum(static_cast<unsigned char>(text[pos])) ||
              text[pos] == '_')) {
        id += text[pos];
        bump();
      }
      cur.kind = Tok::Ident;
      cur.text = std::move(id);
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::string num;
      while (pos < text.size() &&
             std::isdigit(static_cast<unsigned char>(text[pos]))) {
        num += text[pos];
        bump();
      }
      cur.kind = Tok::Int;
      cur.text = num;
      cur.value = std::stoll(num);
      return;
    }
    for (const char* p : kPuncts) {
      size_t len = std::string(p).size();
      if (text.compare(pos, len, p) == 0) {
        cur.kind = Tok::Punct;
        cur.text = p;
        for (size_t i = 0; i < len; ++i) bump();
        return;
      }
    }
    throw ParseError(loc, std::string("unexpected character '") + c + "'");
  }
};

bool is_keyword(const std::string& s) {
  static const std::set<std::string> kw = {
      "global", "thread", "phi",  "faa",  "xchg", "cmpxchg",    "assume",
      "assert", "await",  "spawn", "join", "goto", "br",         "exit",
      "xchg_await"};
  return kw.count(s) > 0;
}

struct Parser {
  Lexer lex;
  Program prog;
  std::set<std::string> globals;
  // Deferred spawn/join thread-name resolution: (thread, block, stmt) -> name.
  std::vector<std::tuple<int, int, int, std::string, SourceLocation>> thread_fixups;

  explicit Parser(std::string text, std::string file)
      : lex(std::move(text), std::move(file)) {}

  [[noreturn]] void fail(const std::string& msg) { throw ParseError(lex.cur.loc, msg); }

  bool at_punct(const std::string& p) const {
    return lex.cur.kind == Tok::Punct && lex.cur.text == p;
  }
  bool at_ident(const std::string& id) const {
    return lex.cur.kind == Tok::Ident && lex.cur.text == id;
  }

  void expect_punct(const std::string& p) {
    if (!at_punct(p)) fail("expected '" + p + "'");
    lex.advance();
  }

  std::string expect_ident(const std::string& what, bool allow_keyword = false) {
    if (lex.cur.kind != Tok::Ident) fail("expected " + what);
    if (!allow_keyword && is_keyword(lex.cur.text))
      fail("keyword '" + lex.cur.text + "' cannot be used as " + what);
    std::string s = lex.cur.text;
    lex.advance();
    return s;
  }

  Value expect_int() {
    bool neg = false;
    if (at_punct("-")) {
      neg = true;
      lex.advance();
    }
    if (lex.cur.kind != Tok::Int) fail("expected integer");
    Value v = lex.cur.value;
    lex.advance();
    return neg ? -v : v;
  }

  // --- expressions over registers and constants -------------------------

  ExprPtr parse_primary() {
    if (at_punct("(")) {
      lex.advance();
      ExprPtr e = parse_expr();
      expect_punct(")");
      return e;
    }
    if (at_punct("-")) {
      lex.advance();
      return Expr::unary(UnOp::Neg, parse_primary());
    }
    if (at_punct("!")) {
      lex.advance();
      return Expr::unary(UnOp::Not, parse_primary());
    }
    if (lex.cur.kind == Tok::Int) {
      Value v = lex.cur.value;
      lex.advance();
      return Expr::constant(v);
    }
    if (lex.cur.kind == Tok::Ident) {
      if (is_keyword(lex.cur.text)) fail("unexpected keyword in expression");
      if (globals.count(lex.cur.text))
        fail("shared variable '" + lex.cur.text +
             "' used in an expression; load it into a register first");
      std::string r = lex.cur.text;
      lex.advance();
      return Expr::regref(r);
    }
    fail("expected expression");
  }

  ExprPtr parse_mul() {
    ExprPtr e = parse_primary();
    while (at_punct("*") || at_punct("/") || at_punct("%")) {
      BinOp op = lex.cur.text == "*" ? BinOp::Mul
                 : lex.cur.text == "/" ? BinOp::Div
                                       : BinOp::Mod;
      lex.advance();
      e = Expr::binary(op, e, parse_primary());
    }
    return e;
  }

  ExprPtr parse_add() {
    ExprPtr e = parse_mul();
    while (at_punct("+") || at_punct("-")) {
      BinOp op = lex.cur.text == "+" ? BinOp::Add : BinOp::Sub;
      lex.advance();
      e = Expr::binary(op, e, parse_mul());
    }
    return e;
  }

  std::optional<BinOp> peek_cmp() {
    if (lex.cur.kind != Tok::Punct) return std::nullopt;
    if (lex.cur.text == "==") return BinOp::Eq;
    if (lex.cur.text == "!=") return BinOp::Ne;
    if (lex.cur.text == "<") return BinOp::Lt;
    if (lex.cur.text == "<=") return BinOp::Le;
    if (lex.cur.text == ">") return BinOp::Gt;
    if (lex.cur.text == ">=") return BinOp::Ge;
    return std::nullopt;
  }

  ExprPtr parse_cmp() {
    ExprPtr e = parse_add();
    if (auto op = peek_cmp()) {
      lex.advance();
      e = Expr::binary(*op, e, parse_add());
    }
    return e;
  }

  ExprPtr parse_and() {
    ExprPtr e = parse_cmp();
    while (at_punct("&&")) {
      lex.advance();
      e = Expr::binary(BinOp::And, e, parse_cmp());
    }
    return e;
  }

  ExprPtr parse_expr() {
    ExprPtr e = parse_and();
    while (at_punct("||")) {
      lex.advance();
      e = Expr::binary(BinOp::Or, e, parse_and());
    }
    return e;
  }

  CmpOp parse_cmp_op() {
    auto op = peek_cmp();
    if (!op) fail("expected comparison operator");
    lex.advance();
    switch (*op) {
      case BinOp::Eq: return CmpOp::Eq;
      case BinOp::Ne: return CmpOp::Ne;
      case BinOp::Lt: return CmpOp::Lt;
      case BinOp::Le: return CmpOp::Le;
      case BinOp::Gt: return CmpOp::Gt;
      default: return CmpOp::Ge;
    }
  }

  Operand parse_atom() {
    if (lex.cur.kind == Tok::Int || at_punct("-")) return Operand::make_const(expect_int());
    std::string id = expect_ident("register or constant");
    if (globals.count(id))
      fail("shared variable '" + id + "' cannot appear as a comparison operand");
    return Operand::make_reg(id);
  }

  // await-form predicate: "var CMP atom" with var already consumed.
  void parse_await_pred(Statement& s) {
    s.cmp = parse_cmp_op();
    s.cmp_rhs = parse_atom();
  }

  // --- statements --------------------------------------------------------

  // A statement beginning with "IDENT :=".
  Statement parse_assign_like(const std::string& target) {
    Statement s;
    s.reg = target;
    if (lex.cur.kind == Tok::Ident && globals.count(lex.cur.text)) {
      // load: r := x
      s.kind = Statement::Kind::Load;
      s.var = lex.cur.text;
      lex.advance();
      return s;
    }
    if (at_ident("faa") || at_ident("xchg")) {
      s.kind = lex.cur.text == "faa" ? Statement::Kind::Faa : Statement::Kind::Xchg;
      lex.advance();
      expect_punct("(");
      s.var = expect_ident("shared variable");
      expect_punct(",");
      s.expr = parse_expr();
      expect_punct(")");
      return s;
    }
    if (at_ident("cmpxchg")) {
      s.kind = Statement::Kind::CmpXchg;
      lex.advance();
      expect_punct("(");
      s.var = expect_ident("shared variable");
      expect_punct(",");
      s.expr = parse_expr();
      expect_punct(",");
      s.expr2 = parse_expr();
      expect_punct(")");
      return s;
    }
    if (at_ident("await")) {
      s.kind = Statement::Kind::LoadAwait;
      lex.advance();
      expect_punct("(");
      s.var = expect_ident("shared variable");
      parse_await_pred(s);
      expect_punct(")");
      return s;
    }
    if (at_ident("xchg_await")) {
      s.kind = Statement::Kind::XchgAwait;
      lex.advance();
      expect_punct("(");
      s.var = expect_ident("shared variable");
      parse_await_pred(s);
      expect_punct(",");
      s.expr = parse_expr();
      expect_punct(")");
      return s;
    }
    s.kind = Statement::Kind::Assign;
    s.expr = parse_expr();
    return s;
  }

  // Returns false when the current token starts a terminator instead.
  bool parse_statement(int ti, int bi, std::vector<Statement>& stmts) {
    if (at_ident("goto") || at_ident("br") || at_ident("exit")) return false;
    Statement s;
    SourceLocation loc = lex.cur.loc;
    if (at_ident("assume") || at_ident("assert")) {
      s.kind = lex.cur.text == "assume" ? Statement::Kind::Assume
                                        : Statement::Kind::Assert;
      lex.advance();
      expect_punct("(");
      s.expr = parse_expr();
      expect_punct(")");
    } else if (at_ident("await")) {
      s.kind = Statement::Kind::Await;
      lex.advance();
      expect_punct("(");
      s.var = expect_ident("shared variable");
      parse_await_pred(s);
      expect_punct(")");
    } else if (at_ident("xchg_await")) {
      s.kind = Statement::Kind::XchgAwait;
      lex.advance();
      expect_punct("(");
      s.var = expect_ident("shared variable");
      parse_await_pred(s);
      expect_punct(",");
      s.expr = parse_expr();
      expect_punct(")");
    } else if (at_ident("spawn") || at_ident("join")) {
      s.kind = lex.cur.text == "spawn" ? Statement::Kind::Spawn
                                        : Statement::Kind::Join;
      lex.advance();
      std::string name = expect_ident("thread name");
      thread_fixups.emplace_back(ti, bi, static_cast<int>(stmts.size()), name, loc);
    } else if (lex.cur.kind == Tok::Ident && globals.count(lex.cur.text)) {
      // store or faa-discard
      s.var = lex.cur.text;
      lex.advance();
      if (at_punct("+:=")) {
        s.kind = Statement::Kind::Faa;
        lex.advance();
        s.expr = parse_expr();
      } else if (at_punct(":=")) {
        s.kind = Statement::Kind::Store;
        lex.advance();
        s.expr = parse_expr();
      } else {
        fail("expected ':=' or '+:=' after shared variable");
      }
    } else if (lex.cur.kind == Tok::Ident) {
      if (is_keyword(lex.cur.text)) fail("unexpected keyword '" + lex.cur.text + "'");
      std::string target = lex.cur.text;
      lex.advance();
      expect_punct(":=");
      s = parse_assign_like(target);
    } else {
      fail("expected statement or terminator");
    }
    expect_punct(";");
    stmts.push_back(std::move(s));
    return true;
  }

  // --- blocks / threads ---------------------------------------------------

  struct PendingPhi {
    std::string target;
    std::vector<std::pair<std::string, Operand>> sources; // label -> value
    SourceLocation loc;
  };
  struct PendingBlock {
    std::string label;
    std::vector<PendingPhi> phis;
    std::vector<Statement> stmts;
    // terminator with label targets
    Terminator::Kind tkind = Terminator::Kind::Exit;
    ExprPtr cond;
    std::string tlabel, flabel;
    SourceLocation loc;
  };

  void parse_thread() {
    ThreadCfg t;
    int ti = static_cast<int>(prog.threads.size());
    t.name = expect_ident("thread name");
    expect_punct("{");
    std::vector<PendingBlock> pending;
    while (!at_punct("}")) {
      PendingBlock pb;
      pb.loc = lex.cur.loc;
      pb.label = expect_ident("block label");
      expect_punct(":");
      // phis first
      while (true) {
        // lookahead: IDENT := phi (...)
        size_t save_pos = lex.pos;
        Token save_tok = lex.cur;
        SourceLocation save_loc = lex.loc;
        if (lex.cur.kind == Tok::Ident && !is_keyword(lex.cur.text) &&
            !globals.count(lex.cur.text)) {
          std::string target = lex.cur.text;
          lex.advance();
          if (at_punct(":=")) {
            lex.advance();
            if (at_ident("phi")) {
              lex.advance();
              PendingPhi phi;
              phi.target = target;
              phi.loc = save_tok.loc;
              expect_punct("(");
              while (true) {
                std::string lbl = expect_ident("predecessor label");
                expect_punct(":");
                phi.sources.emplace_back(lbl, parse_atom());
                if (at_punct(",")) {
                  lex.advance();
                  continue;
                }
                break;
              }
              expect_punct(")");
              expect_punct(";");
              pb.phis.push_back(std::move(phi));
              continue;
            }
          }
        }
        lex.pos = save_pos;
        lex.cur = save_tok;
        lex.loc = save_loc;
        break;
      }
      int bi = static_cast<int>(pending.size());
      while (parse_statement(ti, bi, pb.stmts)) {
      }
      // terminator
      if (at_ident("goto")) {
        lex.advance();
        pb.tkind = Terminator::Kind::Goto;
        pb.tlabel = expect_ident("block label");
      } else if (at_ident("br")) {
        lex.advance();
        pb.tkind = Terminator::Kind::Branch;
        pb.cond = parse_expr();
        expect_punct(",");
        pb.tlabel = expect_ident("block label");
        expect_punct(",");
        pb.flabel = expect_ident("block label");
      } else if (at_ident("exit")) {
        lex.advance();
        pb.tkind = Terminator::Kind::Exit;
      } else {
        fail("expected terminator (goto/br/exit)");
      }
      expect_punct(";");
      pending.push_back(std::move(pb));
    }
    expect_punct("}");
    if (pending.empty())
      throw ParseError(lex.cur.loc, "thread '" + t.name + "' has no blocks");

    std::map<std::string, int> labels;
    for (int i = 0; i < static_cast<int>(pending.size()); ++i) {
      if (labels.count(pending[i].label))
        throw ParseError(pending[i].loc, "duplicate label '" + pending[i].label + "'");
      labels[pending[i].label] = i;
    }
    auto resolve = [&](const std::string& lbl, const SourceLocation& loc) {
      auto it = labels.find(lbl);
      if (it == labels.end())
        throw ParseError(loc, "unknown block label '" + lbl + "'");
      return it->second;
    };
    for (auto& pb : pending) {
      BasicBlock b;
      b.label = pb.label;
      for (auto& phi : pb.phis) {
        PhiNode node;
        node.target = phi.target;
        for (auto& [lbl, opnd] : phi.sources) {
          int pi = resolve(lbl, phi.loc);
          if (node.sources.count(pi))
            throw ParseError(phi.loc, "duplicate phi source '" + lbl + "'");
          node.sources[pi] = opnd;
        }
        b.phis.push_back(std::move(node));
      }
      b.stmts = std::move(pb.stmts);
      b.term.kind = pb.tkind;
      b.term.cond = pb.cond;
      if (pb.tkind != Terminator::Kind::Exit)
        b.term.target = resolve(pb.tlabel, pb.loc);
      if (pb.tkind == Terminator::Kind::Branch)
        b.term.target_false = resolve(pb.flabel, pb.loc);
      t.blocks.push_back(std::move(b));
    }
    t.entry_block = 0;
    prog.threads.push_back(std::move(t));
  }

  Program run() {
    while (at_ident("global")) {
      lex.advance();
      std::string name = expect_ident("variable name");
      expect_punct("=");
      Value init = expect_int();
      expect_punct(";");
      if (!globals.insert(name).second)
        fail("duplicate global '" + name + "'");
      prog.shared_vars.emplace_back(name, init);
    }
    if (!at_ident("thread"))
      fail(prog.shared_vars.empty() && lex.cur.kind == Tok::End
               ? "no threads declared"
               : "expected 'thread'");
    while (at_ident("thread")) {
      lex.advance();
      parse_thread();
    }
    if (lex.cur.kind != Tok::End) fail("trailing input after last thread");

    for (auto& [ti, bi, si, name, loc] : thread_fixups) {
      int target = prog.thread_index(name);
      if (target < 0)
        throw ParseError(loc, "spawn/join of unknown thread '" + name + "'");
      prog.threads[ti].blocks[bi].stmts[si].thread = target;
    }
    prog.entry_thread = 0;
    return std::move(prog);
  }
};

} // namespace

Program parse_program(const std::string& text, const std::string& filename) {
  Parser parser(text, filename);
  Program p = parser.run();
  auto diags = validate_program(p);
  if (!diags.empty()) {
    std::ostringstream os;
    os << "invalid program:";
    for (const auto& d : diags) os << "\n  " << diagnostic_to_string(p, d);
    throw ParseError(SourceLocation{filename, 1, 1}, os.str());
  }
  return p;
}

Program parse_program_file(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw ParseError(SourceLocation{path, 1, 1}, "cannot open file");
  std::ostringstream os;
  os << in.rdbuf();
  return parse_program(os.str(), path);
}

namespace {

void format_stmt(std::ostringstream& os, const Program& p, const Statement& s) {
  using K = Statement::Kind;
  switch (s.kind) {
    case K::Load:
      os << s.reg << " := " << s.var;
      break;
    case K::Store:
      os << s.var << " := " << expr_to_string(s.expr);
      break;
    case K::Faa:
      if (s.reg.empty())
        os << s.var << " +:= " << expr_to_string(s.expr);
      else
        os << s.reg << " := faa(" << s.var << ", " << expr_to_string(s.expr) << ")";
      break;
    case K::Xchg:
      os << s.reg << " := xchg(" << s.var << ", " << expr_to_string(s.expr) << ")";
      break;
    case K::CmpXchg:
      os << s.reg << " := cmpxchg(" << s.var << ", " << expr_to_string(s.expr)
         << ", " << expr_to_string(s.expr2) << ")";
      break;
    case K::Assume:
      os << "assume(" << expr_to_string(s.expr) << ")";
      break;
    case K::Assert:
      os << "assert(" << expr_to_string(s.expr) << ")";
      break;
    case K::Await:
      os << "await(" << s.var << " " << cmp_to_string(s.cmp) << " "
         << operand_to_string(s.cmp_rhs) << ")";
      break;
    case K::LoadAwait:
      os << s.reg << " := await(" << s.var << " " << cmp_to_string(s.cmp) << " "
         << operand_to_string(s.cmp_rhs) << ")";
      break;
    case K::XchgAwait:
      if (!s.reg.empty()) os << s.reg << " := ";
      os << "xchg_await(" << s.var << " " << cmp_to_string(s.cmp) << " "
         << operand_to_string(s.cmp_rhs) << ", " << expr_to_string(s.expr) << ")";
      break;
    case K::Assign:
      os << s.reg << " := " << expr_to_string(s.expr);
      break;
    case K::Spawn:
      os << "spawn " << p.threads[s.thread].name;
      break;
    case K::Join:
      os << "join " << p.threads[s.thread].name;
      break;
  }
}

} // namespace

std::string format_statement(const Program& p, const Statement& s) {
  std::ostringstream os;
  format_stmt(os, p, s);
  return os.str();
}

std::string format_program(const Program& p) {
  std::ostringstream os;
  for (const auto& [v, init] : p.shared_vars)
    os << "global " << v << " = " << init << ";\n";
  for (const auto& t : p.threads) {
    os << "\nthread " << t.name << " {\n";
    for (const auto& b : t.blocks) {
      os << b.label << ":\n";
      for (const auto& phi : b.phis) {
        os << "  " << phi.target << " := phi(";
        bool first = true;
        for (const auto& [pred, src] : phi.sources) {
          if (!first) os << ", ";
          first = false;
          os << t.blocks[pred].label << ": " << operand_to_string(src);
        }
        os << ");\n";
      }
      for (const auto& s : b.stmts) {
        os << "  ";
        format_stmt(os, p, s);
        os << ";\n";
      }
      switch (b.term.kind) {
        case Terminator::Kind::Goto:
          os << "  goto " << t.blocks[b.term.target].label << ";\n";
          break;
        case Terminator::Kind::Branch:
          os << "  br " << expr_to_string(b.term.cond) << ", "
             << t.blocks[b.term.target].label << ", "
             << t.blocks[b.term.target_false].label << ";\n";
          break;
        case Terminator::Kind::Exit:
          os << "  exit;\n";
          break;
      }
    }
    os << "}\n";
  }
  return os.str();
}

} // namespace awaitmc
