#include "orchestral/parser.hpp"

#include <cctype>
#include <functional>
#include <sstream>

namespace orchestral {

namespace {

enum class Tok {
  End, LParen, RParen, IChoice, Plus, Dot, Bang, Lt, Gt, Comma, Under,
  OrChoice, One, Rec, Name, Var,
};

struct Token {
  Tok kind;
  std::string text;
  SourceSpan span;
};

struct LexError {
  std::string message;
  SourceSpan span;
};

class Lexer {
 public:
  explicit Lexer(const std::string& src) : src_(src) {}

  // Returns tokens or records an error.
  bool run(std::vector<Token>& out, ParseError& err) {
    while (true) {
      skip_ws();
      if (pos_ >= src_.size()) {
        out.push_back({Tok::End, "", here(1)});
        return true;
      }
      char c = src_[pos_];
      SourceSpan sp = here(1);
      switch (c) {
        case '(':
          if (pos_ + 2 < src_.size() && src_[pos_ + 1] == '+' && src_[pos_ + 2] == ')') {
            out.push_back({Tok::IChoice, "(+)", here(3)});
            advance(3);
          } else {
            out.push_back({Tok::LParen, "(", sp});
            advance(1);
          }
          continue;
        case ')': out.push_back({Tok::RParen, ")", sp}); advance(1); continue;
        case '+': out.push_back({Tok::Plus, "+", sp}); advance(1); continue;
        case '.': out.push_back({Tok::Dot, ".", sp}); advance(1); continue;
        case '!': out.push_back({Tok::Bang, "!", sp}); advance(1); continue;
        case '<': out.push_back({Tok::Lt, "<", sp}); advance(1); continue;
        case '>': out.push_back({Tok::Gt, ">", sp}); advance(1); continue;
        case ',': out.push_back({Tok::Comma, ",", sp}); advance(1); continue;
        case '_': out.push_back({Tok::Under, "_", sp}); advance(1); continue;
        case '1': out.push_back({Tok::One, "1", sp}); advance(1); continue;
        case '\\':
          if (pos_ + 1 < src_.size() && src_[pos_ + 1] == '/') {
            out.push_back({Tok::OrChoice, "\\/", here(2)});
            advance(2);
            continue;
          }
          err = {"unexpected '\\'", sp};
          return false;
        default:
          break;
      }
      if (std::isalpha(static_cast<unsigned char>(c))) {
        std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
          advance(1);
        std::string word = src_.substr(start, pos_ - start);
        sp.length = word.size();
        if (word == "rec")
          out.push_back({Tok::Rec, word, sp});
        else if (std::isupper(static_cast<unsigned char>(word[0])))
          out.push_back({Tok::Var, word, sp});
        else
          out.push_back({Tok::Name, word, sp});
        continue;
      }
      err = {std::string("unexpected character '") + c + "'", sp};
      return false;
    }
  }

 private:
  void skip_ws() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance(1);
      } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        advance(1);
      } else {
        break;
      }
    }
  }

  SourceSpan here(std::size_t len) const { return {line_, col_, len}; }

  void advance(std::size_t n) {
    for (std::size_t i = 0; i < n && pos_ < src_.size(); ++i) {
      if (src_[pos_] == '\n') {
        ++line_;
        col_ = 1;
      } else {
        ++col_;
      }
      ++pos_;
    }
  }

  const std::string& src_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1, col_ = 1;
};

struct ParserBase {
  std::vector<Token> toks;
  std::size_t at = 0;
  std::optional<ParseError> error;

  const Token& peek() const { return toks[at]; }
  const Token& next() { return toks[at++]; }
  bool accept(Tok k) {
    if (toks[at].kind == k) {
      ++at;
      return true;
    }
    return false;
  }
  void fail(const std::string& msg) {
    if (!error) error = ParseError{msg, peek().span};
  }
  void fail_at(const std::string& msg, const SourceSpan& sp) {
    if (!error) error = ParseError{msg, sp};
  }
};

// ---- contracts ----

struct ContractParser : ParserBase {
  ContractPtr parse_term() {
    SourceSpan first_sp = peek().span;
    ContractPtr head = parse_seq();
    if (error) return nullptr;
    if (peek().kind != Tok::Plus && peek().kind != Tok::IChoice) return head;

    Tok op = peek().kind;
    ContractKind want = op == Tok::Plus ? ContractKind::External : ContractKind::Internal;
    std::vector<ContractBranch> branches;
    if (!append_branches(head, want, branches, first_sp)) return nullptr;
    while (peek().kind == Tok::Plus || peek().kind == Tok::IChoice) {
      if (peek().kind != op) {
        fail("cannot mix '+' and '(+)' in one choice");
        return nullptr;
      }
      next();
      SourceSpan sp = peek().span;
      ContractPtr operand = parse_seq();
      if (error) return nullptr;
      if (!append_branches(operand, want, branches, sp)) return nullptr;
    }
    return want == ContractKind::External ? external_choice(std::move(branches))
                                          : internal_choice(std::move(branches));
  }

  bool append_branches(const ContractPtr& operand, ContractKind want,
                       std::vector<ContractBranch>& branches, const SourceSpan& sp) {
    if (operand->kind == want) {
      for (const auto& b : operand->branches) branches.push_back(b);
      return true;
    }
    if (want == ContractKind::External)
      fail_at("external choice branches must be input prefixes", sp);
    else
      fail_at("internal choice branches must be output prefixes", sp);
    return false;
  }

  ContractPtr parse_seq() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::One:
        next();
        return success();
      case Tok::Var:
        next();
        return contract_var(t.text);
      case Tok::Rec: {
        next();
        if (peek().kind != Tok::Var) {
          fail("expected recursion variable after 'rec'");
          return nullptr;
        }
        std::string var = next().text;
        if (!accept(Tok::Dot)) {
          fail("expected '.' after recursion variable");
          return nullptr;
        }
        ContractPtr body = parse_term();
        if (error) return nullptr;
        return contract_rec(var, body);
      }
      case Tok::LParen: {
        next();
        ContractPtr inner = parse_term();
        if (error) return nullptr;
        if (!accept(Tok::RParen)) {
          fail("expected ')'");
          return nullptr;
        }
        return inner;
      }
      case Tok::Bang: {
        next();
        if (peek().kind != Tok::Name) {
          fail("expected action name after '!'");
          return nullptr;
        }
        std::string name = next().text;
        return output_prefix(name, parse_cont());
      }
      case Tok::Name: {
        std::string name = next().text;
        return input_prefix(name, parse_cont());
      }
      default:
        fail("expected a session-contract term");
        return nullptr;
    }
  }

  // Optional '.'-continuation of a prefix; omitted means success.
  ContractPtr parse_cont() {
    if (!accept(Tok::Dot)) return success();
    ContractPtr c = parse_seq();
    if (error) return nullptr;
    return c;
  }
};

// ---- orchestrators ----

struct OrchParser : ParserBase {
  OrchPtr parse_term() {
    OrchPtr head = parse_seq();
    if (error) return nullptr;
    if (peek().kind != Tok::OrChoice) return head;
    std::vector<OrchPtr> branches{head};
    while (accept(Tok::OrChoice)) {
      OrchPtr b = parse_seq();
      if (error) return nullptr;
      branches.push_back(b);
    }
    return orch_choice(std::move(branches));
  }

  OrchPtr parse_seq() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::One:
        next();
        return orch_stop();
      case Tok::Var:
        next();
        return orch_var(t.text);
      case Tok::Rec: {
        next();
        if (peek().kind != Tok::Var) {
          fail("expected recursion variable after 'rec'");
          return nullptr;
        }
        std::string var = next().text;
        if (!accept(Tok::Dot)) {
          fail("expected '.' after recursion variable");
          return nullptr;
        }
        OrchPtr body = parse_term();
        if (error) return nullptr;
        return orch_rec(var, body);
      }
      case Tok::LParen: {
        next();
        OrchPtr inner = parse_term();
        if (error) return nullptr;
        if (!accept(Tok::RParen)) {
          fail("expected ')'");
          return nullptr;
        }
        return inner;
      }
      case Tok::Lt: {
        OrchAction act;
        if (!parse_action(act)) return nullptr;
        OrchPtr cont = orch_stop();
        if (accept(Tok::Dot)) {
          cont = parse_seq();
          if (error) return nullptr;
        }
        return orch_prefix(act, cont);
      }
      default:
        fail("expected an orchestrator term");
        return nullptr;
    }
  }

  struct Side {
    enum class Kind { Eps, Name, CoName } kind;
    std::string name;
  };

  bool parse_side(Side& out) {
    if (accept(Tok::Under)) {
      out = {Side::Kind::Eps, ""};
      return true;
    }
    if (accept(Tok::Bang)) {
      if (peek().kind != Tok::Name) {
        fail("expected action name after '!'");
        return false;
      }
      out = {Side::Kind::CoName, next().text};
      return true;
    }
    if (peek().kind == Tok::Name) {
      out = {Side::Kind::Name, next().text};
      return true;
    }
    fail("expected a name, '!name' or '_' in an orchestration action");
    return false;
  }

  bool parse_action(OrchAction& out) {
    SourceSpan open = peek().span;
    if (!accept(Tok::Lt)) {
      fail("expected '<'");
      return false;
    }
    Side l, r;
    if (!parse_side(l)) return false;
    if (!accept(Tok::Comma)) {
      fail("expected ',' inside orchestration action");
      return false;
    }
    if (!parse_side(r)) return false;
    if (!accept(Tok::Gt)) {
      fail("expected '>'");
      return false;
    }
    using K = Side::Kind;
    if (l.kind == K::Name && r.kind == K::CoName) {
      if (l.name != r.name) {
        fail_at("synchronous action must use one name: <" + l.name + ",!" + l.name + ">", open);
        return false;
      }
      out = {OrchActionKind::SyncL, l.name};
      return true;
    }
    if (l.kind == K::CoName && r.kind == K::Name) {
      if (l.name != r.name) {
        fail_at("synchronous action must use one name: <!" + r.name + "," + r.name + ">", open);
        return false;
      }
      out = {OrchActionKind::SyncR, r.name};
      return true;
    }
    if (l.kind == K::Name && r.kind == K::Eps) { out = {OrchActionKind::InC, l.name}; return true; }
    if (l.kind == K::Eps && r.kind == K::Name) { out = {OrchActionKind::InS, r.name}; return true; }
    if (l.kind == K::CoName && r.kind == K::Eps) { out = {OrchActionKind::OutC, l.name}; return true; }
    if (l.kind == K::Eps && r.kind == K::CoName) { out = {OrchActionKind::OutS, r.name}; return true; }
    fail_at("not one of the six orchestration action shapes", open);
    return false;
  }
};

// ---- rendering ----

std::string render_contract_rec(const ContractPtr& t, bool protect);

std::string render_branch(const ContractBranch& b, bool output) {
  std::string head = output ? "!" + b.name : b.name;
  if (b.cont->kind == ContractKind::Success) return head;
  return head + "." + render_contract_rec(b.cont, true);
}

// `protect` parenthesizes terms that would otherwise swallow a following
// branch (choices) or the rest of the input (rec is greedy).
std::string render_contract_rec(const ContractPtr& t, bool protect) {
  switch (t->kind) {
    case ContractKind::Success:
      return "1";
    case ContractKind::Var:
      return t->var;
    case ContractKind::Rec: {
      std::string s = "rec " + t->var + " . " + render_contract_rec(t->body, false);
      return protect ? "(" + s + ")" : s;
    }
    case ContractKind::External:
    case ContractKind::Internal: {
      bool output = t->kind == ContractKind::Internal;
      if (t->branches.size() == 1) return render_branch(t->branches[0], output);
      std::string sep = output ? " (+) " : " + ";
      std::string s;
      for (std::size_t i = 0; i < t->branches.size(); ++i) {
        if (i) s += sep;
        s += render_branch(t->branches[i], output);
      }
      return protect ? "(" + s + ")" : s;
    }
  }
  return "?";
}

std::string render_orch_rec(const OrchPtr& t, bool protect) {
  switch (t->kind) {
    case OrchKind::Stop:
      return "1";
    case OrchKind::Var:
      return t->var;
    case OrchKind::Rec: {
      std::string s = "rec " + t->var + " . " + render_orch_rec(t->body, false);
      return protect ? "(" + s + ")" : s;
    }
    case OrchKind::Prefix: {
      std::string head = to_string(t->action);
      if (t->cont->kind == OrchKind::Stop) return head;
      return head + "." + render_orch_rec(t->cont, true);
    }
    case OrchKind::Choice: {
      std::string s;
      for (std::size_t i = 0; i < t->branches.size(); ++i) {
        if (i) s += " \\/ ";
        s += render_orch_rec(t->branches[i], true);
      }
      return protect ? "(" + s + ")" : s;
    }
  }
  return "?";
}

}  // namespace

ContractParse parse_contract(const std::string& src) {
  ContractParse out;
  Lexer lex(src);
  std::vector<Token> toks;
  ParseError err;
  if (!lex.run(toks, err)) {
    out.error = err;
    return out;
  }
  ContractParser p;
  p.toks = std::move(toks);
  ContractPtr t = p.parse_term();
  if (!p.error && p.peek().kind != Tok::End) p.fail("trailing input after term");
  if (p.error) {
    out.error = p.error;
    return out;
  }
  out.violations = well_formed(t);
  out.term = canon(t);
  return out;
}

OrchParse parse_orchestrator(const std::string& src) {
  OrchParse out;
  Lexer lex(src);
  std::vector<Token> toks;
  ParseError err;
  if (!lex.run(toks, err)) {
    out.error = err;
    return out;
  }
  OrchParser p;
  p.toks = std::move(toks);
  OrchPtr t = p.parse_term();
  if (!p.error && p.peek().kind != Tok::End) p.fail("trailing input after term");
  if (p.error) {
    out.error = p.error;
    return out;
  }
  out.violations = well_formed_orch(t);
  out.term = canon_orch(t);
  return out;
}

std::string render(const ContractPtr& term) { return render_contract_rec(term, false); }

std::string render(const OrchPtr& term) { return render_orch_rec(term, false); }

}  // namespace orchestral
