// Copyright 2026 The slotmem Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "slotmem/goal/goal_dsl.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <utility>

namespace slotmem::goal {
namespace {

std::string Lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

struct Token {
  enum Kind { kOpen, kClose, kAtom, kEnd } kind = kEnd;
  std::string text;
  int line = 1;
  int column = 1;
};

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  Token Next() {
    SkipSpaceAndComments();
    Token t;
    t.line = line_;
    t.column = column_;
    if (pos_ >= text_.size()) return t;
    char c = text_[pos_];
    if (c == '(' || c == ')') {
      t.kind = c == '(' ? Token::kOpen : Token::kClose;
      t.text = std::string(1, c);
      Advance();
      return t;
    }
    t.kind = Token::kAtom;
    while (pos_ < text_.size()) {
      char d = text_[pos_];
      if (std::isspace(static_cast<unsigned char>(d)) || d == '(' || d == ')' ||
          d == ';') {
        break;
      }
      t.text.push_back(d);
      Advance();
    }
    return t;
  }

 private:
  void Advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    ++pos_;
  }

  void SkipSpaceAndComments() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == ';') {
        while (pos_ < text_.size() && text_[pos_] != '\n') Advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        Advance();
      } else {
        break;
      }
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int column_ = 1;
};

class Parser {
 public:
  explicit Parser(std::string_view text) : lexer_(text) { tok_ = lexer_.Next(); }

  GoalExpr ParseTop() {
    Token open = Expect(Token::kOpen, "expected '(' to open the goal form");
    Token head = Expect(Token::kAtom, "expected ':goal'");
    if (Lower(head.text) != ":goal") {
      throw GoalParseError("expected ':goal', found '" + head.text + "'",
                           head.line, head.column);
    }
    if (tok_.kind != Token::kOpen) {
      throw GoalParseError("expected a goal expression", tok_.line, tok_.column);
    }
    Token body_start = tok_;
    GoalExpr body = ParseNode();
    if (body.kind == NodeKind::kLeaf || body.kind == NodeKind::kAnd ||
        body.kind == NodeKind::kSequence || body.kind == NodeKind::kOr) {
      // All node kinds are valid at the top level.
    }
    (void)body_start;
    Expect(Token::kClose, "expected ')' closing the goal form");
    if (tok_.kind != Token::kEnd) {
      throw GoalParseError("trailing input after the goal form", tok_.line,
                           tok_.column);
    }
    (void)open;
    return body;
  }

 private:
  Token Expect(Token::Kind kind, const char* message) {
    if (tok_.kind != kind) {
      throw GoalParseError(tok_.kind == Token::kEnd
                               ? std::string(message) + " (unexpected end of input)"
                               : std::string(message),
                           tok_.line, tok_.column);
    }
    Token t = tok_;
    tok_ = lexer_.Next();
    return t;
  }

  static void CheckIdentifier(const Token& t) {
    bool ok = !t.text.empty();
    for (char c : t.text) {
      if (!((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_')) {
        ok = false;
      }
    }
    if (!ok) {
      throw GoalParseError("invalid identifier '" + t.text + "'", t.line,
                           t.column);
    }
  }

  // Parses one parenthesised node; structural constraints on children are
  // enforced here so that errors point at the offending child.
  GoalExpr ParseNode() {
    Token open = Expect(Token::kOpen, "expected '('");
    if (tok_.kind != Token::kAtom) {
      throw GoalParseError("expected an operator or predicate name", tok_.line,
                           tok_.column);
    }
    Token head = tok_;
    tok_ = lexer_.Next();
    std::string op = Lower(head.text);

    if (op == "on" || op == "in" || op == "lifted") {
      std::vector<Token> args;
      while (tok_.kind == Token::kAtom) {
        CheckIdentifier(tok_);
        args.push_back(tok_);
        tok_ = lexer_.Next();
      }
      if (tok_.kind == Token::kOpen) {
        throw GoalParseError("predicate arguments must be identifiers",
                             tok_.line, tok_.column);
      }
      Expect(Token::kClose, "expected ')' closing the predicate");
      std::size_t want = op == "lifted" ? 1 : 2;
      if (args.size() != want) {
        throw GoalParseError("arity mismatch: '" + head.text + "' takes " +
                                 std::to_string(want) + " argument(s), got " +
                                 std::to_string(args.size()),
                             head.line, head.column);
      }
      Predicate p;
      p.name = op == "on" ? PredicateName::kOn
               : op == "in" ? PredicateName::kIn
                            : PredicateName::kLifted;
      p.subject = args[0].text;
      if (want == 2) p.target = args[1].text;
      return GoalExpr::Leaf(std::move(p));
    }

    NodeKind kind;
    if (op == "and") {
      kind = NodeKind::kAnd;
    } else if (op == "sequence") {
      kind = NodeKind::kSequence;
    } else if (op == "or") {
      kind = NodeKind::kOr;
    } else {
      throw GoalParseError("unknown predicate or operator '" + head.text + "'",
                           head.line, head.column);
    }

    GoalExpr node;
    node.kind = kind;
    while (tok_.kind == Token::kOpen) {
      Token child_tok = tok_;
      GoalExpr child = ParseNode();
      bool ok = false;
      const char* rule = "";
      switch (kind) {
        case NodeKind::kAnd:
          ok = child.kind == NodeKind::kAnd || child.kind == NodeKind::kLeaf;
          rule = "And accepts only predicates and nested And";
          break;
        case NodeKind::kSequence:
          ok = child.kind == NodeKind::kAnd || child.kind == NodeKind::kLeaf;
          rule = "Sequence steps must be And groups or predicates";
          break;
        case NodeKind::kOr:
          ok = child.kind == NodeKind::kSequence;
          rule = "Or branches must be Sequence forms";
          break;
        case NodeKind::kLeaf:
          break;
      }
      if (!ok) throw GoalParseError(rule, child_tok.line, child_tok.column);
      node.children.push_back(std::move(child));
    }
    if (tok_.kind == Token::kAtom) {
      throw GoalParseError("unexpected atom '" + tok_.text + "' inside " +
                               head.text,
                           tok_.line, tok_.column);
    }
    Expect(Token::kClose, "expected ')'");
    if (node.children.empty()) {
      const char* what = kind == NodeKind::kAnd        ? "empty conjunction"
                         : kind == NodeKind::kSequence ? "empty sequence"
                                                       : "empty disjunction";
      throw GoalParseError(what, open.line, open.column);
    }
    return node;
  }

  Lexer lexer_;
  Token tok_;
};

void PrintExpr(const GoalExpr& e, std::string& out) {
  switch (e.kind) {
    case NodeKind::kLeaf:
      out += ToString(e.predicate);
      return;
    case NodeKind::kAnd:
      out += "(And";
      break;
    case NodeKind::kSequence:
      out += "(Sequence";
      break;
    case NodeKind::kOr:
      out += "(Or";
      break;
  }
  for (const GoalExpr& c : e.children) {
    out += ' ';
    PrintExpr(c, out);
  }
  out += ')';
}

bool IsFlat(const GoalExpr& e) {
  if (e.kind == NodeKind::kLeaf) return true;
  if (e.kind != NodeKind::kAnd) return false;
  return std::all_of(e.children.begin(), e.children.end(), IsFlat);
}

void PrettyExpr(const GoalExpr& e, int indent, std::string& out) {
  std::string pad(indent, ' ');
  if (IsFlat(e)) {
    out += pad;
    PrintExpr(e, out);
    return;
  }
  out += pad + (e.kind == NodeKind::kSequence ? "(Sequence" : "(Or");
  for (const GoalExpr& c : e.children) {
    out += '\n';
    PrettyExpr(c, indent + 2, out);
  }
  out += '\n' + pad + ')';
}

void CollectConjunction(const GoalExpr& e, std::vector<Predicate>& preds) {
  if (e.kind == NodeKind::kLeaf) {
    preds.push_back(e.predicate);
    return;
  }
  for (const GoalExpr& c : e.children) CollectConjunction(c, preds);
}

int Intern(GoalStructure& st, const Predicate& p) {
  for (std::size_t i = 0; i < st.predicates.size(); ++i) {
    if (st.predicates[i] == p) return static_cast<int>(i);
  }
  st.predicates.push_back(p);
  return static_cast<int>(st.predicates.size()) - 1;
}

std::vector<int> InternStep(GoalStructure& st, const GoalExpr& step) {
  std::vector<Predicate> preds;
  CollectConjunction(step, preds);
  std::vector<int> ids;
  for (const Predicate& p : preds) {
    int id = Intern(st, p);
    if (std::find(ids.begin(), ids.end(), id) == ids.end()) ids.push_back(id);
  }
  return ids;
}

std::vector<std::vector<int>> BranchOf(GoalStructure& st, const GoalExpr& e) {
  std::vector<std::vector<int>> branch;
  if (e.kind == NodeKind::kSequence) {
    for (const GoalExpr& c : e.children) branch.push_back(InternStep(st, c));
  } else {
    branch.push_back(InternStep(st, e));
  }
  return branch;
}

int ResolveObject(const std::string& id, const grid::EnvState& s) {
  int idx = s.Find(id);
  if (idx >= 0) return idx;
  static constexpr std::string_view kSuffix = "_contain_region";
  if (id.size() > kSuffix.size() &&
      id.compare(id.size() - kSuffix.size(), kSuffix.size(), kSuffix) == 0) {
    idx = s.Find(std::string_view(id).substr(0, id.size() - kSuffix.size()));
    if (idx >= 0 && s.objects[idx].cls == grid::ObjectClass::kBasket) return idx;
  }
  throw GoalEvalError("unresolvable identifier '" + id + "'");
}

bool Conjunction(const std::vector<int>& step, const std::vector<bool>& values) {
  for (int p : step) {
    if (!values[p]) return false;
  }
  return true;
}

}  // namespace

const char* PredicateNameString(PredicateName n) {
  switch (n) {
    case PredicateName::kOn: return "On";
    case PredicateName::kIn: return "In";
    case PredicateName::kLifted: return "Lifted";
  }
  return "?";
}

std::string ToString(const Predicate& p) {
  std::string out = "(";
  out += PredicateNameString(p.name);
  out += ' ';
  out += p.subject;
  if (p.name != PredicateName::kLifted) {
    out += ' ';
    out += p.target;
  }
  out += ')';
  return out;
}

GoalExpr GoalExpr::Leaf(Predicate p) {
  GoalExpr e;
  e.kind = NodeKind::kLeaf;
  e.predicate = std::move(p);
  return e;
}

GoalExpr GoalExpr::And(std::vector<GoalExpr> children) {
  GoalExpr e;
  e.kind = NodeKind::kAnd;
  e.children = std::move(children);
  return e;
}

GoalExpr GoalExpr::Sequence(std::vector<GoalExpr> children) {
  GoalExpr e;
  e.kind = NodeKind::kSequence;
  e.children = std::move(children);
  return e;
}

GoalExpr GoalExpr::Or(std::vector<GoalExpr> children) {
  GoalExpr e;
  e.kind = NodeKind::kOr;
  e.children = std::move(children);
  return e;
}

GoalParseError::GoalParseError(const std::string& message, int line,
                               int column)
    : std::runtime_error("goal syntax error at " + std::to_string(line) + ":" +
                         std::to_string(column) + ": " + message),
      line_(line),
      column_(column) {}

GoalExpr ParseGoal(std::string_view text) { return Parser(text).ParseTop(); }

GoalExpr LoadGoalFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open goal file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ParseGoal(ss.str());
}

std::string PrintGoal(const GoalExpr& goal) {
  std::string out = "(:goal ";
  PrintExpr(goal, out);
  out += ')';
  return out;
}

std::string PrintGoalPretty(const GoalExpr& goal) {
  std::string out = "(:goal\n";
  PrettyExpr(goal, 2, out);
  out += "\n)\n";
  return out;
}

std::string NormalizeWhitespace(std::string_view text) {
  std::string collapsed;
  bool in_space = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (c == ';') {
      while (i < text.size() && text[i] != '\n') ++i;
      in_space = true;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      in_space = true;
      continue;
    }
    if (in_space && !collapsed.empty() && collapsed.back() != '(' && c != ')') {
      collapsed.push_back(' ');
    }
    in_space = false;
    collapsed.push_back(c);
  }
  return collapsed;
}

GoalStructure Flatten(const GoalExpr& goal) {
  GoalStructure st;
  if (goal.kind == NodeKind::kOr) {
    for (const GoalExpr& c : goal.children) st.branches.push_back(BranchOf(st, c));
  } else {
    st.branches.push_back(BranchOf(st, goal));
  }
  return st;
}

std::vector<int> CountSubgoals(const GoalExpr& goal) {
  GoalStructure st = Flatten(goal);
  std::vector<int> out;
  for (const auto& b : st.branches) out.push_back(static_cast<int>(b.size()));
  return out;
}

bool EvalPredicate(const Predicate& p, const grid::EnvState& s) {
  int x = ResolveObject(p.subject, s);
  switch (p.name) {
    case PredicateName::kLifted:
      return s.held == x;
    case PredicateName::kIn: {
      int c = ResolveObject(p.target, s);
      return s.objects[x].contained_in == c;
    }
    case PredicateName::kOn: {
      int y = ResolveObject(p.target, s);
      if (x == y || s.held == x || s.held == y) return false;
      if (s.objects[x].contained_in >= 0) return false;
      return s.objects[x].cell == s.objects[y].cell;
    }
  }
  return false;
}

EvalProgress EvalStep(const EvalProgress& progress, const GoalExpr& goal,
                      const Valuation& values) {
  GoalStructure st = Flatten(goal);
  const std::size_t nb = st.branches.size();
  EvalProgress out = progress;
  if (out.steps == 0 && out.satisfied.empty()) {
    out.satisfied.assign(nb, 0);
    out.alive.assign(nb, true);
  }
  if (out.satisfied.size() != nb || out.alive.size() != nb) {
    throw std::invalid_argument("EvalStep: progress does not match goal");
  }

  std::vector<bool> cur(st.predicates.size());
  for (std::size_t i = 0; i < st.predicates.size(); ++i) {
    cur[i] = values(st.predicates[i]);
  }
  const bool first = out.steps == 0;

  if (out.completed) {
    if (!out.failed && !first && out.prev_values != cur) out.failed = true;
  } else {
    std::vector<int> advancing;
    for (std::size_t b = 0; b < nb; ++b) {
      if (!out.alive[b]) continue;
      const auto& branch = st.branches[b];
      if (out.satisfied[b] >= static_cast<int>(branch.size())) continue;
      const auto& next = branch[out.satisfied[b]];
      bool now = Conjunction(next, cur);
      bool before = !first && Conjunction(next, out.prev_values);
      if (now && !before) advancing.push_back(static_cast<int>(b));
    }
    if (!advancing.empty()) {
      for (std::size_t b = 0; b < nb; ++b) {
        if (!out.alive[b]) continue;
        if (std::find(advancing.begin(), advancing.end(), static_cast<int>(b)) ==
            advancing.end()) {
          out.alive[b] = false;
        }
      }
      for (int b : advancing) ++out.satisfied[b];
    }
    for (std::size_t b = 0; b < nb; ++b) {
      if (out.alive[b] &&
          out.satisfied[b] == static_cast<int>(st.branches[b].size())) {
        out.completed = true;
      }
    }
  }
  out.prev_values = std::move(cur);
  ++out.steps;
  return out;
}

EvalProgress EvalStep(const EvalProgress& progress, const GoalExpr& goal,
                      const grid::EnvState& s) {
  return EvalStep(progress, goal,
                  [&s](const Predicate& p) { return EvalPredicate(p, s); });
}

double SubgoalCompletion(const EvalProgress& progress, const GoalExpr& goal) {
  std::vector<int> lengths = CountSubgoals(goal);
  if (progress.satisfied.empty()) return 0.0;
  bool any_alive = std::find(progress.alive.begin(), progress.alive.end(),
                             true) != progress.alive.end();
  double best = 0.0;
  for (std::size_t b = 0; b < lengths.size(); ++b) {
    if (any_alive && !progress.alive[b]) continue;
    best = std::max(best, static_cast<double>(progress.satisfied[b]) /
                              static_cast<double>(lengths[b]));
  }
  return best;
}

std::vector<std::pair<int, std::vector<int>>> PendingSubgoals(
    const EvalProgress& progress, const GoalStructure& structure) {
  std::vector<std::pair<int, std::vector<int>>> out;
  if (progress.completed) return out;
  for (std::size_t b = 0; b < structure.branches.size(); ++b) {
    int k = progress.satisfied.empty() ? 0 : progress.satisfied[b];
    bool alive = progress.alive.empty() || progress.alive[b];
    if (!alive || k >= static_cast<int>(structure.branches[b].size())) continue;
    out.emplace_back(static_cast<int>(b), structure.branches[b][k]);
  }
  return out;
}

}  // namespace slotmem::goal
