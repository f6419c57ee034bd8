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

// Compositional goal language and its step-wise evaluator.
//
//   goal      := "(" ":goal" expr ")"
//   expr      := "(" "Sequence" step+ ")" | "(" "Or" seq+ ")" | step
//   step      := "(" "And" (step | pred)+ ")" | pred
//   pred      := "(" "On" id id ")" | "(" "In" id id ")" | "(" "Lifted" id ")"
//
// Operator heads are case-insensitive, identifiers match [a-z0-9_]+ and ';'
// starts a comment that runs to the end of the line.

#ifndef SLOTMEM_GOAL_GOAL_DSL_H_
#define SLOTMEM_GOAL_GOAL_DSL_H_

#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "slotmem/grid/env_state.h"

namespace slotmem::goal {

enum class PredicateName { kOn, kIn, kLifted };

struct Predicate {
  PredicateName name = PredicateName::kOn;
  std::string subject;
  std::string target;  // empty for Lifted

  friend bool operator==(const Predicate&, const Predicate&) = default;
};

// "(On a b)", "(Lifted a)".
std::string ToString(const Predicate& p);
const char* PredicateNameString(PredicateName n);

enum class NodeKind { kAnd, kSequence, kOr, kLeaf };

struct GoalExpr {
  NodeKind kind = NodeKind::kAnd;
  std::vector<GoalExpr> children;
  Predicate predicate;  // kLeaf only

  static GoalExpr Leaf(Predicate p);
  static GoalExpr And(std::vector<GoalExpr> children);
  static GoalExpr Sequence(std::vector<GoalExpr> children);
  static GoalExpr Or(std::vector<GoalExpr> children);

  friend bool operator==(const GoalExpr&, const GoalExpr&) = default;
};

class GoalParseError : public std::runtime_error {
 public:
  GoalParseError(const std::string& message, int line, int column);
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

// Thrown when a predicate names something the state does not declare.
class GoalEvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

GoalExpr ParseGoal(std::string_view text);
GoalExpr LoadGoalFile(const std::string& path);

// Single-line canonical form, e.g. "(:goal (Sequence (And (On a b))))".
std::string PrintGoal(const GoalExpr& goal);
// Indented multi-line form used for the shipped .goal files.
std::string PrintGoalPretty(const GoalExpr& goal);
// Collapses whitespace and comments so that formatting-only differences
// between two goal texts vanish.
std::string NormalizeWhitespace(std::string_view text);

// Flattened goal: alternative branches, each an ordered list of subgoals,
// each subgoal a conjunction of predicates (indices into `predicates`).
struct GoalStructure {
  std::vector<Predicate> predicates;  // deduplicated, first-seen order
  std::vector<std::vector<std::vector<int>>> branches;
};

GoalStructure Flatten(const GoalExpr& goal);
// Sequence length of every Or branch; a bare And counts as one subgoal.
std::vector<int> CountSubgoals(const GoalExpr& goal);

// Mutable evaluation state threaded through EvalStep.
struct EvalProgress {
  std::vector<int> satisfied;  // satisfied-prefix length per branch
  std::vector<bool> alive;     // per branch
  bool completed = false;
  bool failed = false;
  int steps = 0;                 // EvalStep calls so far
  std::vector<bool> prev_values;  // per GoalStructure predicate, last call

  friend bool operator==(const EvalProgress&, const EvalProgress&) = default;
};

bool EvalPredicate(const Predicate& p, const grid::EnvState& s);

using Valuation = std::function<bool(const Predicate&)>;

// Advances `progress` by one observation. Subgoals count only on a rising
// edge of their conjunction (or when true at the first call); every alive
// branch advances at most one subgoal per call, and alive branches that do
// not advance while another branch does are pruned. After completion, any
// change of a goal predicate marks the episode failed.
EvalProgress EvalStep(const EvalProgress& progress, const GoalExpr& goal,
                      const Valuation& values);
EvalProgress EvalStep(const EvalProgress& progress, const GoalExpr& goal,
                      const grid::EnvState& s);

// Fraction of the best branch's subgoals satisfied. Alive branches are
// preferred; if every branch died, all are considered.
double SubgoalCompletion(const EvalProgress& progress, const GoalExpr& goal);

// Next unsatisfied subgoal (predicate indices into Flatten(goal)) of each
// alive branch, paired with the branch index. Empty once completed.
std::vector<std::pair<int, std::vector<int>>> PendingSubgoals(
    const EvalProgress& progress, const GoalStructure& structure);

}  // namespace slotmem::goal

#endif  // SLOTMEM_GOAL_GOAL_DSL_H_
