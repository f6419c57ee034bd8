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

// Random goal trees and a whole-trace reference evaluator used to check the
// incremental evaluator. The reference never looks at GoalStructure; it
// works on the generator's own branch lists.

#ifndef SLOTMEM_TESTS_SUPPORT_GOAL_ORACLE_H_
#define SLOTMEM_TESTS_SUPPORT_GOAL_ORACLE_H_

#include <random>
#include <string>
#include <vector>

#include "slotmem/goal/goal_dsl.h"

namespace slotmem::testing {

// One random instance: a predicate pool, the branches as pool indices, the
// tree built from them, and a truth trace over the pool.
struct RandomGoalCase {
  std::vector<goal::Predicate> pool;
  std::vector<std::vector<std::vector<int>>> branches;
  goal::GoalExpr tree;
  std::vector<std::vector<bool>> trace;  // [step][pool index]
};

inline goal::GoalExpr RandomConjunction(const std::vector<int>& preds,
                                        const std::vector<goal::Predicate>& pool,
                                        int depth, std::mt19937_64& rng) {
  // Optionally nests a suffix of the conjunction into an inner And.
  std::vector<goal::GoalExpr> kids;
  std::size_t split = preds.size();
  if (depth > 0 && preds.size() >= 2 && rng() % 3 == 0) {
    split = 1 + rng() % (preds.size() - 1);
  }
  for (std::size_t i = 0; i < split; ++i) {
    kids.push_back(goal::GoalExpr::Leaf(pool[preds[i]]));
  }
  if (split < preds.size()) {
    std::vector<int> rest(preds.begin() + split, preds.end());
    kids.push_back(RandomConjunction(rest, pool, depth - 1, rng));
  }
  return goal::GoalExpr::And(std::move(kids));
}

inline RandomGoalCase MakeRandomGoalCase(std::mt19937_64& rng) {
  RandomGoalCase c;
  static const char* kObjects[] = {"bowl_1", "bowl_2", "plate_1", "plate_2"};
  const int pool_size = 2 + static_cast<int>(rng() % 4);
  while (static_cast<int>(c.pool.size()) < pool_size) {
    goal::Predicate p;
    int kind = static_cast<int>(rng() % 3);
    p.name = kind == 0   ? goal::PredicateName::kOn
             : kind == 1 ? goal::PredicateName::kIn
                         : goal::PredicateName::kLifted;
    p.subject = kObjects[rng() % 4];
    if (p.name != goal::PredicateName::kLifted) p.target = kObjects[rng() % 4];
    bool dup = false;
    for (const auto& q : c.pool) dup = dup || q == p;
    if (!dup) c.pool.push_back(p);
  }

  const int nb = 1 + static_cast<int>(rng() % 4);
  for (int b = 0; b < nb; ++b) {
    const int ns = 1 + static_cast<int>(rng() % 5);
    std::vector<std::vector<int>> branch;
    for (int s = 0; s < ns; ++s) {
      const int np = 1 + static_cast<int>(rng() % 2);
      std::vector<int> conj;
      while (static_cast<int>(conj.size()) < np) {
        int p = static_cast<int>(rng() % c.pool.size());
        bool seen = false;
        for (int q : conj) seen = seen || q == p;
        if (!seen) conj.push_back(p);
      }
      branch.push_back(conj);
    }
    c.branches.push_back(branch);
  }

  auto make_sequence = [&](const std::vector<std::vector<int>>& branch) {
    std::vector<goal::GoalExpr> steps;
    for (const auto& conj : branch) {
      if (conj.size() == 1 && rng() % 4 == 0) {
        steps.push_back(goal::GoalExpr::Leaf(c.pool[conj[0]]));
      } else {
        steps.push_back(RandomConjunction(conj, c.pool, 1, rng));
      }
    }
    return goal::GoalExpr::Sequence(std::move(steps));
  };
  if (nb == 1 && c.branches[0].size() == 1 && rng() % 3 == 0) {
    c.tree = RandomConjunction(c.branches[0][0], c.pool, 1, rng);
  } else if (nb == 1 && rng() % 2 == 0) {
    c.tree = make_sequence(c.branches[0]);
  } else {
    std::vector<goal::GoalExpr> seqs;
    for (const auto& b : c.branches) seqs.push_back(make_sequence(b));
    c.tree = goal::GoalExpr::Or(std::move(seqs));
  }

  const int length = 1 + static_cast<int>(rng() % 30);
  std::vector<bool> values(c.pool.size());
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = rng() % 2 == 0;
  for (int t = 0; t < length; ++t) {
    if (t > 0) {
      for (std::size_t i = 0; i < values.size(); ++i) {
        if (rng() % 10 < 3) values[i] = !values[i];
      }
    }
    c.trace.push_back(values);
  }
  return c;
}

struct OracleOutcome {
  std::vector<int> satisfied;
  bool completed = false;
  bool failed = false;
};

// Whole-trace evaluation. Each branch is first scanned on its own with the
// rising-edge rule; then a branch is alive at t iff it was alive at t-1 and,
// whenever some alive branch advanced at t, it advanced too. Completion is
// the first t at which an alive branch has finished; counts freeze there and
// any later change of a pool predicate is an over-repetition failure.
inline OracleOutcome BruteForceEvaluate(const RandomGoalCase& c) {
  const int nb = static_cast<int>(c.branches.size());
  const int T = static_cast<int>(c.trace.size());
  auto conj_true = [&](const std::vector<int>& conj, int t) {
    for (int p : conj) {
      if (!c.trace[t][p]) return false;
    }
    return true;
  };
  // solo[b][t] = satisfied count of branch b after step t, ignoring others.
  std::vector<std::vector<int>> solo(nb, std::vector<int>(T, 0));
  for (int b = 0; b < nb; ++b) {
    int k = 0;
    const int len = static_cast<int>(c.branches[b].size());
    for (int t = 0; t < T; ++t) {
      if (k < len) {
        const auto& next = c.branches[b][k];
        bool now = conj_true(next, t);
        bool before = t > 0 && conj_true(next, t - 1);
        if (now && !before) ++k;
      }
      solo[b][t] = k;
    }
  }
  auto advanced = [&](int b, int t) {
    return solo[b][t] > (t > 0 ? solo[b][t - 1] : 0);
  };

  OracleOutcome out;
  out.satisfied.assign(nb, 0);
  std::vector<bool> alive(nb, true);
  int completion_time = -1;
  for (int t = 0; t < T && completion_time < 0; ++t) {
    bool any = false;
    for (int b = 0; b < nb; ++b) any = any || (alive[b] && advanced(b, t));
    std::vector<bool> next_alive = alive;
    for (int b = 0; b < nb; ++b) {
      if (alive[b] && any && !advanced(b, t)) next_alive[b] = false;
    }
    alive = next_alive;
    for (int b = 0; b < nb; ++b) {
      if (alive[b]) out.satisfied[b] = solo[b][t];
      if (alive[b] && solo[b][t] == static_cast<int>(c.branches[b].size())) {
        completion_time = t;
      }
    }
  }
  if (completion_time >= 0) {
    out.completed = true;
    for (int t = completion_time + 1; t < T; ++t) {
      bool changed = false;
      // Only predicates that appear in the goal count.
      for (const auto& branch : c.branches) {
        for (const auto& conj : branch) {
          for (int p : conj) changed = changed || c.trace[t][p] != c.trace[t - 1][p];
        }
      }
      if (changed) {
        out.failed = true;
        break;
      }
    }
  }
  return out;
}

// Runs the incremental evaluator over the case's trace.
inline goal::EvalProgress RunIncremental(const RandomGoalCase& c) {
  goal::EvalProgress progress;
  for (const auto& values : c.trace) {
    goal::Valuation v = [&](const goal::Predicate& p) {
      for (std::size_t i = 0; i < c.pool.size(); ++i) {
        if (c.pool[i] == p) return bool(values[i]);
      }
      throw goal::GoalEvalError("predicate not in pool: " + goal::ToString(p));
    };
    progress = goal::EvalStep(progress, c.tree, v);
  }
  return progress;
}

}  // namespace slotmem::testing

#endif  // SLOTMEM_TESTS_SUPPORT_GOAL_ORACLE_H_
