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

// Closed-loop evaluation with subgoal-aware scoring, plain-text reports and
// the aliased-pair probe.

#ifndef SLOTMEM_TRAIN_EVALUATE_H_
#define SLOTMEM_TRAIN_EVALUATE_H_

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "slotmem/goal/goal_dsl.h"
#include "slotmem/grid/dataset.h"
#include "slotmem/grid/memgrid.h"
#include "slotmem/model/model.h"

namespace slotmem::train {

struct Observation {
  const grid::TaskSpec* task = nullptr;
  const grid::EnvState* state = nullptr;
  const grid::Frame* frame = nullptr;
  const goal::EvalProgress* progress = nullptr;
};

class Policy {
 public:
  virtual ~Policy() = default;
  virtual void Reset(const grid::TaskSpec& task, std::uint64_t seed,
                     int dilation) = 0;
  virtual grid::Action Act(const Observation& obs) = 0;
};

// Argmax of the model's action distribution (lowest index on ties).
class ModelPolicy : public Policy {
 public:
  explicit ModelPolicy(const model::Model& model) : runner_(model), model_(&model) {}
  void Reset(const grid::TaskSpec& task, std::uint64_t seed,
             int dilation) override;
  grid::Action Act(const Observation& obs) override;

 private:
  model::PolicyRunner runner_;
  const model::Model* model_;
  goal::GoalStructure structure_;
};

// The scripted demonstrator with the same NoOp holds as the datasets.
class ExpertPolicy : public Policy {
 public:
  void Reset(const grid::TaskSpec& task, std::uint64_t seed,
             int dilation) override;
  grid::Action Act(const Observation& obs) override;

 private:
  std::optional<grid::ScriptedExpert> expert_;
  int dilation_ = 1;
  int holds_ = 0;
  grid::Action pending_ = grid::Action::kNoOp;
};

class RandomPolicy : public Policy {
 public:
  explicit RandomPolicy(std::uint64_t seed) : rng_(seed) {}
  void Reset(const grid::TaskSpec&, std::uint64_t seed, int) override {
    rng_.seed(seed);
  }
  grid::Action Act(const Observation&) override;

 private:
  std::mt19937_64 rng_;
};

struct EvalOptions {
  int n = 20;
  std::uint64_t seed_base = 1000000;
  // Rollouts stop after cap_factor times the expert's episode length.
  double cap_factor = 4.0;
  int dilation = 0;  // 0: the task's own dilation
};

struct RolloutResult {
  std::uint64_t seed = 0;
  bool success = false;
  bool completed = false;
  bool failed = false;
  double subgoal = 0.0;
  int steps = 0;
  int cap = 0;
  std::vector<grid::Action> actions;
};

RolloutResult Rollout(Policy& policy, const grid::TaskSpec& task,
                      std::uint64_t seed, const EvalOptions& options);

struct TaskResult {
  std::string task;
  int n = 0;
  int successes = 0;
  double success_rate = 0.0;
  double mean_subgoal = 0.0;
  int over_repetition = 0;
  double mean_steps = 0.0;
  std::uint64_t first_seed = 0;
};

struct EvalReport {
  std::string label;
  std::vector<TaskResult> rows;
};

TaskResult EvaluateTask(Policy& policy, const grid::TaskSpec& task,
                        const EvalOptions& options,
                        std::vector<RolloutResult>* rollouts = nullptr);
EvalReport Evaluate(Policy& policy, const std::vector<std::string>& tasks,
                    const EvalOptions& options, const std::string& label);

void WriteEvalReport(const std::string& path, const EvalReport& report);
EvalReport ReadEvalReport(const std::string& path);
// Task-by-variant table of "subgoal% (success%)" cells with an average
// column, one row per report.
std::string RenderReport(const std::vector<EvalReport>& reports);

// Teacher-forced log-probabilities at every action-bearing frame.
std::vector<ad::Matrix> EpisodeLogProbs(const model::Model& model,
                                        const grid::Episode& episode);

struct AliasProbe {
  int pairs = 0;
  int identical = 0;  // pairs with bit-identical distributions
  int differing = 0;
};

// Compares the model's teacher-forced distributions on the audit's aliased
// frame pairs.
AliasProbe ProbeAliasedPairs(const model::Model& model,
                             const std::vector<grid::Episode>& episodes,
                             const std::vector<grid::AliasedPair>& pairs);

}  // namespace slotmem::train

#endif  // SLOTMEM_TRAIN_EVALUATE_H_
