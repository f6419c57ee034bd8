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

#include "slotmem/train/evaluate.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <stdexcept>

#include "slotmem/model/policy_head.h"
#include "slotmem/train/trainer.h"

namespace slotmem::train {

void ModelPolicy::Reset(const grid::TaskSpec& task, std::uint64_t seed, int) {
  runner_.Reset(seed);
  structure_ = goal::Flatten(task.goal);
}

grid::Action ModelPolicy::Act(const Observation& obs) {
  std::vector<int> goals =
      model::ObjectSubgoals(model::SubgoalVocabulary::Shipped(), structure_,
                            *obs.progress, *obs.state);
  ad::Matrix lp = runner_.Observe(model::MakeStepInput(
      model_->config(), *obs.frame, *obs.state, goals, obs.task->id));
  Eigen::Index best = 0;
  for (Eigen::Index a = 1; a < lp.cols(); ++a) {
    if (lp(0, a) > lp(0, best)) best = a;
  }
  return static_cast<grid::Action>(best);
}

void ExpertPolicy::Reset(const grid::TaskSpec& task, std::uint64_t,
                         int dilation) {
  expert_.emplace(task);
  dilation_ = dilation;
  holds_ = 0;
}

grid::Action ExpertPolicy::Act(const Observation& obs) {
  if (holds_ == 0) pending_ = expert_->Next(*obs.state, *obs.progress);
  if (++holds_ < dilation_) return grid::Action::kNoOp;
  holds_ = 0;
  return pending_;
}

grid::Action RandomPolicy::Act(const Observation&) {
  std::uniform_int_distribution<int> d(0, grid::kNumActions - 1);
  return static_cast<grid::Action>(d(rng_));
}

RolloutResult Rollout(Policy& policy, const grid::TaskSpec& task,
                      std::uint64_t seed, const EvalOptions& options) {
  const int dilation = options.dilation > 0 ? options.dilation : task.dilation;
  RolloutResult r;
  r.seed = seed;
  const int expert_len = static_cast<int>(
      grid::RunExpertEpisode(task, seed, dilation).actions.size());
  r.cap = static_cast<int>(std::ceil(options.cap_factor * expert_len));
  grid::EnvState s = grid::Reset(task, seed);
  goal::EvalProgress progress = goal::EvalStep({}, task.goal, s);
  policy.Reset(task, seed, dilation);
  while (r.steps < r.cap && !progress.failed) {
    const grid::Frame frame = grid::Render(s);
    const grid::Action a = policy.Act({&task, &s, &frame, &progress});
    r.actions.push_back(a);
    if (progress.completed && a == grid::Action::kNoOp) break;
    s = grid::Step(s, a).state;
    progress = goal::EvalStep(progress, task.goal, s);
    ++r.steps;
  }
  r.completed = progress.completed;
  r.failed = progress.failed;
  r.success = progress.completed && !progress.failed;
  r.subgoal = goal::SubgoalCompletion(progress, task.goal);
  return r;
}

TaskResult EvaluateTask(Policy& policy, const grid::TaskSpec& task,
                        const EvalOptions& options,
                        std::vector<RolloutResult>* rollouts) {
  TaskResult t;
  t.task = task.id;
  t.n = options.n;
  t.first_seed = options.seed_base;
  double subgoal = 0.0, steps = 0.0;
  for (int i = 0; i < options.n; ++i) {
    RolloutResult r = Rollout(policy, task, options.seed_base + i, options);
    t.successes += r.success;
    t.over_repetition += r.completed && r.failed;
    subgoal += r.subgoal;
    steps += r.steps;
    if (rollouts) rollouts->push_back(std::move(r));
  }
  if (options.n > 0) {
    t.success_rate = static_cast<double>(t.successes) / options.n;
    t.mean_subgoal = subgoal / options.n;
    t.mean_steps = steps / options.n;
  }
  return t;
}

EvalReport Evaluate(Policy& policy, const std::vector<std::string>& tasks,
                    const EvalOptions& options, const std::string& label) {
  EvalReport report;
  report.label = label;
  for (const std::string& id : tasks) {
    report.rows.push_back(EvaluateTask(policy, grid::GetTask(id), options));
  }
  return report;
}

namespace {

constexpr const char* kReportHeader =
    "task\tn\tsuccesses\tsuccess_rate\tmean_subgoal\tover_repetition\t"
    "mean_steps\tfirst_seed";

}  // namespace

void WriteEvalReport(const std::string& path, const EvalReport& report) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "# label\t" << report.label << "\n" << kReportHeader << "\n";
  out << std::setprecision(6) << std::fixed;
  for (const TaskResult& t : report.rows) {
    out << t.task << '\t' << t.n << '\t' << t.successes << '\t'
        << t.success_rate << '\t' << t.mean_subgoal << '\t'
        << t.over_repetition << '\t' << t.mean_steps << '\t' << t.first_seed
        << "\n";
  }
  if (!out) throw std::runtime_error("write failed for " + path);
}

EvalReport ReadEvalReport(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open report " + path);
  EvalReport report;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.rfind("# label\t", 0) == 0) {
      report.label = line.substr(8);
      continue;
    }
    if (line.rfind("task\t", 0) == 0 || line[0] == '#') continue;
    std::istringstream row(line);
    TaskResult t;
    if (!(row >> t.task >> t.n >> t.successes >> t.success_rate >>
          t.mean_subgoal >> t.over_repetition >> t.mean_steps >>
          t.first_seed)) {
      throw std::runtime_error("malformed report row in " + path + ": " + line);
    }
    report.rows.push_back(t);
  }
  return report;
}

std::string RenderReport(const std::vector<EvalReport>& reports) {
  std::vector<std::string> tasks;
  for (const EvalReport& r : reports) {
    for (const TaskResult& t : r.rows) {
      if (std::find(tasks.begin(), tasks.end(), t.task) == tasks.end()) {
        tasks.push_back(t.task);
      }
    }
  }
  std::ostringstream os;
  os << "| Model |";
  for (const std::string& t : tasks) os << ' ' << t << " |";
  os << " Avg |\n|---|";
  for (std::size_t i = 0; i <= tasks.size(); ++i) os << "---|";
  os << "\n";
  os << std::fixed << std::setprecision(1);
  for (const EvalReport& r : reports) {
    std::map<std::string, const TaskResult*> by_task;
    for (const TaskResult& t : r.rows) by_task[t.task] = &t;
    os << "| " << r.label << " |";
    double sub = 0.0, succ = 0.0;
    int count = 0;
    for (const std::string& t : tasks) {
      auto it = by_task.find(t);
      if (it == by_task.end()) {
        os << " - |";
        continue;
      }
      os << ' ' << 100.0 * it->second->mean_subgoal << " ("
         << 100.0 * it->second->success_rate << ") |";
      sub += it->second->mean_subgoal;
      succ += it->second->success_rate;
      ++count;
    }
    if (count > 0) {
      os << ' ' << 100.0 * sub / count << " (" << 100.0 * succ / count
         << ") |\n";
    } else {
      os << " - |\n";
    }
  }
  os << "\nCells: mean subgoal completion % (success rate %).\n";
  return os.str();
}

std::vector<ad::Matrix> EpisodeLogProbs(const model::Model& model,
                                        const grid::Episode& episode) {
  const grid::TaskSpec& task = grid::GetTask(episode.task_id);
  const goal::GoalStructure structure = goal::Flatten(task.goal);
  model::PolicyRunner runner(model);
  runner.Reset(episode.seed);
  std::vector<ad::Matrix> out;
  for (std::size_t t = 0; t < episode.actions.size(); ++t) {
    std::vector<int> goals = model::ObjectSubgoals(
        model::SubgoalVocabulary::Shipped(), structure,
        ProgressFromAnnotation(episode.annotations[t]), episode.states[t]);
    out.push_back(runner.Observe(model::MakeStepInput(
        model.config(), episode.frames[t], episode.states[t], goals,
        episode.task_id)));
  }
  return out;
}

AliasProbe ProbeAliasedPairs(const model::Model& model,
                             const std::vector<grid::Episode>& episodes,
                             const std::vector<grid::AliasedPair>& pairs) {
  std::map<int, std::vector<ad::Matrix>> cache;
  auto probs = [&](int e) -> const std::vector<ad::Matrix>& {
    auto it = cache.find(e);
    if (it == cache.end()) {
      it = cache.emplace(e, EpisodeLogProbs(model, episodes.at(e))).first;
    }
    return it->second;
  };
  AliasProbe probe;
  for (const grid::AliasedPair& p : pairs) {
    const ad::Matrix a = probs(p.episode_a).at(p.frame_a);
    const ad::Matrix b = probs(p.episode_b).at(p.frame_b);
    ++probe.pairs;
    if (a == b) {
      ++probe.identical;
    } else {
      ++probe.differing;
    }
  }
  return probe;
}

}  // namespace slotmem::train
