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

// slotmem command-line entry point: dataset generation, training,
// evaluation, reports, slot overlays, token accounting and the aliasing
// audit.
//
// Every subcommand accepts --config FILE with flat key=value lines named
// after its long flags; flags given on the command line take precedence.
// Exit status: 0 on success, 2 on usage errors, 1 on runtime failures.

#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "slotmem/grid/dataset.h"
#include "slotmem/grid/memgrid.h"
#include "slotmem/model/config.h"
#include "slotmem/model/model.h"
#include "slotmem/train/evaluate.h"
#include "slotmem/train/trainer.h"
#include "viz.h"

namespace {

namespace fs = std::filesystem;
using slotmem::grid::Episode;
using slotmem::grid::TaskSpec;
using slotmem::model::ModelConfig;
using slotmem::train::TrainConfig;

constexpr int kUsageError = 2;
constexpr int kRuntimeError = 1;

std::vector<std::string> TaskChoices() {
  std::vector<std::string> ids = slotmem::grid::AllTaskIds();
  ids.push_back("all");
  return ids;
}

std::vector<std::string> ResolveTasks(const std::vector<std::string>& names) {
  std::vector<std::string> out;
  for (const std::string& n : names) {
    if (n == "all") {
      for (const std::string& id : slotmem::grid::TaskIds()) out.push_back(id);
    } else {
      out.push_back(n);
    }
  }
  return out;
}

int ResolveDilation(const TaskSpec& task, int dilation) {
  return dilation > 0 ? dilation : task.dilation;
}

void WriteText(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

// CLI11 reads config files for the root app only, so each subcommand keeps
// its own --config path and ApplyConfig fills options left unset by flags.
std::map<const CLI::App*, std::string>& ConfigPaths() {
  static auto* paths = new std::map<const CLI::App*, std::string>();
  return *paths;
}

void AddConfig(CLI::App* app) {
  app->add_option("--config", ConfigPaths()[app],
                  "Flat key=value file of flag defaults; flags take "
                  "precedence")
      ->check(CLI::ExistingFile);
}

void ApplyConfig(CLI::App* app) {
  const std::string& path = ConfigPaths()[app];
  if (path.empty()) return;
  std::ifstream in(path);
  if (!in) throw CLI::FileError::Missing(path);
  for (const CLI::ConfigItem& item : CLI::ConfigINI().from_config(in)) {
    if (item.name == "++" || item.name == "--") continue;
    if (!item.parents.empty() &&
        !(item.parents.size() == 1 && item.parents[0] == "default")) {
      throw CLI::ValidationError(path, "sections are not supported: " +
                                           item.fullname());
    }
    if (item.name == "config") {
      throw CLI::ValidationError(path, "config files cannot nest");
    }
    CLI::Option* opt = app->get_option_no_throw("--" + item.name);
    if (opt == nullptr) {
      throw CLI::ValidationError(path, "unknown key '" + item.name + "'");
    }
    if (opt->count() > 0) continue;
    for (const std::string& v : item.inputs) opt->add_result(v);
    opt->run_callback();
  }
}

// ---------------------------------------------------------------- gen-data

struct GenDataArgs {
  std::vector<std::string> tasks = {"T1"};
  int n_train = 100;
  int n_val = 20;
  int dilation = 0;
  std::uint64_t seed = 0;
  std::string out = "data";
};

void SetupGenData(CLI::App& app, GenDataArgs& a) {
  CLI::App* sub = app.add_subcommand(
      "gen-data", "Roll the scripted expert and write episode files");
  AddConfig(sub);
  sub->add_option("--task", a.tasks, "Task ids, or 'all' for T1-T10")
      ->delimiter(',')
      ->check(CLI::IsMember(TaskChoices()))
      ->capture_default_str();
  sub->add_option("--train", a.n_train, "Training episodes per task")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  sub->add_option("--val", a.n_val, "Validation episodes per task")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  sub->add_option("--dilation", a.dilation,
                  "Frames per expert action; 0 uses the task default")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  sub->add_option("--seed", a.seed, "First episode seed")->capture_default_str();
  sub->add_option("--out", a.out, "Dataset directory")->capture_default_str();
}

int RunGenData(const GenDataArgs& a) {
  for (const std::string& id : ResolveTasks(a.tasks)) {
    const TaskSpec& task = slotmem::grid::GetTask(id);
    const auto entries = slotmem::grid::GenerateDataset(
        task, a.n_train, a.n_val, a.seed, ResolveDilation(task, a.dilation),
        a.out);
    std::int64_t frames = 0;
    for (const auto& e : entries) frames += e.frames;
    std::cout << id << ": " << entries.size() << " episodes, " << frames
              << " frames -> " << a.out << "\n";
  }
  return 0;
}

// ------------------------------------------------------------------- train

struct TrainArgs {
  std::string data = "data";
  std::string split = "train";
  std::vector<std::string> tasks = {"T1"};
  std::string variant = "full";
  std::string out = "run";
  std::string resume;
  ModelConfig model;
  TrainConfig train = [] {
    TrainConfig t;
    t.chunk = 0;
    return t;
  }();
  int log_every = 100;
  int save_every = 1000;
};

void SetupTrain(CLI::App& app, TrainArgs& a) {
  CLI::App* sub = app.add_subcommand(
      "train", "Behaviour-clone a policy from a generated dataset");
  AddConfig(sub);
  ModelConfig& m = a.model;
  TrainConfig& t = a.train;
  sub->add_option("--data", a.data, "Dataset directory from gen-data")
      ->capture_default_str();
  sub->add_option("--split", a.split, "Dataset split to train on")
      ->check(CLI::IsMember({"train", "val"}))
      ->capture_default_str();
  sub->add_option("--tasks", a.tasks, "Task ids, or 'all'")
      ->delimiter(',')
      ->check(CLI::IsMember(TaskChoices()))
      ->capture_default_str();
  sub->add_option("--variant", a.variant, "Policy variant")
      ->check(CLI::IsMember({"full", "memoryless"}))
      ->capture_default_str();
  sub->add_option("--out", a.out,
                  "Run directory (model.ckpt, loss_curve.tsv)")
      ->capture_default_str();
  sub->add_option("--resume", a.resume,
                  "Continue from a checkpoint; its stored configs are used")
      ->check(CLI::ExistingFile);
  sub->add_option("--log-every", a.log_every, "Print every N steps")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--save-every", a.save_every, "Checkpoint every N steps")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  sub->add_option("--slots", m.num_slots, "Slots K")->capture_default_str();
  sub->add_option("--d-enc", m.d_enc, "Feature width")->capture_default_str();
  sub->add_option("--d-slot", m.d_slot, "Slot width")->capture_default_str();
  sub->add_option("--slot-heads", m.slot_heads, "Slot attention heads")
      ->capture_default_str();
  sub->add_option("--iters-first", m.iters_first,
                  "Slot attention iterations on a first frame")
      ->capture_default_str();
  sub->add_option("--iters-carry", m.iters_carry,
                  "Slot attention iterations with carried slots")
      ->capture_default_str();
  sub->add_option("--mlp-hidden", m.mlp_hidden, "Hidden width of the MLPs")
      ->capture_default_str();
  sub->add_option("--ssm-state", m.ssm_state, "SSM state per slot")
      ->capture_default_str();
  sub->add_option("--window-past", m.window_past, "Past window p")
      ->capture_default_str();
  sub->add_option("--window-future", m.window_future, "Future window q")
      ->capture_default_str();
  sub->add_option("--relation", m.num_relation, "Relation tokens L")
      ->capture_default_str();
  sub->add_option("--decoder-layers", m.decoder_layers, "Decoder blocks")
      ->capture_default_str();
  sub->add_option("--attn-heads", m.attn_heads, "Decoder attention heads")
      ->capture_default_str();
  sub->add_option("--model-seed", m.seed, "Parameter initialisation seed")
      ->capture_default_str();

  sub->add_option("--steps", t.max_steps, "Optimisation steps")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--chunk", t.chunk,
                  "Frames per chunk; 0 uses window-past + window-future")
      ->capture_default_str();
  sub->add_option("--batch", t.batch, "Parallel episode streams")
      ->capture_default_str();
  sub->add_option("--lr", t.lr, "Peak learning rate (cosine decay)")
      ->capture_default_str();
  sub->add_option("--clip", t.clip, "Gradient norm clip")->capture_default_str();
  sub->add_option("--w-action", t.weights.action, "Action loss weight")
      ->capture_default_str();
  sub->add_option("--w-recon", t.weights.recon, "Window recon weight")
      ->capture_default_str();
  sub->add_option("--w-contrast", t.weights.contrast, "Contrastive weight")
      ->capture_default_str();
  sub->add_option("--w-next", t.weights.next, "Next-slot weight")
      ->capture_default_str();
  sub->add_option("--delta-max", t.delta_max, "Contrastive positive range")
      ->capture_default_str();
  sub->add_option("--tau", t.tau, "Contrastive temperature")
      ->capture_default_str();
  sub->add_option("--contrast-frames", t.contrast_frames,
                  "Leading chunk frames in the contrastive batch")
      ->capture_default_str();
  sub->add_option("--seed", t.seed, "Sampling seed")->capture_default_str();
}

std::vector<Episode> LoadTrainingEpisodes(const std::string& dir,
                                          const std::string& split,
                                          const std::vector<std::string>& tasks) {
  std::vector<Episode> episodes;
  for (const std::string& id : tasks) {
    auto eps = slotmem::grid::LoadEpisodes(dir, split, id);
    if (eps.empty()) {
      throw std::runtime_error("no " + split + " episodes for " + id + " in " +
                               dir);
    }
    for (Episode& e : eps) episodes.push_back(std::move(e));
  }
  return episodes;
}

// Keeps the header and rows up to `step` of an existing loss curve.
std::string TruncatedCurve(const fs::path& path, std::int64_t step) {
  std::ostringstream kept;
  kept << slotmem::train::LossCurveHeader() << "\n";
  std::ifstream in(path);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (first) {
      first = false;
      continue;
    }
    if (line.empty()) continue;
    if (std::stoll(line.substr(0, line.find('\t'))) <= step) {
      kept << line << "\n";
    }
  }
  return kept.str();
}

int RunTrain(TrainArgs a) {
  fs::create_directories(a.out);
  const fs::path ckpt = fs::path(a.out) / "model.ckpt";
  const fs::path curve = fs::path(a.out) / "loss_curve.tsv";
  std::unique_ptr<slotmem::train::Trainer> trainer;
  if (!a.resume.empty()) {
    slotmem::train::Checkpoint header;
    slotmem::train::LoadModel(a.resume, &header);
    trainer = slotmem::train::Trainer::Resume(
        a.resume, LoadTrainingEpisodes(a.data, a.split, header.train.tasks));
    WriteText(curve, TruncatedCurve(curve, trainer->step()));
  } else {
    a.model.variant = slotmem::model::ParseVariant(a.variant);
    a.train.tasks = ResolveTasks(a.tasks);
    if (a.train.chunk == 0) a.train.chunk = a.model.window();
    try {
      a.model.Validate();
      a.train.Validate(a.model);
    } catch (const std::exception& e) {
      throw CLI::ValidationError("train", e.what());
    }
    trainer = std::make_unique<slotmem::train::Trainer>(
        a.model, a.train, LoadTrainingEpisodes(a.data, a.split, a.train.tasks));
    WriteText(curve, slotmem::train::LossCurveHeader() + "\n");
  }
  std::ofstream log(curve, std::ios::app);
  if (!log) throw std::runtime_error("cannot append to " + curve.string());
  const std::int64_t total = trainer->config().max_steps;
  std::cout << slotmem::train::LossCurveHeader() << "\n";
  while (trainer->step() < total) {
    const slotmem::train::StepStats st = trainer->Step();
    const std::string row = slotmem::train::LossCurveRow(st);
    log << row << "\n";
    if (st.step % a.log_every == 0 || trainer->step() == total) {
      std::cout << row << std::endl;
    }
    if (trainer->step() % a.save_every == 0) {
      log.flush();
      trainer->Save(ckpt.string());
    }
  }
  trainer->Save(ckpt.string());
  std::cout << "saved " << ckpt.string() << " at step " << trainer->step()
            << "\n";
  return 0;
}

// -------------------------------------------------------------------- eval

struct EvalArgs {
  std::string checkpoint;
  std::string policy = "model";
  std::vector<std::string> tasks = {"all"};
  slotmem::train::EvalOptions options;
  std::string label;
  std::string out = "eval";
};

void SetupEval(CLI::App& app, EvalArgs& a) {
  CLI::App* sub = app.add_subcommand(
      "eval", "Closed-loop rollouts scored by the subgoal evaluator");
  AddConfig(sub);
  sub->add_option("--checkpoint", a.checkpoint,
                  "Model checkpoint (required for --policy model)")
      ->check(CLI::ExistingFile);
  sub->add_option("--policy", a.policy, "Policy to roll out")
      ->check(CLI::IsMember({"model", "expert", "random"}))
      ->capture_default_str();
  sub->add_option("--tasks", a.tasks, "Task ids, or 'all' for T1-T10")
      ->delimiter(',')
      ->check(CLI::IsMember(TaskChoices()))
      ->capture_default_str();
  sub->add_option("--n", a.options.n, "Rollouts per task")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  sub->add_option("--seed-base", a.options.seed_base, "First rollout seed")
      ->capture_default_str();
  sub->add_option("--cap-factor", a.options.cap_factor,
                  "Step cap as a multiple of the expert's length")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--dilation", a.options.dilation,
                  "Frames per action; 0 uses the task default")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  sub->add_option("--label", a.label,
                  "Report label; defaults to the variant or policy name");
  sub->add_option("--out", a.out,
                  "Directory for eval_<label>.tsv and rollouts_<label>.tsv")
      ->capture_default_str();
}

int RunEval(const EvalArgs& a) {
  std::unique_ptr<slotmem::model::Model> model;
  std::unique_ptr<slotmem::train::Policy> policy;
  std::string label = a.label;
  if (a.policy == "model") {
    if (a.checkpoint.empty()) {
      throw CLI::ValidationError("--checkpoint", "required for --policy model");
    }
    slotmem::train::Checkpoint header;
    model = slotmem::train::LoadModel(a.checkpoint, &header);
    policy = std::make_unique<slotmem::train::ModelPolicy>(*model);
    if (label.empty()) label = slotmem::model::VariantName(header.model.variant);
  } else if (a.policy == "expert") {
    policy = std::make_unique<slotmem::train::ExpertPolicy>();
  } else {
    policy = std::make_unique<slotmem::train::RandomPolicy>(0);
  }
  if (label.empty()) label = a.policy;

  slotmem::train::EvalReport report;
  report.label = label;
  std::ostringstream rollouts;
  rollouts << "task\tseed\tsuccess\tcompleted\tfailed\tsubgoal\tsteps\tcap"
              "\tactions\n";
  for (const std::string& id : ResolveTasks(a.tasks)) {
    std::vector<slotmem::train::RolloutResult> rs;
    report.rows.push_back(slotmem::train::EvaluateTask(
        *policy, slotmem::grid::GetTask(id), a.options, &rs));
    for (const auto& r : rs) {
      rollouts << id << '\t' << r.seed << '\t' << r.success << '\t'
               << r.completed << '\t' << r.failed << '\t'
               << std::setprecision(6) << r.subgoal << '\t' << r.steps << '\t'
               << r.cap << '\t';
      for (size_t i = 0; i < r.actions.size(); ++i) {
        rollouts << (i ? "," : "") << slotmem::grid::ActionName(r.actions[i]);
      }
      rollouts << '\n';
    }
  }
  fs::create_directories(a.out);
  const fs::path path = fs::path(a.out) / ("eval_" + label + ".tsv");
  slotmem::train::WriteEvalReport(path.string(), report);
  WriteText(fs::path(a.out) / ("rollouts_" + label + ".tsv"), rollouts.str());
  std::cout << slotmem::train::RenderReport({report});
  std::cout << "wrote " << path.string() << "\n";
  return 0;
}

// ------------------------------------------------------------------ report

struct ReportArgs {
  std::vector<std::string> inputs;
  std::string out;
};

void SetupReport(CLI::App& app, ReportArgs& a) {
  CLI::App* sub = app.add_subcommand(
      "report", "Render eval reports as a task-by-variant table");
  AddConfig(sub);
  sub->add_option("inputs", a.inputs, "eval_<label>.tsv files")
      ->required()
      ->check(CLI::ExistingFile);
  sub->add_option("--out", a.out, "Also write the table to this file");
}

int RunReport(const ReportArgs& a) {
  std::vector<slotmem::train::EvalReport> reports;
  for (const std::string& p : a.inputs) {
    reports.push_back(slotmem::train::ReadEvalReport(p));
  }
  const std::string table = slotmem::train::RenderReport(reports);
  std::cout << table;
  if (!a.out.empty()) {
    const fs::path out(a.out);
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    WriteText(out, table);
  }
  return 0;
}

// --------------------------------------------------------------- viz-slots

struct VizArgs {
  std::string checkpoint;
  std::string episode;
  std::string task = "T3";
  std::uint64_t seed = 1000000;
  int dilation = 0;
  int frames = 16;
  int scale = 4;
  int columns = 6;
  double threshold = 0.5;
  std::string out = "viz";
};

void SetupViz(CLI::App& app, VizArgs& a) {
  CLI::App* sub = app.add_subcommand(
      "viz-slots",
      "Per-frame PNGs of each slot's attention mask and bounding box");
  AddConfig(sub);
  sub->add_option("--checkpoint", a.checkpoint, "Model checkpoint")
      ->required()
      ->check(CLI::ExistingFile);
  sub->add_option("--episode", a.episode,
                  "Episode file; otherwise the expert is rolled out")
      ->check(CLI::ExistingFile);
  sub->add_option("--task", a.task, "Task of the expert rollout")
      ->check(CLI::IsMember(slotmem::grid::AllTaskIds()))
      ->capture_default_str();
  sub->add_option("--seed", a.seed, "Seed of the expert rollout")
      ->capture_default_str();
  sub->add_option("--dilation", a.dilation,
                  "Frames per action; 0 uses the task default")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  sub->add_option("--frames", a.frames, "Leading frames to render")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--scale", a.scale, "Pixel upscale factor")
      ->check(CLI::Range(1, 16))
      ->capture_default_str();
  sub->add_option("--columns", a.columns, "Panels per row")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--threshold", a.threshold,
                  "Box threshold as a fraction of the slot's peak attention")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  sub->add_option("--out", a.out, "Directory for frame_NNN.png and boxes.tsv")
      ->capture_default_str();
}

int RunViz(const VizArgs& a) {
  auto model = slotmem::train::LoadModel(a.checkpoint);
  const ModelConfig& cfg = model->config();
  Episode ep;
  if (!a.episode.empty()) {
    ep = slotmem::grid::ReadEpisode(a.episode);
  } else {
    const TaskSpec& task = slotmem::grid::GetTask(a.task);
    ep = slotmem::grid::RunExpertEpisode(task, a.seed,
                                         ResolveDilation(task, a.dilation));
  }
  const TaskSpec& task = slotmem::grid::GetTask(ep.task_id);
  const slotmem::goal::GoalStructure structure =
      slotmem::goal::Flatten(task.goal);
  const auto& vocab = slotmem::model::SubgoalVocabulary::Shipped();

  fs::create_directories(a.out);
  std::ostringstream boxes;
  boxes << "frame\tslot\tx0\ty0\tx1\ty1\tpeak\n";
  slotmem::model::PolicyRunner runner(*model);
  runner.Reset(ep.seed);
  const int n = std::min(a.frames, ep.num_frames());
  for (int t = 0; t < n; ++t) {
    const auto progress =
        slotmem::train::ProgressFromAnnotation(ep.annotations[t]);
    const auto subgoals = slotmem::model::ObjectSubgoals(vocab, structure,
                                                         progress, ep.states[t]);
    slotmem::model::StepOutput detail;
    runner.Observe(slotmem::model::MakeStepInput(cfg, ep.frames[t],
                                                 ep.states[t], subgoals,
                                                 ep.task_id),
                   &detail);
    std::vector<slotmem::viz::Image> tiles;
    tiles.push_back(slotmem::viz::Upscale(
        slotmem::viz::FrameImage(ep.frames[t]), a.scale));
    for (int k = 0; k < detail.attention.rows(); ++k) {
      tiles.push_back(slotmem::viz::SlotPanel(ep.frames[t], detail.attention,
                                              k, cfg.patch, a.scale,
                                              a.threshold));
      const auto box = slotmem::viz::AttentionBox(detail.attention, k,
                                                  cfg.patch, a.threshold);
      boxes << t << '\t' << k << '\t' << box.x0 << '\t' << box.y0 << '\t'
            << box.x1 << '\t' << box.y1 << '\t' << std::setprecision(6)
            << detail.attention.row(k).maxCoeff() << '\n';
    }
    char name[32];
    std::snprintf(name, sizeof(name), "frame_%03d.png", t);
    slotmem::viz::WritePng((fs::path(a.out) / name).string(),
                           slotmem::viz::Tile(tiles, a.columns, 2));
  }
  WriteText(fs::path(a.out) / "boxes.tsv", boxes.str());
  std::cout << "wrote " << n << " frames of " << ep.task_id << " to " << a.out
            << "\n";
  return 0;
}

// ------------------------------------------------------------ token-report

struct TokenArgs {
  std::vector<int> horizons;
  std::vector<int> per_frame;
  int slots = 16;
  int relation = 16;
  std::string out;
};

void SetupTokens(CLI::App& app, TokenArgs& a) {
  CLI::App* sub = app.add_subcommand(
      "token-report",
      "Decoder token counts of frame concatenation versus the slot SSM");
  // --h names the horizon, so only the long help flag is kept.
  sub->set_help_flag("--help", "Print this help message and exit");
  AddConfig(sub);
  sub->add_option("--h", a.horizons, "Horizons; default is the standard table")
      ->delimiter(',')
      ->check(CLI::PositiveNumber);
  sub->add_option("--per-frame", a.per_frame, "Tokens per frame")
      ->delimiter(',')
      ->check(CLI::PositiveNumber);
  sub->add_option("--slots", a.slots, "Slots K of the SSM path")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--relation", a.relation, "Relation tokens L of the SSM path")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--out", a.out, "Also write the table to this file");
}

int RunTokens(const TokenArgs& a) {
  std::ostringstream table;
  table << "policy\thorizon\ttokens_per_frame\tconcat_tokens\tslot_ssm_tokens\n";
  auto row = [&](const std::string& name, int h, int per_frame) {
    const auto r = slotmem::grid::TokenCount(h, per_frame, a.slots, a.relation);
    table << name << '\t' << r.horizon << '\t' << r.tokens_per_frame << '\t'
          << r.concat_tokens << '\t' << r.slot_ssm_tokens << '\n';
  };
  if (a.horizons.empty() && a.per_frame.empty()) {
    row("slot (h=1)", 1, a.slots);
    row("slot (h=8)", 8, a.slots);
    row("dense (h=1)", 1, 256);
    for (int h : {1, 2, 4, 8, 16, 32, 64, 128, 256, 512}) {
      row("slot sweep", h, a.slots);
    }
  } else {
    const std::vector<int> hs = a.horizons.empty() ? std::vector<int>{1}
                                                   : a.horizons;
    const std::vector<int> ps = a.per_frame.empty()
                                    ? std::vector<int>{a.slots}
                                    : a.per_frame;
    for (int p : ps) {
      for (int h : hs) row("custom", h, p);
    }
  }
  std::cout << table.str();
  if (!a.out.empty()) {
    const fs::path out(a.out);
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    WriteText(out, table.str());
  }
  return 0;
}

// ---------------------------------------------------------- audit-aliasing

struct AuditArgs {
  std::string data;
  std::string split = "train";
  std::vector<std::string> tasks = {"T3"};
  int n = 100;
  std::uint64_t seed = 0;
  int dilation = 0;
  double epsilon = 1e-3;
  int max_examples = 10;
  std::string out;
};

void SetupAudit(CLI::App& app, AuditArgs& a) {
  CLI::App* sub = app.add_subcommand(
      "audit-aliasing",
      "Find near-identical frames whose expert actions differ");
  AddConfig(sub);
  sub->add_option("--data", a.data,
                  "Dataset directory; otherwise episodes are generated")
      ->check(CLI::ExistingDirectory);
  sub->add_option("--split", a.split, "Dataset split ('' for all)")
      ->capture_default_str();
  sub->add_option("--tasks", a.tasks, "Task ids, or 'all'")
      ->delimiter(',')
      ->check(CLI::IsMember(TaskChoices()))
      ->capture_default_str();
  sub->add_option("--n", a.n, "Generated episodes per task without --data")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--seed", a.seed, "First generated seed")
      ->capture_default_str();
  sub->add_option("--dilation", a.dilation,
                  "Frames per action; 0 uses the task default")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  sub->add_option("--epsilon", a.epsilon, "Mean-pixel distance threshold")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  sub->add_option("--max-examples", a.max_examples, "Example pairs to list")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  sub->add_option("--out", a.out, "Directory for aliasing_<task>.tsv");
}

int RunAudit(const AuditArgs& a) {
  for (const std::string& id : ResolveTasks(a.tasks)) {
    std::vector<Episode> episodes;
    if (!a.data.empty()) {
      episodes = slotmem::grid::LoadEpisodes(a.data, a.split, id);
      if (episodes.empty()) {
        throw std::runtime_error("no episodes for " + id + " in " + a.data);
      }
    } else {
      const TaskSpec& task = slotmem::grid::GetTask(id);
      for (int i = 0; i < a.n; ++i) {
        episodes.push_back(slotmem::grid::RunExpertEpisode(
            task, a.seed + i, ResolveDilation(task, a.dilation)));
      }
    }
    const auto r =
        slotmem::grid::VerifyAliasing(episodes, a.epsilon, a.max_examples);
    std::ostringstream text;
    text << "# task " << id << " episodes " << episodes.size() << " epsilon "
         << a.epsilon << "\n"
         << "frames_scanned\tclose_pairs\tviolations\tmin_violation_distance\n"
         << r.frames_scanned << '\t' << r.close_pairs << '\t' << r.violations
         << '\t' << std::setprecision(6) << r.min_violation_distance << "\n"
         << "episode_a\tframe_a\taction_a\tepisode_b\tframe_b\taction_b"
            "\tdistance\n";
    for (const auto& p : r.examples) {
      text << p.episode_a << '\t' << p.frame_a << '\t'
           << slotmem::grid::ActionName(p.action_a) << '\t' << p.episode_b
           << '\t' << p.frame_b << '\t' << slotmem::grid::ActionName(p.action_b)
           << '\t' << p.distance << '\n';
    }
    std::cout << text.str();
    if (!a.out.empty()) {
      fs::create_directories(a.out);
      WriteText(fs::path(a.out) / ("aliasing_" + id + ".tsv"), text.str());
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"slotmem: slot-memory policies on the MemGrid benchmark"};
  app.require_subcommand(1, 1);
  GenDataArgs gen_data;
  TrainArgs train;
  EvalArgs eval;
  ReportArgs report;
  VizArgs viz;
  TokenArgs tokens;
  AuditArgs audit;
  SetupGenData(app, gen_data);
  SetupTrain(app, train);
  SetupEval(app, eval);
  SetupReport(app, report);
  SetupViz(app, viz);
  SetupTokens(app, tokens);
  SetupAudit(app, audit);
  try {
    app.parse(argc, argv);
    for (CLI::App* sub : app.get_subcommands()) ApplyConfig(sub);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  try {
    if (app.got_subcommand("gen-data")) return RunGenData(gen_data);
    if (app.got_subcommand("train")) return RunTrain(train);
    if (app.got_subcommand("eval")) return RunEval(eval);
    if (app.got_subcommand("report")) return RunReport(report);
    if (app.got_subcommand("viz-slots")) return RunViz(viz);
    if (app.got_subcommand("token-report")) return RunTokens(tokens);
    if (app.got_subcommand("audit-aliasing")) return RunAudit(audit);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
  return kUsageError;
}
