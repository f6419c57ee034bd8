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

#include "slotmem/grid/dataset.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include <json.hpp>

namespace slotmem::grid {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr char kMagic[8] = {'S', 'L', 'M', 'E', 'P', 'I', 'S', '1'};
constexpr int kSchemaVersion = 1;
constexpr int kMaxExpertSteps = 100000;

int ResolveId(const EnvState& s, const std::string& id) {
  int idx = s.Find(id);
  if (idx >= 0) return idx;
  static constexpr std::string_view kSuffix = "_contain_region";
  if (id.size() > kSuffix.size()) {
    idx = s.Find(std::string_view(id).substr(0, id.size() - kSuffix.size()));
  }
  return idx;
}

ObjectClass ClassFromName(const std::string& name) {
  for (ObjectClass c : {ObjectClass::kBowl, ObjectClass::kBottle,
                        ObjectClass::kCheese, ObjectClass::kPlate,
                        ObjectClass::kBasket, ObjectClass::kRegion}) {
    if (name == ClassName(c)) return c;
  }
  throw std::runtime_error("unknown object class '" + name + "'");
}

void WriteBytes(std::ofstream& out, const void* data, std::size_t n) {
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
}

void ReadBytes(std::ifstream& in, void* data, std::size_t n,
               const std::string& path) {
  in.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n) {
    throw std::runtime_error("truncated episode file " + path);
  }
}

std::string ZeroPad(int i, int width) {
  std::string s = std::to_string(i);
  if (static_cast<int>(s.size()) < width) s.insert(0, width - s.size(), '0');
  return s;
}

std::uint64_t HashFrame(const Frame& f) {
  // FNV-1a over the RGB bytes.
  std::uint64_t h = 1469598103934665603ull;
  for (std::uint8_t b : f.rgb) {
    h ^= b;
    h *= 1099511628211ull;
  }
  return h;
}

void WriteIndex(const std::string& dir, std::vector<DatasetEntry> entries) {
  std::sort(entries.begin(), entries.end(),
            [](const DatasetEntry& a, const DatasetEntry& b) {
              return a.file < b.file;
            });
  std::ofstream out(fs::path(dir) / "index.txt");
  if (!out) throw std::runtime_error("cannot write index in " + dir);
  out << "# split\tfile\ttask\tseed\tframes\n";
  for (const DatasetEntry& e : entries) {
    out << e.split << '\t' << e.file << '\t' << e.task_id << '\t' << e.seed
        << '\t' << e.frames << '\n';
  }
}

}  // namespace

FrameAnnotation Annotate(const goal::EvalProgress& progress,
                         const goal::GoalStructure& structure,
                         const EnvState& s, bool invalid_action) {
  FrameAnnotation a;
  a.satisfied = progress.satisfied;
  a.alive = progress.alive;
  a.completed = progress.completed;
  a.failed = progress.failed;
  a.invalid_action = invalid_action;
  a.object_subgoals.assign(s.objects.size(), 0);

  const bool any_alive =
      std::find(a.alive.begin(), a.alive.end(), true) != a.alive.end();
  int lead = -1;
  for (std::size_t b = 0; b < a.satisfied.size(); ++b) {
    if (any_alive && !a.alive[b]) continue;
    if (lead < 0 || a.satisfied[b] > a.satisfied[lead]) lead = static_cast<int>(b);
  }
  if (lead < 0) return a;
  for (int k = 0; k < a.satisfied[lead]; ++k) {
    for (int p : structure.branches[lead][k]) {
      const goal::Predicate& pred = structure.predicates[p];
      std::vector<int> mentioned = {ResolveId(s, pred.subject)};
      if (!pred.target.empty()) mentioned.push_back(ResolveId(s, pred.target));
      for (int o : mentioned) {
        if (o >= 0) ++a.object_subgoals[o];
      }
    }
  }
  return a;
}

Episode RunExpertEpisode(const TaskSpec& task, std::uint64_t seed,
                         int dilation) {
  if (dilation < 1) throw std::invalid_argument("dilation must be >= 1");
  Episode ep;
  ep.task_id = task.id;
  ep.instruction = task.instruction;
  ep.goal_text = task.goal_text;
  ep.seed = seed;
  ep.dilation = dilation;

  const goal::GoalStructure structure = goal::Flatten(task.goal);
  EnvState s = Reset(task, seed);
  goal::EvalProgress progress = goal::EvalStep({}, task.goal, s);
  auto record = [&](bool invalid) {
    ep.frames.push_back(Render(s));
    ep.states.push_back(s);
    ep.annotations.push_back(Annotate(progress, structure, s, invalid));
  };
  record(false);

  ScriptedExpert expert(task);
  for (int n = 0;; ++n) {
    if (n > kMaxExpertSteps) {
      throw std::logic_error("scripted expert did not finish " + task.id);
    }
    const bool was_completed = progress.completed;
    const Action a = expert.Next(s, progress);
    for (int k = 0; k < dilation; ++k) {
      const Action act = k + 1 < dilation ? Action::kNoOp : a;
      StepResult r = Step(s, act);
      s = std::move(r.state);
      progress = goal::EvalStep(progress, task.goal, s);
      ep.actions.push_back(act);
      record(r.invalid);
    }
    if (was_completed) break;
  }
  return ep;
}

void WriteEpisode(const std::string& path, const Episode& ep) {
  const int frames = ep.num_frames();
  if (frames == 0 || static_cast<int>(ep.actions.size()) != frames - 1 ||
      static_cast<int>(ep.states.size()) != frames ||
      static_cast<int>(ep.annotations.size()) != frames) {
    throw std::invalid_argument("inconsistent episode lengths");
  }
  const EnvState& s0 = ep.states[0];
  const int num_branches = static_cast<int>(ep.annotations[0].satisfied.size());
  const int h = ep.frames[0].height;
  const int w = ep.frames[0].width;

  json header;
  header["schema_version"] = kSchemaVersion;
  header["task_id"] = ep.task_id;
  header["instruction"] = ep.instruction;
  header["goal_text"] = ep.goal_text;
  header["seed"] = ep.seed;
  header["dilation"] = ep.dilation;
  header["num_frames"] = frames;
  header["height"] = h;
  header["width"] = w;
  header["grid_size"] = s0.grid_size;
  header["num_branches"] = num_branches;
  json objects = json::array();
  for (const ObjectState& o : s0.objects) {
    objects.push_back({{"id", o.id}, {"class", ClassName(o.cls)}});
  }
  header["objects"] = objects;
  header["layout"] = {
      "rgb u8[num_frames][height][width][3]",
      "labels u8[num_frames][height][width]",
      "actions u8[num_frames-1]",
      "states i8[num_frames][3+3*objects] (gripper row,col, held, "
      "per object row,col,contained_in)",
      "annotations i8[num_frames][2*num_branches+3+objects] (satisfied, "
      "alive per branch, completed, failed, invalid, per object subgoals)"};
  const std::string text = header.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  WriteBytes(out, kMagic, sizeof(kMagic));
  const std::uint32_t len = static_cast<std::uint32_t>(text.size());
  WriteBytes(out, &len, sizeof(len));
  WriteBytes(out, text.data(), text.size());
  for (const Frame& f : ep.frames) WriteBytes(out, f.rgb.data(), f.rgb.size());
  for (const Frame& f : ep.frames) WriteBytes(out, f.labels.data(), f.labels.size());
  std::vector<std::uint8_t> actions(ep.actions.size());
  for (std::size_t i = 0; i < actions.size(); ++i) {
    actions[i] = static_cast<std::uint8_t>(ep.actions[i]);
  }
  WriteBytes(out, actions.data(), actions.size());
  std::vector<std::int8_t> row;
  for (const EnvState& s : ep.states) {
    row = {static_cast<std::int8_t>(s.gripper.row),
           static_cast<std::int8_t>(s.gripper.col),
           static_cast<std::int8_t>(s.held)};
    for (const ObjectState& o : s.objects) {
      row.push_back(static_cast<std::int8_t>(o.cell.row));
      row.push_back(static_cast<std::int8_t>(o.cell.col));
      row.push_back(static_cast<std::int8_t>(o.contained_in));
    }
    WriteBytes(out, row.data(), row.size());
  }
  for (const FrameAnnotation& a : ep.annotations) {
    row.clear();
    for (int v : a.satisfied) row.push_back(static_cast<std::int8_t>(v));
    for (bool v : a.alive) row.push_back(v ? 1 : 0);
    row.push_back(a.completed ? 1 : 0);
    row.push_back(a.failed ? 1 : 0);
    row.push_back(a.invalid_action ? 1 : 0);
    for (int v : a.object_subgoals) row.push_back(static_cast<std::int8_t>(v));
    WriteBytes(out, row.data(), row.size());
  }
  if (!out) throw std::runtime_error("write failed for " + path);
}

Episode ReadEpisode(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  char magic[sizeof(kMagic)];
  ReadBytes(in, magic, sizeof(magic), path);
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error("not an episode file: " + path);
  }
  std::uint32_t len = 0;
  ReadBytes(in, &len, sizeof(len), path);
  std::string text(len, '\0');
  ReadBytes(in, text.data(), len, path);
  const json header = json::parse(text);
  if (header.at("schema_version").get<int>() != kSchemaVersion) {
    throw std::runtime_error("unsupported episode schema in " + path);
  }

  Episode ep;
  ep.task_id = header.at("task_id").get<std::string>();
  ep.instruction = header.at("instruction").get<std::string>();
  ep.goal_text = header.at("goal_text").get<std::string>();
  ep.seed = header.at("seed").get<std::uint64_t>();
  ep.dilation = header.at("dilation").get<int>();
  const int frames = header.at("num_frames").get<int>();
  const int h = header.at("height").get<int>();
  const int w = header.at("width").get<int>();
  const int grid_size = header.at("grid_size").get<int>();
  const int num_branches = header.at("num_branches").get<int>();
  std::vector<ObjectState> objects;
  for (const json& o : header.at("objects")) {
    ObjectState st;
    st.id = o.at("id").get<std::string>();
    st.cls = ClassFromName(o.at("class").get<std::string>());
    objects.push_back(st);
  }
  const int n = static_cast<int>(objects.size());

  ep.frames.resize(frames);
  for (Frame& f : ep.frames) {
    f.height = h;
    f.width = w;
    f.rgb.resize(static_cast<std::size_t>(h) * w * 3);
    ReadBytes(in, f.rgb.data(), f.rgb.size(), path);
  }
  for (Frame& f : ep.frames) {
    f.labels.resize(static_cast<std::size_t>(h) * w);
    ReadBytes(in, f.labels.data(), f.labels.size(), path);
  }
  std::vector<std::uint8_t> actions(frames - 1);
  ReadBytes(in, actions.data(), actions.size(), path);
  for (std::uint8_t a : actions) {
    if (a >= kNumActions) throw std::runtime_error("bad action code in " + path);
    ep.actions.push_back(static_cast<Action>(a));
  }
  std::vector<std::int8_t> row(3 + 3 * n);
  for (int t = 0; t < frames; ++t) {
    ReadBytes(in, row.data(), row.size(), path);
    EnvState s;
    s.grid_size = grid_size;
    s.rng_seed = ep.seed;
    s.gripper = {row[0], row[1]};
    s.held = row[2];
    s.objects = objects;
    for (int i = 0; i < n; ++i) {
      s.objects[i].cell = {row[3 + 3 * i], row[4 + 3 * i]};
      s.objects[i].contained_in = row[5 + 3 * i];
    }
    ep.states.push_back(std::move(s));
  }
  row.resize(2 * num_branches + 3 + n);
  for (int t = 0; t < frames; ++t) {
    ReadBytes(in, row.data(), row.size(), path);
    FrameAnnotation a;
    int k = 0;
    for (int b = 0; b < num_branches; ++b) a.satisfied.push_back(row[k++]);
    for (int b = 0; b < num_branches; ++b) a.alive.push_back(row[k++] != 0);
    a.completed = row[k++] != 0;
    a.failed = row[k++] != 0;
    a.invalid_action = row[k++] != 0;
    for (int i = 0; i < n; ++i) a.object_subgoals.push_back(row[k++]);
    ep.annotations.push_back(std::move(a));
  }
  return ep;
}

std::vector<DatasetEntry> GenerateDataset(const TaskSpec& task, int n_train,
                                          int n_val, std::uint64_t base_seed,
                                          int dilation,
                                          const std::string& out_dir) {
  if (n_train < 0 || n_val < 0) throw std::invalid_argument("negative split size");
  fs::create_directories(out_dir);
  std::vector<DatasetEntry> written;
  auto emit = [&](const std::string& split, int i, std::uint64_t seed) {
    Episode ep = RunExpertEpisode(task, seed, dilation);
    DatasetEntry e;
    e.split = split;
    e.file = task.id + "_" + split + "_" + ZeroPad(i, 3) + ".ep";
    e.task_id = task.id;
    e.seed = seed;
    e.frames = ep.num_frames();
    WriteEpisode((fs::path(out_dir) / e.file).string(), ep);
    written.push_back(e);
  };
  for (int i = 0; i < n_train; ++i) emit("train", i, base_seed + i);
  for (int i = 0; i < n_val; ++i) emit("val", i, base_seed + n_train + i);

  // Replace this task's rows so regeneration is idempotent.
  std::vector<DatasetEntry> entries;
  if (fs::exists(fs::path(out_dir) / "index.txt")) {
    for (DatasetEntry& e : ReadIndex(out_dir)) {
      if (e.task_id != task.id) entries.push_back(std::move(e));
    }
  }
  entries.insert(entries.end(), written.begin(), written.end());
  WriteIndex(out_dir, entries);
  return written;
}

std::vector<DatasetEntry> ReadIndex(const std::string& dir) {
  std::ifstream in(fs::path(dir) / "index.txt");
  if (!in) throw std::runtime_error("no index.txt in " + dir);
  std::vector<DatasetEntry> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    DatasetEntry e;
    if (!(ls >> e.split >> e.file >> e.task_id >> e.seed >> e.frames)) {
      throw std::runtime_error("malformed index line: " + line);
    }
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<Episode> LoadEpisodes(const std::string& dir,
                                  const std::string& split,
                                  const std::string& task_id) {
  std::vector<Episode> out;
  for (const DatasetEntry& e : ReadIndex(dir)) {
    if (!split.empty() && e.split != split) continue;
    if (!task_id.empty() && e.task_id != task_id) continue;
    out.push_back(ReadEpisode((fs::path(dir) / e.file).string()));
  }
  return out;
}

AliasingReport VerifyAliasing(const std::vector<Episode>& episodes,
                              double epsilon, int max_examples) {
  struct Group {
    const Frame* frame;
    std::vector<std::pair<int, int>> members;  // (episode, frame)
    std::vector<std::int64_t> histogram = std::vector<std::int64_t>(kNumActions, 0);
  };
  AliasingReport report;
  report.epsilon = epsilon;

  // Exact duplicates collapse into one group.
  std::vector<Group> groups;
  std::unordered_map<std::uint64_t, std::vector<int>> by_hash;
  for (int e = 0; e < static_cast<int>(episodes.size()); ++e) {
    const Episode& ep = episodes[e];
    for (int t = 0; t + 1 < ep.num_frames(); ++t) {
      ++report.frames_scanned;
      const Frame& f = ep.frames[t];
      auto& bucket = by_hash[HashFrame(f)];
      int gi = -1;
      for (int cand : bucket) {
        if (groups[cand].frame->rgb == f.rgb) {
          gi = cand;
          break;
        }
      }
      if (gi < 0) {
        gi = static_cast<int>(groups.size());
        groups.push_back(Group{&f, {}});
        bucket.push_back(gi);
      }
      groups[gi].members.push_back({e, t});
      ++groups[gi].histogram[static_cast<int>(ep.actions[t])];
    }
  }

  auto add_example = [&](const Group& a, const Group& b, double d) {
    if (static_cast<int>(report.examples.size()) >= max_examples) return;
    for (auto [ea, ta] : a.members) {
      for (auto [eb, tb] : b.members) {
        if (&a == &b && (ea > eb || (ea == eb && ta >= tb))) continue;
        Action x = episodes[ea].actions[ta];
        Action y = episodes[eb].actions[tb];
        if (x != y) {
          report.examples.push_back({ea, ta, eb, tb, d, x, y});
          return;
        }
      }
    }
  };
  auto note_violation = [&](double d) {
    if (report.min_violation_distance < 0 || d < report.min_violation_distance) {
      report.min_violation_distance = d;
    }
  };

  for (const Group& g : groups) {
    const std::int64_t n = static_cast<std::int64_t>(g.members.size());
    std::int64_t same = 0;
    for (std::int64_t c : g.histogram) same += c * (c - 1) / 2;
    report.close_pairs += n * (n - 1) / 2;
    const std::int64_t v = n * (n - 1) / 2 - same;
    if (v > 0) {
      report.violations += v;
      note_violation(0.0);
      add_example(g, g, 0.0);
    }
  }

  if (epsilon > 0.0 && groups.size() > 1) {
    // Distinct frames: a random unit projection lower-bounds the L2
    // distance, so a sorted sweep with a window of sqrt(D) * epsilon finds
    // every pair within epsilon.
    const std::size_t dim = groups[0].frame->rgb.size();
    std::mt19937_64 rng(12345);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> dir(dim);
    double norm = 0.0;
    for (double& d : dir) {
      d = normal(rng);
      norm += d * d;
    }
    norm = std::sqrt(norm);
    std::vector<std::pair<double, int>> proj(groups.size());
    for (std::size_t i = 0; i < groups.size(); ++i) {
      double p = 0.0;
      const auto& rgb = groups[i].frame->rgb;
      for (std::size_t k = 0; k < dim; ++k) p += dir[k] * rgb[k] / 255.0;
      proj[i] = {p / norm, static_cast<int>(i)};
    }
    std::sort(proj.begin(), proj.end());
    const double window = std::sqrt(static_cast<double>(dim)) * epsilon;
    for (std::size_t i = 0; i < proj.size(); ++i) {
      for (std::size_t j = i + 1;
           j < proj.size() && proj[j].first - proj[i].first < window; ++j) {
        const Group& a = groups[proj[i].second];
        const Group& b = groups[proj[j].second];
        const double d = FrameDistance(*a.frame, *b.frame);
        if (d >= epsilon) continue;
        const std::int64_t na = static_cast<std::int64_t>(a.members.size());
        const std::int64_t nb = static_cast<std::int64_t>(b.members.size());
        std::int64_t same = 0;
        for (int k = 0; k < kNumActions; ++k) same += a.histogram[k] * b.histogram[k];
        report.close_pairs += na * nb;
        if (na * nb - same > 0) {
          report.violations += na * nb - same;
          note_violation(d);
          add_example(a, b, d);
        }
      }
    }
  }
  return report;
}

TokenRow TokenCount(int horizon, int tokens_per_frame, int num_slots,
                    int num_relation) {
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  TokenRow r;
  r.horizon = horizon;
  r.tokens_per_frame = tokens_per_frame;
  r.concat_tokens = horizon * tokens_per_frame;
  r.slot_ssm_tokens = num_slots + num_relation;
  return r;
}

}  // namespace slotmem::grid
