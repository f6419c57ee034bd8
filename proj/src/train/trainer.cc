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

#include "slotmem/train/trainer.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "slotmem/model/policy_head.h"
#include "slotmem/model/slot_encoder.h"
#include "slotmem/model/slot_ssm.h"

namespace slotmem::train {

using ad::Matrix;
using ad::Tape;
using ad::Var;
using namespace ad;  // NOLINT: op vocabulary

void TrainConfig::Validate(const model::ModelConfig& model) const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument("train config: " + what);
  };
  require(!tasks.empty(), "no tasks");
  require(chunk == model.window(),
          "chunk (" + std::to_string(chunk) + ") must equal the window p+q (" +
              std::to_string(model.window()) + ")");
  require(batch >= 1, "batch < 1");
  require(lr > 0 && clip >= 0, "bad lr or clip");
  require(weights.action >= 0 && weights.recon >= 0 && weights.contrast >= 0 &&
              weights.next >= 0,
          "negative loss weight");
  require(delta_max >= 1 && tau > 0 && contrast_frames >= 2,
          "bad contrastive settings");
  require(max_steps >= 1, "max_steps < 1");
}

std::string TrainConfig::ToJson() const {
  nlohmann::json j;
  j["tasks"] = tasks;
  j["chunk"] = chunk;
  j["batch"] = batch;
  j["lr"] = lr;
  j["clip"] = clip;
  j["w_action"] = weights.action;
  j["w_recon"] = weights.recon;
  j["w_contrast"] = weights.contrast;
  j["w_next"] = weights.next;
  j["delta_max"] = delta_max;
  j["tau"] = tau;
  j["contrast_frames"] = contrast_frames;
  j["max_steps"] = max_steps;
  j["seed"] = seed;
  return j.dump();
}

TrainConfig TrainConfig::FromJson(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  TrainConfig c;
  c.tasks = j.at("tasks").get<std::vector<std::string>>();
  c.chunk = j.at("chunk").get<int>();
  c.batch = j.at("batch").get<int>();
  c.lr = j.at("lr").get<double>();
  c.clip = j.at("clip").get<double>();
  c.weights.action = j.at("w_action").get<double>();
  c.weights.recon = j.at("w_recon").get<double>();
  c.weights.contrast = j.at("w_contrast").get<double>();
  c.weights.next = j.at("w_next").get<double>();
  c.delta_max = j.at("delta_max").get<int>();
  c.tau = j.at("tau").get<double>();
  c.contrast_frames = j.at("contrast_frames").get<int>();
  c.max_steps = j.at("max_steps").get<std::int64_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

std::string LossCurveHeader() {
  return "step\tlr\ttotal\taction\trecon\tcontrast\tnext\tgrad_norm\tframes";
}

std::string LossCurveRow(const StepStats& s) {
  std::ostringstream os;
  os.precision(8);
  os << s.step << '\t' << s.lr << '\t' << s.total << '\t' << s.action << '\t'
     << s.recon << '\t' << s.contrast << '\t' << s.next << '\t' << s.grad_norm
     << '\t' << s.frames;
  return os.str();
}

goal::EvalProgress ProgressFromAnnotation(const grid::FrameAnnotation& a) {
  goal::EvalProgress p;
  p.satisfied = a.satisfied;
  p.alive = a.alive;
  p.completed = a.completed;
  p.failed = a.failed;
  return p;
}

Trainer::Trainer(const model::ModelConfig& model, const TrainConfig& train,
                 std::vector<grid::Episode> episodes)
    : train_(train), episodes_(std::move(episodes)), rng_(train.seed) {
  train_.Validate(model);
  if (episodes_.empty()) {
    throw std::runtime_error("no training episodes for the requested tasks");
  }
  model_ = std::make_unique<model::Model>(model);
  adam_ = std::make_unique<Adam>(model_->store());
  for (const grid::Episode& ep : episodes_) {
    if (ep.actions.empty()) throw std::runtime_error("empty episode");
    structures_.push_back(goal::Flatten(grid::GetTask(ep.task_id).goal));
  }
  streams_.resize(train_.batch);
}

std::unique_ptr<Trainer> Trainer::Resume(const std::string& checkpoint,
                                         std::vector<grid::Episode> episodes) {
  Checkpoint header = LoadCheckpoint(checkpoint, nullptr, nullptr);
  auto t = std::make_unique<Trainer>(header.model, header.train,
                                     std::move(episodes));
  LoadCheckpoint(checkpoint, t->model_.get(), t->adam_.get());
  t->step_ = header.step;
  // Fresh streams; the sampler is re-seeded from the step so that resumed
  // runs are reproducible.
  t->rng_.seed(header.train.seed + static_cast<std::uint64_t>(header.step));
  return t;
}

void Trainer::NextEpisode(Stream& s) {
  std::uniform_int_distribution<int> pick(
      0, static_cast<int>(episodes_.size()) - 1);
  s.episode = pick(rng_);
  s.t = 0;
  s.carry = false;
  s.history.clear();
  s.init_seed = rng_();
}

model::StepInput Trainer::InputAt(const grid::Episode& ep, int t) const {
  const int idx = static_cast<int>(&ep - episodes_.data());
  std::vector<int> goals = model::ObjectSubgoals(
      model::SubgoalVocabulary::Shipped(), structures_[idx],
      ProgressFromAnnotation(ep.annotations[t]), ep.states[t]);
  return model::MakeStepInput(model_->config(), ep.frames[t], ep.states[t],
                              goals, ep.task_id);
}

StepStats Trainer::Step() {
  const model::ModelConfig& cfg = model_->config();
  const bool full = !model_->memoryless();
  const std::vector<int> offsets =
      model::WindowOffsets(cfg.window_past, cfg.window_future);
  const int k = cfg.num_slots;
  const int d = cfg.d_slot;

  Tape tape;
  std::vector<Var> action_terms, recon_terms, next_terms;
  std::vector<std::vector<Var>> tracks;
  for (Stream& s : streams_) {
    if (s.episode < 0 ||
        s.t >= static_cast<int>(episodes_[s.episode].actions.size())) {
      NextEpisode(s);
    }
    const grid::Episode& ep = episodes_[s.episode];
    const int len = std::min(train_.chunk,
                             static_cast<int>(ep.actions.size()) - s.t);
    model::Carry carry;
    if (s.carry) {
      carry.slots = tape.Constant(s.slots);
      if (full) carry.h = tape.Constant(s.h);
    }
    std::vector<model::StepOutput> outs;
    for (int i = 0; i < len; ++i) {
      outs.push_back(model_->Step(tape, InputAt(ep, s.t + i), carry,
                                  s.init_seed));
      carry.slots = outs.back().slots;
      carry.h = outs.back().h;
      action_terms.push_back(Neg(Element(
          outs.back().log_probs, 0, static_cast<int>(ep.actions[s.t + i]))));
    }
    if (full) {
      const int hist = static_cast<int>(s.history.size());
      for (int i = 0; i < len; ++i) {
        Matrix target = Matrix::Zero(k, offsets.size() * d);
        Matrix mask = Matrix::Zero(k, offsets.size());
        for (std::size_t j = 0; j < offsets.size(); ++j) {
          const int src = i + offsets[j];
          const Matrix* value = nullptr;
          if (src >= 0 && src < len) {
            value = &outs[src].slots.value();
          } else if (src < 0 && hist + src >= 0) {
            value = &s.history[hist + src];
          }
          if (!value) continue;
          target.middleCols(j * d, d) = *value;
          mask.col(j).setOnes();
        }
        if (mask.sum() > 0) {
          recon_terms.push_back(
              model::WindowReconLoss(outs[i].window, target, mask));
        }
        if (i + 1 < len) {
          next_terms.push_back(Mean(Square(
              Sub(outs[i].y, tape.Constant(outs[i + 1].slots.value())))));
        }
      }
    }
    std::vector<Var> track;
    for (int i = 0; i < std::min(len, train_.contrast_frames); ++i) {
      track.push_back(outs[i].slots);
    }
    tracks.push_back(std::move(track));

    s.slots = outs.back().slots.value();
    if (full) s.h = outs.back().h.value();
    for (const model::StepOutput& o : outs) {
      s.history.push_back(o.slots.value());
      if (static_cast<int>(s.history.size()) > cfg.window_past) {
        s.history.pop_front();
      }
    }
    s.carry = true;
    s.t += len;
  }

  auto mean = [&](const std::vector<Var>& terms) {
    return Scale(AddN(terms), 1.0 / terms.size());
  };
  StepStats st;
  st.step = step_ + 1;
  st.frames = static_cast<int>(action_terms.size());
  std::vector<Var> total;
  Var action = mean(action_terms);
  st.action = action.scalar();
  total.push_back(Scale(action, train_.weights.action));
  if (!recon_terms.empty() && train_.weights.recon > 0) {
    Var recon = mean(recon_terms);
    st.recon = recon.scalar();
    total.push_back(Scale(recon, train_.weights.recon));
  }
  if (!next_terms.empty() && train_.weights.next > 0) {
    Var next = mean(next_terms);
    st.next = next.scalar();
    total.push_back(Scale(next, train_.weights.next));
  }
  if (tracks.size() >= 2 && train_.weights.contrast > 0) {
    Var con = model::ContrastiveLoss(tracks, train_.delta_max, train_.tau);
    st.contrast = con.scalar();
    total.push_back(Scale(con, train_.weights.contrast));
  }
  Var loss = AddN(total);
  st.total = loss.scalar();
  if (!std::isfinite(st.total)) {
    std::ostringstream os;
    os << "non-finite loss at step " << st.step << ": action=" << st.action
       << " recon=" << st.recon << " next=" << st.next
       << " contrast=" << st.contrast;
    throw std::runtime_error(os.str());
  }
  model_->store().ZeroGrad();
  tape.Backward(loss);
  st.grad_norm = ClipGradNorm(model_->store(), train_.clip);
  st.lr = CosineLr(train_.lr, step_, train_.max_steps);
  adam_->Step(st.lr);
  ++step_;
  return st;
}

void Trainer::Save(const std::string& path) const {
  SaveCheckpoint(path, *model_, train_, step_, adam_.get());
}

// --- checkpoint -----------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'S', 'L', 'M', 'C', 'K', 'P', 'T', '1'};
constexpr std::uint32_t kVersion = 1;

std::string SegmentOf(const std::string& name) {
  return name.substr(0, name.find('.'));
}

void WriteMatrix(std::ofstream& out, const Matrix& m) {
  out.write(reinterpret_cast<const char*>(m.data()),
            static_cast<std::streamsize>(m.size() * sizeof(double)));
}

void ReadMatrix(std::ifstream& in, Matrix& m, const std::string& path) {
  in.read(reinterpret_cast<char*>(m.data()),
          static_cast<std::streamsize>(m.size() * sizeof(double)));
  if (!in) throw std::runtime_error("truncated checkpoint: " + path);
}

nlohmann::json ReadHeader(std::ifstream& in, const std::string& path) {
  char magic[sizeof(kMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error("not a checkpoint: " + path);
  }
  std::uint32_t version = 0;
  std::uint64_t len = 0;
  in.read(reinterpret_cast<char*>(&version), sizeof(version));
  in.read(reinterpret_cast<char*>(&len), sizeof(len));
  if (!in || version != kVersion) {
    throw std::runtime_error("unsupported checkpoint version in " + path);
  }
  std::string text(len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(len));
  if (!in) throw std::runtime_error("truncated checkpoint: " + path);
  return nlohmann::json::parse(text);
}

}  // namespace

void SaveCheckpoint(const std::string& path, const model::Model& model,
                    const TrainConfig& train, std::int64_t step,
                    const Adam* adam) {
  const auto& params = model.store().params();
  nlohmann::json h;
  h["model"] = nlohmann::json::parse(model.config().ToJson());
  h["train"] = nlohmann::json::parse(train.ToJson());
  h["step"] = step;
  h["adam_steps"] = adam ? adam->steps() : 0;
  h["has_optimizer"] = adam != nullptr;
  std::vector<std::string> segments;
  nlohmann::json dir = nlohmann::json::array();
  for (const auto& p : params) {
    const std::string seg = SegmentOf(p->name);
    if (std::find(segments.begin(), segments.end(), seg) == segments.end()) {
      segments.push_back(seg);
    }
    dir.push_back({{"name", p->name},
                   {"segment", seg},
                   {"rows", p->value.rows()},
                   {"cols", p->value.cols()}});
  }
  if (adam) segments.push_back("optimizer");
  h["segments"] = segments;
  h["params"] = dir;
  const std::string text = h.dump();

  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    out.write(kMagic, sizeof(kMagic));
    const std::uint64_t len = text.size();
    out.write(reinterpret_cast<const char*>(&kVersion), sizeof(kVersion));
    out.write(reinterpret_cast<const char*>(&len), sizeof(len));
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    // Segments are contiguous because parameters are created segment by
    // segment.
    for (const std::string& seg : segments) {
      for (const auto& p : params) {
        if (SegmentOf(p->name) == seg) WriteMatrix(out, p->value);
      }
    }
    if (adam) {
      for (const Matrix& m : adam->first_moment()) WriteMatrix(out, m);
      for (const Matrix& v : adam->second_moment()) WriteMatrix(out, v);
    }
    if (!out) throw std::runtime_error("write failed for " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    throw std::runtime_error("cannot move checkpoint into place: " + path);
  }
}

Checkpoint LoadCheckpoint(const std::string& path, model::Model* model,
                          Adam* adam) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path);
  const nlohmann::json h = ReadHeader(in, path);
  Checkpoint c;
  c.model = model::ModelConfig::FromJson(h.at("model").dump());
  c.train = TrainConfig::FromJson(h.at("train").dump());
  c.step = h.at("step").get<std::int64_t>();
  c.adam_steps = h.at("adam_steps").get<std::int64_t>();
  c.segments = h.at("segments").get<std::vector<std::string>>();
  if (!model) return c;

  const auto& params = model->store().params();
  const nlohmann::json& dir = h.at("params");
  if (dir.size() != params.size()) {
    throw std::runtime_error("checkpoint parameter count mismatch in " + path);
  }
  std::vector<ad::Parameter*> order;
  for (const std::string& seg : c.segments) {
    if (seg == "optimizer") continue;
    for (const auto& entry : dir) {
      if (entry.at("segment").get<std::string>() != seg) continue;
      const std::string name = entry.at("name").get<std::string>();
      ad::Parameter* p = model->store().Find(name);
      if (!p || p->value.rows() != entry.at("rows").get<Eigen::Index>() ||
          p->value.cols() != entry.at("cols").get<Eigen::Index>()) {
        throw std::runtime_error("checkpoint parameter mismatch: " + name);
      }
      order.push_back(p);
    }
  }
  for (ad::Parameter* p : order) ReadMatrix(in, p->value, path);
  if (adam && h.at("has_optimizer").get<bool>()) {
    for (Matrix& m : adam->first_moment()) ReadMatrix(in, m, path);
    for (Matrix& v : adam->second_moment()) ReadMatrix(in, v, path);
    adam->set_steps(c.adam_steps);
  }
  return c;
}

std::unique_ptr<model::Model> LoadModel(const std::string& path,
                                        Checkpoint* header) {
  Checkpoint c = LoadCheckpoint(path, nullptr, nullptr);
  auto m = std::make_unique<model::Model>(c.model);
  LoadCheckpoint(path, m.get(), nullptr);
  if (header) *header = c;
  return m;
}

}  // namespace slotmem::train
