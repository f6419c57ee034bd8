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

// Behaviour-cloning trainer. Streams of demonstration episodes are cut into
// consecutive chunks; slots, SSM state and a short slot history carry over
// chunk boundaries within an episode while gradients stop at them.

#ifndef SLOTMEM_TRAIN_TRAINER_H_
#define SLOTMEM_TRAIN_TRAINER_H_

#include <cstdint>
#include <deque>
#include <iosfwd>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "slotmem/grid/dataset.h"
#include "slotmem/model/model.h"
#include "slotmem/train/optimizer.h"

namespace slotmem::train {

struct LossWeights {
  double action = 1.0;
  double recon = 0.5;
  double contrast = 0.1;
  double next = 0.5;
};

struct TrainConfig {
  std::vector<std::string> tasks = {"T1"};
  int chunk = 32;  // frames per chunk; equals the prediction window
  int batch = 16;  // parallel episode streams
  double lr = 3e-4;
  double clip = 1.0;
  LossWeights weights;
  int delta_max = 4;
  double tau = 1.0;
  // Leading frames of each chunk that enter the contrastive batch; bounds
  // the quadratic similarity matrix.
  int contrast_frames = 8;
  std::int64_t max_steps = 20000;
  std::uint64_t seed = 0;

  void Validate(const model::ModelConfig& model) const;
  std::string ToJson() const;
  static TrainConfig FromJson(const std::string& text);
};

struct StepStats {
  std::int64_t step = 0;
  double lr = 0.0;
  double total = 0.0;
  double action = 0.0;
  double recon = 0.0;
  double contrast = 0.0;
  double next = 0.0;
  double grad_norm = 0.0;
  int frames = 0;
};

// Tab-separated loss-curve row and header.
std::string LossCurveHeader();
std::string LossCurveRow(const StepStats& s);

// Evaluator progress reconstructed from a stored frame annotation.
goal::EvalProgress ProgressFromAnnotation(const grid::FrameAnnotation& a);

class Trainer {
 public:
  Trainer(const model::ModelConfig& model, const TrainConfig& train,
          std::vector<grid::Episode> episodes);
  // Restores parameters, optimiser state and the step counter.
  static std::unique_ptr<Trainer> Resume(const std::string& checkpoint,
                                         std::vector<grid::Episode> episodes);

  // One optimisation step over a batch of chunks. Throws std::runtime_error
  // with the loss components if the loss is not finite.
  StepStats Step();
  void Save(const std::string& path) const;

  model::Model& model() { return *model_; }
  const TrainConfig& config() const { return train_; }
  std::int64_t step() const { return step_; }

 private:
  struct Stream {
    int episode = -1;
    int t = 0;
    bool carry = false;
    ad::Matrix slots;
    ad::Matrix h;
    std::deque<ad::Matrix> history;  // detached slots of preceding frames
    std::uint64_t init_seed = 0;
  };

  void NextEpisode(Stream& s);
  model::StepInput InputAt(const grid::Episode& ep, int t) const;

  TrainConfig train_;
  std::unique_ptr<model::Model> model_;
  std::unique_ptr<Adam> adam_;
  std::vector<grid::Episode> episodes_;
  std::vector<goal::GoalStructure> structures_;
  std::vector<Stream> streams_;
  std::mt19937_64 rng_;
  std::int64_t step_ = 0;
};

// Single-file checkpoint: magic, format version, JSON header (model and
// train config, step, parameter directory) and raw little-endian doubles
// grouped into named segments (encoder, ssm, head, embeddings, optimizer).
struct Checkpoint {
  model::ModelConfig model;
  TrainConfig train;
  std::int64_t step = 0;
  std::int64_t adam_steps = 0;
  std::vector<std::string> segments;
};

void SaveCheckpoint(const std::string& path, const model::Model& model,
                    const TrainConfig& train, std::int64_t step,
                    const Adam* adam);
// Loads the header, and parameter values into `model` (and `adam` if given)
// when non-null. The model must have been built from header.model.
Checkpoint LoadCheckpoint(const std::string& path, model::Model* model,
                          Adam* adam);
// Convenience: reads the header and builds a model with the stored values.
std::unique_ptr<model::Model> LoadModel(const std::string& path,
                                        Checkpoint* header = nullptr);

}  // namespace slotmem::train

#endif  // SLOTMEM_TRAIN_TRAINER_H_
