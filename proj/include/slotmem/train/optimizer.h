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

// First-order optimisation: Adam with cosine learning-rate decay and global
// gradient-norm clipping.

#ifndef SLOTMEM_TRAIN_OPTIMIZER_H_
#define SLOTMEM_TRAIN_OPTIMIZER_H_

#include <cstdint>
#include <vector>

#include "slotmem/ad/tape.h"

namespace slotmem::train {

struct AdamOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

class Adam {
 public:
  Adam(ad::ParameterStore& store, AdamOptions options = {});

  // Applies one update with learning rate `lr` from the accumulated grads.
  void Step(double lr);

  std::int64_t steps() const { return steps_; }
  // Moment buffers in store order; exposed for checkpointing.
  std::vector<ad::Matrix>& first_moment() { return m_; }
  std::vector<ad::Matrix>& second_moment() { return v_; }
  const std::vector<ad::Matrix>& first_moment() const { return m_; }
  const std::vector<ad::Matrix>& second_moment() const { return v_; }
  void set_steps(std::int64_t s) { steps_ = s; }

 private:
  ad::ParameterStore* store_;
  AdamOptions options_;
  std::vector<ad::Matrix> m_;
  std::vector<ad::Matrix> v_;
  std::int64_t steps_ = 0;
};

// Scales all gradients so that their joint L2 norm is at most `max_norm`.
// Returns the norm before clipping.
double ClipGradNorm(ad::ParameterStore& store, double max_norm);

// Half-cosine from `base` at step 0 to 0 at `total`.
double CosineLr(double base, std::int64_t step, std::int64_t total);

}  // namespace slotmem::train

#endif  // SLOTMEM_TRAIN_OPTIMIZER_H_
