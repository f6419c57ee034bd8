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

#include "slotmem/train/optimizer.h"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace slotmem::train {

Adam::Adam(ad::ParameterStore& store, AdamOptions options)
    : store_(&store), options_(options) {
  for (const auto& p : store.params()) {
    m_.push_back(ad::Matrix::Zero(p->value.rows(), p->value.cols()));
    v_.push_back(ad::Matrix::Zero(p->value.rows(), p->value.cols()));
  }
}

void Adam::Step(double lr) {
  ++steps_;
  const double c1 = 1.0 - std::pow(options_.beta1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(options_.beta2, static_cast<double>(steps_));
  const auto& params = store_->params();
  for (std::size_t i = 0; i < params.size(); ++i) {
    ad::Parameter& p = *params[i];
    if (p.grad.size() == 0) continue;
    m_[i] = options_.beta1 * m_[i] + (1.0 - options_.beta1) * p.grad;
    v_[i] = options_.beta2 * v_[i] +
            (1.0 - options_.beta2) * p.grad.cwiseProduct(p.grad);
    p.value.array() -= lr * (m_[i].array() / c1) /
                       ((v_[i].array() / c2).sqrt() + options_.eps);
  }
}

double ClipGradNorm(ad::ParameterStore& store, double max_norm) {
  double sq = 0.0;
  for (const auto& p : store.params()) {
    if (p->grad.size() != 0) sq += p->grad.squaredNorm();
  }
  const double norm = std::sqrt(sq);
  if (max_norm > 0 && norm > max_norm) {
    const double scale = max_norm / norm;
    for (const auto& p : store.params()) {
      if (p->grad.size() != 0) p->grad *= scale;
    }
  }
  return norm;
}

double CosineLr(double base, std::int64_t step, std::int64_t total) {
  if (total <= 0) return base;
  const double f = std::clamp(static_cast<double>(step) / total, 0.0, 1.0);
  return 0.5 * base * (1.0 + std::cos(std::numbers::pi * f));
}

}  // namespace slotmem::train
