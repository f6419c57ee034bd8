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

#ifndef SLOTMEM_AD_GRAD_CHECK_H_
#define SLOTMEM_AD_GRAD_CHECK_H_

#include <cstdint>
#include <functional>
#include <string>

#include "slotmem/ad/tape.h"

namespace slotmem::ad {

struct GradCheckResult {
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  int entries_checked = 0;
  std::string worst;  // "param[r,c]: analytic vs numeric"
};

struct GradCheckOptions {
  double step = 1e-5;
  // Relative errors are taken against max(|analytic|, |numeric|, floor).
  double floor = 1e-6;
  // Entries sampled per parameter; <= 0 checks every entry.
  int max_entries_per_param = 0;
  std::uint64_t seed = 0;
};

// Compares reverse-mode gradients of `loss_fn` (which must build a scalar on
// the given tape from `store`'s parameters) against central differences.
GradCheckResult CheckGradients(ParameterStore& store,
                               const std::function<Var(Tape&)>& loss_fn,
                               const GradCheckOptions& options = {});

}  // namespace slotmem::ad

#endif  // SLOTMEM_AD_GRAD_CHECK_H_
