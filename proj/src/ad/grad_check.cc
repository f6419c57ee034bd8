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

#include "slotmem/ad/grad_check.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <vector>

namespace slotmem::ad {

GradCheckResult CheckGradients(ParameterStore& store,
                               const std::function<Var(Tape&)>& loss_fn,
                               const GradCheckOptions& options) {
  store.ZeroGrad();
  {
    Tape tape;
    tape.Backward(loss_fn(tape));
  }
  auto eval = [&]() {
    Tape tape(/*record=*/false);
    return loss_fn(tape).scalar();
  };

  std::mt19937_64 rng(options.seed);
  GradCheckResult result;
  for (const auto& p : store.params()) {
    std::vector<Eigen::Index> entries(p->value.size());
    std::iota(entries.begin(), entries.end(), 0);
    if (options.max_entries_per_param > 0 &&
        static_cast<int>(entries.size()) > options.max_entries_per_param) {
      std::shuffle(entries.begin(), entries.end(), rng);
      entries.resize(options.max_entries_per_param);
    }
    for (Eigen::Index k : entries) {
      double& x = p->value.data()[k];
      const double saved = x;
      x = saved + options.step;
      const double up = eval();
      x = saved - options.step;
      const double down = eval();
      x = saved;
      const double numeric = (up - down) / (2.0 * options.step);
      const double analytic = p->grad.data()[k];
      const double abs_err = std::abs(analytic - numeric);
      const double scale =
          std::max({std::abs(analytic), std::abs(numeric), options.floor});
      const double rel = abs_err / scale;
      ++result.entries_checked;
      result.max_abs_error = std::max(result.max_abs_error, abs_err);
      if (rel > result.max_rel_error) {
        result.max_rel_error = rel;
        std::ostringstream os;
        os << p->name << "[" << k / p->value.cols() << "," << k % p->value.cols()
           << "]: " << analytic << " vs " << numeric;
        result.worst = os.str();
      }
    }
  }
  return result;
}

}  // namespace slotmem::ad
