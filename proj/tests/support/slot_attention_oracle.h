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

// Straight-line slot attention reference shared by the unit and acceptance
// suites.

#ifndef SLOTMEM_TESTS_SUPPORT_SLOT_ATTENTION_ORACLE_H_
#define SLOTMEM_TESTS_SUPPORT_SLOT_ATTENTION_ORACLE_H_

#include <cmath>
#include <string>

#include "slotmem/ad/tape.h"

namespace slotmem::testing {

using ad::Matrix;
using ad::ParameterStore;

// Straight-line slot attention written from the update equations, reading
// parameters by name. Shares no code with SlotAttention.
struct OracleResult {
  Matrix slots;
  Matrix attention;
  Matrix weights;
};

inline Matrix OracleLayerNorm(const Matrix& x, const Matrix& gain,
                              const Matrix& bias) {
  Matrix y(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    double mean = 0.0;
    for (Eigen::Index j = 0; j < x.cols(); ++j) mean += x(i, j);
    mean /= x.cols();
    double var = 0.0;
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      var += (x(i, j) - mean) * (x(i, j) - mean);
    }
    var /= x.cols();
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      y(i, j) = (x(i, j) - mean) / std::sqrt(var + 1e-5) * gain(0, j) +
                bias(0, j);
    }
  }
  return y;
}

inline double OracleSigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline OracleResult OracleSlotAttention(const ParameterStore& store,
                                        const std::string& p,
                                        const Matrix& inputs, Matrix slots,
                                        int iters) {
  auto P = [&](const std::string& n) -> const Matrix& {
    return store.Find(p + "." + n)->value;
  };
  const Matrix x = OracleLayerNorm(inputs, P("norm_inputs.gain"),
                                   P("norm_inputs.bias"));
  const Matrix k = x * P("k.w");
  const Matrix v = x * P("v.w");
  const int n = static_cast<int>(slots.rows());
  const int m = static_cast<int>(inputs.rows());
  const int d = static_cast<int>(k.cols());
  const int hidden = static_cast<int>(slots.cols());
  OracleResult out;
  for (int it = 0; it < iters; ++it) {
    const Matrix q = OracleLayerNorm(slots, P("norm_slots.gain"),
                                     P("norm_slots.bias")) * P("q.w");
    Matrix a(n, m), at(n, m), w(n, m);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < m; ++j) {
        double dot = 0.0;
        for (int c = 0; c < d; ++c) dot += q(i, c) * k(j, c);
        a(i, j) = dot / std::sqrt(static_cast<double>(d));
      }
    }
    for (int j = 0; j < m; ++j) {
      double z = 0.0;
      for (int i = 0; i < n; ++i) z += std::exp(a(i, j));
      for (int i = 0; i < n; ++i) at(i, j) = std::exp(a(i, j)) / z;
    }
    for (int i = 0; i < n; ++i) {
      double z = 0.0;
      for (int j = 0; j < m; ++j) z += at(i, j);
      for (int j = 0; j < m; ++j) w(i, j) = at(i, j) / z;
    }
    Matrix u = Matrix::Zero(n, d);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < m; ++j) u.row(i) += w(i, j) * v.row(j);
    }
    Matrix next(n, hidden);
    for (int i = 0; i < n; ++i) {
      const Matrix xr = u.row(i) * P("gru.x_rz.w") + P("gru.x_rz.b");
      const Matrix hr = slots.row(i) * P("gru.h_rz.w");
      const Matrix xn = u.row(i) * P("gru.x_n.w") + P("gru.x_n.b");
      const Matrix hn = slots.row(i) * P("gru.h_n.w") + P("gru.h_n.b");
      for (int c = 0; c < hidden; ++c) {
        const double r = OracleSigmoid(xr(0, c) + hr(0, c));
        const double zg =
            OracleSigmoid(xr(0, hidden + c) + hr(0, hidden + c));
        const double cand = std::tanh(xn(0, c) + r * hn(0, c));
        next(i, c) = (1.0 - zg) * cand + zg * slots(i, c);
      }
    }
    slots = next;
    out.attention = at;
    out.weights = w;
  }
  out.slots = slots;
  return out;
}

}  // namespace slotmem::testing

#endif  // SLOTMEM_TESTS_SUPPORT_SLOT_ATTENTION_ORACLE_H_
