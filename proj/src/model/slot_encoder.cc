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

#include "slotmem/model/slot_encoder.h"

#include <cmath>
#include <stdexcept>

namespace slotmem::model {

using namespace ad;  // NOLINT: op vocabulary

Matrix FrameToPatches(const grid::Frame& frame, int patch) {
  if (frame.height % patch != 0 || frame.width % patch != 0 ||
      frame.rgb.size() != static_cast<std::size_t>(frame.height) * frame.width * 3) {
    throw std::invalid_argument("FrameToPatches: shape mismatch");
  }
  const int rows = frame.height / patch;
  const int cols = frame.width / patch;
  Matrix out(rows * cols, patch * patch * 3);
  for (int pr = 0; pr < rows; ++pr) {
    for (int pc = 0; pc < cols; ++pc) {
      const int m = pr * cols + pc;
      int k = 0;
      for (int y = 0; y < patch; ++y) {
        const int base = ((pr * patch + y) * frame.width + pc * patch) * 3;
        for (int x = 0; x < patch * 3; ++x) {
          out(m, k++) = frame.rgb[base + x] / 255.0;
        }
      }
    }
  }
  return out;
}

Matrix PatchPositions(int side) {
  Matrix p(side * side, 4);
  for (int r = 0; r < side; ++r) {
    for (int c = 0; c < side; ++c) {
      const double x = (c + 0.5) / side;
      const double y = (r + 0.5) / side;
      p.row(r * side + c) << x, y, 1.0 - x, 1.0 - y;
    }
  }
  return p;
}

FeatureEncoder::FeatureEncoder(ParameterStore& store, const std::string& prefix,
                               const ModelConfig& cfg, std::mt19937_64& rng)
    : conv_(store, prefix + ".conv", cfg.patch_dim(), cfg.d_enc, rng),
      pos_(store, prefix + ".pos", 4, cfg.d_enc, rng),
      positions_(PatchPositions(cfg.image_size / cfg.patch)) {}

Var FeatureEncoder::Encode(Tape& t, const Matrix& patches) const {
  if (patches.rows() != positions_.rows() || patches.cols() != conv_.in()) {
    throw std::invalid_argument("FeatureEncoder: expected " +
                                std::to_string(positions_.rows()) + "x" +
                                std::to_string(conv_.in()) + " patches");
  }
  Var x = Gelu(conv_(t, t.Constant(patches)));
  return Add(x, pos_(t, t.Constant(positions_)));
}

SlotAttention::SlotAttention(ParameterStore& store, const std::string& prefix,
                             const ModelConfig& cfg, std::mt19937_64& rng)
    : norm_inputs_(store, prefix + ".norm_inputs", cfg.d_enc),
      norm_slots_(store, prefix + ".norm_slots", cfg.d_slot),
      q_(store, prefix + ".q", cfg.d_slot, cfg.d_enc, rng, false),
      k_(store, prefix + ".k", cfg.d_enc, cfg.d_enc, rng, false),
      v_(store, prefix + ".v", cfg.d_enc, cfg.d_enc, rng, false),
      gru_(store, prefix + ".gru", cfg.d_enc, cfg.d_slot, rng),
      heads_(cfg.slot_heads),
      d_enc_(cfg.d_enc) {}

SlotAttentionOutput SlotAttention::Run(Tape& t, Var features, Var init,
                                       int iters) const {
  SlotAttentionOutput out;
  out.slots = init;
  if (iters <= 0) return out;
  Var x = norm_inputs_(t, features);
  Var k = k_(t, x);
  Var v = v_(t, x);
  const int dh = d_enc_ / heads_;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  for (int it = 0; it < iters; ++it) {
    Var q = q_(t, norm_slots_(t, out.slots));
    std::vector<Var> updates;
    out.attention = Matrix::Zero(init.rows(), features.rows());
    out.weights = Matrix::Zero(init.rows(), features.rows());
    for (int h = 0; h < heads_; ++h) {
      Var qh = heads_ == 1 ? q : SliceCols(q, h * dh, dh);
      Var kh = heads_ == 1 ? k : SliceCols(k, h * dh, dh);
      Var vh = heads_ == 1 ? v : SliceCols(v, h * dh, dh);
      Var logits = Scale(MatMulBT(qh, kh), scale);
      if (!logits.value().allFinite()) {
        throw std::runtime_error("slot attention: non-finite logits");
      }
      Var attn = SoftmaxCols(logits);      // over slots, per feature
      Var w = RowSumNormalize(attn);       // over features, per slot
      updates.push_back(MatMul(w, vh));
      out.attention += attn.value() / heads_;
      out.weights += w.value() / heads_;
    }
    Var u = heads_ == 1 ? updates[0] : ConcatCols(updates);
    out.slots = gru_(t, u, out.slots);
  }
  return out;
}

SlotInitializer::SlotInitializer(ParameterStore& store,
                                 const std::string& prefix, int dim,
                                 std::mt19937_64& rng) {
  mean_ = &store.Create(prefix + ".mean", NormalInit(1, dim, 0.5, rng));
  log_std_ = &store.Create(prefix + ".log_std", Matrix::Zero(1, dim));
}

Var SlotInitializer::Sample(Tape& t, int n, std::uint64_t seed) const {
  std::mt19937_64 rng(seed);
  Matrix eps = NormalInit(n, static_cast<int>(mean_->value.cols()), 1.0, rng);
  Var scaled = MulRow(t.Constant(eps), Exp(t.Leaf(*log_std_)));
  return AddRow(scaled, t.Leaf(*mean_));
}

Var InitSlots(Tape& t, const SlotInitializer& init, const Var* prev, int n,
              std::uint64_t seed) {
  if (prev && prev->valid()) return *prev;
  return init.Sample(t, n, seed);
}

Var InfoNceLoss(Var z, const Matrix& positives, const Matrix& negatives,
                double tau) {
  const Eigen::Index n = z.rows();
  if (positives.rows() != n || positives.cols() != n ||
      negatives.rows() != n || negatives.cols() != n) {
    throw std::invalid_argument("InfoNceLoss: mask shape mismatch");
  }
  Tape& t = *z.tape();
  Matrix valid = Matrix::Zero(n, 1);
  int count = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (positives.row(i).sum() > 0) {
      valid(i, 0) = 1.0;
      ++count;
    }
  }
  if (count == 0) return t.Scalar(0.0);
  Var u = NormalizeRowsL2(z);
  Var e = Exp(Scale(MatMulBT(u, u), 1.0 / tau));
  Var pos = RowSums(Mul(e, t.Constant(positives)));
  Var neg = RowSums(Mul(e, t.Constant(negatives)));
  // Skipped anchors get pos = neg = 1 placeholders so the log stays finite;
  // their terms are masked out below.
  Matrix pad = Matrix::Ones(n, 1) - valid;
  Var pos_safe = Add(pos, t.Constant(pad));
  Var total = Add(Add(pos, neg), t.Constant(pad));
  Var per_anchor = Sub(Log(total), Log(pos_safe));
  return Scale(Sum(Mul(per_anchor, t.Constant(valid))), 1.0 / count);
}

Var ContrastiveLoss(const std::vector<std::vector<Var>>& tracks, int delta_max,
                    double tau) {
  if (tracks.empty() || tracks[0].empty()) {
    throw std::invalid_argument("ContrastiveLoss: empty batch");
  }
  const int k = static_cast<int>(tracks[0][0].rows());
  std::vector<Var> rows;
  struct Tag {
    int seq, time, slot;
  };
  std::vector<Tag> tags;
  for (int b = 0; b < static_cast<int>(tracks.size()); ++b) {
    for (int time = 0; time < static_cast<int>(tracks[b].size()); ++time) {
      if (tracks[b][time].rows() != k) {
        throw std::invalid_argument("ContrastiveLoss: slot count mismatch");
      }
      rows.push_back(tracks[b][time]);
      for (int s = 0; s < k; ++s) tags.push_back({b, time, s});
    }
  }
  const int n = static_cast<int>(tags.size());
  Matrix pos = Matrix::Zero(n, n);
  Matrix neg = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const Tag& a = tags[i];
      const Tag& c = tags[j];
      if (a.seq != c.seq) {
        neg(i, j) = 1.0;
      } else if (a.slot != c.slot) {
        neg(i, j) = 1.0;
      } else if (std::abs(a.time - c.time) <= delta_max) {
        pos(i, j) = 1.0;
      }
    }
  }
  return InfoNceLoss(ConcatRows(rows), pos, neg, tau);
}

}  // namespace slotmem::model
