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

#include "slotmem/ad/ops.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace slotmem::ad {
namespace {

using Eigen::Index;

void CheckSameTape(Var a, Var b) {
  if (a.tape() != b.tape()) throw std::invalid_argument("mixed tapes");
}

void CheckSameShape(Var a, Var b, const char* op) {
  CheckSameTape(a, b);
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument(std::string(op) + ": shape mismatch " +
                                std::to_string(a.rows()) + "x" +
                                std::to_string(a.cols()) + " vs " +
                                std::to_string(b.rows()) + "x" +
                                std::to_string(b.cols()));
  }
}

template <typename Expr>
void Accumulate(Tape& t, int id, const Expr& e) {
  if (t.requires_grad(id)) t.grad(id) += e;
}

constexpr double kGeluK = 0.7978845608028654;  // sqrt(2 / pi)
constexpr double kGeluC = 0.044715;

double Sigm(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

// Forward products are formed one row at a time through aligned
// temporaries. Each output row then depends only on its own input row and
// is bit-identical wherever that row sits, which keeps slot-permutation
// equivariance exact instead of approximate.
Matrix RowStableProduct(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), b.cols());
  Eigen::RowVectorXd in(a.cols());
  Eigen::RowVectorXd row(b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    in = a.row(i);
    row.noalias() = in * b;
    out.row(i) = row;
  }
  return out;
}

// Left-to-right row sums. Eigen's vectorised reductions peel according to
// the row's memory alignment, so equal rows at different offsets could sum
// differently.
Eigen::VectorXd SequentialRowSums(const Matrix& x) {
  Eigen::VectorXd s(x.rows());
  for (Index r = 0; r < x.rows(); ++r) {
    const double* p = x.data() + r * x.cols();
    double acc = 0.0;
    for (Index c = 0; c < x.cols(); ++c) acc += p[c];
    s(r) = acc;
  }
  return s;
}

// Elementwise maps go through the scalar libm functions: vectorised
// kernels round differently in packet bodies and scalar tails.
template <typename F>
Matrix Map(const Matrix& x, F f) {
  Matrix v(x.rows(), x.cols());
  for (Index i = 0; i < x.size(); ++i) v.data()[i] = f(x.data()[i]);
  return v;
}

}  // namespace

Var MatMul(Var a, Var b) {
  CheckSameTape(a, b);
  if (a.cols() != b.rows()) {
    throw std::invalid_argument("MatMul: inner dimension mismatch " +
                                std::to_string(a.cols()) + " vs " +
                                std::to_string(b.rows()));
  }
  Matrix v = RowStableProduct(a.value(), b.value());
  int ia = a.id(), ib = b.id();
  return a.tape()->Emit(std::move(v), {a, b}, [ia, ib](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    if (t.requires_grad(ia)) t.grad(ia).noalias() += g * t.value(ib).transpose();
    if (t.requires_grad(ib)) t.grad(ib).noalias() += t.value(ia).transpose() * g;
  });
}

Var MatMulBT(Var a, Var b) {
  CheckSameTape(a, b);
  if (a.cols() != b.cols()) {
    throw std::invalid_argument("MatMulBT: inner dimension mismatch");
  }
  Matrix v = RowStableProduct(a.value(), b.value().transpose());
  int ia = a.id(), ib = b.id();
  return a.tape()->Emit(std::move(v), {a, b}, [ia, ib](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    if (t.requires_grad(ia)) t.grad(ia).noalias() += g * t.value(ib);
    if (t.requires_grad(ib)) t.grad(ib).noalias() += g.transpose() * t.value(ia);
  });
}

Var Transpose(Var a) {
  Matrix v = a.value().transpose();
  int ia = a.id();
  return a.tape()->Emit(std::move(v), {a}, [ia](Tape& t, int self) {
    Accumulate(t, ia, t.grad(self).transpose());
  });
}

Var Add(Var a, Var b) {
  CheckSameShape(a, b, "Add");
  Matrix v = a.value() + b.value();
  int ia = a.id(), ib = b.id();
  return a.tape()->Emit(std::move(v), {a, b}, [ia, ib](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    Accumulate(t, ia, g);
    Accumulate(t, ib, g);
  });
}

Var Sub(Var a, Var b) {
  CheckSameShape(a, b, "Sub");
  Matrix v = a.value() - b.value();
  int ia = a.id(), ib = b.id();
  return a.tape()->Emit(std::move(v), {a, b}, [ia, ib](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    Accumulate(t, ia, g);
    Accumulate(t, ib, -g);
  });
}

Var Mul(Var a, Var b) {
  CheckSameShape(a, b, "Mul");
  Matrix v = a.value().cwiseProduct(b.value());
  int ia = a.id(), ib = b.id();
  return a.tape()->Emit(std::move(v), {a, b}, [ia, ib](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    Accumulate(t, ia, g.cwiseProduct(t.value(ib)));
    Accumulate(t, ib, g.cwiseProduct(t.value(ia)));
  });
}

Var Scale(Var a, double c) {
  Matrix v = a.value() * c;
  int ia = a.id();
  return a.tape()->Emit(std::move(v), {a}, [ia, c](Tape& t, int self) {
    Accumulate(t, ia, t.grad(self) * c);
  });
}

Var AddScalar(Var a, double c) {
  Matrix v = a.value().array() + c;
  int ia = a.id();
  return a.tape()->Emit(std::move(v), {a}, [ia](Tape& t, int self) {
    Accumulate(t, ia, t.grad(self));
  });
}

Var Neg(Var a) { return Scale(a, -1.0); }

Var AddRow(Var a, Var row) {
  CheckSameTape(a, row);
  if (row.rows() != 1 || row.cols() != a.cols()) {
    throw std::invalid_argument("AddRow: row shape mismatch");
  }
  Matrix v = a.value().rowwise() + row.value().row(0);
  int ia = a.id(), ir = row.id();
  return a.tape()->Emit(std::move(v), {a, row}, [ia, ir](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    Accumulate(t, ia, g);
    Accumulate(t, ir, g.colwise().sum());
  });
}

Var MulRow(Var a, Var row) {
  CheckSameTape(a, row);
  if (row.rows() != 1 || row.cols() != a.cols()) {
    throw std::invalid_argument("MulRow: row shape mismatch");
  }
  Matrix v = a.value().array().rowwise() * row.value().row(0).array();
  int ia = a.id(), ir = row.id();
  return a.tape()->Emit(std::move(v), {a, row}, [ia, ir](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    if (t.requires_grad(ia)) {
      t.grad(ia).array() += g.array().rowwise() * t.value(ir).row(0).array();
    }
    if (t.requires_grad(ir)) {
      t.grad(ir) += g.cwiseProduct(t.value(ia)).colwise().sum();
    }
  });
}

Var MulCol(Var a, Var col) {
  CheckSameTape(a, col);
  if (col.cols() != 1 || col.rows() != a.rows()) {
    throw std::invalid_argument("MulCol: column shape mismatch");
  }
  Matrix v = a.value().array().colwise() * col.value().col(0).array();
  int ia = a.id(), ic = col.id();
  return a.tape()->Emit(std::move(v), {a, col}, [ia, ic](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    if (t.requires_grad(ia)) {
      t.grad(ia).array() += g.array().colwise() * t.value(ic).col(0).array();
    }
    if (t.requires_grad(ic)) {
      t.grad(ic) += g.cwiseProduct(t.value(ia)).rowwise().sum();
    }
  });
}

Var TileRows(Var row, int r) {
  if (row.rows() != 1) throw std::invalid_argument("TileRows: expects 1 x n");
  Matrix v = row.value().replicate(r, 1);
  int ir = row.id();
  return row.tape()->Emit(std::move(v), {row}, [ir](Tape& t, int self) {
    Accumulate(t, ir, t.grad(self).colwise().sum());
  });
}

Var Gelu(Var a) {
  const Matrix& x = a.value();
  Matrix v(x.rows(), x.cols());
  for (Index i = 0; i < x.size(); ++i) {
    double xi = x.data()[i];
    double th = std::tanh(kGeluK * (xi + kGeluC * xi * xi * xi));
    v.data()[i] = 0.5 * xi * (1.0 + th);
  }
  int ia = a.id();
  return a.tape()->Emit(std::move(v), {a}, [ia](Tape& t, int self) {
    if (!t.requires_grad(ia)) return;
    const Matrix& g = t.grad(self);
    const Matrix& x = t.value(ia);
    Matrix& ga = t.grad(ia);
    for (Index i = 0; i < x.size(); ++i) {
      double xi = x.data()[i];
      double th = std::tanh(kGeluK * (xi + kGeluC * xi * xi * xi));
      double d = 0.5 * (1.0 + th) + 0.5 * xi * (1.0 - th * th) * kGeluK *
                                        (1.0 + 3.0 * kGeluC * xi * xi);
      ga.data()[i] += g.data()[i] * d;
    }
  });
}

Var Sigmoid(Var a) {
  Matrix v = a.value().unaryExpr([](double x) { return Sigm(x); });
  int ia = a.id();
  return a.tape()->Emit(std::move(v), {a}, [ia](Tape& t, int self) {
    const Matrix& y = t.value(self);
    Accumulate(t, ia,
               t.grad(self).cwiseProduct(
                   y.cwiseProduct((1.0 - y.array()).matrix())));
  });
}

Var Tanh(Var a) {
  Matrix v = Map(a.value(), [](double x) { return std::tanh(x); });
  int ia = a.id();
  return a.tape()->Emit(std::move(v), {a}, [ia](Tape& t, int self) {
    const Matrix& y = t.value(self);
    Accumulate(t, ia,
               t.grad(self).cwiseProduct((1.0 - y.array().square()).matrix()));
  });
}

Var Exp(Var a) {
  Matrix v = Map(a.value(), [](double x) { return std::exp(x); });
  int ia = a.id();
  return a.tape()->Emit(std::move(v), {a}, [ia](Tape& t, int self) {
    Accumulate(t, ia, t.grad(self).cwiseProduct(t.value(self)));
  });
}

Var Log(Var a) {
  Matrix v = Map(a.value(), [](double x) { return std::log(x); });
  int ia = a.id();
  return a.tape()->Emit(std::move(v), {a}, [ia](Tape& t, int self) {
    Accumulate(t, ia, t.grad(self).cwiseQuotient(t.value(ia)));
  });
}

Var Softplus(Var a) {
  Matrix v = a.value().unaryExpr([](double x) {
    return x > 30.0 ? x : std::log1p(std::exp(x));
  });
  int ia = a.id();
  return a.tape()->Emit(std::move(v), {a}, [ia](Tape& t, int self) {
    Accumulate(t, ia,
               t.grad(self).cwiseProduct(
                   t.value(ia).unaryExpr([](double x) { return Sigm(x); })));
  });
}

Var Square(Var a) {
  Matrix v = a.value().array().square();
  int ia = a.id();
  return a.tape()->Emit(std::move(v), {a}, [ia](Tape& t, int self) {
    Accumulate(t, ia, 2.0 * t.grad(self).cwiseProduct(t.value(ia)));
  });
}

Var SoftmaxRows(Var a) {
  const Matrix& x = a.value();
  Matrix v(x.rows(), x.cols());
  for (Index r = 0; r < x.rows(); ++r) {
    double m = x.row(r).maxCoeff();
    v.row(r) = x.row(r).unaryExpr([m](double e) { return std::exp(e - m); });
  }
  v.array().colwise() /= SequentialRowSums(v).array();
  int ia = a.id();
  return a.tape()->Emit(std::move(v), {a}, [ia](Tape& t, int self) {
    if (!t.requires_grad(ia)) return;
    const Matrix& y = t.value(self);
    const Matrix& g = t.grad(self);
    Eigen::VectorXd dot = g.cwiseProduct(y).rowwise().sum();
    t.grad(ia).array() +=
        y.array() * (g.array().colwise() - dot.array());
  });
}

Var SoftmaxCols(Var a) {
  const Matrix& x = a.value();
  Matrix v(x.rows(), x.cols());
  for (Index c = 0; c < x.cols(); ++c) {
    double m = x.col(c).maxCoeff();
    v.col(c) = x.col(c).unaryExpr([m](double e) { return std::exp(e - m); });
    // Sorted summation makes the result independent of row order, so
    // permuting rows permutes the output bit for bit.
    std::vector<double> terms(v.col(c).begin(), v.col(c).end());
    std::sort(terms.begin(), terms.end());
    double total = 0.0;
    for (double e : terms) total += e;
    v.col(c) /= total;
  }
  int ia = a.id();
  return a.tape()->Emit(std::move(v), {a}, [ia](Tape& t, int self) {
    if (!t.requires_grad(ia)) return;
    const Matrix& y = t.value(self);
    const Matrix& g = t.grad(self);
    Eigen::RowVectorXd dot = g.cwiseProduct(y).colwise().sum();
    t.grad(ia).array() +=
        y.array() * (g.array().rowwise() - dot.array());
  });
}

Var LogSoftmaxRows(Var a) {
  const Matrix& x = a.value();
  Matrix v(x.rows(), x.cols());
  for (Index r = 0; r < x.rows(); ++r) {
    double m = x.row(r).maxCoeff();
    double acc = 0.0;
    for (Index c = 0; c < x.cols(); ++c) acc += std::exp(x(r, c) - m);
    v.row(r) = x.row(r).array() - (m + std::log(acc));
  }
  int ia = a.id();
  return a.tape()->Emit(std::move(v), {a}, [ia](Tape& t, int self) {
    if (!t.requires_grad(ia)) return;
    const Matrix& y = t.value(self);
    const Matrix& g = t.grad(self);
    Eigen::VectorXd gsum = g.rowwise().sum();
    Matrix p = y.array().exp();
    t.grad(ia) += g - (p.array().colwise() * gsum.array()).matrix();
  });
}

Var RowSumNormalize(Var a) {
  const Matrix& x = a.value();
  Eigen::VectorXd s = SequentialRowSums(x);
  Matrix v = x.array().colwise() / s.array();
  int ia = a.id();
  return a.tape()->Emit(std::move(v), {a}, [ia](Tape& t, int self) {
    if (!t.requires_grad(ia)) return;
    const Matrix& x = t.value(ia);
    const Matrix& g = t.grad(self);
    Eigen::VectorXd s = x.rowwise().sum();
    Eigen::VectorXd gx = g.cwiseProduct(x).rowwise().sum();
    Eigen::VectorXd corr = gx.array() / (s.array() * s.array());
    t.grad(ia).array() +=
        (g.array().colwise() / s.array()).colwise() - corr.array();
  });
}

Var NormalizeRowsL2(Var a, double eps) {
  const Matrix& x = a.value();
  Eigen::VectorXd n = (x.rowwise().squaredNorm().array() + eps).sqrt();
  Matrix v = x.array().colwise() / n.array();
  int ia = a.id();
  return a.tape()->Emit(std::move(v), {a}, [ia, eps](Tape& t, int self) {
    if (!t.requires_grad(ia)) return;
    const Matrix& x = t.value(ia);
    const Matrix& y = t.value(self);
    const Matrix& g = t.grad(self);
    Eigen::VectorXd n = (x.rowwise().squaredNorm().array() + eps).sqrt();
    Eigen::VectorXd gy = g.cwiseProduct(y).rowwise().sum();
    Matrix d = g - (y.array().colwise() * gy.array()).matrix();
    t.grad(ia).array() += d.array().colwise() / n.array();
  });
}

Var LayerNormRows(Var a, Var gain, Var bias, double eps) {
  CheckSameTape(a, gain);
  CheckSameTape(a, bias);
  const Index cols = a.cols();
  if (gain.rows() != 1 || gain.cols() != cols || bias.rows() != 1 ||
      bias.cols() != cols) {
    throw std::invalid_argument("LayerNormRows: affine shape mismatch");
  }
  const Matrix& x = a.value();
  Eigen::VectorXd mean = SequentialRowSums(x) / static_cast<double>(cols);
  Matrix centered = x.colwise() - mean;
  Eigen::VectorXd inv_sd =
      SequentialRowSums(centered.cwiseProduct(centered)) /
      static_cast<double>(cols);
  for (Index r = 0; r < inv_sd.size(); ++r) {
    inv_sd(r) = 1.0 / std::sqrt(inv_sd(r) + eps);
  }
  Matrix xhat = centered.array().colwise() * inv_sd.array();
  Matrix v = (xhat.array().rowwise() * gain.value().row(0).array()).rowwise() +
             bias.value().row(0).array();
  int ia = a.id(), ig = gain.id(), ib = bias.id();
  return a.tape()->Emit(
      std::move(v), {a, gain, bias},
      [ia, ig, ib, xhat = std::move(xhat), inv_sd = std::move(inv_sd)](
          Tape& t, int self) {
        const Matrix& g = t.grad(self);
        if (t.requires_grad(ig)) t.grad(ig) += g.cwiseProduct(xhat).colwise().sum();
        if (t.requires_grad(ib)) t.grad(ib) += g.colwise().sum();
        if (t.requires_grad(ia)) {
          Matrix dxhat = g.array().rowwise() * t.value(ig).row(0).array();
          Eigen::VectorXd m1 = dxhat.rowwise().mean();
          Eigen::VectorXd m2 = dxhat.cwiseProduct(xhat).rowwise().mean();
          Matrix dx = (dxhat.colwise() - m1) -
                      (xhat.array().colwise() * m2.array()).matrix();
          t.grad(ia).array() += dx.array().colwise() * inv_sd.array();
        }
      });
}

Var ConcatCols(const std::vector<Var>& parts) {
  if (parts.empty()) throw std::invalid_argument("ConcatCols: no parts");
  const Index rows = parts[0].rows();
  Index cols = 0;
  for (const Var& p : parts) {
    CheckSameTape(parts[0], p);
    if (p.rows() != rows) throw std::invalid_argument("ConcatCols: row mismatch");
    cols += p.cols();
  }
  Matrix v(rows, cols);
  std::vector<std::pair<int, Index>> spans;
  Index off = 0;
  for (const Var& p : parts) {
    v.middleCols(off, p.cols()) = p.value();
    spans.emplace_back(p.id(), off);
    off += p.cols();
  }
  return parts[0].tape()->Emit(
      std::move(v), parts, [spans = std::move(spans)](Tape& t, int self) {
        const Matrix& g = t.grad(self);
        for (const auto& [id, o] : spans) {
          if (t.requires_grad(id)) {
            t.grad(id) += g.middleCols(o, t.value(id).cols());
          }
        }
      });
}

Var ConcatRows(const std::vector<Var>& parts) {
  if (parts.empty()) throw std::invalid_argument("ConcatRows: no parts");
  const Index cols = parts[0].cols();
  Index rows = 0;
  for (const Var& p : parts) {
    CheckSameTape(parts[0], p);
    if (p.cols() != cols) throw std::invalid_argument("ConcatRows: col mismatch");
    rows += p.rows();
  }
  Matrix v(rows, cols);
  std::vector<std::pair<int, Index>> spans;
  Index off = 0;
  for (const Var& p : parts) {
    v.middleRows(off, p.rows()) = p.value();
    spans.emplace_back(p.id(), off);
    off += p.rows();
  }
  return parts[0].tape()->Emit(
      std::move(v), parts, [spans = std::move(spans)](Tape& t, int self) {
        const Matrix& g = t.grad(self);
        for (const auto& [id, o] : spans) {
          if (t.requires_grad(id)) {
            t.grad(id) += g.middleRows(o, t.value(id).rows());
          }
        }
      });
}

Var SliceRows(Var a, int start, int count) {
  if (start < 0 || count < 0 || start + count > a.rows()) {
    throw std::out_of_range("SliceRows out of range");
  }
  Matrix v = a.value().middleRows(start, count);
  int ia = a.id();
  return a.tape()->Emit(std::move(v), {a}, [ia, start, count](Tape& t, int self) {
    if (t.requires_grad(ia)) t.grad(ia).middleRows(start, count) += t.grad(self);
  });
}

Var SliceCols(Var a, int start, int count) {
  if (start < 0 || count < 0 || start + count > a.cols()) {
    throw std::out_of_range("SliceCols out of range");
  }
  Matrix v = a.value().middleCols(start, count);
  int ia = a.id();
  return a.tape()->Emit(std::move(v), {a}, [ia, start, count](Tape& t, int self) {
    if (t.requires_grad(ia)) t.grad(ia).middleCols(start, count) += t.grad(self);
  });
}

Var Reshape(Var a, int rows, int cols) {
  if (static_cast<Index>(rows) * cols != a.value().size()) {
    throw std::invalid_argument("Reshape: size mismatch");
  }
  Matrix v = Eigen::Map<const Matrix>(a.value().data(), rows, cols);
  int ia = a.id();
  return a.tape()->Emit(std::move(v), {a}, [ia](Tape& t, int self) {
    if (!t.requires_grad(ia)) return;
    Matrix& ga = t.grad(ia);
    const Matrix& g = t.grad(self);
    Eigen::Map<Matrix>(ga.data(), g.rows(), g.cols()) += g;
  });
}

Var GatherRows(Var table, const std::vector<int>& index) {
  const Matrix& tv = table.value();
  Matrix v(static_cast<Index>(index.size()), tv.cols());
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index[i] < 0 || index[i] >= tv.rows()) {
      throw std::out_of_range("GatherRows index out of range");
    }
    v.row(i) = tv.row(index[i]);
  }
  int it = table.id();
  return table.tape()->Emit(std::move(v), {table}, [it, index](Tape& t, int self) {
    if (!t.requires_grad(it)) return;
    Matrix& gt = t.grad(it);
    const Matrix& g = t.grad(self);
    for (std::size_t i = 0; i < index.size(); ++i) gt.row(index[i]) += g.row(i);
  });
}

Var RowSums(Var a) {
  Matrix v = SequentialRowSums(a.value());
  int ia = a.id();
  return a.tape()->Emit(std::move(v), {a}, [ia](Tape& t, int self) {
    if (!t.requires_grad(ia)) return;
    const Matrix& g = t.grad(self);
    t.grad(ia).colwise() += g.col(0);
  });
}

Var ColSums(Var a) {
  Matrix v = a.value().colwise().sum();
  int ia = a.id();
  return a.tape()->Emit(std::move(v), {a}, [ia](Tape& t, int self) {
    if (!t.requires_grad(ia)) return;
    const Matrix& g = t.grad(self);
    t.grad(ia).rowwise() += g.row(0);
  });
}

Var Sum(Var a) {
  Matrix v(1, 1);
  v(0, 0) = a.value().sum();
  int ia = a.id();
  return a.tape()->Emit(std::move(v), {a}, [ia](Tape& t, int self) {
    if (t.requires_grad(ia)) t.grad(ia).array() += t.grad(self)(0, 0);
  });
}

Var Mean(Var a) {
  const double n = static_cast<double>(a.value().size());
  return Scale(Sum(a), 1.0 / n);
}

Var Element(Var a, int r, int c) {
  Matrix v(1, 1);
  v(0, 0) = a.value()(r, c);
  int ia = a.id();
  return a.tape()->Emit(std::move(v), {a}, [ia, r, c](Tape& t, int self) {
    if (t.requires_grad(ia)) t.grad(ia)(r, c) += t.grad(self)(0, 0);
  });
}

Var AddN(const std::vector<Var>& terms) {
  if (terms.empty()) throw std::invalid_argument("AddN: no terms");
  Matrix v = terms[0].value();
  for (std::size_t i = 1; i < terms.size(); ++i) {
    CheckSameShape(terms[0], terms[i], "AddN");
    v += terms[i].value();
  }
  std::vector<int> ids;
  for (const Var& x : terms) ids.push_back(x.id());
  return terms[0].tape()->Emit(std::move(v), terms,
                               [ids = std::move(ids)](Tape& t, int self) {
                                 const Matrix& g = t.grad(self);
                                 for (int id : ids) Accumulate(t, id, g);
                               });
}

Var Detach(Var a) { return a.tape()->Constant(a.value()); }

}  // namespace slotmem::ad
