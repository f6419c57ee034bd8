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

#ifndef SLOTMEM_AD_OPS_H_
#define SLOTMEM_AD_OPS_H_

#include <vector>

#include "slotmem/ad/tape.h"

// Differentiable matrix operations. Matrices are row-major; "rows" are
// tokens/items and "cols" are feature channels throughout the model code.
namespace slotmem::ad {

// Linear algebra.
Var MatMul(Var a, Var b);    // a b
Var MatMulBT(Var a, Var b);  // a b^T
Var Transpose(Var a);

// Elementwise (same shapes).
Var Add(Var a, Var b);
Var Sub(Var a, Var b);
Var Mul(Var a, Var b);
Var Scale(Var a, double c);
Var AddScalar(Var a, double c);
Var Neg(Var a);

// Broadcasts: `row` is 1 x cols, `col` is rows x 1.
Var AddRow(Var a, Var row);
Var MulRow(Var a, Var row);
Var MulCol(Var a, Var col);
// Repeats a 1 x n row into an r x n matrix.
Var TileRows(Var row, int r);

// Pointwise nonlinearities.
Var Gelu(Var a);  // tanh approximation, smooth everywhere
Var Sigmoid(Var a);
Var Tanh(Var a);
Var Exp(Var a);
Var Log(Var a);
Var Softplus(Var a);
Var Square(Var a);

// Normalisations.
Var SoftmaxRows(Var a);
Var SoftmaxCols(Var a);
Var LogSoftmaxRows(Var a);
// Divides each row by its sum.
Var RowSumNormalize(Var a);
// Each row scaled to unit L2 norm.
Var NormalizeRowsL2(Var a, double eps = 1e-12);
Var LayerNormRows(Var a, Var gain, Var bias, double eps = 1e-5);

// Shape.
Var ConcatCols(const std::vector<Var>& parts);
Var ConcatRows(const std::vector<Var>& parts);
Var SliceRows(Var a, int start, int count);
Var SliceCols(Var a, int start, int count);
Var Reshape(Var a, int rows, int cols);
// Row i of the result is row `index[i]` of `table` (embedding lookup).
Var GatherRows(Var table, const std::vector<int>& index);

// Reductions.
Var RowSums(Var a);  // rows x 1
Var ColSums(Var a);  // 1 x cols
Var Sum(Var a);      // 1 x 1
Var Mean(Var a);     // 1 x 1
Var Element(Var a, int r, int c);
Var AddN(const std::vector<Var>& terms);

// Cuts the gradient path; the value is copied as a constant.
Var Detach(Var a);

}  // namespace slotmem::ad

#endif  // SLOTMEM_AD_OPS_H_
