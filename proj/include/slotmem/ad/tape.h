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

#ifndef SLOTMEM_AD_TAPE_H_
#define SLOTMEM_AD_TAPE_H_

#include <cstddef>
#include <deque>
#include <functional>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

namespace slotmem::ad {

// All numerics run in 64-bit; gradient checks rely on it.
using Matrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// A named, trainable matrix with its accumulated gradient.
struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;
};

// Owns parameters in creation order. Names are unique; a name prefix up to
// the first '.' is the checkpoint segment the parameter belongs to.
class ParameterStore {
 public:
  ParameterStore() = default;
  ParameterStore(const ParameterStore&) = delete;
  ParameterStore& operator=(const ParameterStore&) = delete;

  Parameter& Create(const std::string& name, Matrix init);
  Parameter* Find(const std::string& name);
  const Parameter* Find(const std::string& name) const;
  Parameter& Get(const std::string& name);

  const std::vector<std::unique_ptr<Parameter>>& params() const {
    return params_;
  }
  void ZeroGrad();
  std::size_t NumScalars() const;
  // Copies values (not gradients) from a store with identical layout.
  void CopyValuesFrom(const ParameterStore& other);

 private:
  std::vector<std::unique_ptr<Parameter>> params_;
  std::unordered_map<std::string, Parameter*> index_;
};

class Tape;

// Handle to a node on a tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}

  const Matrix& value() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  double scalar() const { return value()(0, 0); }

  Tape* tape() const { return tape_; }
  int id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  Tape* tape_ = nullptr;
  int id_ = -1;
};

// Reverse-mode tape. Nodes are appended in evaluation order and replayed
// backwards by Backward(). With recording disabled no closures are kept,
// which is what inference-only rollouts use.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, int self)>;

  explicit Tape(bool record = true) : record_(record) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var Constant(Matrix value);
  Var Scalar(double v);
  // Parameter leaf; the same parameter maps to one node per tape.
  Var Leaf(Parameter& param);

  // Appends a node. `fn` runs only if some parent requires a gradient.
  Var Emit(Matrix value, std::initializer_list<Var> parents, BackwardFn fn);
  Var Emit(Matrix value, const std::vector<Var>& parents, BackwardFn fn);

  // Seeds d(loss)/d(loss) = 1 and accumulates into Parameter::grad.
  void Backward(Var loss);

  const Matrix& value(int id) const { return nodes_[id].value; }
  bool requires_grad(int id) const { return nodes_[id].requires_grad; }
  // Gradient buffer of `id`, zero-initialised on first access.
  Matrix& grad(int id);
  bool has_grad(int id) const { return nodes_[id].grad.size() != 0; }

  bool recording() const { return record_; }
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool requires_grad = false;
    BackwardFn backward;
    Parameter* param = nullptr;
  };

  bool record_;
  std::deque<Node> nodes_;
  std::unordered_map<const Parameter*, int> leaf_cache_;
};

inline const Matrix& Var::value() const { return tape_->value(id_); }

}  // namespace slotmem::ad

#endif  // SLOTMEM_AD_TAPE_H_
