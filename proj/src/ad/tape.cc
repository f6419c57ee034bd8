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

#include "slotmem/ad/tape.h"

#include <stdexcept>
#include <utility>

namespace slotmem::ad {

Parameter& ParameterStore::Create(const std::string& name, Matrix init) {
  if (index_.count(name)) {
    throw std::invalid_argument("duplicate parameter name: " + name);
  }
  auto p = std::make_unique<Parameter>();
  p->name = name;
  p->grad = Matrix::Zero(init.rows(), init.cols());
  p->value = std::move(init);
  Parameter* raw = p.get();
  params_.push_back(std::move(p));
  index_[name] = raw;
  return *raw;
}

Parameter* ParameterStore::Find(const std::string& name) {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : it->second;
}

const Parameter* ParameterStore::Find(const std::string& name) const {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : it->second;
}

Parameter& ParameterStore::Get(const std::string& name) {
  Parameter* p = Find(name);
  if (!p) throw std::out_of_range("unknown parameter: " + name);
  return *p;
}

void ParameterStore::ZeroGrad() {
  for (auto& p : params_) p->grad.setZero();
}

std::size_t ParameterStore::NumScalars() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p->value.size();
  return n;
}

void ParameterStore::CopyValuesFrom(const ParameterStore& other) {
  if (other.params_.size() != params_.size()) {
    throw std::invalid_argument("parameter layout mismatch");
  }
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const Parameter& src = *other.params_[i];
    Parameter& dst = *params_[i];
    if (src.name != dst.name || src.value.rows() != dst.value.rows() ||
        src.value.cols() != dst.value.cols()) {
      throw std::invalid_argument("parameter layout mismatch at " + dst.name);
    }
    dst.value = src.value;
  }
}

Var Tape::Constant(Matrix value) {
  Node n;
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Tape::Scalar(double v) {
  Matrix m(1, 1);
  m(0, 0) = v;
  return Constant(std::move(m));
}

Var Tape::Leaf(Parameter& param) {
  auto it = leaf_cache_.find(&param);
  if (it != leaf_cache_.end()) return Var(this, it->second);
  Node n;
  n.value = param.value;
  n.requires_grad = record_;
  n.param = &param;
  nodes_.push_back(std::move(n));
  int id = static_cast<int>(nodes_.size()) - 1;
  leaf_cache_[&param] = id;
  return Var(this, id);
}

Var Tape::Emit(Matrix value, std::initializer_list<Var> parents,
               BackwardFn fn) {
  Node n;
  n.value = std::move(value);
  if (record_) {
    for (const Var& p : parents) {
      if (nodes_[p.id()].requires_grad) {
        n.requires_grad = true;
        break;
      }
    }
    if (n.requires_grad) n.backward = std::move(fn);
  }
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Tape::Emit(Matrix value, const std::vector<Var>& parents, BackwardFn fn) {
  Node n;
  n.value = std::move(value);
  if (record_) {
    for (const Var& p : parents) {
      if (nodes_[p.id()].requires_grad) {
        n.requires_grad = true;
        break;
      }
    }
    if (n.requires_grad) n.backward = std::move(fn);
  }
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Matrix& Tape::grad(int id) {
  Node& n = nodes_[id];
  if (n.grad.size() == 0) n.grad = Matrix::Zero(n.value.rows(), n.value.cols());
  return n.grad;
}

void Tape::Backward(Var loss) {
  if (!record_) throw std::logic_error("Backward on a non-recording tape");
  if (loss.tape() != this) throw std::invalid_argument("foreign variable");
  if (loss.value().size() != 1) {
    throw std::invalid_argument("Backward expects a scalar loss");
  }
  grad(loss.id())(0, 0) += 1.0;
  for (int id = loss.id(); id >= 0; --id) {
    Node& n = nodes_[id];
    if (!n.requires_grad || n.grad.size() == 0) continue;
    if (n.backward) n.backward(*this, id);
    if (n.param) n.param->grad += n.grad;
  }
}

}  // namespace slotmem::ad
