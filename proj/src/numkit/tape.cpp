#include "numkit/tape.hpp"

#include "common/errors.hpp"

namespace mgh::num {

const Tensor& Var::value() const { return tape_->value(*this); }
bool Var::requires_grad() const { return tape_->requires_grad(*this); }

Var Tape::leaf(Tensor value, bool requires_grad) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(Tensor value, std::initializer_list<Var> inputs, BackwardFn fn) {
  return record(std::move(value), std::span<const Var>(inputs.begin(), inputs.size()),
                std::move(fn));
}

Var Tape::record(Tensor value, std::span<const Var> inputs, BackwardFn fn) {
  bool needs = false;
  for (const Var& in : inputs) {
    check_owned(in);
    needs = needs || nodes_[in.id_].requires_grad;
  }
  Node n;
  n.value = std::move(value);
  n.requires_grad = needs;
  if (needs) n.backward = std::move(fn);
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

void Tape::check_owned(Var v) const {
  if (v.tape_ != this || v.id_ >= nodes_.size()) {
    throw ContractError("variable does not belong to this tape");
  }
}

const Tensor* Tape::grad(Var v) const {
  check_owned(v);
  const Node& n = nodes_[v.id_];
  return n.has_grad ? &n.grad : nullptr;
}

Tensor Tape::grad_or_zeros(Var v) const {
  if (const Tensor* g = grad(v)) return *g;
  Tensor z(value(v).shape());
  return z;
}

Tensor* Tape::sink(Var v) {
  Node& n = nodes_[v.id_];
  if (!n.requires_grad) return nullptr;
  if (!n.has_grad) {
    n.grad = Tensor(n.value.shape());
    n.has_grad = true;
  }
  return &n.grad;
}

void Tape::backward(Var loss) {
  check_owned(loss);
  if (value(loss).size() != 1) {
    throw ContractError("backward requires a scalar loss, got shape " +
                        shape_string(value(loss).shape()));
  }
  backward(loss, Tensor(value(loss).shape(), {1.0}));
}

void Tape::backward(Var output, const Tensor& seed) {
  check_owned(output);
  if (seed.shape() != value(output).shape()) {
    throw ShapeError("backward seed " + shape_string(seed.shape()) +
                     " does not match output " + shape_string(value(output).shape()));
  }
  Tensor* g = sink(output);
  if (g == nullptr) return;
  for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += seed[i];
  sweep(output.id_);
}

void Tape::sweep(std::size_t from) {
  for (std::size_t i = from + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.has_grad || !n.backward) continue;
    n.backward(*this, n.grad);
  }
}

void Tape::zero_grad() {
  for (Node& n : nodes_) {
    n.has_grad = false;
    n.grad = Tensor();
  }
}

}  // namespace mgh::num
