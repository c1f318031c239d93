#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <initializer_list>
#include <span>

#include "numkit/tensor.hpp"

namespace mgh::num {

class Tape;

// Handle to a node on a Tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;

  Tape& tape() const { return *tape_; }
  std::size_t id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  bool requires_grad() const;

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

// Records primitive operations in creation order so that a reverse sweep
// visits every node after all of its consumers. Nodes whose inputs carry no
// gradient are stored without a backward rule.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, const Tensor& grad_out)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var leaf(Tensor value, bool requires_grad = true);
  Var constant(Tensor value) { return leaf(std::move(value), false); }

  Var record(Tensor value, std::initializer_list<Var> inputs, BackwardFn fn);
  Var record(Tensor value, std::span<const Var> inputs, BackwardFn fn);

  const Tensor& value(Var v) const { return nodes_[v.id_].value; }
  bool requires_grad(Var v) const { return nodes_[v.id_].requires_grad; }

  // Accumulated gradient, or nullptr if the node never received one.
  const Tensor* grad(Var v) const;
  Tensor grad_or_zeros(Var v) const;

  // Gradient buffer to accumulate into during backward; nullptr when the
  // node does not require a gradient.
  Tensor* sink(Var v);

  // Reverse sweep from a scalar node, seeding d(loss)/d(loss) = 1.
  void backward(Var loss);
  // Reverse sweep from an arbitrary node with an explicit upstream gradient.
  void backward(Var output, const Tensor& seed);

  void zero_grad();
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool has_grad = false;
    bool requires_grad = false;
    BackwardFn backward;
  };

  void check_owned(Var v) const;
  void sweep(std::size_t from);

  std::deque<Node> nodes_;
};

}  // namespace mgh::num
