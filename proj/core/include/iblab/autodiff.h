#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "iblab/tensor.h"

namespace iblab {

class ParamStore;
class Tape;

/// Handle to a value recorded on a Tape. Cheap to copy; valid while the tape
/// that produced it is alive and has not been cleared.
class Var {
 public:
  Var() = default;

  const Tensor& value() const;
  // Gradient of the last backward() target with respect to this value.
  // Throws a usage error if no gradient reached this node.
  const Tensor& grad() const;
  bool has_grad() const;
  bool requires_grad() const;

  Tape* tape() const { return tape_; }
  std::size_t id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Reverse-mode computation record for one forward pass. Nodes are appended
/// in evaluation order; backward() replays them in reverse.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, std::size_t self)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Leaf that never receives a gradient.
  Var constant(Tensor value);
  // Leaf whose gradient is kept and can be read after backward().
  Var input(Tensor value);
  // Leaf bound to a named parameter. backward() accumulates into the store's
  // gradient. With trainable=false the parameter is recorded as a constant.
  Var param(ParamStore& store, const std::string& name, bool trainable = true);

  // Records an operation result. `inputs` decides whether the node requires
  // a gradient; `backward` is only invoked when it does.
  Var record(Tensor value, std::initializer_list<Var> inputs, BackwardFn backward);

  void backward(const Var& loss);

  std::size_t size() const { return nodes_.size(); }
  void clear();

  const Tensor& value(std::size_t id) const { return nodes_[id].value; }
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  const Tensor& grad(std::size_t id) const;
  bool has_grad(std::size_t id) const { return !nodes_[id].grad.empty(); }

  // Adds `delta` into the gradient of node `id` (no-op if it needs none).
  void accumulate(std::size_t id, const Tensor& delta);
  // Mutable gradient buffer of node `id`, zero-initialized on first access.
  Tensor& grad_buffer(std::size_t id);

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    BackwardFn backward;
    ParamStore* store = nullptr;
    std::string param_name;
  };

  std::vector<Node> nodes_;
  bool backward_done_ = false;
};

}  // namespace iblab
