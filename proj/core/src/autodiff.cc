#include "iblab/autodiff.h"

#include "iblab/error.h"
#include "iblab/params.h"

namespace iblab {

const Tensor& Var::value() const {
  if (!tape_) fail(ErrorKind::kUsage, "value() on an unbound Var");
  return tape_->value(id_);
}

const Tensor& Var::grad() const {
  if (!tape_) fail(ErrorKind::kUsage, "grad() on an unbound Var");
  return tape_->grad(id_);
}

bool Var::has_grad() const { return tape_ && tape_->has_grad(id_); }

bool Var::requires_grad() const { return tape_ && tape_->requires_grad(id_); }

Var Tape::constant(Tensor value) {
  nodes_.push_back(Node{std::move(value), {}, false, {}, nullptr, {}});
  return Var(this, nodes_.size() - 1);
}

Var Tape::input(Tensor value) {
  nodes_.push_back(Node{std::move(value), {}, true, {}, nullptr, {}});
  return Var(this, nodes_.size() - 1);
}

Var Tape::param(ParamStore& store, const std::string& name, bool trainable) {
  Node node{store.value(name), {}, trainable, {}, nullptr, {}};
  if (trainable) {
    node.store = &store;
    node.param_name = name;
  }
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(Tensor value, std::initializer_list<Var> inputs, BackwardFn backward) {
  bool needs = false;
  for (const Var& in : inputs) {
    if (in.tape() != this) fail(ErrorKind::kUsage, "operands recorded on different tapes");
    needs = needs || nodes_[in.id()].requires_grad;
  }
  nodes_.push_back(Node{std::move(value), {}, needs, needs ? std::move(backward) : BackwardFn{},
                        nullptr, {}});
  return Var(this, nodes_.size() - 1);
}

const Tensor& Tape::grad(std::size_t id) const {
  if (nodes_[id].grad.empty()) {
    fail(ErrorKind::kUsage, "no gradient reached this value; run backward() on a loss that depends on it");
  }
  return nodes_[id].grad;
}

Tensor& Tape::grad_buffer(std::size_t id) {
  Node& node = nodes_[id];
  if (node.grad.empty()) node.grad = Tensor(node.value.shape(), 0.0);
  return node.grad;
}

void Tape::accumulate(std::size_t id, const Tensor& delta) {
  if (!nodes_[id].requires_grad) return;
  Tensor& g = grad_buffer(id);
  auto dst = g.data();
  auto src = delta.data();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

void Tape::backward(const Var& loss) {
  if (nodes_.empty() || loss.tape() != this) {
    fail(ErrorKind::kUsage, "backward() without a recorded forward pass");
  }
  if (backward_done_) {
    fail(ErrorKind::kUsage, "backward() already ran on this tape; record a new forward pass");
  }
  if (loss.value().size() != 1) {
    fail(ErrorKind::kUsage, "backward() needs a scalar loss, got shape " + loss.value().shape_string());
  }
  backward_done_ = true;
  if (!nodes_[loss.id()].requires_grad) return;
  grad_buffer(loss.id())[0] = 1.0;
  for (std::size_t i = loss.id() + 1; i-- > 0;) {
    Node& node = nodes_[i];
    if (!node.requires_grad || node.grad.empty()) continue;
    if (node.backward) node.backward(*this, i);
    if (node.store) node.store->accumulate_grad(node.param_name, node.grad);
  }
}

void Tape::clear() {
  nodes_.clear();
  backward_done_ = false;
}

}  // namespace iblab
