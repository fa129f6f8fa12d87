#include "iblab/params.h"

#include <cmath>

#include "iblab/error.h"

namespace iblab {

void ParamStore::add(const std::string& name, Tensor value) {
  if (contains(name)) fail(ErrorKind::kConfig, "duplicate parameter '" + name + "'");
  Entry e;
  e.name = name;
  e.grad = Tensor(value.shape(), 0.0);
  e.first_moment = Tensor(value.shape(), 0.0);
  e.second_moment = Tensor(value.shape(), 0.0);
  e.value = std::move(value);
  index_[name] = entries_.size();
  entries_.push_back(std::move(e));
}

ParamStore::Entry& ParamStore::entry(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) fail(ErrorKind::kConfig, "unknown parameter '" + name + "'");
  return entries_[it->second];
}

const ParamStore::Entry& ParamStore::entry(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) fail(ErrorKind::kConfig, "unknown parameter '" + name + "'");
  return entries_[it->second];
}

Tensor& ParamStore::value(const std::string& name) { return entry(name).value; }
const Tensor& ParamStore::value(const std::string& name) const { return entry(name).value; }
const Tensor& ParamStore::grad(const std::string& name) const { return entry(name).grad; }

void ParamStore::accumulate_grad(const std::string& name, const Tensor& delta) {
  Entry& e = entry(name);
  if (!delta.same_shape(e.value)) {
    fail(ErrorKind::kUsage, "gradient shape mismatch for '" + name + "'");
  }
  auto dst = e.grad.data();
  auto src = delta.data();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
  has_grad_ = true;
}

void ParamStore::zero_grad() {
  for (Entry& e : entries_) e.grad.fill(0.0);
  has_grad_ = false;
}

std::size_t ParamStore::parameter_count() const {
  std::size_t n = 0;
  for (const Entry& e : entries_) n += e.value.size();
  return n;
}

void ParamStore::copy_values_from(const ParamStore& other) {
  if (other.entries_.size() != entries_.size()) {
    fail(ErrorKind::kConfig, "parameter stores differ in layout");
  }
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].name != other.entries_[i].name ||
        !entries_[i].value.same_shape(other.entries_[i].value)) {
      fail(ErrorKind::kConfig, "parameter stores differ in layout at '" + entries_[i].name + "'");
    }
    entries_[i].value = other.entries_[i].value;
  }
}

bool ParamStore::same_values(const ParamStore& other) const {
  if (other.entries_.size() != entries_.size()) return false;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].name != other.entries_[i].name) return false;
    if (!(entries_[i].value == other.entries_[i].value)) return false;
  }
  return true;
}

void adam_step(ParamStore& store, double learning_rate, const AdamConfig& config) {
  if (!store.has_grad_) fail(ErrorKind::kUsage, "adam_step() before any gradient was computed");
  ++store.adam_steps_;
  const double t = static_cast<double>(store.adam_steps_);
  const double correction1 = 1.0 - std::pow(config.beta1, t);
  const double correction2 = 1.0 - std::pow(config.beta2, t);
  for (auto& e : store.entries_) {
    auto w = e.value.data();
    auto g = e.grad.data();
    auto m = e.first_moment.data();
    auto v = e.second_moment.data();
    for (std::size_t i = 0; i < w.size(); ++i) {
      m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * g[i];
      v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * g[i] * g[i];
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      w[i] -= learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
    }
  }
  store.zero_grad();
}

}  // namespace iblab
