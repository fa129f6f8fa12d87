#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "iblab/tensor.h"

namespace iblab {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Named parameter tensors of one network plus their gradients and Adam
/// moments. Insertion order is preserved and defines serialization order.
class ParamStore {
 public:
  struct Entry {
    std::string name;
    Tensor value;
    Tensor grad;
    Tensor first_moment;
    Tensor second_moment;
  };

  void add(const std::string& name, Tensor value);
  bool contains(const std::string& name) const { return index_.count(name) > 0; }

  Tensor& value(const std::string& name);
  const Tensor& value(const std::string& name) const;
  const Tensor& grad(const std::string& name) const;

  void accumulate_grad(const std::string& name, const Tensor& delta);
  void zero_grad();
  // True once any gradient was accumulated since the last zero_grad().
  bool has_grad() const { return has_grad_; }

  std::vector<Entry>& entries() { return entries_; }
  const std::vector<Entry>& entries() const { return entries_; }
  std::size_t parameter_count() const;

  std::int64_t adam_steps() const { return adam_steps_; }
  void set_adam_steps(std::int64_t steps) { adam_steps_ = steps; }

  // Copies values only (not gradients or optimizer state) from `other`;
  // both stores must have identical names and shapes.
  void copy_values_from(const ParamStore& other);

  // Compares values only.
  bool same_values(const ParamStore& other) const;

 private:
  friend void adam_step(ParamStore&, double, const AdamConfig&);

  Entry& entry(const std::string& name);
  const Entry& entry(const std::string& name) const;

  std::vector<Entry> entries_;
  std::map<std::string, std::size_t> index_;
  std::int64_t adam_steps_ = 0;
  bool has_grad_ = false;
};

/// One bias-corrected Adam descent step on every parameter, then clears the
/// gradients. Throws a usage error if no gradient has been accumulated.
void adam_step(ParamStore& store, double learning_rate, const AdamConfig& config = {});

}  // namespace iblab
