#include "iblab/ops.h"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "iblab/error.h"

namespace iblab::ops {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMat>;
using ConstMatMap = Eigen::Map<const RowMat>;

ConstMatMap as_matrix(const Tensor& t) {
  return ConstMatMap(t.data().data(), static_cast<Eigen::Index>(t.rows()),
                     static_cast<Eigen::Index>(t.cols()));
}

MatMap as_matrix(Tensor& t) {
  return MatMap(t.data().data(), static_cast<Eigen::Index>(t.rows()),
                static_cast<Eigen::Index>(t.cols()));
}

void require_same_shape(const Var& a, const Var& b, const char* op) {
  if (!a.value().same_shape(b.value())) {
    fail(ErrorKind::kConfig, std::string(op) + ": shape mismatch " + a.value().shape_string() +
                                 " vs " + b.value().shape_string());
  }
}

void require_matrix(const Var& x, const char* op) {
  if (x.value().rank() != 2) {
    fail(ErrorKind::kConfig, std::string(op) + ": expected a [batch x d] matrix, got " +
                                 x.value().shape_string());
  }
}

}  // namespace

Var linear(const Var& input, const Var& weights, const Var& bias) {
  const Tensor& x = input.value();
  const Tensor& w = weights.value();
  const Tensor& b = bias.value();
  if (x.rank() != 2 || w.rank() != 2 || x.cols() != w.rows() || b.size() != w.cols()) {
    fail(ErrorKind::kConfig, "linear: incompatible shapes input " + x.shape_string() +
                                 ", weights " + w.shape_string() + ", bias " + b.shape_string());
  }
  Tensor out({x.rows(), w.cols()});
  auto y = as_matrix(out);
  y.noalias() = as_matrix(x) * as_matrix(w);
  y.rowwise() += Eigen::Map<const Eigen::RowVectorXd>(b.data().data(),
                                                      static_cast<Eigen::Index>(b.size()));
  const std::size_t xi = input.id(), wi = weights.id(), bi = bias.id();
  return input.tape()->record(std::move(out), {input, weights, bias},
                              [xi, wi, bi](Tape& t, std::size_t self) {
    const auto dy = as_matrix(t.grad(self));
    if (t.requires_grad(xi)) {
      as_matrix(t.grad_buffer(xi)).noalias() += dy * as_matrix(t.value(wi)).transpose();
    }
    if (t.requires_grad(wi)) {
      as_matrix(t.grad_buffer(wi)).noalias() += as_matrix(t.value(xi)).transpose() * dy;
    }
    if (t.requires_grad(bi)) {
      Tensor& gb = t.grad_buffer(bi);
      Eigen::Map<Eigen::RowVectorXd>(gb.data().data(), static_cast<Eigen::Index>(gb.size())) +=
          dy.colwise().sum();
    }
  });
}

Var relu(const Var& x) {
  Tensor out = x.value();
  for (double& v : out.data()) v = v > 0.0 ? v : 0.0;
  const std::size_t xi = x.id();
  return x.tape()->record(std::move(out), {x}, [xi](Tape& t, std::size_t self) {
    const auto in = t.value(xi).data();
    const auto dy = t.grad(self).data();
    auto dx = t.grad_buffer(xi).data();
    for (std::size_t i = 0; i < dx.size(); ++i) {
      if (in[i] > 0.0) dx[i] += dy[i];
    }
  });
}

Var add(const Var& a, const Var& b) {
  require_same_shape(a, b, "add");
  Tensor out = a.value();
  auto o = out.data();
  auto bv = b.value().data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] += bv[i];
  const std::size_t ai = a.id(), bi = b.id();
  return a.tape()->record(std::move(out), {a, b}, [ai, bi](Tape& t, std::size_t self) {
    t.accumulate(ai, t.grad(self));
    t.accumulate(bi, t.grad(self));
  });
}

Var sub(const Var& a, const Var& b) {
  require_same_shape(a, b, "sub");
  Tensor out = a.value();
  auto o = out.data();
  auto bv = b.value().data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] -= bv[i];
  const std::size_t ai = a.id(), bi = b.id();
  return a.tape()->record(std::move(out), {a, b}, [ai, bi](Tape& t, std::size_t self) {
    t.accumulate(ai, t.grad(self));
    if (t.requires_grad(bi)) {
      const auto dy = t.grad(self).data();
      auto db = t.grad_buffer(bi).data();
      for (std::size_t i = 0; i < db.size(); ++i) db[i] -= dy[i];
    }
  });
}

Var mul(const Var& a, const Var& b) {
  require_same_shape(a, b, "mul");
  Tensor out = a.value();
  auto o = out.data();
  auto bv = b.value().data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] *= bv[i];
  const std::size_t ai = a.id(), bi = b.id();
  return a.tape()->record(std::move(out), {a, b}, [ai, bi](Tape& t, std::size_t self) {
    const auto dy = t.grad(self).data();
    if (t.requires_grad(ai)) {
      const auto bv = t.value(bi).data();
      auto da = t.grad_buffer(ai).data();
      for (std::size_t i = 0; i < da.size(); ++i) da[i] += dy[i] * bv[i];
    }
    if (t.requires_grad(bi)) {
      const auto av = t.value(ai).data();
      auto db = t.grad_buffer(bi).data();
      for (std::size_t i = 0; i < db.size(); ++i) db[i] += dy[i] * av[i];
    }
  });
}

Var scale(const Var& x, double factor) {
  Tensor out = x.value();
  for (double& v : out.data()) v *= factor;
  const std::size_t xi = x.id();
  return x.tape()->record(std::move(out), {x}, [xi, factor](Tape& t, std::size_t self) {
    const auto dy = t.grad(self).data();
    auto dx = t.grad_buffer(xi).data();
    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += factor * dy[i];
  });
}

Var mul_const(const Var& x, const Tensor& mask) {
  if (!x.value().same_shape(mask)) {
    fail(ErrorKind::kConfig, "mul_const: shape mismatch " + x.value().shape_string() + " vs " +
                                 mask.shape_string());
  }
  Tensor out = x.value();
  auto o = out.data();
  auto m = mask.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] *= m[i];
  const std::size_t xi = x.id();
  return x.tape()->record(std::move(out), {x}, [xi, mask](Tape& t, std::size_t self) {
    const auto dy = t.grad(self).data();
    const auto m = mask.data();
    auto dx = t.grad_buffer(xi).data();
    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += dy[i] * m[i];
  });
}

Var exp(const Var& x) {
  Tensor out = x.value();
  for (double& v : out.data()) v = std::exp(v);
  if (!out.all_finite()) fail(ErrorKind::kNumerical, "exp overflowed to a non-finite value");
  const std::size_t xi = x.id();
  return x.tape()->record(std::move(out), {x}, [xi](Tape& t, std::size_t self) {
    const auto dy = t.grad(self).data();
    const auto y = t.value(self).data();
    auto dx = t.grad_buffer(xi).data();
    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += dy[i] * y[i];
  });
}

Var sum(const Var& x) {
  double total = 0.0;
  for (double v : x.value().data()) total += v;
  const std::size_t xi = x.id();
  return x.tape()->record(Tensor::scalar(total), {x}, [xi](Tape& t, std::size_t self) {
    const double dy = t.grad(self)[0];
    for (double& d : t.grad_buffer(xi).data()) d += dy;
  });
}

Var mean(const Var& x) {
  const double n = static_cast<double>(x.value().size());
  return scale(sum(x), 1.0 / n);
}

Var concat_cols(const Var& a, const Var& b) {
  require_matrix(a, "concat_cols");
  require_matrix(b, "concat_cols");
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.rows() != bv.rows()) fail(ErrorKind::kConfig, "concat_cols: row count mismatch");
  const std::size_t ca = av.cols(), cb = bv.cols(), rows = av.rows();
  Tensor out({rows, ca + cb});
  for (std::size_t r = 0; r < rows; ++r) {
    std::copy_n(av.row(r).begin(), ca, out.row(r).begin());
    std::copy_n(bv.row(r).begin(), cb, out.row(r).begin() + ca);
  }
  const std::size_t ai = a.id(), bi = b.id();
  return a.tape()->record(std::move(out), {a, b}, [ai, bi, ca, cb, rows](Tape& t, std::size_t self) {
    const Tensor& dy = t.grad(self);
    if (t.requires_grad(ai)) {
      Tensor& da = t.grad_buffer(ai);
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < ca; ++c) da(r, c) += dy(r, c);
    }
    if (t.requires_grad(bi)) {
      Tensor& db = t.grad_buffer(bi);
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cb; ++c) db(r, c) += dy(r, ca + c);
    }
  });
}

Var slice_cols(const Var& x, std::size_t begin, std::size_t end) {
  require_matrix(x, "slice_cols");
  const Tensor& xv = x.value();
  if (begin >= end || end > xv.cols()) fail(ErrorKind::kConfig, "slice_cols: bad column range");
  const std::size_t rows = xv.rows(), width = end - begin;
  Tensor out({rows, width});
  for (std::size_t r = 0; r < rows; ++r)
    std::copy_n(xv.row(r).begin() + begin, width, out.row(r).begin());
  const std::size_t xi = x.id();
  return x.tape()->record(std::move(out), {x}, [xi, begin, width, rows](Tape& t, std::size_t self) {
    const Tensor& dy = t.grad(self);
    Tensor& dx = t.grad_buffer(xi);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < width; ++c) dx(r, begin + c) += dy(r, c);
  });
}

Var pick(const Var& x, std::span<const int> index) {
  require_matrix(x, "pick");
  const Tensor& xv = x.value();
  if (index.size() != xv.rows()) fail(ErrorKind::kConfig, "pick: one index per row required");
  Tensor out({xv.rows(), 1});
  for (std::size_t r = 0; r < xv.rows(); ++r) {
    if (index[r] < 0 || static_cast<std::size_t>(index[r]) >= xv.cols()) {
      fail(ErrorKind::kConfig, "pick: column index out of range");
    }
    out[r] = xv(r, index[r]);
  }
  std::vector<int> idx(index.begin(), index.end());
  const std::size_t xi = x.id();
  return x.tape()->record(std::move(out), {x}, [xi, idx = std::move(idx)](Tape& t, std::size_t self) {
    const Tensor& dy = t.grad(self);
    Tensor& dx = t.grad_buffer(xi);
    for (std::size_t r = 0; r < idx.size(); ++r) dx(r, idx[r]) += dy[r];
  });
}

Tensor softmax_rows(const Tensor& logits) {
  Tensor p = logits;
  for (std::size_t r = 0; r < p.rows(); ++r) {
    auto row = p.row(r);
    const double mx = *std::max_element(row.begin(), row.end());
    double z = 0.0;
    for (double& v : row) {
      v = std::exp(v - mx);
      z += v;
    }
    for (double& v : row) v /= z;
  }
  return p;
}

std::vector<int> argmax_rows(const Tensor& x) {
  std::vector<int> out(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto row = x.row(r);
    out[r] = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
  }
  return out;
}

Var softmax_cross_entropy(const Var& logits, std::span<const int> labels) {
  require_matrix(logits, "softmax_cross_entropy");
  const Tensor& z = logits.value();
  const std::size_t n = z.rows(), k = z.cols();
  if (labels.size() != n) fail(ErrorKind::kConfig, "softmax_cross_entropy: one label per row required");
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= k) {
      fail(ErrorKind::kData, "label " + std::to_string(y) + " outside [0, " + std::to_string(k) + ")");
    }
  }
  double total = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    auto row = z.row(r);
    const double mx = *std::max_element(row.begin(), row.end());
    double s = 0.0;
    for (double v : row) s += std::exp(v - mx);
    total += mx + std::log(s) - row[labels[r]];
  }
  std::vector<int> y(labels.begin(), labels.end());
  const std::size_t li = logits.id();
  return logits.tape()->record(Tensor::scalar(total / static_cast<double>(n)), {logits},
                               [li, y = std::move(y)](Tape& t, std::size_t self) {
    const double dy = t.grad(self)[0];
    Tensor p = softmax_rows(t.value(li));
    const double inv_n = 1.0 / static_cast<double>(p.rows());
    for (std::size_t r = 0; r < p.rows(); ++r) p(r, y[r]) -= 1.0;
    auto dx = t.grad_buffer(li).data();
    auto pv = p.data();
    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += dy * inv_n * pv[i];
  });
}

Var log_mean_exp(const Var& x) {
  const auto v = x.value().data();
  const double mx = *std::max_element(v.begin(), v.end());
  double s = 0.0;
  for (double e : v) s += std::exp(e - mx);
  const double n = static_cast<double>(v.size());
  const double out = mx + std::log(s / n);
  const std::size_t xi = x.id();
  return x.tape()->record(Tensor::scalar(out), {x}, [xi, mx, s](Tape& t, std::size_t self) {
    const double dy = t.grad(self)[0];
    const auto in = t.value(xi).data();
    auto dx = t.grad_buffer(xi).data();
    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += dy * std::exp(in[i] - mx) / s;
  });
}

Var gaussian_kl_to_standard(const Var& mu, const Var& log_var) {
  require_same_shape(mu, log_var, "gaussian_kl_to_standard");
  require_matrix(mu, "gaussian_kl_to_standard");
  const auto m = mu.value().data();
  const auto lv = log_var.value().data();
  double total = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    total += 0.5 * (m[i] * m[i] + std::exp(lv[i]) - lv[i] - 1.0);
  }
  const double n = static_cast<double>(mu.value().rows());
  const std::size_t mi = mu.id(), li = log_var.id();
  return mu.tape()->record(Tensor::scalar(total / n), {mu, log_var},
                           [mi, li, n](Tape& t, std::size_t self) {
    const double dy = t.grad(self)[0] / n;
    if (t.requires_grad(mi)) {
      const auto m = t.value(mi).data();
      auto dm = t.grad_buffer(mi).data();
      for (std::size_t i = 0; i < dm.size(); ++i) dm[i] += dy * m[i];
    }
    if (t.requires_grad(li)) {
      const auto lv = t.value(li).data();
      auto dl = t.grad_buffer(li).data();
      for (std::size_t i = 0; i < dl.size(); ++i) dl[i] += dy * 0.5 * (std::exp(lv[i]) - 1.0);
    }
  });
}

Var pairwise_kernel_entropy(const Var& z, double sigma) {
  require_matrix(z, "pairwise_kernel_entropy");
  if (!(sigma > 0.0)) fail(ErrorKind::kConfig, "pairwise_kernel_entropy: sigma must be positive");
  const Tensor& zv = z.value();
  const std::size_t m = zv.rows(), d = zv.cols();
  const double inv_two_var = 1.0 / (2.0 * sigma * sigma);
  // kernel[i*m + j] = exp(-|z_i - z_j|^2 / (2 sigma^2)); diagonal is 1 so row
  // sums are >= 1 and the logarithm never underflows.
  std::vector<double> kernel(m * m);
  std::vector<double> row_sum(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    kernel[i * m + i] = 1.0;
    for (std::size_t j = i + 1; j < m; ++j) {
      double dist2 = 0.0;
      for (std::size_t c = 0; c < d; ++c) {
        const double diff = zv(i, c) - zv(j, c);
        dist2 += diff * diff;
      }
      const double k = std::exp(-dist2 * inv_two_var);
      kernel[i * m + j] = k;
      kernel[j * m + i] = k;
    }
  }
  double total = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) row_sum[i] += kernel[i * m + j];
    total += std::log(row_sum[i] / static_cast<double>(m));
  }
  const double out = -total / static_cast<double>(m);
  const std::size_t zi = z.id();
  return z.tape()->record(
      Tensor::scalar(out), {z},
      [zi, m, d, inv_two_var, kernel = std::move(kernel), row_sum = std::move(row_sum)](
          Tape& t, std::size_t self) {
        const double dy = t.grad(self)[0];
        const Tensor& zv = t.value(zi);
        Tensor& dz = t.grad_buffer(zi);
        const double coeff = dy * 2.0 * inv_two_var / static_cast<double>(m);
        for (std::size_t a = 0; a < m; ++a) {
          for (std::size_t j = 0; j < m; ++j) {
            if (j == a) continue;
            const double w = kernel[a * m + j] * (1.0 / row_sum[a] + 1.0 / row_sum[j]);
            for (std::size_t c = 0; c < d; ++c) dz(a, c) += coeff * w * (zv(a, c) - zv(j, c));
          }
        }
      });
}

}  // namespace iblab::ops
