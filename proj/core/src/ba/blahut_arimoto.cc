#include "iblab/ba/blahut_arimoto.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "iblab/error.h"
#include "iblab/info.h"
#include "iblab/rng.h"

namespace iblab {

namespace {

constexpr double kWarmStartNoise = 0.05;
constexpr double kSupportMergeTolerance = 1e-6;

struct Marginals {
  std::vector<double> p_z;
  Tensor p_y_given_z;
};

std::vector<double> input_marginal(const DiscreteJoint& joint) {
  return info::row_marginal(joint.p_xy);
}

Tensor conditional_y_given_x(const DiscreteJoint& joint, const std::vector<double>& px) {
  Tensor out({joint.nx(), joint.ny()});
  for (std::size_t x = 0; x < joint.nx(); ++x) {
    for (std::size_t y = 0; y < joint.ny(); ++y) {
      out(x, y) = px[x] > 0.0 ? joint.p_xy(x, y) / px[x] : 1.0 / static_cast<double>(joint.ny());
    }
  }
  return out;
}

Marginals marginals(const DiscreteJoint& joint, const std::vector<double>& px, const Tensor& enc) {
  const std::size_t nz = enc.cols(), ny = joint.ny();
  Marginals m{std::vector<double>(nz, 0.0), Tensor({nz, ny})};
  for (std::size_t x = 0; x < joint.nx(); ++x) {
    for (std::size_t z = 0; z < nz; ++z) {
      const double w = enc(x, z);
      m.p_z[z] += px[x] * w;
      for (std::size_t y = 0; y < ny; ++y) m.p_y_given_z(z, y) += joint.p_xy(x, y) * w;
    }
  }
  for (std::size_t z = 0; z < nz; ++z) {
    for (std::size_t y = 0; y < ny; ++y) {
      m.p_y_given_z(z, y) = m.p_z[z] > 0.0 ? m.p_y_given_z(z, y) / m.p_z[z] : 1.0 / static_cast<double>(ny);
    }
  }
  return m;
}

// KL(p(y|x) || p(y|z)) for every (x, z).
Tensor distortion(const Tensor& pyx, const Tensor& pyz) {
  Tensor d({pyx.rows(), pyz.rows()});
  for (std::size_t x = 0; x < pyx.rows(); ++x)
    for (std::size_t z = 0; z < pyz.rows(); ++z) d(x, z) = kl_discrete(pyx.row(x), pyz.row(z));
  return d;
}

double objective(const std::vector<double>& px, const Tensor& enc, const Marginals& m,
                 const Tensor& dist, double beta) {
  double total = 0.0;
  for (std::size_t x = 0; x < enc.rows(); ++x) {
    if (px[x] <= 0.0) continue;
    for (std::size_t z = 0; z < enc.cols(); ++z) {
      const double w = enc(x, z);
      if (w <= 0.0) continue;
      total += px[x] * w * (std::log(w / m.p_z[z]) + beta * dist(x, z));
    }
  }
  return total;
}

void normalize_rows_from_logits(Tensor& logits) {
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    auto row = logits.row(r);
    const double peak = *std::max_element(row.begin(), row.end());
    double s = 0.0;
    for (double& v : row) {
      v = std::isfinite(v) ? std::exp(v - peak) : 0.0;
      s += v;
    }
    for (double& v : row) v /= s;
  }
}

Tensor initial_encoder(std::size_t nx, std::size_t nz, std::uint64_t seed, const BAEncoder* warm) {
  Rng rng(Rng::derive(seed, 0xba));
  Tensor logits({nx, nz});
  if (warm) {
    if (warm->p_z_given_x.rows() != nx || warm->p_z_given_x.cols() != nz) {
      fail(ErrorKind::kUsage, "warm-start encoder has the wrong shape");
    }
    for (std::size_t i = 0; i < logits.size(); ++i) {
      const double w = warm->p_z_given_x[i];
      logits[i] = w > 0.0 ? std::log(w) + kWarmStartNoise * rng.normal() : -INFINITY;
    }
  } else {
    for (double& v : logits.data()) v = rng.normal();
  }
  normalize_rows_from_logits(logits);
  return logits;
}

}  // namespace

void DiscreteJoint::validate() const {
  if (p_xy.rank() != 2 || p_xy.empty()) fail(ErrorKind::kConfig, "joint must be a nonempty [|X| x |Y|] table");
  double total = 0.0;
  for (double v : p_xy.data()) {
    if (!(v >= 0.0) || !std::isfinite(v)) fail(ErrorKind::kConfig, "joint has a negative or non-finite entry");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    std::ostringstream msg;
    msg << "joint sums to " << total << ", not 1";
    fail(ErrorKind::kConfig, msg.str());
  }
}

void BAConfig::validate() const {
  if (cardinality < 1) fail(ErrorKind::kConfig, "bottleneck cardinality must be at least 1");
  if (!(beta_ba >= 0.0) || !std::isfinite(beta_ba)) fail(ErrorKind::kConfig, "beta_ba must be finite and nonnegative");
  if (!(tol > 0.0)) fail(ErrorKind::kConfig, "tolerance must be positive");
  if (max_iter < 1) fail(ErrorKind::kConfig, "max_iter must be positive");
}

double kl_discrete(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) fail(ErrorKind::kUsage, "KL arguments differ in length");
  double q_total = 0.0;
  for (double v : q) q_total += std::max(v, kBaFloor);
  double kl = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    kl += p[i] * std::log(p[i] * q_total / std::max(q[i], kBaFloor));
  }
  return std::max(kl, 0.0);
}

std::pair<double, double> ba_information(const DiscreteJoint& joint, const BAEncoder& encoder) {
  const auto px = input_marginal(joint);
  const std::size_t nz = encoder.p_z_given_x.cols();
  Tensor xz({joint.nx(), nz});
  Tensor zy({nz, joint.ny()});
  for (std::size_t x = 0; x < joint.nx(); ++x) {
    for (std::size_t z = 0; z < nz; ++z) {
      const double w = encoder.p_z_given_x(x, z);
      xz(x, z) = px[x] * w;
      for (std::size_t y = 0; y < joint.ny(); ++y) zy(z, y) += joint.p_xy(x, y) * w;
    }
  }
  return {info::mutual_information_bits(xz), info::mutual_information_bits(zy)};
}

std::size_t effective_support(const BAEncoder& encoder, double threshold) {
  std::vector<std::size_t> distinct;
  const Tensor& dec = encoder.p_y_given_z;
  for (std::size_t z = 0; z < encoder.p_z.size(); ++z) {
    if (encoder.p_z[z] <= threshold) continue;
    const bool seen = std::any_of(distinct.begin(), distinct.end(), [&](std::size_t w) {
      for (std::size_t y = 0; y < dec.cols(); ++y)
        if (std::abs(dec(z, y) - dec(w, y)) > kSupportMergeTolerance) return false;
      return true;
    });
    if (!seen) distinct.push_back(z);
  }
  return distinct.size();
}

BAResult ba_solve(const DiscreteJoint& joint, const BAConfig& config, const BAEncoder* warm_start) {
  joint.validate();
  config.validate();
  const auto px = input_marginal(joint);
  const Tensor pyx = conditional_y_given_x(joint, px);
  const std::size_t nx = joint.nx(), nz = config.cardinality;

  BAResult result;
  Tensor enc = initial_encoder(nx, nz, config.seed, warm_start);
  Marginals m = marginals(joint, px, enc);
  Tensor dist = distortion(pyx, m.p_y_given_z);
  Tensor next({nx, nz});
  for (int it = 1; it <= config.max_iter; ++it) {
    for (std::size_t x = 0; x < nx; ++x) {
      for (std::size_t z = 0; z < nz; ++z) {
        next(x, z) = m.p_z[z] > 0.0 ? std::log(m.p_z[z]) - config.beta_ba * dist(x, z) : -INFINITY;
      }
    }
    normalize_rows_from_logits(next);
    double change = 0.0;
    for (std::size_t i = 0; i < enc.size(); ++i) change = std::max(change, std::abs(next[i] - enc[i]));
    std::swap(enc, next);
    m = marginals(joint, px, enc);
    dist = distortion(pyx, m.p_y_given_z);
    result.objective_trace.push_back(objective(px, enc, m, dist, config.beta_ba));
    result.iterations = it;
    if (change < config.tol) {
      result.converged = true;
      break;
    }
  }
  result.encoder = BAEncoder{std::move(enc), std::move(m.p_z), std::move(m.p_y_given_z)};
  std::tie(result.mi_xz_bits, result.mi_zy_bits) = ba_information(joint, result.encoder);
  return result;
}

std::vector<BACurvePoint> ba_curve(const DiscreteJoint& joint, std::span<const double> grid,
                                   const BAConfig& base, bool cold_start) {
  if (grid.empty()) fail(ErrorKind::kConfig, "multiplier grid is empty");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) fail(ErrorKind::kConfig, "multiplier grid must be strictly ascending");
  }
  std::vector<BACurvePoint> out;
  BAEncoder previous;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    BAConfig cfg = base;
    cfg.beta_ba = grid[i];
    cfg.seed = Rng::derive(base.seed, i);
    const bool warm = !cold_start && i > 0;
    BAResult r = ba_solve(joint, cfg, warm ? &previous : nullptr);
    BACurvePoint p;
    p.beta_ba = grid[i];
    p.beta_lagrangian = grid[i] > 0.0 ? 1.0 / grid[i] : INFINITY;
    p.mi_xz_bits = r.mi_xz_bits;
    p.mi_zy_bits = r.mi_zy_bits;
    p.converged = r.converged;
    p.iterations = r.iterations;
    p.support = effective_support(r.encoder);
    out.push_back(p);
    previous = std::move(r.encoder);
  }
  return out;
}

CsvTable ba_curve_table(const std::vector<BACurvePoint>& points) {
  CsvTable t;
  t.schema = "iblab.ba_curve";
  t.columns = {"beta_ba", "beta_lagrangian", "mi_xz_bits", "mi_zy_bits", "converged", "iterations"};
  for (const auto& p : points) {
    t.rows.push_back({format_double(p.beta_ba), format_double(p.beta_lagrangian), format_double(p.mi_xz_bits),
                      format_double(p.mi_zy_bits), p.converged ? "1" : "0", std::to_string(p.iterations)});
  }
  return t;
}

std::vector<BACurvePoint> ba_curve_from_table(const CsvTable& t) {
  const std::size_t c_beta = t.column("beta_ba"), c_lag = t.column("beta_lagrangian"), c_xz = t.column("mi_xz_bits"),
                    c_zy = t.column("mi_zy_bits"), c_conv = t.column("converged"), c_it = t.column("iterations");
  std::vector<BACurvePoint> out;
  for (const auto& row : t.rows) {
    BACurvePoint p;
    p.beta_ba = parse_double(row[c_beta]);
    p.beta_lagrangian = parse_double(row[c_lag]);
    p.mi_xz_bits = parse_double(row[c_xz]);
    p.mi_zy_bits = parse_double(row[c_zy]);
    p.converged = row[c_conv] == "1";
    p.iterations = std::stoi(row[c_it]);
    out.push_back(p);
  }
  return out;
}

}  // namespace iblab
