#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "iblab/rng.h"
#include "iblab/tensor.h"

// Reference computations shared by the unit and acceptance suites. They use
// only plain loops over probability tables, never the library's solvers.
namespace iblab::oracle {

inline Tensor random_joint_2x2(std::uint64_t seed) {
  Rng rng(seed);
  Tensor p({2, 2});
  double total = 0.0;
  for (auto& v : p.storage()) total += (v = 0.05 + rng.uniform());
  for (auto& v : p.storage()) v /= total;
  return p;
}

// (I(X;Z), I(Z;Y)) in bits for a 2x2 joint and encoder p(z=0|x=0) = a,
// p(z=0|x=1) = b.
inline std::pair<double, double> encoder_information(const Tensor& pxy, double a, double b) {
  const double px[2] = {pxy(0, 0) + pxy(0, 1), pxy(1, 0) + pxy(1, 1)};
  const double enc[2][2] = {{a, 1 - a}, {b, 1 - b}};
  double pz[2] = {0, 0}, pzy[2][2] = {{0, 0}, {0, 0}};
  for (int x = 0; x < 2; ++x)
    for (int z = 0; z < 2; ++z) {
      pz[z] += px[x] * enc[x][z];
      for (int y = 0; y < 2; ++y) pzy[z][y] += pxy(x, y) * enc[x][z];
    }
  const double py[2] = {pxy(0, 0) + pxy(1, 0), pxy(0, 1) + pxy(1, 1)};
  double ixz = 0.0, izy = 0.0;
  for (int x = 0; x < 2; ++x)
    for (int z = 0; z < 2; ++z)
      if (enc[x][z] > 0 && pz[z] > 0) ixz += px[x] * enc[x][z] * std::log2(enc[x][z] / pz[z]);
  for (int z = 0; z < 2; ++z)
    for (int y = 0; y < 2; ++y)
      if (pzy[z][y] > 0) izy += pzy[z][y] * std::log2(pzy[z][y] / (pz[z] * py[y]));
  return {ixz, izy};
}

/// Minimizes I(X;Z) - beta * I(Z;Y) over the encoder square [0,1]^2 with a
/// dense grid followed by two zoomed grids around the best cell. Returns the
/// MI coordinates of the minimizer.
inline std::pair<double, double> ib_grid_search(const Tensor& pxy, double beta, int n = 1001) {
  auto f = [&](double a, double b) {
    const auto [ixz, izy] = encoder_information(pxy, a, b);
    return ixz - beta * izy;
  };
  double lo_a = 0, hi_a = 1, lo_b = 0, hi_b = 1, best_a = 0, best_b = 0;
  for (int round = 0; round < 3; ++round) {
    double best = INFINITY;
    for (int i = 0; i < n; ++i) {
      const double a = lo_a + (hi_a - lo_a) * i / (n - 1);
      for (int j = 0; j < n; ++j) {
        const double b = lo_b + (hi_b - lo_b) * j / (n - 1);
        const double v = f(a, b);
        if (v < best) best = v, best_a = a, best_b = b;
      }
    }
    const double step_a = 4 * (hi_a - lo_a) / (n - 1), step_b = 4 * (hi_b - lo_b) / (n - 1);
    lo_a = std::max(0.0, best_a - step_a), hi_a = std::min(1.0, best_a + step_a);
    lo_b = std::max(0.0, best_b - step_b), hi_b = std::min(1.0, best_b + step_b);
    n = 201;
  }
  return encoder_information(pxy, best_a, best_b);
}

/// True when every interior point of the curve, after sorting by x and
/// merging points closer than `merge` in x, lies no more than `slack` below
/// the chord joining its neighbours.
inline bool is_concave(std::vector<std::pair<double, double>> pts, double slack, double merge = 1e-6) {
  std::sort(pts.begin(), pts.end());
  std::vector<std::pair<double, double>> u;
  for (const auto& p : pts) {
    if (!u.empty() && p.first - u.back().first < merge) {
      u.back().second = std::max(u.back().second, p.second);
    } else {
      u.push_back(p);
    }
  }
  for (std::size_t i = 1; i + 1 < u.size(); ++i) {
    const auto [x0, y0] = u[i - 1];
    const auto [x1, y1] = u[i];
    const auto [x2, y2] = u[i + 1];
    const double chord = y0 + (y2 - y0) * (x1 - x0) / (x2 - x0);
    if (y1 < chord - slack) return false;
  }
  return true;
}

// Plug-in I(X;Y) in bits of a joint table.
inline double table_mi_bits(const Tensor& joint) {
  std::vector<double> px(joint.rows(), 0.0), py(joint.cols(), 0.0);
  for (std::size_t i = 0; i < joint.rows(); ++i)
    for (std::size_t j = 0; j < joint.cols(); ++j) px[i] += joint(i, j), py[j] += joint(i, j);
  double mi = 0.0;
  for (std::size_t i = 0; i < joint.rows(); ++i)
    for (std::size_t j = 0; j < joint.cols(); ++j)
      if (joint(i, j) > 0) mi += joint(i, j) * std::log2(joint(i, j) / (px[i] * py[j]));
  return mi;
}

// Chord-distance knee of (x, y) samples, computed directly on the raw
// points after min-max normalization.
inline std::size_t brute_force_knee(const std::vector<double>& x, const std::vector<double>& y) {
  const double x0 = *std::min_element(x.begin(), x.end()), x1 = *std::max_element(x.begin(), x.end());
  const double y0 = *std::min_element(y.begin(), y.end()), y1 = *std::max_element(y.begin(), y.end());
  std::vector<std::size_t> order(x.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  auto nx = [&](std::size_t i) { return (x[i] - x0) / (x1 - x0); };
  auto ny = [&](std::size_t i) { return (y[i] - y0) / (y1 - y0); };
  const std::size_t first = order.front(), last = order.back();
  const double ax = nx(first), ay = ny(first), bx = nx(last), by = ny(last);
  double best = -1;
  std::size_t arg = first;
  for (std::size_t i : order) {
    const double d = std::abs((bx - ax) * (ny(i) - ay) - (by - ay) * (nx(i) - ax)) / std::hypot(bx - ax, by - ay);
    if (d > best) best = d, arg = i;
  }
  return arg;
}

}  // namespace iblab::oracle
