#pragma once

// Independent reference computations for the test suites. Nothing here calls
// into the library's numerical code.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <set>
#include <utility>
#include <vector>

namespace oracle {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline double phi(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }
inline double Phi(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

inline Vec central_difference(const std::function<double(const Vec&)>& f, const Vec& x, double h = 1e-6) {
  Vec g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Vec a = x;
    Vec b = x;
    a[i] += h;
    b[i] -= h;
    g[i] = (f(a) - f(b)) / (2.0 * h);
  }
  return g;
}

inline double relative_error(const Vec& got, const Vec& want) {
  return (got - want).norm() / std::max(want.norm(), 1e-8);
}

// Central differences resolve a gradient only well above their roundoff floor
// (about 1e-16 |f| / h); smaller gradients cannot be checked this way.
inline bool fd_informative(const Vec& fd, double f) { return fd.norm() >= 1e-4 * std::max(1.0, std::abs(f)); }

// Monte-Carlo mean of g(Y), Y ~ N(mean, sd^2), with its standard error.
struct Estimate {
  double mean;
  double standard_error;
};

inline Estimate mc_normal(const std::function<double(double)>& g, double mean, double sd, std::size_t n,
                          std::uint64_t seed) {
  std::mt19937_64 engine(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = g(mean + sd * normal(engine));
    sum += v;
    sum_sq += v * v;
  }
  const double m = sum / static_cast<double>(n);
  const double var = std::max(sum_sq / static_cast<double>(n) - m * m, 0.0);
  return {m, std::sqrt(var / static_cast<double>(n))};
}

// Allowed MC discrepancy: 3 standard errors, plus the resolution of n samples
// (scale / n) for events so rare that none was drawn.
inline double mc_tolerance(const Estimate& e, double scale, std::size_t n) {
  return 3.0 * e.standard_error + 3.0 * scale / static_cast<double>(n);
}

inline double se_kernel(const Vec& a, const Vec& b, double v, const Vec& l) {
  return v * std::exp(-0.5 * ((a - b).array() / l.array()).square().sum());
}

inline double matern52_kernel(const Vec& a, const Vec& b, double v, const Vec& l) {
  const double r = std::sqrt(((a - b).array() / l.array()).square().sum());
  const double s = std::sqrt(5.0) * r;
  return v * (1.0 + s + s * s / 3.0) * std::exp(-s);
}

using KernelFn = std::function<double(const Vec&, const Vec&)>;

inline Mat gram(const KernelFn& k, const Mat& a, const Mat& b) {
  Mat out(a.rows(), b.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < b.rows(); ++j) out(i, j) = k(a.row(i).transpose(), b.row(j).transpose());
  return out;
}

// Exact GP posterior by dense LU solves.
inline std::pair<double, double> dense_posterior(const KernelFn& k, const Mat& x, const Vec& y, double mean,
                                                 double noise, const Vec& q) {
  Mat kxx = gram(k, x, x);
  kxx.diagonal().array() += noise;
  Mat qm = q.transpose();
  const Vec kq = gram(k, x, qm).col(0);
  Eigen::FullPivLU<Mat> lu(kxx);
  const Vec alpha = lu.solve(y - Vec::Constant(y.size(), mean));
  const Vec w = lu.solve(kq);
  return {mean + kq.dot(alpha), k(q, q) - kq.dot(w)};
}

inline double dense_lml(const KernelFn& k, const Mat& x, const Vec& y, double mean, double noise_plus_jitter) {
  Mat kxx = gram(k, x, x);
  kxx.diagonal().array() += noise_plus_jitter;
  Eigen::FullPivLU<Mat> lu(kxx);
  const Vec r = y - Vec::Constant(y.size(), mean);
  const double n = static_cast<double>(y.size());
  double logdet = 0.0;
  const Mat u = lu.matrixLU();
  for (Eigen::Index i = 0; i < u.rows(); ++i) logdet += std::log(std::abs(u(i, i)));
  return -0.5 * r.dot(lu.solve(r)) - 0.5 * logdet - 0.5 * n * std::log(2.0 * std::numbers::pi);
}

inline bool dominates(const Vec& a, const Vec& b) {
  return (a.array() <= b.array()).all() && (a.array() < b.array()).any();
}

// O(N^2) non-dominated filter of the rows strictly better than ref, deduplicated and sorted.
inline std::vector<std::pair<double, double>> pareto_bruteforce(const Mat& obs, const Vec& ref) {
  std::set<std::pair<double, double>> out;
  for (Eigen::Index i = 0; i < obs.rows(); ++i) {
    const Vec a = obs.row(i).transpose();
    if (!(a[0] < ref[0] && a[1] < ref[1])) continue;
    bool dominated = false;
    for (Eigen::Index j = 0; j < obs.rows() && !dominated; ++j) {
      if (j != i && dominates(obs.row(j).transpose(), a)) dominated = true;
    }
    if (!dominated) out.emplace(a[0], a[1]);
  }
  return {out.begin(), out.end()};
}

// Area of the union of boxes [p, ref] by coordinate compression.
inline double union_area(const std::vector<std::pair<double, double>>& pts, const Vec& ref) {
  std::vector<double> xs{ref[0]};
  std::vector<double> ys{ref[1]};
  std::vector<std::pair<double, double>> inside;
  for (auto [a, b] : pts) {
    if (a < ref[0] && b < ref[1]) {
      inside.emplace_back(a, b);
      xs.push_back(a);
      ys.push_back(b);
    }
  }
  std::sort(xs.begin(), xs.end());
  std::sort(ys.begin(), ys.end());
  double area = 0.0;
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    for (std::size_t j = 0; j + 1 < ys.size(); ++j) {
      const double cx = 0.5 * (xs[i] + xs[i + 1]);
      const double cy = 0.5 * (ys[j] + ys[j + 1]);
      const bool covered = std::any_of(inside.begin(), inside.end(), [&](auto p) { return p.first <= cx && p.second <= cy; });
      if (covered) area += (xs[i + 1] - xs[i]) * (ys[j + 1] - ys[j]);
    }
  }
  return area;
}

// Fraction of grid cell centres dominated by the front, scaled to the box area.
inline double hypervolume_grid(const std::vector<std::pair<double, double>>& pts, const Vec& ref, double step) {
  double lo0 = ref[0];
  double lo1 = ref[1];
  for (auto [a, b] : pts) {
    lo0 = std::min(lo0, a);
    lo1 = std::min(lo1, b);
  }
  const auto n0 = static_cast<long>(std::ceil((ref[0] - lo0) / step));
  const auto n1 = static_cast<long>(std::ceil((ref[1] - lo1) / step));
  long covered = 0;
  for (long i = 0; i < n0; ++i) {
    const double cx = lo0 + (static_cast<double>(i) + 0.5) * step;
    for (long j = 0; j < n1; ++j) {
      const double cy = lo1 + (static_cast<double>(j) + 0.5) * step;
      for (auto [a, b] : pts) {
        if (a <= cx && b <= cy && cx < ref[0] && cy < ref[1]) {
          ++covered;
          break;
        }
      }
    }
  }
  return static_cast<double>(covered) * step * step;
}

inline double hvi(const std::vector<std::pair<double, double>>& front, const Vec& ref, double y0, double y1) {
  auto with = front;
  with.emplace_back(y0, y1);
  return union_area(with, ref) - union_area(front, ref);
}

// Tensor midpoint quadrature of E[HVI(Y)] over independent normals, +-8 sd.
inline double ehvi_quadrature(const std::vector<std::pair<double, double>>& front, const Vec& ref, const Vec& mean,
                              const Vec& sd, int nodes) {
  const double width = 16.0;
  const double h = width / nodes;
  double total = 0.0;
  double weight_sum = 0.0;
  std::vector<double> w(static_cast<std::size_t>(nodes));
  std::vector<double> z(static_cast<std::size_t>(nodes));
  for (int i = 0; i < nodes; ++i) {
    z[static_cast<std::size_t>(i)] = -8.0 + (i + 0.5) * h;
    w[static_cast<std::size_t>(i)] = phi(z[static_cast<std::size_t>(i)]) * h;
  }
  for (int i = 0; i < nodes; ++i) {
    const double y0 = mean[0] + sd[0] * z[static_cast<std::size_t>(i)];
    for (int j = 0; j < nodes; ++j) {
      const double y1 = mean[1] + sd[1] * z[static_cast<std::size_t>(j)];
      const double weight = w[static_cast<std::size_t>(i)] * w[static_cast<std::size_t>(j)];
      weight_sum += weight;
      if (y0 >= ref[0] || y1 >= ref[1]) continue;
      total += weight * hvi(front, ref, y0, y1);
    }
  }
  return total / weight_sum;
}

// Max over an anchor grid of |fraction of points in [0, a) - volume of [0, a)| on [0,1]^2.
inline double star_discrepancy_2d(const Mat& pts, int grid) {
  double worst = 0.0;
  for (int i = 1; i <= grid; ++i) {
    for (int j = 1; j <= grid; ++j) {
      const double a = static_cast<double>(i) / grid;
      const double b = static_cast<double>(j) / grid;
      double count = 0.0;
      for (Eigen::Index r = 0; r < pts.rows(); ++r)
        if (pts(r, 0) < a && pts(r, 1) < b) count += 1.0;
      worst = std::max(worst, std::abs(count / static_cast<double>(pts.rows()) - a * b));
    }
  }
  return worst;
}

// Branin straight from its textbook form, for grid scans.
inline double branin(double x1, double x2) {
  const double pi = std::numbers::pi;
  const double b = 5.1 / (4 * pi * pi);
  const double c = 5 / pi;
  const double t = 1 / (8 * pi);
  return std::pow(x2 - b * x1 * x1 + c * x1 - 6, 2) + 10 * (1 - t) * std::cos(x1) + 10;
}

struct GridMinimum {
  double value;
  double x1;
  double x2;
};

// Minimum of Branin on the 1e-3 grid over [-5,10] x [0,15], optionally restricted to the disk
// (x1 - 2.5)^2 + (x2 - 7.5)^2 <= 25.
inline GridMinimum branin_grid_minimum(bool disk) {
  GridMinimum best{INFINITY, 0, 0};
  for (int i = 0; i <= 15000; ++i) {
    const double x1 = -5.0 + i * 1e-3;
    for (int j = 0; j <= 15000; ++j) {
      const double x2 = j * 1e-3;
      if (disk && (x1 - 2.5) * (x1 - 2.5) + (x2 - 7.5) * (x2 - 7.5) > 25.0) continue;
      const double v = branin(x1, x2);
      if (v < best.value) best = {v, x1, x2};
    }
  }
  return best;
}

}  // namespace oracle
