#pragma once

// Independent reference computations for tests. Nothing here calls into the
// solver or prox code paths it is used to check.

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <vector>

namespace oracle {

// Check loss by explicit cases.
inline double pinball(double u, double tau) {
  if (u >= 0.0) return tau * u;
  return (tau - 1.0) * u;
}

// Brute-force minimum of f over a 2-D box on a regular grid.
struct GridMin2 {
  double value = std::numeric_limits<double>::infinity();
  double a = 0.0;
  double b = 0.0;
};

inline GridMin2 grid_minimize_2d(const std::function<double(double, double)>& f, double lo,
                                 double hi, double h) {
  GridMin2 best;
  const long steps = std::lround((hi - lo) / h);
  for (long i = 0; i <= steps; ++i) {
    const double a = lo + h * static_cast<double>(i);
    for (long j = 0; j <= steps; ++j) {
      const double b = lo + h * static_cast<double>(j);
      const double v = f(a, b);
      if (v < best.value) best = {v, a, b};
    }
  }
  return best;
}

// Minimum of a convex f over a p-dimensional box: a coarse pass, then a fine
// pass at resolution `fine` in a window of +-2 coarse cells around the coarse
// minimizer.
inline double grid_minimize_nd(const std::function<double(const Eigen::VectorXd&)>& f,
                               const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                               double coarse, double fine, Eigen::VectorXd* arg = nullptr) {
  const auto p = lo.size();
  auto scan = [&](const Eigen::VectorXd& l, const Eigen::VectorXd& u, double h,
                  Eigen::VectorXd& best_x) {
    std::vector<long> counts(static_cast<std::size_t>(p));
    for (Eigen::Index k = 0; k < p; ++k) {
      counts[static_cast<std::size_t>(k)] = std::max(0L, std::lround((u(k) - l(k)) / h)) + 1;
    }
    std::vector<long> idx(static_cast<std::size_t>(p), 0);
    double best = std::numeric_limits<double>::infinity();
    Eigen::VectorXd z(p);
    for (;;) {
      for (Eigen::Index k = 0; k < p; ++k) {
        z(k) = std::min(u(k), l(k) + h * static_cast<double>(idx[static_cast<std::size_t>(k)]));
      }
      const double v = f(z);
      if (v < best) {
        best = v;
        best_x = z;
      }
      Eigen::Index k = 0;
      while (k < p && ++idx[static_cast<std::size_t>(k)] == counts[static_cast<std::size_t>(k)]) {
        idx[static_cast<std::size_t>(k)] = 0;
        ++k;
      }
      if (k == p) break;
    }
    return best;
  };
  Eigen::VectorXd x0(p);
  scan(lo, hi, coarse, x0);
  const Eigen::VectorXd l = (x0.array() - 2 * coarse).max(lo.array());
  const Eigen::VectorXd u = (x0.array() + 2 * coarse).min(hi.array());
  Eigen::VectorXd x1(p);
  const double best = scan(l, u, fine, x1);
  if (arg) *arg = x1;
  return best;
}

// Unpenalized least squares through the normal equations.
inline Eigen::VectorXd normal_equations(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                        bool intercept) {
  Eigen::MatrixXd a(x.rows(), x.cols() + (intercept ? 1 : 0));
  if (intercept) {
    a.col(0).setOnes();
    a.rightCols(x.cols()) = x;
  } else {
    a = x;
  }
  const Eigen::MatrixXd gram = a.transpose() * a;
  return gram.ldlt().solve(a.transpose() * y);
}

inline Eigen::MatrixXd random_matrix(std::mt19937_64& gen, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> dist;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = dist(gen);
  }
  return m;
}

}  // namespace oracle
