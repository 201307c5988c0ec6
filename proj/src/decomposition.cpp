#include "penreg/decomposition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace penreg {

namespace {

MatrixXd centered(const MatrixXd& x) {
  return x.rowwise() - x.colwise().mean();
}

// Fix the sign of each column so its largest-magnitude entry is positive.
void orient_columns(MatrixXd& m) {
  for (Index k = 0; k < m.cols(); ++k) {
    Index at = 0;
    m.col(k).cwiseAbs().maxCoeff(&at);
    if (m(at, k) < 0.0) m.col(k) = -m.col(k);
  }
}

double soft(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

// argmin_b  b'Gb - 2 b'c + ridge |b|^2 + alpha |b|_1, by coordinate descent
// from the current b.
void elastic_net_cd(const MatrixXd& gram, const VectorXd& c, double alpha, double ridge,
                    VectorXd& b) {
  const Index p = gram.rows();
  VectorXd gb = gram * b;
  for (int sweep = 0; sweep < 1000; ++sweep) {
    double delta = 0.0;
    for (Index j = 0; j < p; ++j) {
      const double denom = gram(j, j) + ridge;
      if (denom <= 0.0) continue;
      const double rho = c(j) - gb(j) + gram(j, j) * b(j);
      const double next = soft(rho, 0.5 * alpha) / denom;
      const double step = next - b(j);
      if (step != 0.0) {
        gb += step * gram.col(j);
        b(j) = next;
        delta = std::max(delta, std::abs(step));
      }
    }
    if (delta <= 1e-12 * (1.0 + b.cwiseAbs().maxCoeff())) break;
  }
}

}  // namespace

PcaResult pca(const MatrixXd& x) {
  PcaResult out;
  const MatrixXd xc = centered(x);
  if (xc.size() == 0) return out;
  Eigen::BDCSVD<MatrixXd> svd(xc, Eigen::ComputeThinV);
  const VectorXd& s = svd.singularValues();
  const double total = s.squaredNorm();
  if (!(total > 0.0)) return out;
  const double cut = static_cast<double>(std::max(x.rows(), x.cols())) *
                     std::numeric_limits<double>::epsilon() * s(0);
  Index rank = 0;
  while (rank < s.size() && s(rank) > cut) ++rank;
  out.rank = rank;
  out.loadings = svd.matrixV().leftCols(rank);
  orient_columns(out.loadings);
  out.explained = s.head(rank).array().square() / total;
  return out;
}

Index components_for(const VectorXd& explained, double pct) {
  double acc = 0.0;
  for (Index k = 0; k < explained.size(); ++k) {
    acc += explained(k);
    if (acc >= pct - 1e-12) return k + 1;
  }
  return explained.size();
}

PlsResult pls_nipals(const MatrixXd& x, const VectorXd& y, double pct, Index max_components) {
  const Index n = x.rows();
  const Index p = x.cols();
  MatrixXd xk = centered(x);
  VectorXd yk = y.array() - y.mean();
  const double total = xk.squaredNorm();

  std::vector<VectorXd> ws, ps, ts;
  std::vector<double> ev;
  double acc = 0.0;
  const Index limit = std::min({max_components, p, std::max<Index>(n - 1, 1)});
  while (total > 0.0 && static_cast<Index>(ws.size()) < limit) {
    VectorXd w = xk.transpose() * yk;
    const double wn = w.norm();
    if (!(wn > 0.0)) break;
    w /= wn;
    const VectorXd t = xk * w;
    const double tt = t.squaredNorm();
    if (!(tt > 0.0)) break;
    const VectorXd load = xk.transpose() * t / tt;
    const double explained = tt * load.squaredNorm() / total;
    if (explained < 1e-12) break;  // deflation stalled
    xk.noalias() -= t * load.transpose();
    yk -= t * (t.dot(yk) / tt);
    ws.push_back(w);
    ps.push_back(load);
    ts.push_back(t);
    ev.push_back(explained);
    acc += explained;
    if (acc >= pct - 1e-12) break;
  }

  PlsResult out;
  const auto d = static_cast<Index>(ws.size());
  out.x_weights.resize(p, d);
  out.x_loadings.resize(p, d);
  out.scores.resize(n, d);
  out.explained.resize(d);
  for (Index k = 0; k < d; ++k) {
    const auto kk = static_cast<std::size_t>(k);
    out.x_weights.col(k) = ws[kk];
    out.x_loadings.col(k) = ps[kk];
    out.scores.col(k) = ts[kk];
    out.explained(k) = ev[kk];
  }
  return out;
}

MatrixXd sparse_pca(const MatrixXd& x, Index components, const SparsePcaOptions& opts) {
  const Index p = x.cols();
  if (components <= 0 || p == 0) return MatrixXd(p, 0);
  const MatrixXd xc = centered(x);
  const MatrixXd gram = xc.transpose() * xc / static_cast<double>(std::max<Index>(x.rows(), 1));

  Eigen::BDCSVD<MatrixXd> svd(xc, Eigen::ComputeThinV);
  const Index k = std::min(components, svd.matrixV().cols());
  MatrixXd a = svd.matrixV().leftCols(k);
  MatrixXd b = a;

  for (int it = 0; it < opts.max_iters; ++it) {
    const MatrixXd prev = b;
    for (Index j = 0; j < k; ++j) {
      const VectorXd c = gram * a.col(j);
      VectorXd bj = b.col(j);
      elastic_net_cd(gram, c, opts.alpha, opts.ridge_alpha, bj);
      b.col(j) = bj;
    }
    // A = U W' from the thin SVD of G B (the orthogonal Procrustes step).
    const MatrixXd m = gram * b;
    Eigen::JacobiSVD<MatrixXd> proc(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    a = proc.matrixU() * proc.matrixV().transpose();
    const double change = (b - prev).cwiseAbs().maxCoeff();
    if (change <= opts.tol * (1.0 + b.cwiseAbs().maxCoeff())) break;
  }

  for (Index j = 0; j < k; ++j) {
    const double nb = b.col(j).norm();
    if (nb > 0.0) b.col(j) /= nb;
  }
  orient_columns(b);
  return b;
}

VectorXd adjusted_variance(const MatrixXd& x, const MatrixXd& loadings) {
  const MatrixXd xc = centered(x);
  const double total = xc.squaredNorm();
  const Index k = loadings.cols();
  VectorXd out = VectorXd::Zero(k);
  if (k == 0 || !(total > 0.0)) return out;
  const MatrixXd scores = xc * loadings;
  Eigen::HouseholderQR<MatrixXd> qr(scores);
  const MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index j = 0; j < std::min(k, r.rows()); ++j) out(j) = r(j, j) * r(j, j) / total;
  return out;
}

}  // namespace penreg
