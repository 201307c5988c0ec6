#include "penreg/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace penreg {

void SolveControls::validate() const {
  if (max_iters <= 0) throw ConfigError("max_iters must be positive");
  if (!(objective_tol > 0.0)) throw ConfigError("objective_tol must be positive");
  if (!(coef_tol >= 0.0)) throw ConfigError("coef_tol must be nonnegative");
  if (!(kkt_tol > 0.0)) throw ConfigError("kkt_tol must be positive");
}

VectorXd Coefficients::stacked() const {
  VectorXd out(beta.size() + 1);
  out(0) = has_intercept ? intercept : 0.0;
  out.tail(beta.size()) = beta;
  return out;
}

double power_iteration_lipschitz(const MatrixXd& x, bool intercept, int max_iters, double tol) {
  const Index n = x.rows();
  const Index p = x.cols();
  const Index dim = p + (intercept ? 1 : 0);
  if (dim == 0) return 1.0;
  VectorXd v = VectorXd::Constant(dim, 1.0 / std::sqrt(static_cast<double>(dim)));
  VectorXd av(n);
  VectorXd w(dim);
  double eig = 0.0;
  for (int it = 0; it < max_iters; ++it) {
    av = x * v.head(p);
    if (intercept) av.array() += v(p);
    w.head(p).noalias() = x.transpose() * av;
    if (intercept) w(p) = av.sum();
    const double next = w.norm();
    if (next == 0.0) break;
    v = w / next;
    const bool done = std::abs(next - eig) <= tol * next;
    eig = next;
    if (done) break;
  }
  return std::max(2.0 * eig / static_cast<double>(n), 1e-12);
}

Design::Design(const MatrixXd& x, const VectorXd& y, const ModelKind& model, bool intercept)
    : x_(&x), y_(&y), model_(model), intercept_(intercept) {
  model_.validate();
  if (x.rows() != y.size()) throw DataError("design: x and y row counts differ");
  if (x.rows() < 1) throw DataError("design: no observations");
  if (model_.is_quantile()) {
    const Index p = x.cols();
    const Index dim = p + (intercept ? 1 : 0);
    MatrixXd system(dim, dim);
    system.topLeftCorner(p, p).noalias() = x.transpose() * x;
    // Weighting the consensus block like an average column keeps both
    // constraint blocks on one scale; 1.0 leaves it negligible next to X'X.
    if (p > 0) admm_weight_ = std::max(1.0, system.topLeftCorner(p, p).trace() / static_cast<double>(p));
    system.topLeftCorner(p, p).diagonal().array() += admm_weight_;
    if (intercept) {
      const VectorXd colsum = x.colwise().sum().transpose();
      system.block(0, p, p, 1) = colsum;
      system.block(p, 0, 1, p) = colsum.transpose();
      system(p, p) = static_cast<double>(x.rows());
    }
    admm_factor_.compute(system);
    if (admm_factor_.info() != Eigen::Success) {
      throw NumericError("design: ADMM normal equations are not positive definite");
    }
  } else {
    lipschitz_ = power_iteration_lipschitz(x, intercept);
  }
}

VectorXd least_squares_gradient(const MatrixXd& x, const VectorXd& y, const VectorXd& beta,
                                double intercept) {
  const VectorXd r = (y - x * beta).array() - intercept;
  return -(2.0 / static_cast<double>(x.rows())) * (x.transpose() * r);
}

namespace {

double objective_at(const Design& d, const PenaltySpec<>& spec, const GroupStructure* groups,
                    const VectorXd& beta, double intercept) {
  return risk(d.model(), d.x(), d.y(), beta, intercept) + penalty_value(spec, beta, groups);
}

bool penalty_vanishes(const PenaltySpec<>& spec) {
  return spec.l1_level() == 0.0 && spec.group_level() == 0.0;
}

// Unpenalized least squares: minimum-norm solution of [X 1] theta = y.
Coefficients least_squares_direct(const Design& d, const PenaltySpec<>& spec,
                                  const GroupStructure* groups) {
  const Index p = d.cols();
  const Index dim = p + (d.intercept() ? 1 : 0);
  MatrixXd a(d.rows(), dim);
  a.leftCols(p) = d.x();
  if (d.intercept()) a.col(p).setOnes();
  Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(a);
  const VectorXd theta = cod.solve(d.y());

  Coefficients out;
  out.beta = theta.head(p);
  out.has_intercept = d.intercept();
  out.intercept = d.intercept() ? theta(p) : 0.0;
  out.objective = objective_at(d, spec, groups, out.beta, out.intercept);
  out.converged = true;
  const VectorXd r = (d.y() - a * theta);
  out.kkt_residual = dim == 0 ? 0.0 : ((2.0 / d.rows()) * (a.transpose() * r)).cwiseAbs().maxCoeff();
  return out;
}

Coefficients fista(const Design& d, const PenaltySpec<>& spec, const GroupStructure* groups,
                   const SolveControls& c, WarmStart* warm) {
  const MatrixXd& x = d.x();
  const VectorXd& y = d.y();
  const Index n = d.rows();
  const Index p = d.cols();
  const bool icpt = d.intercept();
  const double inv_n = 1.0 / static_cast<double>(n);

  VectorXd xb = (warm && warm->beta.size() == p) ? warm->beta : VectorXd::Zero(p);
  double xi = icpt ? (warm && warm->beta.size() == p ? warm->intercept : y.mean()) : 0.0;
  VectorXd fit_x = x * xb;

  auto smooth = [&](const VectorXd& fit, double b) {
    return ((y - fit).array() - b).square().sum() * inv_n;
  };
  double f_best = smooth(fit_x, xi) + penalty_value(spec, xb, groups);

  VectorXd yb = xb;
  double yi = xi;
  VectorXd fit_y = fit_x;
  VectorXd z(p), fit_z(n), r(n), g(p), xb_prev(p), fit_prev(n);
  double t = 1.0;
  double lip = d.lipschitz();
  int stall = 0;

  Coefficients out;
  out.has_intercept = icpt;
  int it = 0;
  for (it = 1; it <= c.max_iters; ++it) {
    r = (y - fit_y).array() - yi;
    const double f_y = r.squaredNorm() * inv_n;
    g.noalias() = (-2.0 * inv_n) * (x.transpose() * r);
    const double gi = icpt ? -2.0 * inv_n * r.sum() : 0.0;

    double zi = 0.0;
    double f_z = 0.0;
    double step_norm = 0.0;
    for (;;) {
      const double step = 1.0 / lip;
      z = yb - step * g;
      prox_penalty_inplace(spec, z, step, groups);
      zi = icpt ? yi - step * gi : 0.0;
      fit_z.noalias() = x * z;
      f_z = smooth(fit_z, zi);
      const double dbeta_sq = (z - yb).squaredNorm();
      const double di = zi - yi;
      const double model =
          f_y + g.dot(z - yb) + gi * di + 0.5 * lip * (dbeta_sq + di * di);
      step_norm = std::max(p > 0 ? (z - yb).cwiseAbs().maxCoeff() : 0.0, std::abs(di));
      if (f_z <= model + 1e-12 * (1.0 + std::abs(f_y))) break;
      lip *= 2.0;
    }
    const double kkt = lip * step_norm;
    const double f_total = f_z + penalty_value(spec, z, groups);
    if (!std::isfinite(f_total)) throw NumericError("FISTA produced a non-finite objective");
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));

    if (f_total <= f_best) {
      // Gradient-based restart: momentum pointing uphill.
      const bool restart = (yb - z).dot(z - xb) + (yi - zi) * (zi - xi) > 0.0;
      const double change = (f_best - f_total) / std::max(std::abs(f_total), 1e-300);
      stall = change <= c.objective_tol ? stall + 1 : 0;
      xb_prev.swap(xb);
      fit_prev.swap(fit_x);
      const double xi_prev = xi;
      xb = z;
      fit_x = fit_z;
      xi = zi;
      f_best = f_total;
      if (restart) {
        t = 1.0;
        yb = xb;
        fit_y = fit_x;
        yi = xi;
      } else {
        const double mom = (t - 1.0) / t_next;
        yb = xb + mom * (xb - xb_prev);
        fit_y = fit_x + mom * (fit_x - fit_prev);
        yi = xi + mom * (xi - xi_prev);
        t = t_next;
      }
    } else {
      t = 1.0;
      yb = xb;
      fit_y = fit_x;
      yi = xi;
    }
    if (c.record_trace) out.objective_trace.push_back(f_best);
    out.kkt_residual = kkt;
    if (kkt <= c.kkt_tol || stall >= 10) {
      out.converged = true;
      break;
    }
  }
  out.iterations = std::min(it, c.max_iters);
  out.beta = xb;
  out.intercept = xi;
  out.objective = objective_at(d, spec, groups, xb, xi);
  if (warm) {
    warm->beta = xb;
    warm->intercept = xi;
  }
  return out;
}

// Type-II Anderson acceleration over a fixed-point map. An extrapolated point
// whose fixed-point residual exceeds that of the previous base point is
// rejected in favour of the plain map output from that base point.
class Anderson {
 public:
  Anderson(Index dim, int memory) : df_(dim, memory), dg_(dim, memory), memory_(memory) {}

  void reset() {
    count_ = 0;
    have_prev_ = false;
  }

  // s is the point the map was applied at, g the map output; g is replaced
  // by the next point to visit.
  void step(const VectorXd& s, VectorXd& g) {
    if (memory_ == 0) return;
    f_ = g - s;
    const double fnorm = f_.norm();
    if (have_prev_ && fnorm > prev_norm_) {
      g = fallback_;
      reset();
      return;
    }
    if (have_prev_) {
      df_.col(head_) = f_ - f_prev_;
      dg_.col(head_) = g - fallback_;
      head_ = (head_ + 1) % memory_;
      count_ = std::min(count_ + 1, memory_);
    }
    f_prev_ = f_;
    fallback_ = g;
    prev_norm_ = fnorm;
    have_prev_ = true;
    if (count_ == 0) return;
    const auto a = df_.leftCols(count_);
    MatrixXd gram = a.transpose() * a;
    gram.diagonal().array() += 1e-10 * gram.diagonal().maxCoeff() + 1e-300;
    const VectorXd gamma = gram.ldlt().solve(a.transpose() * f_);
    if (!gamma.allFinite()) {
      reset();
      return;
    }
    g.noalias() -= dg_.leftCols(count_) * gamma;
  }

 private:
  MatrixXd df_, dg_;
  VectorXd f_, f_prev_, fallback_;
  double prev_norm_ = 0.0;
  int memory_;
  int head_ = 0;
  int count_ = 0;
  bool have_prev_ = false;
};

// Given beta, the intercept minimizing the check loss is a tau-quantile of
// the partial residuals; b is moved into that minimizing set.
double refine_quantile_intercept(const MatrixXd& x, const VectorXd& y, const VectorXd& beta,
                                 double tau, double b) {
  const Index n = y.size();
  std::vector<double> e(static_cast<std::size_t>(n));
  VectorXd res = y;
  if (x.cols() > 0) res.noalias() -= x * beta;
  for (Index i = 0; i < n; ++i) e[static_cast<std::size_t>(i)] = res(i);
  const double nt = static_cast<double>(n) * tau;
  const double k_real = std::ceil(nt - 1e-12 * static_cast<double>(n));
  const auto k = static_cast<std::size_t>(std::clamp<double>(k_real, 1.0, static_cast<double>(n)));
  std::nth_element(e.begin(), e.begin() + static_cast<std::ptrdiff_t>(k - 1), e.end());
  const double lo = e[k - 1];
  if (std::abs(nt - std::round(nt)) > 1e-12 * static_cast<double>(n) || k == e.size()) return lo;
  const double hi = *std::min_element(e.begin() + static_cast<std::ptrdiff_t>(k), e.end());
  return std::clamp(b, lo, hi);
}

// Solves  sum_i rho_tau(r_i) + n * P(z)  s.t.  X beta + b + r = y,  c (beta - z) = 0
// (the original objective scaled by n) with scaled-form, over-relaxed ADMM.
Coefficients admm(const Design& d, const PenaltySpec<>& spec, const GroupStructure* groups,
                  const SolveControls& c, WarmStart* warm) {
  const MatrixXd& x = d.x();
  const VectorXd& y = d.y();
  const Index n = d.rows();
  const Index p = d.cols();
  const bool icpt = d.intercept();
  const double tau = d.model().tau;
  const double nd = static_cast<double>(n);
  const double c2 = d.admm_weight();
  const double cw = std::sqrt(c2);
  constexpr double relax = 1.6;
  constexpr int memory = 10;
  constexpr int check_every = 5;

  const bool resume = warm && warm->residual.size() == n && warm->split_beta.size() == p;
  VectorXd beta = resume ? warm->beta : VectorXd::Zero(p);
  double b = resume ? warm->intercept : 0.0;
  // The problem is equivariant under y -> s y, beta -> s beta with rho -> rho / s;
  // starting from the spread of y keeps the iteration count scale free.
  // rho stays fixed: changing it invalidates the acceleration history, which
  // costs more than balancing gains.
  double rho = 1.0;
  if (resume) {
    rho = warm->rho;
  } else if (n > 0) {
    const double spread = (y.array() - median(y)).abs().mean();
    if (spread > 0.0) rho = 1.0 / spread;
  }

  // State [r; z; u1; u2], the variables the iteration map acts on.
  const Index sdim = 2 * (n + p);
  VectorXd s(sdim), g(sdim);
  if (resume) {
    s << warm->residual, warm->split_beta, warm->dual_residual, warm->dual_beta;
  } else {
    s << y, VectorXd::Zero(p), VectorXd::Zero(n), VectorXd::Zero(p);
  }
  Anderson accel(sdim, memory);

  const Index dim = p + (icpt ? 1 : 0);
  VectorXd rhs(dim), v(n), fit(n), h(n), bh(p);
  const double y_inf = n > 0 ? y.cwiseAbs().maxCoeff() : 0.0;

  Coefficients out;
  out.has_intercept = icpt;
  int it = 0;
  for (it = 1; it <= c.max_iters; ++it) {
    const auto r_old = s.segment(0, n);
    const auto z_old = s.segment(n, p);
    const auto u1_old = s.segment(n + p, n);
    const auto u2_old = s.segment(2 * n + p, p);
    auto r = g.segment(0, n);
    auto z = g.segment(n, p);
    auto u1 = g.segment(n + p, n);
    auto u2 = g.segment(2 * n + p, p);

    v = y - r_old - u1_old;
    rhs.head(p).noalias() = x.transpose() * v;
    rhs.head(p) += c2 * (z_old - u2_old);
    if (icpt) rhs(p) = v.sum();
    d.admm_factor().solveInPlace(rhs);
    beta = rhs.head(p);
    b = icpt ? rhs(p) : 0.0;
    fit.noalias() = x * beta;
    fit.array() += b;

    h = relax * fit + (1.0 - relax) * (y - r_old);
    bh = relax * beta + (1.0 - relax) * z_old;

    // r-update: prox of (1/rho) * check loss.
    const double t = 1.0 / rho;
    r = y - h - u1_old;
    for (Index i = 0; i < n; ++i) {
      const double w = r(i);
      r(i) = w > t * tau ? w - t * tau : (w < -t * (1.0 - tau) ? w + t * (1.0 - tau) : 0.0);
    }
    VectorXd zz = bh + u2_old;
    prox_penalty_inplace(spec, zz, nd / (rho * c2), groups);
    z = zz;

    u1 = u1_old + h + r - y;
    u2 = u2_old + bh - z;

    const bool last = it == c.max_iters;
    if (it % check_every == 0 || last) {
      const double primal = std::max((fit + r - y).cwiseAbs().maxCoeff(),
                                     p > 0 ? cw * (beta - z).cwiseAbs().maxCoeff() : 0.0);
      VectorXd dual_vec(dim);
      dual_vec.head(p).noalias() = x.transpose() * (r - r_old);
      dual_vec.head(p) -= c2 * (z - z_old);
      if (icpt) dual_vec(p) = (r - r_old).sum();
      const double dual = rho * dual_vec.cwiseAbs().maxCoeff();

      double primal_scale = std::max({y_inf, fit.cwiseAbs().maxCoeff(), r.cwiseAbs().maxCoeff()});
      if (p > 0) {
        primal_scale = std::max({primal_scale, cw * beta.cwiseAbs().maxCoeff(), cw * z.cwiseAbs().maxCoeff()});
      }
      VectorXd at_u(dim);
      at_u.head(p).noalias() = x.transpose() * u1;
      at_u.head(p) += c2 * u2;
      if (icpt) at_u(p) = u1.sum();
      const double dual_scale = rho * (dim > 0 ? at_u.cwiseAbs().maxCoeff() : 0.0);

      const double primal_rel = primal / (1.0 + primal_scale);
      const double dual_rel = dual / (1.0 + dual_scale);
      out.kkt_residual = std::max(primal_rel, dual_rel);
      if (!std::isfinite(out.kkt_residual)) throw NumericError("ADMM produced non-finite iterates");
      if (c.record_trace) out.objective_trace.push_back(objective_at(d, spec, groups, z, b));
      if (primal_rel <= c.kkt_tol && dual_rel <= c.kkt_tol) {
        out.converged = true;
        s.swap(g);
        break;
      }
    }
    if (!last) accel.step(s, g);
    s.swap(g);
  }
  out.iterations = std::min(it, c.max_iters);
  out.beta = s.segment(n, p);
  out.intercept = icpt ? refine_quantile_intercept(x, y, out.beta, tau, b) : 0.0;
  out.objective = objective_at(d, spec, groups, out.beta, out.intercept);
  if (warm) {
    warm->beta = beta;
    warm->intercept = b;
    warm->residual = s.segment(0, n);
    warm->split_beta = s.segment(n, p);
    warm->dual_residual = s.segment(n + p, n);
    warm->dual_beta = s.segment(2 * n + p, p);
    warm->rho = rho;
  }
  return out;
}

}  // namespace

Coefficients fit_single(const Design& design, const PenaltySpec<>& spec,
                        const GroupStructure* groups, const SolveControls& controls,
                        WarmStart* warm) {
  controls.validate();
  spec.validate(design.cols(), groups);
  if (design.model().is_quantile()) return admm(design, spec, groups, controls, warm);
  if (penalty_vanishes(spec)) {
    Coefficients out = least_squares_direct(design, spec, groups);
    if (warm) {
      warm->beta = out.beta;
      warm->intercept = out.intercept;
    }
    return out;
  }
  return fista(design, spec, groups, controls, warm);
}

Coefficients fit_single(const ModelKind& model, const PenaltySpec<>& spec, const Dataset& data,
                        const SolveControls& controls, bool intercept) {
  const Design design(data, model, intercept);
  return fit_single(design, spec, data.groups(), controls);
}

std::vector<Coefficients> fit_path(const Design& design, std::span<const PenaltySpec<>> specs,
                                   const GroupStructure* groups, const SolveControls& controls) {
  std::vector<Coefficients> out;
  out.reserve(specs.size());
  WarmStart warm;
  for (const auto& spec : specs) out.push_back(fit_single(design, spec, groups, controls, &warm));
  return out;
}

double lambda_max(const ModelKind& model, const Dataset& data, bool intercept) {
  const VectorXd& y = data.y();
  const double nd = static_cast<double>(data.rows());
  if (!model.is_quantile()) {
    const double b = intercept ? y.mean() : 0.0;
    const VectorXd r = y.array() - b;
    return ((2.0 / nd) * (data.x().transpose() * r)).cwiseAbs().maxCoeff();
  }
  double b = 0.0;
  if (intercept) {
    std::vector<double> sorted(y.data(), y.data() + y.size());
    std::sort(sorted.begin(), sorted.end());
    const auto k = static_cast<std::size_t>(std::ceil(model.tau * nd)) - 1;
    b = sorted[std::min(k, sorted.size() - 1)];
  }
  VectorXd psi(y.size());
  for (Index i = 0; i < y.size(); ++i) psi(i) = model.tau - (y(i) - b < 0.0 ? 1.0 : 0.0);
  return ((1.0 / nd) * (data.x().transpose() * psi)).cwiseAbs().maxCoeff();
}

VectorXd predict(const Coefficients& coefs, const MatrixXd& x_new) {
  if (x_new.cols() != coefs.beta.size()) {
    throw DataError("predict: x_new has " + std::to_string(x_new.cols()) +
                    " columns, coefficients have " + std::to_string(coefs.beta.size()));
  }
  VectorXd out = x_new * coefs.beta;
  if (coefs.has_intercept) out.array() += coefs.intercept;
  return out;
}

std::vector<VectorXd> predict(std::span<const Coefficients> coefs, const MatrixXd& x_new) {
  std::vector<VectorXd> out;
  out.reserve(coefs.size());
  for (const auto& c : coefs) out.push_back(predict(c, x_new));
  return out;
}

IndexList active_set(const Coefficients& coefs, double coef_tol) {
  IndexList out;
  for (Index j = 0; j < coefs.beta.size(); ++j) {
    if (std::abs(coefs.beta(j)) > coef_tol) out.push_back(j);
  }
  return out;
}

}  // namespace penreg
