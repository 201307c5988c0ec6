#pragma once

#include "penreg/dataset.hpp"
#include "penreg/loss.hpp"
#include "penreg/penalty.hpp"
#include "penreg/types.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace penreg {

struct SolveControls {
  int max_iters = 500;          // quantile problems typically want ~2000
  double objective_tol = 1e-8;  // relative objective change (least squares path)
  double coef_tol = 1e-5;       // |b_j| <= coef_tol reports as zero
  double kkt_tol = 1e-6;        // optimality residual
  bool record_trace = false;    // keep the per-iteration objective

  void validate() const;
};

/// Solution of one penalized problem.
struct Coefficients {
  double intercept = 0.0;
  bool has_intercept = false;
  VectorXd beta;
  double objective = 0.0;  // risk + penalty at (intercept, beta)
  int iterations = 0;
  bool converged = false;
  double kkt_residual = 0.0;
  std::vector<double> objective_trace;
  std::string message;  // set when the fit failed outright

  /// (intercept, beta_1..beta_p); intercept is 0 when not fitted.
  VectorXd stacked() const;
};

/// Data plus everything about it that the solvers reuse across penalty
/// settings: the Lipschitz constant of the least squares gradient, or the
/// Cholesky factor of the ADMM normal equations. Holds references to x and
/// y; they must outlive the Design.
class Design {
 public:
  Design(const MatrixXd& x, const VectorXd& y, const ModelKind& model, bool intercept);
  Design(const Dataset& data, const ModelKind& model, bool intercept)
      : Design(data.x(), data.y(), model, intercept) {}

  const MatrixXd& x() const { return *x_; }
  const VectorXd& y() const { return *y_; }
  const ModelKind& model() const { return model_; }
  bool intercept() const { return intercept_; }
  Index rows() const { return x_->rows(); }
  Index cols() const { return x_->cols(); }

  /// Estimate of the largest eigenvalue of (2/n) A'A, A = [X 1] (or X).
  double lipschitz() const { return lipschitz_; }
  const Eigen::LLT<MatrixXd>& admm_factor() const { return admm_factor_; }
  // Weight c^2 on the beta = z consensus constraint of the quantile splitting.
  double admm_weight() const { return admm_weight_; }

 private:
  const MatrixXd* x_;
  const VectorXd* y_;
  ModelKind model_;
  bool intercept_;
  double lipschitz_ = 0.0;
  Eigen::LLT<MatrixXd> admm_factor_;
  double admm_weight_ = 1.0;
};

/// Iterate state carried from one solve to the next along a path.
struct WarmStart {
  VectorXd beta;
  double intercept = 0.0;
  // ADMM only
  VectorXd residual;
  VectorXd split_beta;
  VectorXd dual_residual;
  VectorXd dual_beta;
  double rho = 1.0;
};

/// Largest-eigenvalue estimate of (2/n) A'A by power iteration.
double power_iteration_lipschitz(const MatrixXd& x, bool intercept, int max_iters = 200,
                                 double tol = 1e-10);

/// Solves min risk(intercept, beta) + penalty(beta).
///
/// Least squares uses monotone FISTA with adaptive restart and backtracking
/// (or a direct orthogonal solve when the penalty vanishes). Quantile
/// regression uses over-relaxed ADMM on the split r = y - X b - b0, beta = z,
/// with Anderson acceleration of the iteration.
Coefficients fit_single(const ModelKind& model, const PenaltySpec<>& spec, const Dataset& data,
                        const SolveControls& controls, bool intercept = true);

Coefficients fit_single(const Design& design, const PenaltySpec<>& spec,
                        const GroupStructure* groups, const SolveControls& controls,
                        WarmStart* warm = nullptr);

/// Solves the specs in the given order, each warm-started from the previous.
std::vector<Coefficients> fit_path(const Design& design, std::span<const PenaltySpec<>> specs,
                                   const GroupStructure* groups, const SolveControls& controls);

/// Smallest lambda at which the lasso solution is identically zero.
double lambda_max(const ModelKind& model, const Dataset& data, bool intercept = true);

VectorXd predict(const Coefficients& coefs, const MatrixXd& x_new);
std::vector<VectorXd> predict(std::span<const Coefficients> coefs, const MatrixXd& x_new);

/// Predictor indices with |beta_j| > coef_tol.
IndexList active_set(const Coefficients& coefs, double coef_tol);

/// Gradient of the least squares risk with respect to beta.
VectorXd least_squares_gradient(const MatrixXd& x, const VectorXd& y, const VectorXd& beta,
                                double intercept);

}  // namespace penreg
