#include "doctest.h"
#include "oracles.hpp"

#include "penreg/solver.hpp"

#include <algorithm>
#include <random>

using namespace penreg;

namespace {

Dataset make_data(std::uint64_t seed, Index n, Index p, std::optional<std::vector<int>> labels = {}) {
  std::mt19937_64 gen(seed);
  MatrixXd x = oracle::random_matrix(gen, n, p);
  VectorXd beta = VectorXd::Zero(p);
  for (Index j = 0; j < std::min<Index>(p, 3); ++j) beta(j) = 1.5 - j;
  VectorXd y = x * beta + 0.5 * oracle::random_matrix(gen, n, 1);
  y.array() += 0.7;
  return Dataset(std::move(x), std::move(y), std::move(labels));
}

PenaltySpec<> spec_of(PenaltyKind kind, double lambda, double alpha = 0.5) {
  PenaltySpec<> s;
  s.kind = kind;
  s.lambda1 = lambda;
  s.alpha = alpha;
  return s;
}

SolveControls tight(int iters = 20000) {
  SolveControls c;
  c.max_iters = iters;
  c.kkt_tol = 1e-10;
  c.objective_tol = 1e-15;
  return c;
}

// n = 8, p = 2 instance shared by the grid-oracle tests.
Dataset tiny_instance() {
  MatrixXd x(8, 2);
  x << 0.5, 1.2, -1.1, 0.3, 0.9, -0.7, 1.6, 0.4, -0.2, -1.5, 0.1, 0.8, -0.8, -0.1, 1.3, 1.0;
  VectorXd y(8);
  y << 1.9, -1.2, 0.4, 2.8, -1.0, 0.9, -1.1, 2.6;
  return Dataset(x, y, std::vector<int>{1, 1});
}

}  // namespace

TEST_CASE("unpenalized least squares matches the normal equations") {
  const auto data = make_data(1, 50, 5);
  const VectorXd expected = oracle::normal_equations(data.x(), data.y(), true);
  for (auto kind : {PenaltyKind::None, PenaltyKind::Lasso}) {
    const auto fit = fit_single(ModelKind::least_squares(), spec_of(kind, 0.0), data, SolveControls{});
    CHECK(fit.converged);
    CHECK((fit.stacked() - expected).cwiseAbs().maxCoeff() <= 1e-6);
  }
  // FISTA itself, at a lambda small enough to be invisible at 1e-6.
  const auto fista = fit_single(ModelKind::least_squares(), spec_of(PenaltyKind::Lasso, 1e-12),
                                data, SolveControls{});
  CHECK(fista.iterations > 0);
  CHECK((fista.stacked() - expected).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("intercept-only median regression recovers the sample median") {
  VectorXd y(9);
  y << 3.2, -1.0, 7.5, 2.2, 10.0, 0.3, 4.4, 5.1, -2.7;
  const Dataset data(MatrixXd(9, 0), y);
  SolveControls c;
  c.max_iters = 5000;
  const auto fit = fit_single(ModelKind::quantile(0.5), spec_of(PenaltyKind::None, 0.0), data, c);
  CHECK(fit.converged);
  CHECK(std::abs(fit.intercept - 3.2) <= 1e-6);
}

TEST_CASE("least squares lasso objective beats a brute-force grid") {
  const auto data = tiny_instance();
  const auto& x = data.x();
  const auto& y = data.y();
  for (auto [kind, alpha] : {std::pair{PenaltyKind::Lasso, 0.0},
                             std::pair{PenaltyKind::SparseGroupLasso, 0.5}}) {
    const double lambda = 0.3;
    const auto fit = fit_single(ModelKind::least_squares(), spec_of(kind, lambda, alpha), data,
                                SolveControls{});
    // Written out by hand; the intercept is profiled out exactly as the mean
    // of y - x beta. The single group has size 2.
    const double l1 = kind == PenaltyKind::Lasso ? 1.0 : alpha;
    const double l2 = kind == PenaltyKind::Lasso ? 0.0 : (1.0 - alpha) * std::sqrt(2.0);
    auto objective = [&](double a, double b) {
      double r[8];
      double mean = 0.0;
      for (int i = 0; i < 8; ++i) {
        r[i] = y(i) - a * x(i, 0) - b * x(i, 1);
        mean += r[i] / 8.0;
      }
      double loss = 0.0;
      for (double ri : r) loss += (ri - mean) * (ri - mean);
      return loss / 8.0 + lambda * (l1 * (std::abs(a) + std::abs(b)) + l2 * std::hypot(a, b));
    };
    const auto best = oracle::grid_minimize_2d(objective, -3.0, 3.0, 1e-3);
    CHECK(fit.objective <= best.value + 1e-4);
  }
}

TEST_CASE("quantile lasso objective beats a brute-force grid") {
  const auto data = tiny_instance();
  const auto& x = data.x();
  const auto& y = data.y();
  const double lambda = 0.1;
  const double tau = 0.5;
  SolveControls c;
  c.max_iters = 20000;
  const auto fit = fit_single(ModelKind::quantile(tau), spec_of(PenaltyKind::Lasso, lambda), data, c);
  // Any point between the two central residuals is an optimal intercept.
  auto objective = [&](double a, double b) {
    double r[8];
    for (int i = 0; i < 8; ++i) r[i] = y(i) - a * x(i, 0) - b * x(i, 1);
    std::sort(r, r + 8);
    const double icpt = r[3];
    double loss = 0.0;
    for (double ri : r) loss += oracle::pinball(ri - icpt, tau);
    return loss / 8.0 + lambda * (std::abs(a) + std::abs(b));
  };
  const auto best = oracle::grid_minimize_2d(objective, -3.0, 3.0, 1e-3);
  CHECK(fit.objective <= best.value + 1e-4);
}

TEST_CASE("lambda at or above lambda_max zeroes every coefficient") {
  const auto data = make_data(3, 40, 6);
  const double lmax = lambda_max(ModelKind::least_squares(), data);
  for (double scale : {1.0, 1.5, 10.0}) {
    const auto fit = fit_single(ModelKind::least_squares(), spec_of(PenaltyKind::Lasso, scale * lmax),
                                data, SolveControls{});
    CHECK(active_set(fit, 1e-5).empty());
  }
  const auto below = fit_single(ModelKind::least_squares(), spec_of(PenaltyKind::Lasso, 0.9 * lmax),
                                data, SolveControls{});
  CHECK_FALSE(active_set(below, 1e-5).empty());
}

TEST_CASE("predict and active_set") {
  Coefficients c;
  c.has_intercept = true;
  c.intercept = 1.0;
  c.beta = VectorXd::Constant(1, 2.0);
  MatrixXd x(3, 1);
  x << 0.0, 1.0, -2.0;
  CHECK(predict(c, x) == Eigen::Vector3d(1.0, 3.0, -3.0));

  Coefficients zero;
  zero.has_intercept = true;
  zero.intercept = 4.0;
  zero.beta = VectorXd::Zero(1);
  CHECK(predict(zero, x) == Eigen::Vector3d::Constant(4.0));

  std::vector<Coefficients> many(9, c);
  CHECK(predict(many, x).size() == 9);
  CHECK_THROWS_AS(predict(c, MatrixXd(3, 2)), DataError);

  Coefficients sparse;
  sparse.beta = Eigen::Vector2d(1e-9, 0.5);
  CHECK(active_set(sparse, 1e-5) == IndexList{1});
  CHECK(active_set(sparse, 0.0) == IndexList{0, 1});
  sparse.beta.setZero();
  CHECK(active_set(sparse, 1e-5).empty());
}

TEST_CASE("FISTA objective trace never increases") {
  const auto data = make_data(5, 30, 40, std::vector<int>(40, 0));
  std::vector<int> labels(40);
  for (int j = 0; j < 40; ++j) labels[static_cast<std::size_t>(j)] = j / 5;
  const Dataset grouped(data.x(), data.y(), labels);
  SolveControls c;
  c.record_trace = true;
  c.max_iters = 3000;
  for (auto kind : {PenaltyKind::Lasso, PenaltyKind::SparseGroupLasso, PenaltyKind::GroupLasso}) {
    const auto fit = fit_single(ModelKind::least_squares(), spec_of(kind, 0.05, 0.3), grouped, c);
    REQUIRE(fit.objective_trace.size() > 1);
    for (std::size_t k = 1; k < fit.objective_trace.size(); ++k) {
      CHECK(fit.objective_trace[k] <= fit.objective_trace[k - 1]);
    }
  }
}

TEST_CASE("least squares optimality certificate") {
  std::vector<int> labels = {0, 0, 1, 1, 1, 2, 3, 3};
  const auto data = make_data(8, 60, 8, labels);
  const std::vector<PenaltyKind> kinds = {PenaltyKind::Lasso, PenaltyKind::GroupLasso,
                                          PenaltyKind::SparseGroupLasso, PenaltyKind::AdaptiveSGL};
  for (auto kind : kinds) {
    for (double lambda : {0.01, 0.1, 0.5}) {
      auto spec = spec_of(kind, lambda, 0.6);
      if (uses_lasso_weights(kind)) spec.lasso_weights = VectorXd::LinSpaced(8, 0.5, 2.0);
      if (uses_gl_weights(kind)) spec.gl_weights = Eigen::Vector4d(1.0, 0.3, 2.0, 1.1);
      const auto fit = fit_single(ModelKind::least_squares(), spec, data, SolveControls{});
      CHECK(fit.converged);
      const VectorXd grad = least_squares_gradient(data.x(), data.y(), fit.beta, fit.intercept);
      CHECK(subgradient_residual(spec, fit.beta, grad, data.groups()) <= 1e-5);
      const double intercept_grad = -2.0 * ((data.y() - data.x() * fit.beta).array() - fit.intercept).mean();
      CHECK(std::abs(intercept_grad) <= 1e-5);
    }
  }
}

TEST_CASE("boundary equivalences of the sparse group lasso") {
  const std::vector<int> labels = {0, 0, 1, 1, 2, 2};
  const auto data = make_data(12, 40, 6, labels);
  const auto model = ModelKind::least_squares();
  const auto c = tight();
  auto solve = [&](const PenaltySpec<>& s) { return fit_single(model, s, data, c).stacked(); };

  const double lambda = 0.2;
  CHECK((solve(spec_of(PenaltyKind::SparseGroupLasso, lambda, 1.0)) -
         solve(spec_of(PenaltyKind::Lasso, lambda))).cwiseAbs().maxCoeff() <= 1e-6);
  CHECK((solve(spec_of(PenaltyKind::SparseGroupLasso, lambda, 0.0)) -
         solve(spec_of(PenaltyKind::GroupLasso, lambda))).cwiseAbs().maxCoeff() <= 1e-6);

  auto asgl = spec_of(PenaltyKind::AdaptiveSGL, lambda, 0.4);
  asgl.lasso_weights = VectorXd::Ones(6);
  asgl.gl_weights = VectorXd::Ones(3);
  CHECK((solve(asgl) - solve(spec_of(PenaltyKind::SparseGroupLasso, lambda, 0.4)))
            .cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("permuting predictors permutes the solution") {
  const std::vector<int> labels = {0, 0, 1, 1, 1, 2};
  const auto data = make_data(21, 50, 6, labels);
  const std::vector<Index> perm = {4, 2, 5, 0, 3, 1};
  MatrixXd xp(50, 6);
  std::vector<int> lp(6);
  VectorXd wp(6);
  const VectorXd w = VectorXd::LinSpaced(6, 0.5, 1.5);
  for (Index k = 0; k < 6; ++k) {
    xp.col(k) = data.x().col(perm[static_cast<std::size_t>(k)]);
    lp[static_cast<std::size_t>(k)] = labels[static_cast<std::size_t>(perm[static_cast<std::size_t>(k)])];
    wp(k) = w(perm[static_cast<std::size_t>(k)]);
  }
  const Dataset permuted(xp, data.y(), lp);

  auto spec = spec_of(PenaltyKind::AdaptiveSGL, 0.15, 0.5);
  spec.lasso_weights = w;
  spec.gl_weights = Eigen::Vector3d(1.0, 0.5, 2.0);
  auto spec_p = spec;
  spec_p.lasso_weights = wp;
  // Dense group ids follow first appearance in the permuted order: 1, 2, 0.
  spec_p.gl_weights = Eigen::Vector3d(0.5, 2.0, 1.0);

  const auto a = fit_single(ModelKind::least_squares(), spec, data, tight());
  const auto b = fit_single(ModelKind::least_squares(), spec_p, permuted, tight());
  for (Index k = 0; k < 6; ++k) {
    CHECK(std::abs(b.beta(k) - a.beta(perm[static_cast<std::size_t>(k)])) <= 1e-8);
  }
  CHECK(std::abs(a.intercept - b.intercept) <= 1e-8);
}

TEST_CASE("quantile ADMM converges with small residuals") {
  const std::vector<int> labels = {0, 0, 1, 1, 2};
  const auto data = make_data(31, 80, 5, labels);
  SolveControls c;
  c.max_iters = 5000;
  for (double tau : {0.2, 0.5, 0.9}) {
    const auto fit = fit_single(ModelKind::quantile(tau), spec_of(PenaltyKind::SparseGroupLasso, 0.05, 0.5),
                                data, c);
    CHECK(fit.converged);
    CHECK(fit.kkt_residual <= 1e-5);
    const double objective = risk(ModelKind::quantile(tau), data.x(), data.y(), fit.beta, fit.intercept) +
                             penalty_value(spec_of(PenaltyKind::SparseGroupLasso, 0.05, 0.5), fit.beta,
                                           data.groups());
    CHECK(fit.objective == doctest::Approx(objective).epsilon(1e-10));
  }
}

TEST_CASE("warm-started path matches cold starts") {
  const auto data = make_data(41, 60, 10);
  const Design design(data, ModelKind::least_squares(), true);
  std::vector<PenaltySpec<>> specs;
  for (double l : {1.0, 0.3, 0.1, 0.03}) specs.push_back(spec_of(PenaltyKind::Lasso, l));
  const auto c = tight();
  const auto path = fit_path(design, specs, nullptr, c);
  REQUIRE(path.size() == specs.size());
  for (std::size_t k = 0; k < specs.size(); ++k) {
    const auto cold = fit_single(design, specs[k], nullptr, c);
    CHECK((path[k].stacked() - cold.stacked()).cwiseAbs().maxCoeff() <= 1e-7);
  }
}

TEST_CASE("solver input validation") {
  const auto data = make_data(1, 10, 3);
  CHECK_THROWS_AS(fit_single(ModelKind::least_squares(), spec_of(PenaltyKind::Lasso, -1.0), data,
                             SolveControls{}),
                  ConfigError);
  CHECK_THROWS_AS(fit_single(ModelKind::least_squares(), spec_of(PenaltyKind::GroupLasso, 1.0), data,
                             SolveControls{}),
                  ConfigError);
  SolveControls bad;
  bad.max_iters = 0;
  CHECK_THROWS_AS(fit_single(ModelKind::least_squares(), spec_of(PenaltyKind::Lasso, 1.0), data, bad),
                  ConfigError);
}

TEST_CASE("non-convergence returns the best iterate flagged") {
  const auto data = make_data(2, 30, 60);
  SolveControls c;
  c.max_iters = 3;
  const auto fit = fit_single(ModelKind::least_squares(), spec_of(PenaltyKind::Lasso, 1e-4), data, c);
  CHECK_FALSE(fit.converged);
  CHECK(fit.iterations == 3);
  CHECK(std::isfinite(fit.objective));
}
