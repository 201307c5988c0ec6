#include "doctest.h"
#include "oracles.hpp"

#include "penreg/tuning.hpp"

#include <random>
#include <set>

using namespace penreg;

namespace {

Dataset make_data(std::uint64_t seed, Index n, Index p, double noise = 0.5) {
  std::mt19937_64 gen(seed);
  MatrixXd x = oracle::random_matrix(gen, n, p);
  VectorXd beta = VectorXd::Zero(p);
  beta.head(std::min<Index>(p, 3)) << 2.0, -1.0, 1.5;
  VectorXd y = x * beta + noise * oracle::random_matrix(gen, n, 1);
  std::vector<int> labels(static_cast<std::size_t>(p));
  for (Index j = 0; j < p; ++j) labels[static_cast<std::size_t>(j)] = static_cast<int>(j / 2);
  return Dataset(std::move(x), std::move(y), labels);
}

ModelSpec sgl_model() {
  ModelSpec m;
  m.penalty = PenaltyKind::SparseGroupLasso;
  return m;
}

}  // namespace

TEST_CASE("kfold_indices") {
  auto sizes = [](const std::vector<IndexList>& folds) {
    std::vector<std::size_t> s;
    for (const auto& f : folds) s.push_back(f.size());
    return s;
  };
  CHECK(sizes(kfold_indices(10, 5, 1)) == std::vector<std::size_t>{2, 2, 2, 2, 2});
  CHECK(sizes(kfold_indices(10, 3, 1)) == std::vector<std::size_t>{4, 3, 3});
  CHECK(kfold_indices(10, 3, 7) == kfold_indices(10, 3, 7));
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::set<Index> all;
    for (const auto& f : kfold_indices(23, 4, seed)) all.insert(f.begin(), f.end());
    CHECK(all.size() == 23);
    CHECK(*all.rbegin() == 22);
  }
  CHECK_THROWS_AS(kfold_indices(3, 4, 1), ConfigError);
  CHECK_THROWS_AS(kfold_indices(10, 1, 1), ConfigError);
}

TEST_CASE("select_best") {
  CHECK(select_best(MatrixXd::Constant(1, 3, 5.0)) == 0);
  MatrixXd e(3, 2);
  e << 3, 3, 1, 1, 2, 2;
  CHECK(select_best(e) == 1);
  MatrixXd tie(2, 1);
  tie << 1.0, 1.0;
  CHECK(select_best(tie) == 0);
  MatrixXd with_nan(3, 1);
  with_nan << std::numeric_limits<double>::quiet_NaN(), 4.0, 2.0;
  CHECK(select_best(with_nan) == 2);
  // Appending a strictly worse model leaves the choice unchanged.
  MatrixXd more(4, 2);
  more << e, MatrixXd::Constant(1, 2, 9.0);
  CHECK(select_best(more) == 1);
}

TEST_CASE("cross validation error matrix shape") {
  const auto data = make_data(1, 60, 6);
  GridSpec grid;
  grid.lambda1 = {0.001, 0.01, 0.1, 1.0};
  grid.alpha = {0.2, 0.5, 0.7};
  CvSpec cv;
  cv.nfolds = 10;
  cv.seed = 3;
  cv.error = parse_error_kind("MSE");
  const MatrixXd errors = cross_validation(sgl_model(), grid, data, cv);
  CHECK(errors.rows() == 12);
  CHECK(errors.cols() == 10);
  CHECK(errors.allFinite());
  CHECK((errors.array() >= 0.0).all());
  // Same seed, same matrix; any worker count.
  Parallelism par{true, 3};
  CHECK(cross_validation(sgl_model(), grid, data, cv, par) == errors);
}

TEST_CASE("cross validation matches a hand-rolled fold loop") {
  const auto data = make_data(2, 40, 4);
  GridSpec grid;
  grid.lambda1 = {0.05, 0.5};
  grid.alpha = {0.5};
  CvSpec cv{4, parse_error_kind("MAE"), 11};
  const auto detail = cross_validation_detailed(sgl_model(), grid, data, cv);
  for (std::size_t f = 0; f < 4; ++f) {
    IndexList train_rows;
    for (Index i = 0; i < 40; ++i) {
      if (!std::binary_search(detail.folds[f].begin(), detail.folds[f].end(), i)) train_rows.push_back(i);
    }
    const Dataset train = data.subset(train_rows);
    const Dataset valid = data.subset(detail.folds[f]);
    for (Index i = 0; i < 2; ++i) {
      PenaltySpec<> s;
      s.kind = PenaltyKind::SparseGroupLasso;
      s.lambda1 = grid.lambda1[static_cast<std::size_t>(i)];
      s.alpha = 0.5;
      SolveControls c;
      c.kkt_tol = 1e-10;
      c.objective_tol = 1e-15;
      c.max_iters = 20000;
      const auto fit = fit_single(ModelKind::least_squares(), s, train, c);
      const VectorXd r = valid.y() - predict(fit, valid.x());
      CHECK(detail.errors(i, static_cast<Index>(f)) == doctest::Approx(r.cwiseAbs().mean()).epsilon(1e-5));
    }
  }
}

TEST_CASE("noiseless interpolation gives zero cv error") {
  std::mt19937_64 gen(5);
  const MatrixXd x = oracle::random_matrix(gen, 20, 3);
  const VectorXd y = x * Eigen::Vector3d(1.0, -2.0, 0.5);
  const Dataset data(x, y);
  ModelSpec m;
  m.penalty = PenaltyKind::Lasso;
  GridSpec grid;
  grid.lambda1 = {0.0};
  CvSpec cv{2, parse_error_kind("MSE"), 1};
  const MatrixXd e = cross_validation(m, grid, data, cv);
  CHECK(e.rows() == 1);
  CHECK(e.cols() == 2);
  CHECK(e.cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("adaptive weights need a source") {
  const auto data = make_data(6, 30, 4);
  ModelSpec m;
  m.penalty = PenaltyKind::AdaptiveLasso;
  GridSpec grid;
  grid.lambda1 = {0.1};
  CvSpec cv{3, parse_error_kind("MSE"), 1};
  CHECK_THROWS_AS(cross_validation(m, grid, data, cv), ConfigError);
  grid.weights = WeightSpec{};
  grid.weights->lasso_power_weight = {1.0, 2.0};
  const auto detail = cross_validation_detailed(m, grid, data, cv);
  CHECK(detail.errors.rows() == 2);
  REQUIRE(detail.fold_grids.size() == 3);
  // Weights are fold specific.
  CHECK(detail.fold_grids[0].weights.lasso_weights[0] != detail.fold_grids[1].weights.lasso_weights[0]);
  CHECK(detail.fold_grids[0].weights.gl_weights.empty());
}

TEST_CASE("mutating validation rows leaves training output unchanged") {
  const auto data = make_data(7, 50, 6);
  ModelSpec m;
  m.penalty = PenaltyKind::AdaptiveSGL;
  m.model = ModelKind::quantile(0.4);
  GridSpec grid;
  grid.lambda1 = {0.01, 0.1};
  grid.alpha = {0.3, 0.7};
  grid.weights = WeightSpec{};
  grid.weights->gl_power_weight = {0.5, 1.0};
  CvSpec cv{5, parse_error_kind("QRE"), 9};
  const auto base = cross_validation_detailed(m, grid, data, cv);
  for (std::size_t f = 0; f < 5; ++f) {
    MatrixXd x = data.x();
    VectorXd y = data.y();
    for (Index i : base.folds[f]) {
      x.row(i).setConstant(1e6);
      y(i) = -1e6;
    }
    const Dataset poisoned(x, y, data.groups()->dense_labels());
    const auto again = cross_validation_detailed(m, grid, poisoned, cv);
    CHECK(again.folds == base.folds);
    for (std::size_t k = 0; k < base.fold_grids[f].weights.lasso_weights.size(); ++k) {
      CHECK(again.fold_grids[f].weights.lasso_weights[k] == base.fold_grids[f].weights.lasso_weights[k]);
    }
    for (std::size_t k = 0; k < base.fold_grids[f].weights.gl_weights.size(); ++k) {
      CHECK(again.fold_grids[f].weights.gl_weights[k] == base.fold_grids[f].weights.gl_weights[k]);
    }
    for (std::size_t i = 0; i < base.fold_coefficients[f].size(); ++i) {
      CHECK(again.fold_coefficients[f][i].beta == base.fold_coefficients[f][i].beta);
      CHECK(again.fold_coefficients[f][i].intercept == base.fold_coefficients[f][i].intercept);
    }
    CHECK(again.errors.col(static_cast<Index>(f)) != base.errors.col(static_cast<Index>(f)));
  }
}

TEST_CASE("tvt split sizes") {
  TvtSpec spec;
  spec.train_size = 300;
  spec.validate_size = 200;
  spec.seed = 1;
  const auto s = tvt_split(506, spec);
  CHECK(s.train.size() == 300);
  CHECK(s.validate.size() == 200);
  CHECK(s.test.size() == 6);
  std::set<Index> all(s.train.begin(), s.train.end());
  all.insert(s.validate.begin(), s.validate.end());
  all.insert(s.test.begin(), s.test.end());
  CHECK(all.size() == 506);

  TvtSpec pct;
  pct.seed = 2;
  const auto d = tvt_split(100, pct);
  CHECK(d.train.size() == 5);
  CHECK(d.validate.size() == 5);
  pct.train_pct = 0.5;
  pct.validate_pct = 0.25;
  pct.train_size = 10;  // size wins
  CHECK(tvt_split(100, pct).train.size() == 10);
  CHECK(tvt_split(100, pct).validate.size() == 25);

  spec.validate_size = 206;
  CHECK_THROWS_AS(tvt_split(506, spec), ConfigError);
}

TEST_CASE("train_validate_test") {
  SUBCASE("single model") {
    const auto data = make_data(8, 80, 5);
    ModelSpec m;
    m.penalty = PenaltyKind::Lasso;
    GridSpec grid;
    grid.lambda1 = {0.1};
    TvtSpec t;
    t.train_size = 40;
    t.validate_size = 20;
    t.seed = 4;
    t.error = parse_error_kind("MSE");
    const auto r = train_validate_test(m, grid, data, t);
    CHECK(r.index == 0);
    const Dataset test = data.subset(r.split.test);
    const auto& c = r.fit.coefficients[0];
    CHECK(r.test_error == doctest::Approx(error_metric(t.error, test.y(), predict(c, test.x()))));
    CHECK(r.optimal_betas.size() == 6);
    CHECK(r.optimal_betas(0) == c.intercept);
  }
  SUBCASE("noiseless data with lambda 0 in the grid") {
    std::mt19937_64 gen(9);
    const MatrixXd x = oracle::random_matrix(gen, 60, 4);
    const VectorXd y = (x * Eigen::Vector4d(1, 2, 3, 4)).array() + 0.5;
    const Dataset data(x, y);
    ModelSpec m;
    m.penalty = PenaltyKind::Lasso;
    GridSpec grid;
    grid.lambda1 = {1.0, 0.1, 0.0};
    TvtSpec t;
    t.train_size = 30;
    t.validate_size = 15;
    t.seed = 5;
    t.error = parse_error_kind("MSE");
    const auto r = train_validate_test(m, grid, data, t);
    CHECK(r.index == 2);
    CHECK(*&r.optimal_parameters.lambda1 == 0.0);
    CHECK(r.test_error <= 1e-8);
    const auto again = train_validate_test(m, grid, data, t);
    CHECK(again.optimal_betas == r.optimal_betas);
    CHECK(again.split.test == r.split.test);
  }
}
