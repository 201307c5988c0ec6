#include "doctest.h"
#include "oracles.hpp"

#include "penreg/loss.hpp"

#include <random>

using namespace penreg;

TEST_CASE("check_loss matches its piecewise definition") {
  CHECK(check_loss(0.0, 0.5) == 0.0);
  CHECK(check_loss(2.0, 0.25) == doctest::Approx(0.5));
  CHECK(check_loss(-2.0, 0.25) == doctest::Approx(1.5));
  CHECK(oracle::pinball(2.0, 0.25) == doctest::Approx(0.5));
  CHECK(oracle::pinball(-2.0, 0.25) == doctest::Approx(1.5));
  CHECK_THROWS_AS(check_loss(1.0, 0.0), ConfigError);
  CHECK_THROWS_AS(check_loss(1.0, 1.0), ConfigError);
}

TEST_CASE("check_loss symmetry and nonnegativity") {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  std::uniform_real_distribution<double> t(0.01, 0.99);
  for (int i = 0; i < 500; ++i) {
    const double v = u(gen);
    const double tau = t(gen);
    CHECK(check_loss(v, tau) >= 0.0);
    CHECK(check_loss(v, tau) == doctest::Approx(check_loss(-v, 1.0 - tau)).epsilon(1e-14));
    CHECK(check_loss(v, tau) == doctest::Approx(oracle::pinball(v, tau)));
  }
}

TEST_CASE("risk") {
  SUBCASE("least squares at beta = 0") {
    Eigen::MatrixXd x(2, 1);
    x << 3.0, 4.0;
    Eigen::VectorXd y(2);
    y << 1.0, -1.0;
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(1);
    CHECK(risk(ModelKind::least_squares(), x, y, beta, 0.0) == doctest::Approx(1.0));
  }
  SUBCASE("median intercept at tau = 0.5 gives half the mean absolute deviation") {
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(5, 1);
    Eigen::VectorXd y(5);
    y << 3.0, -1.0, 7.0, 2.0, 10.0;
    const double med = median(y);
    CHECK(med == 3.0);
    const double mad = (y.array() - med).abs().sum() / (2.0 * 5.0);
    CHECK(risk(ModelKind::quantile(0.5), x, y, Eigen::VectorXd::Zero(1), med) ==
          doctest::Approx(mad));
  }
  SUBCASE("n = 3 instance against term-by-term summation") {
    Eigen::MatrixXd x(3, 2);
    x << 1.0, 2.0, -1.0, 0.5, 0.0, 3.0;
    Eigen::VectorXd y(3);
    y << 1.0, 2.0, -4.0;
    Eigen::VectorXd beta(2);
    beta << 0.5, -1.0;
    const double b = 0.25;
    double ls = 0.0;
    double qr = 0.0;
    for (int i = 0; i < 3; ++i) {
      const double r = y(i) - b - (x(i, 0) * beta(0) + x(i, 1) * beta(1));
      ls += r * r;
      qr += oracle::pinball(r, 0.3);
    }
    CHECK(risk(ModelKind::least_squares(), x, y, beta, b) == doctest::Approx(ls / 3.0));
    CHECK(risk(ModelKind::quantile(0.3), x, y, beta, b) == doctest::Approx(qr / 3.0));
  }
  SUBCASE("dimension mismatch") {
    Eigen::MatrixXd x(3, 2);
    Eigen::VectorXd y(2);
    CHECK_THROWS_AS(risk(ModelKind::least_squares(), x, y, Eigen::VectorXd::Zero(2), 0.0),
                    DataError);
  }
}

TEST_CASE("risk is invariant under row permutation") {
  std::mt19937_64 gen(3);
  const Eigen::MatrixXd x = oracle::random_matrix(gen, 20, 4);
  const Eigen::VectorXd y = oracle::random_matrix(gen, 20, 1);
  const Eigen::VectorXd beta = oracle::random_matrix(gen, 4, 1);
  Eigen::PermutationMatrix<Eigen::Dynamic> perm(20);
  perm.setIdentity();
  std::shuffle(perm.indices().data(), perm.indices().data() + 20, gen);
  const Eigen::MatrixXd xp = perm * x;
  const Eigen::VectorXd yp = perm * y;
  for (const auto& m : {ModelKind::least_squares(), ModelKind::quantile(0.2)}) {
    CHECK(risk(m, xp, yp, beta, 0.3) == doctest::Approx(risk(m, x, y, beta, 0.3)).epsilon(1e-13));
  }
}

TEST_CASE("error_metric") {
  Eigen::VectorXd truth = Eigen::VectorXd::Zero(2);
  Eigen::VectorXd pred(2);
  pred << 1.0, 3.0;
  CHECK(error_metric(parse_error_kind("MDAE"), truth, pred) == doctest::Approx(2.0));
  CHECK(error_metric(parse_error_kind("MSE"), truth, pred) == doctest::Approx(5.0));
  CHECK(error_metric(parse_error_kind("MAE"), truth, pred) == doctest::Approx(2.0));

  for (const char* name : {"MSE", "MAE", "MDAE", "QRE"}) {
    CHECK(error_metric(parse_error_kind(name, 0.3), pred, pred) == 0.0);
  }
  CHECK_THROWS_AS(error_metric(parse_error_kind("QRE"), truth, pred), ConfigError);
  CHECK_THROWS_AS(parse_error_kind("QRE", 1.5), ConfigError);
  CHECK_THROWS_AS(parse_error_kind("RMSE"), ConfigError);
  Eigen::VectorXd short_pred(1);
  short_pred << 1.0;
  CHECK_THROWS_AS(error_metric(parse_error_kind("MSE"), truth, short_pred), DataError);
}

TEST_CASE("MDAE uses the central pair midpoint for even sizes") {
  Eigen::VectorXd truth = Eigen::VectorXd::Zero(4);
  Eigen::VectorXd pred(4);
  pred << 4.0, -1.0, 10.0, 2.0;
  CHECK(error_metric(parse_error_kind("MDAE"), truth, pred) == doctest::Approx(3.0));
}

TEST_CASE("QRE at tau 0.5 is half the MAE") {
  std::mt19937_64 gen(5);
  for (int rep = 0; rep < 50; ++rep) {
    const Eigen::VectorXd a = oracle::random_matrix(gen, 17, 1);
    const Eigen::VectorXd b = oracle::random_matrix(gen, 17, 1);
    const double qre = error_metric(parse_error_kind("QRE", 0.5), a, b);
    const double mae = error_metric(parse_error_kind("MAE"), a, b);
    CHECK(qre == doctest::Approx(mae / 2.0).epsilon(1e-13));
  }
}

TEST_CASE("error_calculator keeps order and length") {
  Eigen::VectorXd truth(3);
  truth << 1.0, 2.0, 3.0;
  std::vector<Eigen::VectorXd> preds;
  for (int i = 0; i < 9; ++i) preds.push_back(truth.array() + static_cast<double>(i));
  const auto errors = error_calculator(truth, preds, parse_error_kind("MSE"));
  REQUIRE(errors.size() == 9);
  for (int i = 0; i < 9; ++i) CHECK(errors[static_cast<std::size_t>(i)] == doctest::Approx(i * i));

  CHECK(error_calculator(truth, {}, parse_error_kind("MSE")).empty());
  const auto single = error_calculator(truth, {truth}, parse_error_kind("MAE"));
  REQUIRE(single.size() == 1);
  CHECK(single[0] == 0.0);

  preds.push_back(Eigen::VectorXd::Zero(2));
  try {
    error_calculator(truth, preds, parse_error_kind("MSE"));
    FAIL("expected a length mismatch");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("prediction 9") != std::string::npos);
  }
}

TEST_CASE("model names") {
  CHECK_FALSE(parse_model("lm").is_quantile());
  CHECK(parse_model("qr", 0.25).tau == 0.25);
  CHECK_THROWS_AS(parse_model("glm"), ConfigError);
  CHECK_THROWS_AS(parse_model("qr", 1.5), ConfigError);
}
