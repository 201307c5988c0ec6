#pragma once

#include "penreg/types.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace penreg {

/// Regression model: least squares, or quantile regression at level tau.
struct ModelKind {
  enum class Kind { LeastSquares, Quantile };

  Kind kind = Kind::LeastSquares;
  double tau = 0.5;

  static ModelKind least_squares() { return {Kind::LeastSquares, 0.5}; }
  static ModelKind quantile(double tau) {
    ModelKind m{Kind::Quantile, tau};
    m.validate();
    return m;
  }

  bool is_quantile() const { return kind == Kind::Quantile; }

  void validate() const {
    if (kind == Kind::Quantile && !(tau > 0.0 && tau < 1.0)) {
      throw ConfigError("tau must lie in (0, 1), got " + std::to_string(tau));
    }
  }
};

/// "lm" or "qr".
ModelKind parse_model(std::string_view name, double tau = 0.5);
std::string model_name(const ModelKind& model);

/// Out-of-sample error metric.
struct ErrorKind {
  enum class Metric { MSE, MAE, MDAE, QRE };

  Metric metric = Metric::MSE;
  std::optional<double> tau;  // required for QRE

  void validate() const {
    if (metric == Metric::QRE) {
      if (!tau) throw ConfigError("QRE error needs a tau");
      if (!(*tau > 0.0 && *tau < 1.0)) throw ConfigError("QRE tau must lie in (0, 1)");
    }
  }
};

ErrorKind parse_error_kind(std::string_view name, std::optional<double> tau = std::nullopt);
std::string error_name(const ErrorKind& kind);

/// Check (pinball) loss u * (tau - 1{u < 0}).
template <typename Scalar>
Scalar check_loss(Scalar u, Scalar tau) {
  if (!(tau > Scalar(0) && tau < Scalar(1))) throw ConfigError("check_loss: tau must lie in (0, 1)");
  return u < Scalar(0) ? (tau - Scalar(1)) * u : tau * u;
}

namespace detail {

template <typename Derived>
typename Derived::Scalar mean_check_loss(const Eigen::MatrixBase<Derived>& r,
                                         typename Derived::Scalar tau) {
  using Scalar = typename Derived::Scalar;
  if (r.size() == 0) return Scalar(0);
  Scalar sum(0);
  for (Index i = 0; i < r.size(); ++i) sum += check_loss<Scalar>(r(i), tau);
  return sum / static_cast<Scalar>(r.size());
}

template <typename Scalar>
Scalar median_inplace(std::vector<Scalar>& values) {
  const auto n = values.size();
  const auto mid = values.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(values.begin(), mid, values.end());
  if (n % 2 == 1) return *mid;
  const Scalar upper = *mid;
  const Scalar lower = *std::max_element(values.begin(), mid);
  return (lower + upper) / Scalar(2);
}

}  // namespace detail

/// Sample median; even sizes take the midpoint of the central pair.
template <typename Derived>
typename Derived::Scalar median(const Eigen::MatrixBase<Derived>& v) {
  using Scalar = typename Derived::Scalar;
  if (v.size() == 0) throw DataError("median of an empty vector");
  std::vector<Scalar> values(static_cast<std::size_t>(v.size()));
  for (Index i = 0; i < v.size(); ++i) values[static_cast<std::size_t>(i)] = v(i);
  return detail::median_inplace(values);
}

/// Empirical risk (1/n) sum loss(y_i - intercept - x_i' beta).
template <typename DerivedX, typename DerivedY, typename DerivedB>
typename DerivedY::Scalar risk(const ModelKind& model, const Eigen::MatrixBase<DerivedX>& x,
                               const Eigen::MatrixBase<DerivedY>& y,
                               const Eigen::MatrixBase<DerivedB>& beta,
                               typename DerivedY::Scalar intercept) {
  using Scalar = typename DerivedY::Scalar;
  if (x.rows() != y.size() || x.cols() != beta.size()) {
    throw DataError("risk: dimension mismatch between x, y and beta");
  }
  if (y.size() == 0) return Scalar(0);
  const Vector<Scalar> r = (y - x * beta).array() - intercept;
  if (model.is_quantile()) return detail::mean_check_loss(r, static_cast<Scalar>(model.tau));
  return r.squaredNorm() / static_cast<Scalar>(r.size());
}

/// Prediction error between observed and predicted responses.
template <typename DerivedT, typename DerivedP>
typename DerivedT::Scalar error_metric(const ErrorKind& kind,
                                       const Eigen::MatrixBase<DerivedT>& y_true,
                                       const Eigen::MatrixBase<DerivedP>& y_pred) {
  using Scalar = typename DerivedT::Scalar;
  kind.validate();
  if (y_true.size() != y_pred.size()) {
    throw DataError("error_metric: y_true has length " + std::to_string(y_true.size()) +
                    " but prediction has length " + std::to_string(y_pred.size()));
  }
  if (y_true.size() == 0) throw DataError("error_metric: empty input");
  const Vector<Scalar> r = y_true - y_pred;
  const auto n = static_cast<Scalar>(r.size());
  switch (kind.metric) {
    case ErrorKind::Metric::MSE:
      return r.squaredNorm() / n;
    case ErrorKind::Metric::MAE:
      return r.cwiseAbs().sum() / n;
    case ErrorKind::Metric::MDAE: {
      const Vector<Scalar> a = r.cwiseAbs();
      return median(a);
    }
    case ErrorKind::Metric::QRE:
      return detail::mean_check_loss(r, static_cast<Scalar>(*kind.tau));
  }
  return Scalar(0);
}

/// One error value per prediction vector, in input order.
std::vector<double> error_calculator(const VectorXd& y_true,
                                     const std::vector<VectorXd>& predictions,
                                     const ErrorKind& kind);

}  // namespace penreg
