#include "penreg/loss.hpp"

namespace penreg {

ModelKind parse_model(std::string_view name, double tau) {
  if (name == "lm") return ModelKind::least_squares();
  if (name == "qr") return ModelKind::quantile(tau);
  throw ConfigError("unknown model \"" + std::string(name) + "\"; valid: lm, qr");
}

std::string model_name(const ModelKind& model) { return model.is_quantile() ? "qr" : "lm"; }

ErrorKind parse_error_kind(std::string_view name, std::optional<double> tau) {
  ErrorKind kind;
  if (name == "MSE") {
    kind.metric = ErrorKind::Metric::MSE;
  } else if (name == "MAE") {
    kind.metric = ErrorKind::Metric::MAE;
  } else if (name == "MDAE") {
    kind.metric = ErrorKind::Metric::MDAE;
  } else if (name == "QRE") {
    kind.metric = ErrorKind::Metric::QRE;
    kind.tau = tau;  // may stay unset until a model supplies it
  } else {
    throw ConfigError("unknown error type \"" + std::string(name) +
                      "\"; valid: MSE, MAE, MDAE, QRE");
  }
  if (kind.tau && !(*kind.tau > 0.0 && *kind.tau < 1.0)) throw ConfigError("QRE tau must lie in (0, 1)");
  return kind;
}

std::string error_name(const ErrorKind& kind) {
  switch (kind.metric) {
    case ErrorKind::Metric::MSE: return "MSE";
    case ErrorKind::Metric::MAE: return "MAE";
    case ErrorKind::Metric::MDAE: return "MDAE";
    case ErrorKind::Metric::QRE: return "QRE";
  }
  return "MSE";
}

std::vector<double> error_calculator(const VectorXd& y_true,
                                     const std::vector<VectorXd>& predictions,
                                     const ErrorKind& kind) {
  std::vector<double> out;
  out.reserve(predictions.size());
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (predictions[i].size() != y_true.size()) {
      throw DataError("error_calculator: prediction " + std::to_string(i) + " has length " +
                      std::to_string(predictions[i].size()) + ", expected " +
                      std::to_string(y_true.size()));
    }
    out.push_back(error_metric(kind, y_true, predictions[i]));
  }
  return out;
}

}  // namespace penreg
