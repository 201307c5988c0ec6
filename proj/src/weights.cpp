#include "penreg/weights.hpp"

#include "penreg/decomposition.hpp"

#include <cmath>
#include <string>

namespace penreg {

namespace {

constexpr std::pair<WeightTechnique, std::string_view> kTechniqueNames[] = {
    {WeightTechnique::Unpenalized, "unpenalized"}, {WeightTechnique::PcaPct, "pca_pct"},
    {WeightTechnique::Pca1, "pca_1"},              {WeightTechnique::PlsPct, "pls_pct"},
    {WeightTechnique::Pls1, "pls_1"},              {WeightTechnique::Spca, "spca"},
    {WeightTechnique::Lasso, "lasso"},
};

// Unpenalized fit of y on the given regressors.
VectorXd unpenalized_fit(const WeightSpec& spec, const MatrixXd& z, const VectorXd& y) {
  const Design design(z, y, spec.model, spec.intercept);
  PenaltySpec<> none;
  none.kind = PenaltyKind::None;
  none.lambda1 = 0.0;
  const Coefficients fit = fit_single(design, none, nullptr, spec.controls);
  if (!fit.beta.allFinite()) throw NumericError("weights: pilot fit is not finite");
  return fit.beta;
}

// Regress on the projected design x * basis and map back.
VectorXd projected_fit(const WeightSpec& spec, const Dataset& data, const MatrixXd& basis) {
  if (basis.cols() == 0) {
    throw DataError("weights: no components explain any variability of the predictors");
  }
  const MatrixXd z = data.x() * basis;
  return basis * unpenalized_fit(spec, z, data.y());
}

void check_powers(const std::vector<double>& gammas, const char* name) {
  for (double g : gammas) {
    if (!std::isfinite(g) || g < 0.0) {
      throw ConfigError(std::string(name) + " values must be finite and nonnegative");
    }
  }
}

}  // namespace

WeightTechnique parse_weight_technique(std::string_view name) {
  for (const auto& [t, n] : kTechniqueNames) {
    if (n == name) return t;
  }
  std::string valid;
  for (const auto& entry : kTechniqueNames) {
    if (!valid.empty()) valid += ", ";
    valid += entry.second;
  }
  throw ConfigError("unknown weight technique \"" + std::string(name) + "\" (valid: " + valid + ")");
}

std::string_view weight_technique_name(WeightTechnique t) {
  for (const auto& [tt, n] : kTechniqueNames) {
    if (tt == t) return n;
  }
  return "?";
}

void WeightSpec::validate() const {
  model.validate();
  controls.validate();
  check_powers(lasso_power_weight, "lasso_power_weight");
  check_powers(gl_power_weight, "gl_power_weight");
  if (!(variability_pct > 0.0 && variability_pct <= 1.0)) {
    throw ConfigError("variability_pct must be in (0, 1]");
  }
  if (!(lambda1_weights > 0.0) || !std::isfinite(lambda1_weights)) {
    throw ConfigError("lambda1_weights must be positive");
  }
  if (!(spca_alpha > 0.0) || !(spca_ridge_alpha > 0.0)) {
    throw ConfigError("spca_alpha and spca_ridge_alpha must be positive");
  }
  if (!(weight_tol > 0.0) || !std::isfinite(weight_tol)) throw ConfigError("weight_tol must be positive");
}

WeightSpec WeightSpec::restricted_to(PenaltyKind kind) const {
  WeightSpec out = *this;
  if (!uses_lasso_weights(kind)) out.lasso_power_weight.clear();
  if (!uses_gl_weights(kind)) out.gl_power_weight.clear();
  return out;
}

VectorXd pilot_estimate(const WeightSpec& spec, const Dataset& data) {
  spec.validate();
  const Index n = data.rows();
  const Index p = data.cols();
  switch (spec.technique) {
    case WeightTechnique::Unpenalized:
      if (n <= p) {
        throw DataError("weights: unpenalized pilot needs more observations than predictors (n=" +
                        std::to_string(n) + ", p=" + std::to_string(p) + ")");
      }
      return unpenalized_fit(spec, data.x(), data.y());
    case WeightTechnique::PcaPct: {
      const PcaResult pc = pca(data.x());
      const Index d = components_for(pc.explained, spec.variability_pct);
      return projected_fit(spec, data, pc.loadings.leftCols(d));
    }
    case WeightTechnique::Pca1: {
      const PcaResult pc = pca(data.x());
      if (pc.rank == 0) throw DataError("weights: predictors have no variability");
      return pc.loadings.col(0);
    }
    case WeightTechnique::PlsPct: {
      const PlsResult pls = pls_nipals(data.x(), data.y(), spec.variability_pct, p);
      return projected_fit(spec, data, pls.x_loadings);
    }
    case WeightTechnique::Pls1: {
      const PlsResult pls = pls_nipals(data.x(), data.y(), 0.0, 1);
      if (pls.x_loadings.cols() == 0) throw DataError("weights: no PLS component could be extracted");
      return pls.x_loadings.col(0);
    }
    case WeightTechnique::Spca: {
      // Component count from ordinary PCA, then trimmed by the adjusted
      // variance the sparse components actually explain.
      const PcaResult pc = pca(data.x());
      const Index k = components_for(pc.explained, spec.variability_pct);
      if (k == 0) throw DataError("weights: predictors have no variability");
      SparsePcaOptions opts;
      opts.alpha = spec.spca_alpha;
      opts.ridge_alpha = spec.spca_ridge_alpha;
      const MatrixXd loadings = sparse_pca(data.x(), k, opts);
      const Index d = components_for(adjusted_variance(data.x(), loadings), spec.variability_pct);
      return projected_fit(spec, data, loadings.leftCols(d));
    }
    case WeightTechnique::Lasso: {
      const Design design(data, spec.model, spec.intercept);
      PenaltySpec<> lasso;
      lasso.kind = PenaltyKind::Lasso;
      lasso.lambda1 = spec.lambda1_weights;
      return fit_single(design, lasso, nullptr, spec.controls).beta;
    }
  }
  throw ConfigError("weights: unknown technique");
}

WeightSet weights_from_estimate(const VectorXd& beta_hat, const GroupStructure* groups,
                                const std::vector<double>& gamma1,
                                const std::vector<double>& gamma2, double weight_tol) {
  if (!(weight_tol > 0.0)) throw ConfigError("weight_tol must be positive");
  check_powers(gamma1, "lasso_power_weight");
  check_powers(gamma2, "gl_power_weight");
  WeightSet out;
  const VectorXd mags = beta_hat.cwiseAbs().cwiseMax(weight_tol);
  for (double g : gamma1) out.lasso_weights.push_back(mags.array().pow(-g).matrix());
  if (!gamma2.empty()) {
    if (!groups) throw ConfigError("group weights need a group structure");
    if (groups->num_predictors() != beta_hat.size()) {
      throw DataError("weights: group structure does not match the pilot length");
    }
    VectorXd norms(groups->num_groups());
    for (Index l = 0; l < groups->num_groups(); ++l) {
      norms(l) = std::max(block_norm(beta_hat, *groups, l), weight_tol);
    }
    for (double g : gamma2) out.gl_weights.push_back(norms.array().pow(-g).matrix());
  }
  return out;
}

WeightSet compute_weights(const WeightSpec& spec, const Dataset& data) {
  if (!spec.gl_power_weight.empty() && !data.has_groups()) {
    throw ConfigError("group weights need a group structure");
  }
  const VectorXd pilot = pilot_estimate(spec, data);
  return weights_from_estimate(pilot, data.groups(), spec.lasso_power_weight, spec.gl_power_weight,
                               spec.weight_tol);
}

}  // namespace penreg
