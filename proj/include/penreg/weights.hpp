#pragma once

#include "penreg/dataset.hpp"
#include "penreg/loss.hpp"
#include "penreg/penalty.hpp"
#include "penreg/solver.hpp"

#include <string_view>
#include <vector>

namespace penreg {

enum class WeightTechnique { Unpenalized, PcaPct, Pca1, PlsPct, Pls1, Spca, Lasso };

WeightTechnique parse_weight_technique(std::string_view name);
std::string_view weight_technique_name(WeightTechnique t);

struct WeightSpec {
  WeightTechnique technique = WeightTechnique::PcaPct;
  ModelKind model;
  bool intercept = true;
  std::vector<double> lasso_power_weight = {1.0};  // gamma_1 values; empty skips lasso weights
  std::vector<double> gl_power_weight = {1.0};     // gamma_2 values; empty skips group weights
  double variability_pct = 0.9;
  double lambda1_weights = 0.1;
  double spca_alpha = 1e-5;
  double spca_ridge_alpha = 1e-2;
  double weight_tol = 1e-4;
  SolveControls controls;

  void validate() const;
  /// Copy with the power lists the penalty kind does not use cleared.
  WeightSpec restricted_to(PenaltyKind kind) const;
};

/// One weight vector per power value, in the order the powers were given.
struct WeightSet {
  std::vector<VectorXd> lasso_weights;
  std::vector<VectorXd> gl_weights;
};

/// The coefficient vector whose magnitudes are inverted into weights.
VectorXd pilot_estimate(const WeightSpec& spec, const Dataset& data);

WeightSet weights_from_estimate(const VectorXd& beta_hat, const GroupStructure* groups,
                                const std::vector<double>& gamma1,
                                const std::vector<double>& gamma2, double weight_tol);

WeightSet compute_weights(const WeightSpec& spec, const Dataset& data);

}  // namespace penreg
