#pragma once

#include "penreg/dataset.hpp"
#include "penreg/loss.hpp"
#include "penreg/parallel.hpp"
#include "penreg/penalty.hpp"
#include "penreg/solver.hpp"

#include <optional>
#include <span>
#include <vector>

namespace penreg {

/// Hyperparameter axes. An empty axis is absent and counts as one value.
/// Enumeration nests lambda1 (outermost), alpha, lasso_weights, gl_weights
/// (innermost, fastest varying).
struct ParameterGrid {
  std::vector<double> lambda1;
  std::vector<double> alpha;
  std::vector<VectorXd> lasso_weights;
  std::vector<VectorXd> gl_weights;

  Index size() const;
};

/// Keeps only the axes the penalty kind uses; alpha is dropped silently for
/// kinds without one. Throws ConfigError on a missing mandatory axis or on
/// weight vectors for a part the kind does not weight.
ParameterGrid make_grid(PenaltyKind kind, std::vector<double> lambda1, std::vector<double> alpha,
                        std::vector<VectorXd> lasso_weights = {},
                        std::vector<VectorXd> gl_weights = {});

/// Position along each axis; 0 for absent axes.
struct Combination {
  Index lambda1 = 0;
  Index alpha = 0;
  Index lasso_weights = 0;
  Index gl_weights = 0;

  bool operator==(const Combination&) const = default;
};

Combination decode(const ParameterGrid& grid, Index index);
Index encode(const ParameterGrid& grid, const Combination& c);
std::vector<Combination> enumerate_grid(const ParameterGrid& grid);

PenaltySpec<> penalty_for(PenaltyKind kind, const ParameterGrid& grid, const Combination& c);

/// Parameter values of one grid point; absent axes are nullopt.
struct ParameterRecord {
  double lambda1 = 0.0;
  std::optional<double> alpha;
  std::optional<VectorXd> lasso_weights;
  std::optional<VectorXd> gl_weights;
  std::optional<Index> lasso_weights_index;
  std::optional<Index> gl_weights_index;
};

ParameterRecord parameters_at(const ParameterGrid& grid, Index index);

struct GridResult {
  ModelKind model;
  PenaltyKind penalty = PenaltyKind::None;
  bool intercept = true;
  ParameterGrid grid;
  std::vector<Coefficients> coefficients;  // enumeration order
};

ParameterRecord retrieve_parameters_value(const GridResult& result, Index index);

/// Grid indices sharing alpha and weights, ordered by decreasing lambda1
/// (ties by index). Each sweep is solved sequentially with warm starts.
std::vector<IndexList> plan_sweeps(const ParameterGrid& grid);

/// Solves one sweep, writing into out[index] for each index of the sweep.
/// A failing model is recorded as non-converged with NaN coefficients and
/// the error message; the sweep continues from a cold start.
void solve_sweep(const Design& design, PenaltyKind kind, const ParameterGrid& grid,
                 const IndexList& sweep, const GroupStructure* groups,
                 const SolveControls& controls, std::span<Coefficients> out);

/// Validates every grid point against the data up front (ConfigError), then
/// solves all of them, sweeps distributed over the workers.
GridResult solve_grid(const Dataset& data, const ModelKind& model, PenaltyKind kind,
                      const ParameterGrid& grid, const SolveControls& controls,
                      const Parallelism& par = {}, bool intercept = true);

void validate_grid(PenaltyKind kind, const ParameterGrid& grid, Index p,
                   const GroupStructure* groups);

}  // namespace penreg
