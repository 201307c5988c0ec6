#include "penreg/grid.hpp"

#include <algorithm>
#include <limits>
#include <string>

namespace penreg {

namespace {

template <typename T>
Index axis_len(const std::vector<T>& axis) {
  return axis.empty() ? 1 : static_cast<Index>(axis.size());
}

}  // namespace

Index ParameterGrid::size() const {
  if (lambda1.empty()) return 0;
  return axis_len(lambda1) * axis_len(alpha) * axis_len(lasso_weights) * axis_len(gl_weights);
}

ParameterGrid make_grid(PenaltyKind kind, std::vector<double> lambda1, std::vector<double> alpha,
                        std::vector<VectorXd> lasso_weights, std::vector<VectorXd> gl_weights) {
  if (lambda1.empty()) throw ConfigError("grid: lambda1 needs at least one value");
  ParameterGrid g;
  g.lambda1 = std::move(lambda1);
  if (uses_alpha(kind)) {
    if (alpha.empty()) throw ConfigError("grid: penalty " + penalty_name(kind) + " needs alpha values");
    g.alpha = std::move(alpha);
  }
  if (uses_lasso_weights(kind)) {
    if (lasso_weights.empty()) throw ConfigError("grid: penalty " + penalty_name(kind) + " needs lasso weights");
    g.lasso_weights = std::move(lasso_weights);
  } else if (!lasso_weights.empty()) {
    throw ConfigError("grid: lasso weights given for penalty " + penalty_name(kind));
  }
  if (uses_gl_weights(kind)) {
    if (gl_weights.empty()) throw ConfigError("grid: penalty " + penalty_name(kind) + " needs group weights");
    g.gl_weights = std::move(gl_weights);
  } else if (!gl_weights.empty()) {
    throw ConfigError("grid: group weights given for penalty " + penalty_name(kind));
  }
  return g;
}

Combination decode(const ParameterGrid& grid, Index index) {
  const Index size = grid.size();
  if (index < 0 || index >= size) {
    throw ConfigError("grid index " + std::to_string(index) + " out of range [0, " +
                      std::to_string(size) + ")");
  }
  Combination c;
  c.gl_weights = index % axis_len(grid.gl_weights);
  index /= axis_len(grid.gl_weights);
  c.lasso_weights = index % axis_len(grid.lasso_weights);
  index /= axis_len(grid.lasso_weights);
  c.alpha = index % axis_len(grid.alpha);
  c.lambda1 = index / axis_len(grid.alpha);
  return c;
}

Index encode(const ParameterGrid& grid, const Combination& c) {
  return ((c.lambda1 * axis_len(grid.alpha) + c.alpha) * axis_len(grid.lasso_weights) +
          c.lasso_weights) *
             axis_len(grid.gl_weights) +
         c.gl_weights;
}

std::vector<Combination> enumerate_grid(const ParameterGrid& grid) {
  std::vector<Combination> out;
  out.reserve(static_cast<std::size_t>(grid.size()));
  for (Index i = 0; i < grid.size(); ++i) out.push_back(decode(grid, i));
  return out;
}

PenaltySpec<> penalty_for(PenaltyKind kind, const ParameterGrid& grid, const Combination& c) {
  PenaltySpec<> s;
  s.kind = kind;
  s.lambda1 = grid.lambda1.at(static_cast<std::size_t>(c.lambda1));
  if (!grid.alpha.empty()) s.alpha = grid.alpha.at(static_cast<std::size_t>(c.alpha));
  if (!grid.lasso_weights.empty()) {
    s.lasso_weights = grid.lasso_weights.at(static_cast<std::size_t>(c.lasso_weights));
  }
  if (!grid.gl_weights.empty()) s.gl_weights = grid.gl_weights.at(static_cast<std::size_t>(c.gl_weights));
  return s;
}

ParameterRecord parameters_at(const ParameterGrid& grid, Index index) {
  const Combination c = decode(grid, index);
  ParameterRecord r;
  r.lambda1 = grid.lambda1[static_cast<std::size_t>(c.lambda1)];
  if (!grid.alpha.empty()) r.alpha = grid.alpha[static_cast<std::size_t>(c.alpha)];
  if (!grid.lasso_weights.empty()) {
    r.lasso_weights = grid.lasso_weights[static_cast<std::size_t>(c.lasso_weights)];
    r.lasso_weights_index = c.lasso_weights;
  }
  if (!grid.gl_weights.empty()) {
    r.gl_weights = grid.gl_weights[static_cast<std::size_t>(c.gl_weights)];
    r.gl_weights_index = c.gl_weights;
  }
  return r;
}

ParameterRecord retrieve_parameters_value(const GridResult& result, Index index) {
  return parameters_at(result.grid, index);
}

std::vector<IndexList> plan_sweeps(const ParameterGrid& grid) {
  const Index nl = axis_len(grid.lambda1);
  const Index rest = grid.size() / std::max<Index>(nl, 1);
  std::vector<IndexList> sweeps(static_cast<std::size_t>(rest));
  for (Index r = 0; r < rest; ++r) {
    auto& sweep = sweeps[static_cast<std::size_t>(r)];
    for (Index l = 0; l < nl; ++l) sweep.push_back(l * rest + r);
    std::stable_sort(sweep.begin(), sweep.end(), [&](Index a, Index b) {
      return grid.lambda1[static_cast<std::size_t>(a / rest)] >
             grid.lambda1[static_cast<std::size_t>(b / rest)];
    });
  }
  return sweeps;
}

void solve_sweep(const Design& design, PenaltyKind kind, const ParameterGrid& grid,
                 const IndexList& sweep, const GroupStructure* groups,
                 const SolveControls& controls, std::span<Coefficients> out) {
  WarmStart warm;
  for (Index index : sweep) {
    const PenaltySpec<> spec = penalty_for(kind, grid, decode(grid, index));
    auto& slot = out[static_cast<std::size_t>(index)];
    try {
      slot = fit_single(design, spec, groups, controls, &warm);
    } catch (const std::exception& e) {
      slot = Coefficients{};
      slot.has_intercept = design.intercept();
      slot.intercept = design.intercept() ? std::numeric_limits<double>::quiet_NaN() : 0.0;
      slot.beta = VectorXd::Constant(design.cols(), std::numeric_limits<double>::quiet_NaN());
      slot.objective = std::numeric_limits<double>::quiet_NaN();
      slot.converged = false;
      slot.message = e.what();
      warm = WarmStart{};
    }
  }
}

void validate_grid(PenaltyKind kind, const ParameterGrid& grid, Index p,
                   const GroupStructure* groups) {
  if (grid.size() == 0) throw ConfigError("grid: lambda1 needs at least one value");
  if (uses_alpha(kind) && grid.alpha.empty()) throw ConfigError("grid: alpha axis missing");
  // Each axis value is checked once through a spec that pins the others.
  const Combination base;
  for (Index i = 0; i < axis_len(grid.lambda1); ++i) {
    Combination c = base;
    c.lambda1 = i;
    penalty_for(kind, grid, c).validate(p, groups);
  }
  for (Index i = 0; i < static_cast<Index>(grid.alpha.size()); ++i) {
    Combination c = base;
    c.alpha = i;
    penalty_for(kind, grid, c).validate(p, groups);
  }
  for (Index i = 0; i < static_cast<Index>(grid.lasso_weights.size()); ++i) {
    Combination c = base;
    c.lasso_weights = i;
    penalty_for(kind, grid, c).validate(p, groups);
  }
  for (Index i = 0; i < static_cast<Index>(grid.gl_weights.size()); ++i) {
    Combination c = base;
    c.gl_weights = i;
    penalty_for(kind, grid, c).validate(p, groups);
  }
}

GridResult solve_grid(const Dataset& data, const ModelKind& model, PenaltyKind kind,
                      const ParameterGrid& grid, const SolveControls& controls,
                      const Parallelism& par, bool intercept) {
  controls.validate();
  validate_grid(kind, grid, data.cols(), data.groups());
  GridResult result;
  result.model = model;
  result.penalty = kind;
  result.intercept = intercept;
  result.grid = grid;
  result.coefficients.resize(static_cast<std::size_t>(grid.size()));

  const Design design(data, model, intercept);
  const auto sweeps = plan_sweeps(grid);
  std::span<Coefficients> out(result.coefficients);
  parallel_for(static_cast<Index>(sweeps.size()), par.workers(), [&](Index s) {
    solve_sweep(design, kind, grid, sweeps[static_cast<std::size_t>(s)], data.groups(), controls, out);
  });
  return result;
}

}  // namespace penreg
