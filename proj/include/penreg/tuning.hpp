#pragma once

#include "penreg/dataset.hpp"
#include "penreg/grid.hpp"
#include "penreg/loss.hpp"
#include "penreg/parallel.hpp"
#include "penreg/weights.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace penreg {

/// What to fit: model, penalty and solver settings shared by every grid point.
struct ModelSpec {
  ModelKind model;
  PenaltyKind penalty = PenaltyKind::Lasso;
  bool intercept = true;
  bool standardize = false;  // centre/scale X on each training part
  SolveControls controls;
};

/// Grid axes. Adaptive weights are either given explicitly or computed from
/// each training part with `weights`.
struct GridSpec {
  std::vector<double> lambda1 = {1.0};
  std::vector<double> alpha = {0.5};
  std::vector<VectorXd> lasso_weights;
  std::vector<VectorXd> gl_weights;
  std::optional<WeightSpec> weights;
};

/// Weights (computed or explicit) and the resulting grid for one training part.
struct ResolvedGrid {
  ParameterGrid grid;
  WeightSet weights;
};

ResolvedGrid resolve_grid(const ModelSpec& model, const GridSpec& grid, const Dataset& train);

/// Seeded permutation cut into nfolds parts; the first n % nfolds parts get
/// one extra row.
std::vector<IndexList> kfold_indices(Index n, Index nfolds, std::optional<std::uint64_t> seed);

struct CvSpec {
  Index nfolds = 5;
  ErrorKind error;
  std::optional<std::uint64_t> seed;
};

struct CvDetail {
  MatrixXd errors;  // grid size x nfolds
  std::vector<IndexList> folds;
  std::vector<ResolvedGrid> fold_grids;
  std::vector<std::vector<Coefficients>> fold_coefficients;
  std::vector<std::string> warnings;
};

CvDetail cross_validation_detailed(const ModelSpec& model, const GridSpec& grid, const Dataset& data,
                                   const CvSpec& cv, const Parallelism& par = {});

/// Entry (i, j) is the validation error of grid point i on fold j.
MatrixXd cross_validation(const ModelSpec& model, const GridSpec& grid, const Dataset& data,
                          const CvSpec& cv, const Parallelism& par = {});

/// Row with the smallest mean; NaN counts as +inf; ties go to the lowest index.
Index select_best(const MatrixXd& errors);

struct TvtSpec {
  std::optional<Index> train_size;
  std::optional<Index> validate_size;
  double train_pct = 0.05;
  double validate_pct = 0.05;
  ErrorKind error;
  std::optional<std::uint64_t> seed;
};

/// First train, then validate, remainder test, over one seeded permutation.
/// Sizes take preference over percentages.
SplitIndices tvt_split(Index n, const TvtSpec& spec);

struct TvtResult {
  VectorXd optimal_betas;  // intercept first
  ParameterRecord optimal_parameters;
  double test_error = 0.0;
  Index index = 0;
  VectorXd validation_errors;
  SplitIndices split;
  GridResult fit;
  std::optional<Standardizer> standardization;
  std::vector<std::string> warnings;
};

/// Grid fitted on the training part, winner chosen on validation, and its
/// training-fit coefficients scored once on the test part (no refit).
TvtResult train_validate_test(const ModelSpec& model, const GridSpec& grid, const Dataset& data,
                              const TvtSpec& tvt, const Parallelism& par = {});

}  // namespace penreg
