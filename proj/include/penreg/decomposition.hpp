#pragma once

#include "penreg/types.hpp"

namespace penreg {

/// Principal components of the column-centered matrix.
struct PcaResult {
  MatrixXd loadings;    // p x rank, orthonormal columns
  VectorXd explained;   // variance ratio per component, decreasing
  Index rank = 0;
};

PcaResult pca(const MatrixXd& x);

/// Smallest d with explained(0..d-1) summing to at least pct. Returns the
/// number of available components when pct is not reachable.
Index components_for(const VectorXd& explained, double pct);

/// Univariate PLS by NIPALS with deflation of X. Components are extracted
/// until the explained X variance reaches pct, the deflation stalls, or
/// max_components is hit.
struct PlsResult {
  MatrixXd x_weights;   // p x d
  MatrixXd x_loadings;  // p x d
  MatrixXd scores;      // n x d
  VectorXd explained;   // X-variance ratio per component
};

PlsResult pls_nipals(const MatrixXd& x, const VectorXd& y, double pct, Index max_components);

/// Sparse loadings by alternating minimization of the elastic-net PCA
/// criterion. Columns are normalized; all-zero columns are kept as zero.
struct SparsePcaOptions {
  double alpha = 1e-5;        // l1 penalty on the loadings
  double ridge_alpha = 1e-2;  // l2 penalty on the loadings
  int max_iters = 200;
  double tol = 1e-8;
};

MatrixXd sparse_pca(const MatrixXd& x, Index components, const SparsePcaOptions& opts = {});

/// Variance ratio of each component after removing what the earlier ones
/// already explain (QR of the scores).
VectorXd adjusted_variance(const MatrixXd& x, const MatrixXd& loadings);

}  // namespace penreg
