#include "penreg/tuning.hpp"

#include "penreg/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

namespace penreg {

namespace {

// QRE without its own tau scores at the model's tau.
ErrorKind effective_error(ErrorKind e, const ModelKind& model) {
  if (e.metric == ErrorKind::Metric::QRE && !e.tau) {
    if (!model.is_quantile()) throw ConfigError("QRE needs a tau for least squares models");
    e.tau = model.tau;
  }
  e.validate();
  return e;
}

IndexList complement(Index n, const IndexList& part) {
  std::vector<char> in(static_cast<std::size_t>(n), 0);
  for (Index i : part) in[static_cast<std::size_t>(i)] = 1;
  IndexList out;
  out.reserve(static_cast<std::size_t>(n) - part.size());
  for (Index i = 0; i < n; ++i) {
    if (!in[static_cast<std::size_t>(i)]) out.push_back(i);
  }
  return out;
}

double score(const ErrorKind& kind, const VectorXd& y, const Coefficients& c, const MatrixXd& x) {
  if (!c.beta.allFinite() || !std::isfinite(c.intercept)) return std::numeric_limits<double>::quiet_NaN();
  return error_metric(kind, y, predict(c, x));
}

std::string fit_warning(const Coefficients& c, Index model, std::optional<Index> fold) {
  std::string where = "model " + std::to_string(model);
  if (fold) where += " fold " + std::to_string(*fold);
  if (!c.message.empty()) return where + ": fit failed: " + c.message;
  return where + ": not converged after " + std::to_string(c.iterations) +
         " iterations (residual " + std::to_string(c.kkt_residual) + ")";
}

}  // namespace

ResolvedGrid resolve_grid(const ModelSpec& model, const GridSpec& spec, const Dataset& train) {
  ResolvedGrid out;
  std::vector<VectorXd> lw = spec.lasso_weights;
  std::vector<VectorXd> gw = spec.gl_weights;
  const bool explicit_weights = !lw.empty() || !gw.empty();
  if (is_adaptive(model.penalty) && !explicit_weights) {
    if (!spec.weights) {
      throw ConfigError("penalty " + penalty_name(model.penalty) +
                        " needs adaptive weights or a weight technique");
    }
    WeightSpec ws = spec.weights->restricted_to(model.penalty);
    ws.model = model.model;
    ws.intercept = model.intercept;
    out.weights = compute_weights(ws, train);
    lw = out.weights.lasso_weights;
    gw = out.weights.gl_weights;
  } else {
    out.weights.lasso_weights = lw;
    out.weights.gl_weights = gw;
  }
  out.grid = make_grid(model.penalty, spec.lambda1, spec.alpha, std::move(lw), std::move(gw));
  validate_grid(model.penalty, out.grid, train.cols(), train.groups());
  return out;
}

std::vector<IndexList> kfold_indices(Index n, Index nfolds, std::optional<std::uint64_t> seed) {
  if (nfolds < 2) throw ConfigError("nfolds must be at least 2");
  if (nfolds > n) {
    throw ConfigError("nfolds (" + std::to_string(nfolds) + ") exceeds the number of rows (" +
                      std::to_string(n) + ")");
  }
  const IndexList perm = permutation(n, seed ? *seed : entropy_seed());
  std::vector<IndexList> folds(static_cast<std::size_t>(nfolds));
  const Index base = n / nfolds;
  const Index extra = n % nfolds;
  Index at = 0;
  for (Index f = 0; f < nfolds; ++f) {
    const Index len = base + (f < extra ? 1 : 0);
    auto& fold = folds[static_cast<std::size_t>(f)];
    fold.assign(perm.begin() + at, perm.begin() + at + len);
    std::sort(fold.begin(), fold.end());
    at += len;
  }
  return folds;
}

CvDetail cross_validation_detailed(const ModelSpec& model, const GridSpec& grid, const Dataset& data,
                                   const CvSpec& cv, const Parallelism& par) {
  model.model.validate();
  model.controls.validate();
  const ErrorKind error = effective_error(cv.error, model.model);
  CvDetail out;
  out.folds = kfold_indices(data.rows(), cv.nfolds, cv.seed);
  const auto nfolds = static_cast<std::size_t>(cv.nfolds);

  // Per fold: training and validation parts, then weights and grid from the
  // training part alone.
  std::vector<Dataset> trains;
  std::vector<Dataset> valids;
  trains.reserve(nfolds);
  valids.reserve(nfolds);
  for (std::size_t f = 0; f < nfolds; ++f) {
    const IndexList train_rows = complement(data.rows(), out.folds[f]);
    Dataset train = data.subset(train_rows);
    Dataset valid = data.subset(out.folds[f]);
    if (model.standardize) {
      const Standardizer s = Standardizer::fit(train.x());
      train = s.apply(train);
      valid = s.apply(valid);
    }
    trains.push_back(std::move(train));
    valids.push_back(std::move(valid));
  }
  out.fold_grids.resize(nfolds);
  std::vector<std::unique_ptr<Design>> designs(nfolds);
  parallel_for(static_cast<Index>(nfolds), par.workers(), [&](Index f) {
    const auto fi = static_cast<std::size_t>(f);
    out.fold_grids[fi] = resolve_grid(model, grid, trains[fi]);
    designs[fi] = std::make_unique<Design>(trains[fi], model.model, model.intercept);
  });

  const Index size = out.fold_grids.front().grid.size();
  out.fold_coefficients.assign(nfolds, std::vector<Coefficients>(static_cast<std::size_t>(size)));
  // Weight axes may differ across folds in value but never in length, so
  // every fold shares one sweep plan.
  const auto sweeps = plan_sweeps(out.fold_grids.front().grid);
  const auto nsweeps = static_cast<Index>(sweeps.size());
  parallel_for(static_cast<Index>(nfolds) * nsweeps, par.workers(), [&](Index task) {
    const auto f = static_cast<std::size_t>(task / nsweeps);
    const auto& sweep = sweeps[static_cast<std::size_t>(task % nsweeps)];
    solve_sweep(*designs[f], model.penalty, out.fold_grids[f].grid, sweep, trains[f].groups(),
                model.controls, out.fold_coefficients[f]);
  });

  out.errors.resize(size, cv.nfolds);
  for (std::size_t f = 0; f < nfolds; ++f) {
    for (Index i = 0; i < size; ++i) {
      const auto& c = out.fold_coefficients[f][static_cast<std::size_t>(i)];
      out.errors(i, static_cast<Index>(f)) = score(error, valids[f].y(), c, valids[f].x());
      if (!c.converged) out.warnings.push_back(fit_warning(c, i, static_cast<Index>(f)));
    }
  }
  return out;
}

MatrixXd cross_validation(const ModelSpec& model, const GridSpec& grid, const Dataset& data,
                          const CvSpec& cv, const Parallelism& par) {
  return cross_validation_detailed(model, grid, data, cv, par).errors;
}

Index select_best(const MatrixXd& errors) {
  if (errors.rows() == 0) throw ConfigError("select_best: no models");
  Index best = 0;
  double best_mean = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < errors.rows(); ++i) {
    double m = errors.row(i).mean();
    if (std::isnan(m)) m = std::numeric_limits<double>::infinity();
    if (m < best_mean) {
      best_mean = m;
      best = i;
    }
  }
  return best;
}

SplitIndices tvt_split(Index n, const TvtSpec& spec) {
  auto resolve = [n](std::optional<Index> size, double pct, const char* name) {
    if (size) {
      if (*size < 1) throw ConfigError(std::string(name) + " must be at least 1");
      return *size;
    }
    if (!(pct > 0.0 && pct < 1.0)) throw ConfigError(std::string(name) + " percentage must be in (0, 1)");
    return std::max<Index>(1, static_cast<Index>(std::floor(pct * static_cast<double>(n))));
  };
  const Index ntr = resolve(spec.train_size, spec.train_pct, "train_size");
  const Index nva = resolve(spec.validate_size, spec.validate_pct, "validate_size");
  if (ntr + nva >= n) {
    throw ConfigError("train (" + std::to_string(ntr) + ") plus validate (" + std::to_string(nva) +
                      ") leaves no test rows out of " + std::to_string(n));
  }
  const IndexList perm = permutation(n, spec.seed ? *spec.seed : entropy_seed());
  SplitIndices s;
  s.train.assign(perm.begin(), perm.begin() + ntr);
  s.validate.assign(perm.begin() + ntr, perm.begin() + ntr + nva);
  s.test.assign(perm.begin() + ntr + nva, perm.end());
  return s;
}

TvtResult train_validate_test(const ModelSpec& model, const GridSpec& grid, const Dataset& data,
                              const TvtSpec& tvt, const Parallelism& par) {
  model.model.validate();
  model.controls.validate();
  const ErrorKind error = effective_error(tvt.error, model.model);
  TvtResult out;
  out.split = tvt_split(data.rows(), tvt);
  Dataset train = data.subset(out.split.train);
  Dataset valid = data.subset(out.split.validate);
  Dataset test = data.subset(out.split.test);
  if (model.standardize) {
    const Standardizer s = Standardizer::fit(train.x());
    train = s.apply(train);
    valid = s.apply(valid);
    test = s.apply(test);
    out.standardization = s;
  }

  const ResolvedGrid resolved = resolve_grid(model, grid, train);
  out.fit = solve_grid(train, model.model, model.penalty, resolved.grid, model.controls, par,
                       model.intercept);
  const Index size = resolved.grid.size();
  out.validation_errors.resize(size);
  for (Index i = 0; i < size; ++i) {
    const auto& c = out.fit.coefficients[static_cast<std::size_t>(i)];
    out.validation_errors(i) = score(error, valid.y(), c, valid.x());
    if (!c.converged) out.warnings.push_back(fit_warning(c, i, std::nullopt));
  }
  out.index = select_best(out.validation_errors);
  const auto& winner = out.fit.coefficients[static_cast<std::size_t>(out.index)];
  out.optimal_betas = winner.stacked();
  out.optimal_parameters = parameters_at(resolved.grid, out.index);
  out.test_error = score(error, test.y(), winner, test.x());
  return out;
}

}  // namespace penreg
