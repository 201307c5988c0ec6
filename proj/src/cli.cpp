#include "penreg/cli.hpp"

#include "penreg/dataset.hpp"
#include "penreg/grid.hpp"
#include "penreg/random.hpp"
#include "penreg/tuning.hpp"
#include "penreg/weights.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <sstream>

namespace penreg::cli {

namespace {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

// TOML tables only group keys; every key maps to the flag of the same name.
class FlatConfig : public CLI::ConfigTOML {
 public:
  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    std::vector<CLI::ConfigItem> items;
    for (auto& item : CLI::ConfigTOML::from_config(input)) {
      if (item.name == "++" || item.name == "--") continue;
      item.parents.clear();
      items.push_back(std::move(item));
    }
    return items;
  }
};

struct Options {
  std::string data;
  std::string response = "y";
  std::string groups;
  bool group_row = false;
  std::string model = "lm";
  double tau = 0.5;
  std::string penalization = "lasso";
  bool intercept = true;
  bool standardize = false;
  std::vector<double> lambda1 = {1.0};
  std::vector<double> alpha = {0.5};
  std::string weight_technique = "pca_pct";
  std::vector<double> lasso_power_weight = {1.0};
  std::vector<double> gl_power_weight = {1.0};
  double variability_pct = 0.9;
  double lambda1_weights = 0.1;
  double spca_alpha = 1e-5;
  double spca_ridge_alpha = 1e-2;
  double weight_tol = 1e-4;
  std::string error_type;
  Index nfolds = 5;
  Index train_size = 0;
  Index validate_size = 0;
  double train_pct = 0.05;
  double validate_pct = 0.05;
  std::uint64_t seed = 0;
  bool parallel = false;
  unsigned num_cores = 0;
  int max_iters = 0;
  double objective_tol = SolveControls{}.objective_tol;
  double coef_tol = SolveControls{}.coef_tol;
  double kkt_tol = SolveControls{}.kkt_tol;
  std::string out = ".";
  std::string coefficients;
  std::string generator = "grouped";
  Index n_obs = 1000;
  Index group_size = 10;
  Index num_groups = 10;
  Index non_zero_groups = 5;
  Index non_zero_coef = 6;
  Index n_features = 200;
  Index n_informative = 10;
  double bias = 0.0;
  double noise = 1.0;

  // Filled after parsing.
  bool seed_given = false;
  bool train_size_given = false;
  bool validate_size_given = false;
};

// Long names in both dashed and underscored spelling, so config keys can use
// either.
std::string names(const std::string& flag) {
  std::string under = flag;
  std::replace(under.begin(), under.end(), '-', '_');
  return under == flag ? "--" + flag : "--" + flag + ",--" + under;
}

void add_options(CLI::App& app, Options& o) {
  app.add_option(names("data"), o.data, "CSV file with a header row");
  app.add_option(names("response"), o.response, "Response column name")->capture_default_str();
  app.add_option(names("groups"), o.groups, "One-row file of group labels, one per predictor");
  app.add_flag(names("group-row"), o.group_row, "First record after the header holds group labels");
  app.add_option(names("model"), o.model, "lm or qr")->capture_default_str();
  app.add_option(names("tau"), o.tau, "Quantile level for qr")->capture_default_str();
  app.add_option(names("penalization"), o.penalization,
                 "lasso, gl, sgl, alasso, agl, asgl, asgl_lasso, asgl_gl")
      ->capture_default_str();
  app.add_flag("--intercept,!--no-intercept", o.intercept, "Fit an unpenalized intercept");
  app.add_flag(names("standardize"), o.standardize, "Centre and scale predictors on the training part");
  app.add_option(names("lambda1"), o.lambda1, "Comma list of lambda1 values")->delimiter(',');
  app.add_option(names("alpha"), o.alpha, "Comma list of alpha values")->delimiter(',');
  app.add_option(names("weight-technique"), o.weight_technique,
                 "unpenalized, pca_pct, pca_1, pls_pct, pls_1, spca, lasso")
      ->capture_default_str();
  app.add_option(names("lasso-power-weight"), o.lasso_power_weight, "Comma list of gamma_1")
      ->delimiter(',');
  app.add_option(names("gl-power-weight"), o.gl_power_weight, "Comma list of gamma_2")->delimiter(',');
  app.add_option(names("variability-pct"), o.variability_pct)->capture_default_str();
  app.add_option(names("lambda1-weights"), o.lambda1_weights, "lambda1 of the lasso pilot")
      ->capture_default_str();
  app.add_option(names("spca-alpha"), o.spca_alpha)->capture_default_str();
  app.add_option(names("spca-ridge-alpha"), o.spca_ridge_alpha)->capture_default_str();
  app.add_option(names("weight-tol"), o.weight_tol)->capture_default_str();
  app.add_option(names("error-type"), o.error_type, "MSE, MAE, MDAE or QRE (default MSE for lm, QRE for qr)");
  app.add_option(names("nfolds"), o.nfolds)->capture_default_str();
  app.add_option(names("train-size"), o.train_size, "Training rows (tvt)");
  app.add_option(names("validate-size"), o.validate_size, "Validation rows (tvt)");
  app.add_option(names("train-pct"), o.train_pct)->capture_default_str();
  app.add_option(names("validate-pct"), o.validate_pct)->capture_default_str();
  app.add_option(names("seed"), o.seed, "Seed for splits and synthetic data");
  app.add_flag(names("parallel"), o.parallel, "Solve sweeps on several threads");
  app.add_option(names("num-cores"), o.num_cores, "Worker threads with --parallel");
  app.add_option(names("max-iters"), o.max_iters, "Iteration cap (default 500 for lm, 5000 for qr)");
  app.add_option(names("objective-tol"), o.objective_tol)->capture_default_str();
  app.add_option(names("coef-tol"), o.coef_tol)->capture_default_str();
  app.add_option(names("kkt-tol"), o.kkt_tol)->capture_default_str();
  app.add_option(names("out"), o.out, "Output directory")->capture_default_str();
  app.add_option(names("coefficients"), o.coefficients, "Coefficient file (predict)");
  app.add_option(names("generator"), o.generator, "grouped or sparse (generate)")->capture_default_str();
  app.add_option(names("n-obs"), o.n_obs)->capture_default_str();
  app.add_option(names("group-size"), o.group_size)->capture_default_str();
  app.add_option(names("num-groups"), o.num_groups)->capture_default_str();
  app.add_option(names("non-zero-groups"), o.non_zero_groups)->capture_default_str();
  app.add_option(names("non-zero-coef"), o.non_zero_coef)->capture_default_str();
  app.add_option(names("n-features"), o.n_features)->capture_default_str();
  app.add_option(names("n-informative"), o.n_informative)->capture_default_str();
  app.add_option(names("bias"), o.bias)->capture_default_str();
  app.add_option(names("noise"), o.noise)->capture_default_str();
}

// ---------------------------------------------------------------------------
// JSON text: 17 significant digits, non-finite numbers as null.

void emit(const Json& j, std::string& s, int depth) {
  const std::string pad(static_cast<std::size_t>(2 * (depth + 1)), ' ');
  const std::string close(static_cast<std::size_t>(2 * depth), ' ');
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        s += "{}";
        return;
      }
      s += "{\n";
      bool first = true;
      for (const auto& [key, value] : j.items()) {
        if (!first) s += ",\n";
        first = false;
        s += pad + Json(key).dump() + ": ";
        emit(value, s, depth + 1);
      }
      s += "\n" + close + "}";
      return;
    }
    case Json::value_t::array: {
      const bool nested = std::any_of(j.begin(), j.end(), [](const Json& e) {
        return e.is_object() || e.is_array();
      });
      if (!nested) {
        s += "[";
        for (std::size_t i = 0; i < j.size(); ++i) {
          if (i) s += ", ";
          emit(j[i], s, depth + 1);
        }
        s += "]";
        return;
      }
      s += "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) s += ",\n";
        s += pad;
        emit(j[i], s, depth + 1);
      }
      s += "\n" + close + "]";
      return;
    }
    case Json::value_t::number_float: {
      const double v = j.get<double>();
      s += std::isfinite(v) ? format_real(v) : "null";
      return;
    }
    default:
      s += j.dump();
  }
}

std::string json_text(const Json& j) {
  std::string s;
  emit(j, s, 0);
  s += "\n";
  return s;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot write " + path.string());
  f << text;
  if (!f) throw DataError("write failed: " + path.string());
}

Json read_json(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open " + path.string());
  try {
    return Json::parse(f);
  } catch (const Json::exception& e) {
    throw DataError(path.string() + ": invalid JSON: " + e.what());
  }
}

Json vec_json(const VectorXd& v) {
  Json a = Json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Json vec_json(const Eigen::RowVectorXd& v) { return vec_json(VectorXd(v.transpose())); }

Json vec_json(const std::vector<double>& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(x);
  return a;
}

Json index_json(const IndexList& v) {
  Json a = Json::array();
  for (Index x : v) a.push_back(x);
  return a;
}

double number(const Json& j) {
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  if (!j.is_number()) throw DataError("coefficient file: expected a number");
  return j.get<double>();
}

VectorXd vector_from(const Json& j) {
  if (!j.is_array()) throw DataError("coefficient file: expected an array");
  VectorXd v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Index>(i)) = number(j[i]);
  return v;
}

const Json& field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    throw DataError(std::string("coefficient file: missing field \"") + key + "\"");
  }
  return j.at(key);
}

// ---------------------------------------------------------------------------
// Resolved run settings

struct Run {
  std::string command;
  Options opts;
  std::uint64_t seed = 0;
  ModelKind model;
  PenaltyKind penalty = PenaltyKind::Lasso;
  ErrorKind error;
  SolveControls controls;
  Parallelism par;
};

Run resolve(const std::string& command, const Options& o) {
  Run r;
  r.command = command;
  r.opts = o;
  r.seed = o.seed_given ? o.seed : entropy_seed();
  r.model = parse_model(o.model, o.tau);
  r.penalty = parse_penalty(o.penalization);
  if (r.opts.error_type.empty()) r.opts.error_type = r.model.is_quantile() ? "QRE" : "MSE";
  r.error = parse_error_kind(r.opts.error_type);
  if (r.opts.max_iters == 0) r.opts.max_iters = r.model.is_quantile() ? 5000 : 500;
  r.controls.max_iters = r.opts.max_iters;
  r.controls.objective_tol = o.objective_tol;
  r.controls.coef_tol = o.coef_tol;
  r.controls.kkt_tol = o.kkt_tol;
  r.controls.validate();
  parse_weight_technique(o.weight_technique);
  r.par.enabled = o.parallel;
  if (o.num_cores > 0) r.par.num_cores = o.num_cores;
  return r;
}

bool needs_weights(const Run& r) { return is_adaptive(r.penalty); }

// Everything that determines the numbers, including the seed actually used.
// Output location and thread count are left out: they never change results.
Json config_json(const Run& r) {
  const Options& o = r.opts;
  Json c;
  c["subcommand"] = r.command;
  c["seed"] = r.seed;
  if (r.command == "generate") {
    c["generator"] = o.generator;
    c["n_obs"] = o.n_obs;
    if (o.generator == "grouped") {
      c["group_size"] = o.group_size;
      c["num_groups"] = o.num_groups;
      c["non_zero_groups"] = o.non_zero_groups;
      c["non_zero_coef"] = o.non_zero_coef;
    } else {
      c["n_features"] = o.n_features;
      c["n_informative"] = o.n_informative;
      c["bias"] = o.bias;
    }
    c["noise"] = o.noise;
    return c;
  }
  c["data"] = o.data;
  c["response"] = o.response;
  c["groups"] = o.groups.empty() ? Json() : Json(o.groups);
  c["group_row"] = o.group_row;
  c["model"] = model_name(r.model);
  if (r.model.is_quantile()) c["tau"] = r.model.tau;
  c["penalization"] = penalty_name(r.penalty);
  c["intercept"] = o.intercept;
  c["standardize"] = o.standardize;
  c["lambda1"] = vec_json(o.lambda1);
  if (uses_alpha(r.penalty)) c["alpha"] = vec_json(o.alpha);
  if (needs_weights(r)) {
    c["weight_technique"] = o.weight_technique;
    if (uses_lasso_weights(r.penalty)) c["lasso_power_weight"] = vec_json(o.lasso_power_weight);
    if (uses_gl_weights(r.penalty)) c["gl_power_weight"] = vec_json(o.gl_power_weight);
    c["variability_pct"] = o.variability_pct;
    c["lambda1_weights"] = o.lambda1_weights;
    c["spca_alpha"] = o.spca_alpha;
    c["spca_ridge_alpha"] = o.spca_ridge_alpha;
    c["weight_tol"] = o.weight_tol;
  }
  if (r.command == "cv" || r.command == "tvt") c["error_type"] = r.opts.error_type;
  if (r.command == "cv") c["nfolds"] = o.nfolds;
  if (r.command == "tvt") {
    c["train_size"] = o.train_size_given ? Json(o.train_size) : Json();
    c["validate_size"] = o.validate_size_given ? Json(o.validate_size) : Json();
    c["train_pct"] = o.train_pct;
    c["validate_pct"] = o.validate_pct;
  }
  c["max_iters"] = r.controls.max_iters;
  c["objective_tol"] = r.controls.objective_tol;
  c["coef_tol"] = r.controls.coef_tol;
  c["kkt_tol"] = r.controls.kkt_tol;
  return c;
}

Dataset load_data(const Run& r) {
  const Options& o = r.opts;
  if (o.data.empty()) throw ConfigError("--data is required for " + r.command);
  if (!o.groups.empty() && o.group_row) throw ConfigError("use either --groups or --group-row, not both");
  Dataset data = o.groups.empty() ? load_csv(o.data, o.response, o.group_row)
                                  : load_csv(o.data, o.response, fs::path(o.groups));
  if (uses_groups(r.penalty) && !data.has_groups()) {
    throw ConfigError("penalty " + penalty_name(r.penalty) +
                      " needs a group index; pass --groups <file> or --group-row");
  }
  return data;
}

ModelSpec model_spec(const Run& r) {
  ModelSpec m;
  m.model = r.model;
  m.penalty = r.penalty;
  m.intercept = r.opts.intercept;
  m.standardize = r.opts.standardize;
  m.controls = r.controls;
  return m;
}

GridSpec grid_spec(const Run& r) {
  const Options& o = r.opts;
  GridSpec g;
  g.lambda1 = o.lambda1;
  g.alpha = o.alpha;
  if (needs_weights(r)) {
    WeightSpec w;
    w.technique = parse_weight_technique(o.weight_technique);
    w.model = r.model;
    w.intercept = o.intercept;
    w.lasso_power_weight = o.lasso_power_weight;
    w.gl_power_weight = o.gl_power_weight;
    w.variability_pct = o.variability_pct;
    w.lambda1_weights = o.lambda1_weights;
    w.spca_alpha = o.spca_alpha;
    w.spca_ridge_alpha = o.spca_ridge_alpha;
    w.weight_tol = o.weight_tol;
    w.controls = r.controls;
    g.weights = w;
  }
  return g;
}

Json parameters_json(const Run& r, const ParameterRecord& p, bool with_vectors) {
  Json j;
  j["lambda1"] = p.lambda1;
  j["alpha"] = p.alpha ? Json(*p.alpha) : Json();
  if (needs_weights(r)) {
    j["lasso_power_weight"] =
        p.lasso_weights_index ? Json(r.opts.lasso_power_weight.at(static_cast<std::size_t>(*p.lasso_weights_index)))
                              : Json();
    j["gl_power_weight"] =
        p.gl_weights_index ? Json(r.opts.gl_power_weight.at(static_cast<std::size_t>(*p.gl_weights_index)))
                           : Json();
  }
  if (with_vectors) {
    j["lasso_weights"] = p.lasso_weights ? vec_json(*p.lasso_weights) : Json();
    j["gl_weights"] = p.gl_weights ? vec_json(*p.gl_weights) : Json();
  }
  return j;
}

Json model_json(const Run& r, Index index, const ParameterRecord& p, const Coefficients& c) {
  Json m;
  m["index"] = index;
  m["parameters"] = parameters_json(r, p, true);
  m["intercept"] = c.intercept;
  m["beta"] = vec_json(c.beta);
  m["objective"] = c.objective;
  m["converged"] = c.converged;
  m["iterations"] = c.iterations;
  m["kkt_residual"] = c.kkt_residual;
  if (!c.message.empty()) m["message"] = c.message;
  return m;
}

Json coefficient_document(const Run& r, const Dataset& data, const std::optional<Standardizer>& s,
                          Json models) {
  Json d;
  d["config"] = config_json(r);
  d["model"] = model_name(r.model);
  d["tau"] = r.model.is_quantile() ? Json(r.model.tau) : Json();
  d["penalization"] = penalty_name(r.penalty);
  d["intercept"] = r.opts.intercept;
  d["response"] = data.response_name();
  Json names = Json::array();
  for (const auto& n : data.predictor_names()) names.push_back(n);
  d["predictors"] = names;
  if (data.has_groups()) {
    Json labels = Json::array();
    for (int l : data.groups()->dense_labels()) labels.push_back(l);
    d["groups"] = labels;
  } else {
    d["groups"] = Json();
  }
  if (s) {
    d["standardization"] = Json{{"mean", vec_json(s->mean)}, {"scale", vec_json(s->scale)}};
  } else {
    d["standardization"] = Json();
  }
  d["models"] = std::move(models);
  return d;
}

void report_warnings(const std::vector<std::string>& warnings, std::ostream& err) {
  for (const auto& w : warnings) err << "warning: " << w << '\n';
}

void report_fit(const Coefficients& c, Index index, std::ostream& err) {
  if (c.converged) return;
  err << "warning: model " << index << ": "
      << (c.message.empty() ? "not converged after " + std::to_string(c.iterations) + " iterations"
                          : "fit failed: " + c.message)
      << '\n';
}

fs::path output_dir(const Options& o) {
  const fs::path dir(o.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create output directory " + dir.string() + ": " + ec.message());
  return dir;
}

// Standardized copy of the data when requested.
std::pair<Dataset, std::optional<Standardizer>> prepared(const Run& r, const Dataset& data) {
  if (!r.opts.standardize) return {data, std::nullopt};
  const Standardizer s = Standardizer::fit(data.x());
  return {s.apply(data), s};
}

// ---------------------------------------------------------------------------
// Subcommands

void cmd_fit(const Run& r, std::ostream& out, std::ostream& err) {
  const Dataset raw = load_data(r);
  const auto [data, s] = prepared(r, raw);
  const ResolvedGrid rg = resolve_grid(model_spec(r), grid_spec(r), data);
  const GridResult fit =
      solve_grid(data, r.model, r.penalty, rg.grid, r.controls, r.par, r.opts.intercept);
  Json models = Json::array();
  for (Index i = 0; i < rg.grid.size(); ++i) {
    report_fit(fit.coefficients[static_cast<std::size_t>(i)], i, err);
    models.push_back(model_json(r, i, parameters_at(rg.grid, i), fit.coefficients[static_cast<std::size_t>(i)]));
  }
  const fs::path path = output_dir(r.opts) / "coefficients.json";
  write_file(path, json_text(coefficient_document(r, raw, s, std::move(models))));
  out << "wrote " << path.string() << '\n';
}

void cmd_cv(const Run& r, std::ostream& out, std::ostream& err) {
  const Dataset raw = load_data(r);
  const ModelSpec ms = model_spec(r);
  const GridSpec gs = grid_spec(r);
  CvSpec cv;
  cv.nfolds = r.opts.nfolds;
  cv.error = r.error;
  cv.seed = r.seed;
  const CvDetail detail = cross_validation_detailed(ms, gs, raw, cv, r.par);
  report_warnings(detail.warnings, err);
  const fs::path dir = output_dir(r.opts);

  std::ostringstream csv;
  for (Index f = 0; f < detail.errors.cols(); ++f) csv << (f ? "," : "") << "fold_" << f;
  csv << '\n';
  for (Index i = 0; i < detail.errors.rows(); ++i) {
    for (Index f = 0; f < detail.errors.cols(); ++f) {
      csv << (f ? "," : "") << format_real(detail.errors(i, f));
    }
    csv << '\n';
  }
  write_file(dir / "cv_errors.csv", csv.str());

  const Index best = select_best(detail.errors);
  const ParameterGrid& grid = detail.fold_grids.front().grid;
  Json summary;
  summary["config"] = config_json(r);
  summary["error_type"] = error_name(r.error);
  summary["shape"] = Json::array({detail.errors.rows(), detail.errors.cols()});
  Json means = Json::array();
  for (Index i = 0; i < detail.errors.rows(); ++i) means.push_back(detail.errors.row(i).mean());
  summary["fold_means"] = means;
  Json folds = Json::array();
  for (const auto& f : detail.folds) folds.push_back(index_json(f));
  summary["folds"] = folds;
  Json params = Json::array();
  for (Index i = 0; i < grid.size(); ++i) params.push_back(parameters_json(r, parameters_at(grid, i), false));
  summary["parameters"] = params;
  summary["selected_index"] = best;
  summary["selected_parameters"] = parameters_json(r, parameters_at(grid, best), false);
  Json warnings = Json::array();
  for (const auto& w : detail.warnings) warnings.push_back(w);
  summary["warnings"] = warnings;
  write_file(dir / "cv.json", json_text(summary));

  // Refit on all rows at the selected grid point, weights from all rows.
  const auto [data, s] = prepared(r, raw);
  const ResolvedGrid rg = resolve_grid(ms, gs, data);
  const Design design(data, r.model, r.opts.intercept);
  const PenaltySpec<> spec = penalty_for(r.penalty, rg.grid, decode(rg.grid, best));
  const Coefficients c = fit_single(design, spec, data.groups(), r.controls);
  report_fit(c, best, err);
  Json models = Json::array();
  models.push_back(model_json(r, best, parameters_at(rg.grid, best), c));
  write_file(dir / "coefficients.json", json_text(coefficient_document(r, raw, s, std::move(models))));
  out << "wrote " << (dir / "cv_errors.csv").string() << ", " << (dir / "cv.json").string() << ", "
      << (dir / "coefficients.json").string() << '\n';
}

void cmd_tvt(const Run& r, std::ostream& out, std::ostream& err) {
  const Dataset raw = load_data(r);
  TvtSpec tvt;
  if (r.opts.train_size_given) tvt.train_size = r.opts.train_size;
  if (r.opts.validate_size_given) tvt.validate_size = r.opts.validate_size;
  tvt.train_pct = r.opts.train_pct;
  tvt.validate_pct = r.opts.validate_pct;
  tvt.error = r.error;
  tvt.seed = r.seed;
  const TvtResult res = train_validate_test(model_spec(r), grid_spec(r), raw, tvt, r.par);
  report_warnings(res.warnings, err);
  const fs::path dir = output_dir(r.opts);

  Json j;
  j["config"] = config_json(r);
  j["error_type"] = error_name(r.error);
  j["split"] = Json{{"train", index_json(res.split.train)},
                    {"validate", index_json(res.split.validate)},
                    {"test", index_json(res.split.test)}};
  j["validation_errors"] = vec_json(res.validation_errors);
  j["index"] = res.index;
  j["optimal_parameters"] = parameters_json(r, res.optimal_parameters, true);
  j["optimal_betas"] = vec_json(res.optimal_betas);
  j["test_error"] = res.test_error;
  Json warnings = Json::array();
  for (const auto& w : res.warnings) warnings.push_back(w);
  j["warnings"] = warnings;
  write_file(dir / "tvt.json", json_text(j));

  Json models = Json::array();
  models.push_back(model_json(r, res.index, res.optimal_parameters,
                              res.fit.coefficients[static_cast<std::size_t>(res.index)]));
  write_file(dir / "coefficients.json",
             json_text(coefficient_document(r, raw, res.standardization, std::move(models))));
  out << "wrote " << (dir / "tvt.json").string() << ", " << (dir / "coefficients.json").string()
      << '\n';
}

void cmd_predict(const Options& o, std::ostream& out) {
  if (o.coefficients.empty()) throw ConfigError("--coefficients is required for predict");
  if (o.data.empty()) throw ConfigError("--data is required for predict");
  const Json doc = read_json(o.coefficients);
  const Table table = load_table(o.data);
  const Index first = o.group_row ? 1 : 0;
  const Index n = table.values.rows() - first;
  if (n < 0) throw DataError(o.data + ": group row missing");

  const Json& predictors = field(doc, "predictors");
  MatrixXd x(n, static_cast<Index>(predictors.size()));
  for (std::size_t j = 0; j < predictors.size(); ++j) {
    const auto name = predictors[j].get<std::string>();
    const auto it = std::find(table.header.begin(), table.header.end(), name);
    if (it == table.header.end()) throw DataError(o.data + ": predictor column \"" + name + "\" not found");
    x.col(static_cast<Index>(j)) = table.values.col(it - table.header.begin()).tail(n);
  }
  const Json& st = field(doc, "standardization");
  if (!st.is_null()) {
    Standardizer s;
    s.mean = vector_from(field(st, "mean")).transpose();
    s.scale = vector_from(field(st, "scale")).transpose();
    if (s.mean.size() != x.cols() || s.scale.size() != x.cols()) {
      throw DataError("coefficient file: standardization length mismatch");
    }
    x = s.apply(x);
  }

  const Json& models = field(doc, "models");
  MatrixXd pred(n, static_cast<Index>(models.size()));
  std::ostringstream csv;
  for (std::size_t m = 0; m < models.size(); ++m) {
    const VectorXd beta = vector_from(field(models[m], "beta"));
    if (beta.size() != x.cols()) throw DataError("coefficient file: beta length mismatch");
    const double b0 = number(field(models[m], "intercept"));
    pred.col(static_cast<Index>(m)) = (x * beta).array() + b0;
    csv << (m ? "," : "") << "model_" << field(models[m], "index").get<Index>();
  }
  csv << '\n';
  for (Index i = 0; i < n; ++i) {
    for (Index m = 0; m < pred.cols(); ++m) csv << (m ? "," : "") << format_real(pred(i, m));
    csv << '\n';
  }
  const fs::path path = output_dir(o) / "predictions.csv";
  write_file(path, csv.str());
  out << "wrote " << path.string() << '\n';
}

void cmd_generate(const Run& r, std::ostream& out) {
  const Options& o = r.opts;
  std::pair<Dataset, SyntheticTruth> gen = [&] {
    if (o.generator == "grouped") {
      GroupedDesign d;
      d.n_obs = o.n_obs;
      d.group_size = o.group_size;
      d.num_groups = o.num_groups;
      d.non_zero_groups = o.non_zero_groups;
      d.non_zero_coef = o.non_zero_coef;
      d.noise = o.noise;
      d.seed = r.seed;
      return generate_grouped(d);
    }
    if (o.generator == "sparse") {
      SparseDesign d;
      d.n_samples = o.n_obs;
      d.n_features = o.n_features;
      d.n_informative = o.n_informative;
      d.bias = o.bias;
      d.noise = o.noise;
      d.seed = r.seed;
      return generate_sparse(d);
    }
    throw ConfigError("unknown generator \"" + o.generator + "\"; valid: grouped, sparse");
  }();
  const auto& [data, truth] = gen;
  const fs::path dir = output_dir(o);
  write_csv(dir / "data.csv", data);
  if (data.has_groups()) write_group_file(dir / "groups.csv", *data.groups());
  Json j;
  j["config"] = config_json(r);
  j["response"] = data.response_name();
  j["intercept"] = truth.bias;
  j["beta"] = vec_json(truth.beta_true);
  write_file(dir / "truth.json", json_text(j));
  out << "wrote " << (dir / "data.csv").string() << (data.has_groups() ? ", " + (dir / "groups.csv").string() : "")
      << ", " << (dir / "truth.json").string() << '\n';
}

std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  std::replace(s.begin(), s.end(), '\r', ' ');
  return s;
}

int fail(std::ostream& err, int code, const char* kind, const std::string& message) {
  err << "penreg: error " << kind << " (exit " << code << "): " << one_line(message) << '\n';
  return code;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Penalized linear and quantile regression", "penreg"};
  Options o;
  app.fallthrough();
  app.require_subcommand(1);
  app.config_formatter(std::make_shared<FlatConfig>());
  app.set_config("--config", "", "TOML file of flag values; flags on the command line win");
  add_options(app, o);
  app.add_subcommand("fit", "Fit every grid point on all rows");
  app.add_subcommand("cv", "K-fold cross-validation over the grid");
  app.add_subcommand("tvt", "Train/validate/test selection over the grid");
  app.add_subcommand("predict", "Apply a coefficient file to a CSV");
  app.add_subcommand("generate", "Write a synthetic dataset and its true coefficients");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    return fail(err, 2, "config", e.what());
  }

  try {
    o.seed_given = app.count("--seed") > 0;
    o.train_size_given = app.count("--train-size") > 0;
    o.validate_size_given = app.count("--validate-size") > 0;
    const std::string command = app.get_subcommands().front()->get_name();
    if (command == "predict") {
      cmd_predict(o, out);
      return 0;
    }
    const Run r = resolve(command, o);
    if (command == "fit") cmd_fit(r, out, err);
    if (command == "cv") cmd_cv(r, out, err);
    if (command == "tvt") cmd_tvt(r, out, err);
    if (command == "generate") cmd_generate(r, out);
    return 0;
  } catch (const ConfigError& e) {
    return fail(err, 2, "config", e.what());
  } catch (const DataError& e) {
    return fail(err, 3, "data", e.what());
  } catch (const NumericError& e) {
    return fail(err, 4, "numeric", e.what());
  } catch (const fs::filesystem_error& e) {
    return fail(err, 3, "data", e.what());
  } catch (const std::exception& e) {
    return fail(err, 4, "numeric", e.what());
  }
}

}  // namespace penreg::cli
