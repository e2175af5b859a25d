#include "nhc/experiment.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "nhc/io_util.hpp"
#include "nhc/train.hpp"

namespace nhc {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& message) {
  throw std::runtime_error(path + ": " + message);
}

const json& require(const json& j, const char* key, const std::string& path) {
  if (!j.contains(key)) fail(path + "." + key, "missing required field");
  return j.at(key);
}

double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

int as_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<int>();
}

std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

std::optional<std::pair<double, double>> parse_bounds(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2) fail(path, "expected [lo, hi]");
  const double lo = as_number(j[0], path + "[0]");
  const double hi = as_number(j[1], path + "[1]");
  if (!(lo < hi)) fail(path, "lo must be < hi");
  return std::make_pair(lo, hi);
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(std::string("config: malformed JSON: ") + e.what());
  }

  ExperimentConfig cfg;
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();

  // model
  const json& model = require(j, "model", "config");
  if (model.contains("checkpoint") == model.contains("train"))
    fail("config.model", "exactly one of 'checkpoint' or 'train' is required");
  if (model.contains("checkpoint")) {
    cfg.checkpoint = as_string(model.at("checkpoint"), "config.model.checkpoint");
  } else {
    cfg.has_train = true;
    const json& t = model.at("train");
    cfg.train.data = as_string(require(t, "data", "config.model.train"),
                               "config.model.train.data");
    if (t.contains("hidden")) {
      cfg.train.hidden.clear();
      const json& h = t.at("hidden");
      if (!h.is_array() || h.empty()) fail("config.model.train.hidden", "expected a non-empty array");
      for (std::size_t i = 0; i < h.size(); ++i) {
        const int w = as_int(h[i], "config.model.train.hidden[" + std::to_string(i) + "]");
        if (w < 1) fail("config.model.train.hidden[" + std::to_string(i) + "]", "width must be >= 1");
        cfg.train.hidden.push_back(static_cast<std::size_t>(w));
      }
    }
    if (t.contains("epochs")) cfg.train.epochs = as_int(t.at("epochs"), "config.model.train.epochs");
    if (t.contains("lr")) cfg.train.learning_rate = as_number(t.at("lr"), "config.model.train.lr");
    if (t.contains("batch_size"))
      cfg.train.batch_size = as_int(t.at("batch_size"), "config.model.train.batch_size");
    if (cfg.train.epochs < 1) fail("config.model.train.epochs", "must be >= 1");
    if (cfg.train.batch_size < 1) fail("config.model.train.batch_size", "must be >= 1");
    if (cfg.train.learning_rate < 0.0) fail("config.model.train.lr", "must be >= 0");
  }

  // data
  const json& data = require(j, "data", "config");
  cfg.eval_data = as_string(require(data, "eval", "config.data"), "config.data.eval");

  // estimators
  const json& ests = require(j, "estimators", "config");
  if (!ests.is_array() || ests.empty()) fail("config.estimators", "expected a non-empty array");

  // pass 1: the first NHC strength becomes the default ABC step size
  double default_abc_lambda = 0.4;
  for (const auto& e : ests) {
    if (e.contains("kind") && e.at("kind") == "nhc" && e.contains("strengths") &&
        e.at("strengths").is_array() && !e.at("strengths").empty() &&
        e.at("strengths")[0].is_number()) {
      default_abc_lambda = e.at("strengths")[0].get<double>();
      break;
    }
  }

  for (std::size_t i = 0; i < ests.size(); ++i) {
    const std::string path = "config.estimators[" + std::to_string(i) + "]";
    const json& e = ests[i];
    const std::string kind = as_string(require(e, "kind", path), path + ".kind");
    if (kind == "nhc") {
      NoiseSpec spec;
      spec.seed = cfg.seed;
      if (e.contains("n_samples")) spec.num_samples = as_int(e.at("n_samples"), path + ".n_samples");
      if (spec.num_samples < 1) fail(path + ".n_samples", "must be >= 1");
      if (e.contains("distribution")) {
        const auto parsed =
            noise_kind_from_string(as_string(e.at("distribution"), path + ".distribution"));
        if (!parsed) fail(path + ".distribution", "expected rademacher, gaussian or uniform");
        spec.distribution = *parsed;
      }
      if (e.contains("clip")) spec.clip_bounds = parse_bounds(e.at("clip"), path + ".clip");

      std::vector<double> strengths{0.4};
      if (e.contains("strengths")) {
        strengths.clear();
        const json& s = e.at("strengths");
        if (!s.is_array() || s.empty()) fail(path + ".strengths", "expected a non-empty array");
        for (std::size_t k = 0; k < s.size(); ++k) {
          const double v = as_number(s[k], path + ".strengths[" + std::to_string(k) + "]");
          if (!(v > 0.0)) fail(path + ".strengths[" + std::to_string(k) + "]", "must be > 0");
          strengths.push_back(v);
        }
      }
      std::optional<Label> reference;
      if (e.contains("reference_class")) {
        const int r = as_int(e.at("reference_class"), path + ".reference_class");
        if (r < 0) fail(path + ".reference_class", "must be >= 0");
        reference = static_cast<Label>(r);
      }
      for (std::size_t k = 0; k < strengths.size(); ++k) {
        EstimatorVariant v;
        v.kind = reference ? EstimatorKind::nhc_ref : EstimatorKind::nhc;
        v.noise = spec;
        v.noise.strength = strengths[k];
        v.reference = reference;
        v.strength_index = k;
        cfg.estimators.push_back(std::move(v));
      }
    } else if (kind == "abc") {
      EstimatorVariant v;
      v.kind = EstimatorKind::abc;
      v.abc.seed = cfg.seed;
      v.abc.lambda_abc = default_abc_lambda;
      if (e.contains("n_samples")) v.abc.num_samples = as_int(e.at("n_samples"), path + ".n_samples");
      if (v.abc.num_samples < 1) fail(path + ".n_samples", "must be >= 1");
      if (e.contains("lambda")) v.abc.lambda_abc = as_number(e.at("lambda"), path + ".lambda");
      if (!(v.abc.lambda_abc > 0.0)) fail(path + ".lambda", "must be > 0");
      if (e.contains("feature_range"))
        v.abc.feature_range = parse_bounds(e.at("feature_range"), path + ".feature_range");
      cfg.estimators.push_back(std::move(v));
    } else {
      fail(path + ".kind", "expected 'nhc' or 'abc'");
    }
  }

  // comparisons must grant each estimator the same sample budget
  for (std::size_t i = 1; i < cfg.estimators.size(); ++i)
    if (cfg.estimators[i].sample_budget() != cfg.estimators[0].sample_budget())
      fail("config.estimators", "sample budgets differ across estimators; comparisons must "
                                "use identical n_samples");

  // protocol
  cfg.protocol = as_string(require(j, "protocol", "config"), "config.protocol");
  if (cfg.protocol != "shift" && cfg.protocol != "ood" && cfg.protocol != "adv")
    fail("config.protocol", "expected 'shift', 'ood' or 'adv'");

  // attack (adv only)
  if (j.contains("attack")) {
    const json& a = j.at("attack");
    if (a.contains("epsilons")) {
      const json& eps = a.at("epsilons");
      if (!eps.is_array() || eps.empty()) fail("config.attack.epsilons", "expected a non-empty array");
      for (std::size_t k = 0; k < eps.size(); ++k)
        cfg.epsilons.push_back(as_number(eps[k], "config.attack.epsilons[" + std::to_string(k) + "]"));
    }
    if (a.contains("num_steps")) cfg.attack.num_steps = as_int(a.at("num_steps"), "config.attack.num_steps");
    if (cfg.attack.num_steps < 1) fail("config.attack.num_steps", "must be >= 1");
    if (a.contains("step_size")) cfg.attack.step_size = as_number(a.at("step_size"), "config.attack.step_size");
    if (a.contains("random_start")) {
      if (!a.at("random_start").is_boolean()) fail("config.attack.random_start", "expected a boolean");
      cfg.attack.random_start = a.at("random_start").get<bool>();
    }
    if (a.contains("clip")) cfg.attack.clip_bounds = parse_bounds(a.at("clip"), "config.attack.clip");
  }
  cfg.attack.seed = cfg.seed;

  // export
  const json& exp = require(j, "export", "config");
  cfg.out_dir = as_string(require(exp, "out_dir", "config.export"), "config.export.out_dir");
  if (exp.contains("format")) cfg.format = as_string(exp.at("format"), "config.export.format");
  if (cfg.format != "csv" && cfg.format != "json")
    fail("config.export.format", "expected 'csv' or 'json'");

  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_experiment_config(buf.str());
}

namespace {

std::string join_path(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  ExperimentResult result;

  // model
  MlpModel model;
  if (cfg.has_train) {
    const LabeledDataset train_data = load_dataset_csv(cfg.train.data);
    std::vector<std::size_t> dims;
    dims.push_back(train_data.dim());
    for (std::size_t h : cfg.train.hidden) dims.push_back(h);
    dims.push_back(static_cast<std::size_t>(train_data.num_classes));
    TrainConfig tc;
    tc.learning_rate = cfg.train.learning_rate;
    tc.epochs = cfg.train.epochs;
    tc.batch_size = cfg.train.batch_size;
    tc.seed = cfg.seed;
    model = train_sgd(make_mlp(dims, cfg.seed), train_data, tc).model;
  } else {
    model = load_checkpoint(cfg.checkpoint);
  }
  result.model_digest = model_digest(model);
  const MlpClassifier classifier(model);

  const LabeledDataset eval_data = load_dataset_csv(cfg.eval_data);
  if (eval_data.size() == 0) throw std::runtime_error("run_experiment: eval dataset is empty");
  if (eval_data.dim() != classifier.input_dim())
    throw std::runtime_error("run_experiment: eval data dim does not match the model");
  if ((cfg.protocol == "shift" || cfg.protocol == "adv") && !eval_data.has_labels())
    throw std::runtime_error("run_experiment: protocol '" + cfg.protocol +
                             "' needs labeled eval data");

  std::filesystem::create_directories(cfg.out_dir);

  ExportMetadata meta;
  meta.seed = cfg.seed;
  meta.model_digest = result.model_digest;
  for (const auto& v : cfg.estimators) {
    if (v.kind == EstimatorKind::abc)
      meta.spec_digests.push_back(fnv1a_hex("est=abc;n=" + std::to_string(v.abc.num_samples) +
                                            ";seed=" + std::to_string(v.abc.seed) +
                                            ";l=" + format_double(v.abc.lambda_abc)));
    else
      meta.spec_digests.push_back(
          noise_spec_digest(v.noise, v.kind, v.strength_index, v.reference.value_or(-1)));
  }

  auto emit = [&](const std::string& name, const std::string& content) {
    const std::string path = join_path(cfg.out_dir, name);
    write_text_file(path, content);
    result.files.push_back(path);
  };

  if (cfg.protocol == "shift") {
    const auto preds = classifier.classify(eval_data.points);
    const auto grid = default_threshold_grid();
    for (const auto& variant : cfg.estimators) {
      const auto scores = score_points(classifier, eval_data.points, variant);
      const ThresholdCurve curve =
          threshold_accuracy_curve(eval_data.labels, preds, scores, grid);
      result.curves[variant.id()] = curve;
      if (cfg.format == "csv") {
        std::ostringstream out;
        write_threshold_curve_csv(out, curve);
        emit("threshold_" + variant.id() + ".csv", out.str());
      } else {
        emit("threshold_" + variant.id() + ".json", threshold_curve_json(curve, meta));
      }
    }
  } else if (cfg.protocol == "ood") {
    for (const auto& variant : cfg.estimators) {
      const auto scores = score_points(classifier, eval_data.points, variant);
      const EmpiricalCdf cdf = empirical_cdf(scores);
      result.cdfs[variant.id()] = cdf;
      if (cfg.format == "csv") {
        std::ostringstream out;
        write_cdf_csv(out, cdf);
        emit("cdf_" + variant.id() + ".csv", out.str());
      } else {
        emit("cdf_" + variant.id() + ".json", cdf_json(cdf, meta));
      }
    }
  } else {  // adv
    const std::vector<double> grid =
        cfg.epsilons.empty() ? default_epsilon_grid() : cfg.epsilons;
    for (const auto& variant : cfg.estimators) {
      const auto rows = epsilon_sweep(classifier, eval_data, grid, variant, cfg.attack);
      for (const auto& row : rows) {
        SweepExportRow e;
        e.row = row;
        e.estimator = to_string(variant.kind);
        e.strength = variant.strength();
        result.sweep.push_back(std::move(e));
      }
    }
    if (cfg.format == "csv") {
      std::ostringstream out;
      write_sweep_csv(out, result.sweep);
      emit("sweep.csv", out.str());
    } else {
      emit("sweep.json", sweep_json(result.sweep, meta));
    }
  }

  // run metadata, always JSON
  {
    nlohmann::json run;
    run["seed"] = cfg.seed;
    run["model_digest"] = result.model_digest;
    run["protocol"] = cfg.protocol;
    nlohmann::json variants = nlohmann::json::array();
    for (const auto& v : cfg.estimators) {
      nlohmann::json e;
      e["id"] = v.id();
      e["estimator"] = to_string(v.kind);
      e["n_samples"] = v.sample_budget();
      e["strength"] = v.strength();
      variants.push_back(std::move(e));
    }
    run["variants"] = std::move(variants);
    emit("run.json", run.dump(2) + "\n");
  }

  return result;
}

}  // namespace nhc
