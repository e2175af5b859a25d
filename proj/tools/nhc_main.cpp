// Command-line front end: data generation, training, confidence evaluation,
// adversarial sweeps and config-driven experiment runs.

#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "nhc/attack.hpp"
#include "nhc/dataset.hpp"
#include "nhc/estimators.hpp"
#include "nhc/eval.hpp"
#include "nhc/experiment.hpp"
#include "nhc/io_util.hpp"
#include "nhc/mlp.hpp"
#include "nhc/train.hpp"

namespace fs = std::filesystem;

namespace {

void ensure_parent_dir(const std::string& path) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

std::optional<std::pair<double, double>> parse_bounds_flag(const std::string& text) {
  if (text.empty()) return std::nullopt;
  const auto colon = text.find(':');
  if (colon == std::string::npos)
    throw std::runtime_error("bounds must be given as lo:hi");
  const double lo = std::stod(text.substr(0, colon));
  const double hi = std::stod(text.substr(colon + 1));
  if (!(lo < hi)) throw std::runtime_error("bounds must satisfy lo < hi");
  return std::make_pair(lo, hi);
}

struct EvalOutputs {
  std::string out_dir;
  std::string format = "csv";
};

// Writes curve/cdf exports for one scored variant and prints a summary line.
void emit_variant_results(const nhc::LabeledDataset& data,
                          const std::vector<nhc::Label>& preds,
                          const std::vector<nhc::ConfidenceScore>& scores,
                          const nhc::EstimatorVariant& variant, const EvalOutputs& out,
                          const nhc::ExportMetadata& meta) {
  fs::create_directories(out.out_dir);
  const std::string id = variant.id();

  if (data.has_labels()) {
    const auto curve = nhc::threshold_accuracy_curve(data.labels, preds, scores,
                                                     nhc::default_threshold_grid());
    if (out.format == "csv") {
      std::ostringstream text;
      nhc::write_threshold_curve_csv(text, curve);
      nhc::write_text_file((fs::path(out.out_dir) / ("threshold_" + id + ".csv")).string(),
                           text.str());
    } else {
      nhc::write_text_file((fs::path(out.out_dir) / ("threshold_" + id + ".json")).string(),
                           nhc::threshold_curve_json(curve, meta));
    }
  }

  const auto cdf = nhc::empirical_cdf(scores);
  if (out.format == "csv") {
    std::ostringstream text;
    nhc::write_cdf_csv(text, cdf);
    nhc::write_text_file((fs::path(out.out_dir) / ("cdf_" + id + ".csv")).string(), text.str());
  } else {
    nhc::write_text_file((fs::path(out.out_dir) / ("cdf_" + id + ".json")).string(),
                         nhc::cdf_json(cdf, meta));
  }

  std::cout << id << ": mean confidence " << nhc::format_double(nhc::mean_confidence(scores));
  if (data.has_labels())
    std::cout << ", accuracy " << nhc::format_double(nhc::accuracy(data.labels, preds));
  std::cout << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"neighborhood-confidence estimation toolkit"};
  app.require_subcommand(1);

  // ---- train ----------------------------------------------------------
  struct {
    std::string data;
    std::string model;
    std::vector<int> hidden{16};
    int epochs = 60;
    double lr = 0.1;
    int batch_size = 32;
    std::uint64_t seed = 0;
  } train_args;
  auto* train_cmd = app.add_subcommand("train", "train the small classifier on a dataset");
  train_cmd->add_option("--data", train_args.data, "training dataset csv")->required();
  train_cmd->add_option("--model", train_args.model, "output checkpoint path")->required();
  train_cmd->add_option("--hidden", train_args.hidden, "hidden layer widths");
  train_cmd->add_option("--epochs", train_args.epochs, "training epochs");
  train_cmd->add_option("--lr", train_args.lr, "learning rate");
  train_cmd->add_option("--batch-size", train_args.batch_size, "minibatch size");
  train_cmd->add_option("--seed", train_args.seed, "master seed");

  // ---- gen-data -------------------------------------------------------
  struct {
    std::string kind = "blobs";
    std::string out;
    std::string base;
    int classes = 3;
    int per_class = 100;
    double stddev = 0.25;
    double radius = 1.5;
    int side = 8;
    double jitter = 0.1;
    double rotation = 15.0;
    double scale = 1.1;
    std::vector<double> translate;
    double noise_std = -1.0;  // <0 = default profile (0.1 x data std)
    int image_side = 0;
    int num_points = 300;
    double min_distance = 2.0;
    int clusters = 0;
    std::uint64_t seed = 0;
  } gen_args;
  auto* gen_cmd = app.add_subcommand("gen-data", "generate in-domain, shifted or ood data");
  gen_cmd->add_option("--kind", gen_args.kind, "blobs | images | shifted | ood")
      ->check(CLI::IsMember({"blobs", "images", "shifted", "ood"}));
  gen_cmd->add_option("--out", gen_args.out, "output dataset csv")->required();
  gen_cmd->add_option("--base", gen_args.base, "source dataset for shifted/ood kinds");
  gen_cmd->add_option("--classes", gen_args.classes, "number of classes");
  gen_cmd->add_option("--per-class", gen_args.per_class, "points per class");
  gen_cmd->add_option("--std", gen_args.stddev, "cluster spread");
  gen_cmd->add_option("--radius", gen_args.radius, "circle radius for auto centers");
  gen_cmd->add_option("--side", gen_args.side, "image side length (images kind)");
  gen_cmd->add_option("--jitter", gen_args.jitter, "per-sample pixel jitter (images kind)");
  gen_cmd->add_option("--rotation", gen_args.rotation, "shift rotation in degrees");
  gen_cmd->add_option("--scale", gen_args.scale, "shift scale factor");
  gen_cmd->add_option("--translate", gen_args.translate, "shift translation (2 or dim values)");
  gen_cmd->add_option("--noise-std", gen_args.noise_std, "shift additive noise std");
  gen_cmd->add_option("--image-side", gen_args.image_side, "treat rows as images of this side");
  gen_cmd->add_option("--num-points", gen_args.num_points, "ood point count");
  gen_cmd->add_option("--min-distance", gen_args.min_distance, "ood exclusion distance");
  gen_cmd->add_option("--clusters", gen_args.clusters, "ood cluster count (0 = uniform)");
  gen_cmd->add_option("--seed", gen_args.seed, "master seed");

  // ---- nhc-eval -------------------------------------------------------
  struct {
    std::string model;
    std::string data;
    std::string out;
    std::string format = "csv";
    int n_samples = 7;
    std::vector<double> strengths;
    std::string distribution = "rademacher";
    int reference_class = -1;
    std::string clip;
    std::uint64_t seed = 0;
  } nhc_args;
  auto* nhc_cmd =
      app.add_subcommand("nhc-eval", "score a dataset with the neighborhood confidence");
  nhc_cmd->add_option("--model", nhc_args.model, "model checkpoint")->required();
  nhc_cmd->add_option("--data", nhc_args.data, "dataset csv")->required();
  nhc_cmd->add_option("--out", nhc_args.out, "output directory")->required();
  nhc_cmd->add_option("--format", nhc_args.format, "csv | json")
      ->check(CLI::IsMember({"csv", "json"}));
  nhc_cmd->add_option("--n-samples", nhc_args.n_samples, "noise samples per point");
  nhc_cmd->add_option("--strength", nhc_args.strengths, "perturbation strength (repeatable)");
  nhc_cmd->add_option("--distribution", nhc_args.distribution,
                      "rademacher | gaussian | uniform")
      ->check(CLI::IsMember({"rademacher", "gaussian", "uniform"}));
  nhc_cmd->add_option("--reference-class", nhc_args.reference_class,
                      "score against this class instead of f(x)");
  nhc_cmd->add_option("--clip", nhc_args.clip, "clip bounds lo:hi for perturbed points");
  nhc_cmd->add_option("--seed", nhc_args.seed, "master seed");

  // ---- abc-eval -------------------------------------------------------
  struct {
    std::string model;
    std::string data;
    std::string out;
    std::string format = "csv";
    int n_samples = 7;
    double lambda = 0.4;
    std::string feature_range;
    std::uint64_t seed = 0;
  } abc_args;
  auto* abc_cmd = app.add_subcommand("abc-eval", "score a dataset with the attribution baseline");
  abc_cmd->add_option("--model", abc_args.model, "model checkpoint")->required();
  abc_cmd->add_option("--data", abc_args.data, "dataset csv")->required();
  abc_cmd->add_option("--out", abc_args.out, "output directory")->required();
  abc_cmd->add_option("--format", abc_args.format, "csv | json")
      ->check(CLI::IsMember({"csv", "json"}));
  abc_cmd->add_option("--n-samples", abc_args.n_samples, "perturbed samples per point");
  abc_cmd->add_option("--lambda", abc_args.lambda, "mutation step for unbounded features");
  abc_cmd->add_option("--feature-range", abc_args.feature_range,
                      "mutation range lo:hi for bounded features");
  abc_cmd->add_option("--seed", abc_args.seed, "master seed");

  // ---- attack-sweep ---------------------------------------------------
  struct {
    std::string model;
    std::string data;
    std::string out;
    std::string format = "csv";
    std::string estimator = "nhc";
    int n_samples = 7;
    double strength = 0.4;
    std::string distribution = "rademacher";
    double lambda = -1.0;  // <0 = same as strength
    std::vector<double> epsilons;
    int steps = 20;
    double step_size = 0.0;
    bool no_random_start = false;
    std::string clip;
    std::uint64_t seed = 0;
  } sweep_args;
  auto* sweep_cmd =
      app.add_subcommand("attack-sweep", "confidence under increasing pgd severity");
  sweep_cmd->add_option("--model", sweep_args.model, "model checkpoint")->required();
  sweep_cmd->add_option("--data", sweep_args.data, "labeled dataset csv")->required();
  sweep_cmd->add_option("--out", sweep_args.out, "output directory")->required();
  sweep_cmd->add_option("--format", sweep_args.format, "csv | json")
      ->check(CLI::IsMember({"csv", "json"}));
  sweep_cmd->add_option("--estimator", sweep_args.estimator, "nhc | abc")
      ->check(CLI::IsMember({"nhc", "abc"}));
  sweep_cmd->add_option("--n-samples", sweep_args.n_samples, "samples per point");
  sweep_cmd->add_option("--strength", sweep_args.strength, "nhc perturbation strength");
  sweep_cmd->add_option("--distribution", sweep_args.distribution,
                        "rademacher | gaussian | uniform")
      ->check(CLI::IsMember({"rademacher", "gaussian", "uniform"}));
  sweep_cmd->add_option("--lambda", sweep_args.lambda, "abc mutation step");
  sweep_cmd->add_option("--epsilon", sweep_args.epsilons,
                        "severity grid (repeatable, ascending)");
  sweep_cmd->add_option("--steps", sweep_args.steps, "pgd iterations");
  sweep_cmd->add_option("--step-size", sweep_args.step_size, "pgd step size (0 = auto)");
  sweep_cmd->add_flag("--no-random-start", sweep_args.no_random_start, "disable random starts");
  sweep_cmd->add_option("--clip", sweep_args.clip, "clip bounds lo:hi");
  sweep_cmd->add_option("--seed", sweep_args.seed, "master seed");

  // ---- report ---------------------------------------------------------
  struct {
    std::string config;
    std::string out;
  } report_args;
  auto* report_cmd = app.add_subcommand("report", "run a config-driven experiment");
  report_cmd->add_option("--config", report_args.config, "experiment config json")->required();
  report_cmd->add_option("--out", report_args.out, "override the export directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train_cmd) {
      const auto data = nhc::load_dataset_csv(train_args.data);
      std::vector<std::size_t> dims;
      dims.push_back(data.dim());
      for (int h : train_args.hidden) {
        if (h < 1) throw std::runtime_error("hidden widths must be >= 1");
        dims.push_back(static_cast<std::size_t>(h));
      }
      dims.push_back(static_cast<std::size_t>(data.num_classes));

      nhc::TrainConfig cfg;
      cfg.learning_rate = train_args.lr;
      cfg.epochs = train_args.epochs;
      cfg.batch_size = train_args.batch_size;
      cfg.seed = train_args.seed;
      const auto result = nhc::train_sgd(nhc::make_mlp(dims, train_args.seed), data, cfg);

      ensure_parent_dir(train_args.model);
      nhc::save_checkpoint(result.model, train_args.model);
      std::cout << "trained " << result.model.num_layers() << "-layer model; final loss "
                << nhc::format_double(result.epoch_loss.back()) << ", train accuracy "
                << nhc::format_double(nhc::dataset_accuracy(result.model, data)) << "\n"
                << "checkpoint written to " << train_args.model << " (digest "
                << nhc::model_digest(result.model) << ")\n";
    } else if (*gen_cmd) {
      nhc::LabeledDataset ds;
      if (gen_args.kind == "blobs") {
        ds = nhc::make_blobs(gen_args.classes, gen_args.per_class,
                             nhc::circle_centers(gen_args.classes, gen_args.radius),
                             gen_args.stddev, gen_args.seed);
      } else if (gen_args.kind == "images") {
        ds = nhc::make_image_blobs(gen_args.classes, gen_args.per_class, gen_args.side,
                                   gen_args.jitter, gen_args.seed);
      } else if (gen_args.kind == "shifted") {
        if (gen_args.base.empty())
          throw std::runtime_error("--base is required for --kind shifted");
        const auto base = nhc::load_dataset_csv(gen_args.base);
        nhc::ShiftConfig cfg = nhc::default_shift_profile(base);
        cfg.rotation_deg = gen_args.rotation;
        cfg.scale = gen_args.scale;
        cfg.translate = gen_args.translate;
        if (gen_args.noise_std >= 0.0) cfg.additive_noise_std = gen_args.noise_std;
        cfg.image_side = gen_args.image_side;
        cfg.seed = gen_args.seed;
        ds = nhc::apply_shift(base, cfg);
      } else {  // ood
        if (gen_args.base.empty())
          throw std::runtime_error("--base is required for --kind ood");
        const auto base = nhc::load_dataset_csv(gen_args.base);
        ds = nhc::make_ood(gen_args.num_points, base, gen_args.min_distance, gen_args.seed,
                           gen_args.clusters);
      }
      ensure_parent_dir(gen_args.out);
      nhc::save_dataset_csv(ds, gen_args.out);
      std::cout << "wrote " << ds.size() << " points (dim " << ds.dim() << ", "
                << nhc::to_string(ds.regime) << ") to " << gen_args.out << "\n";
    } else if (*nhc_cmd) {
      const auto model = nhc::load_checkpoint(nhc_args.model);
      const nhc::MlpClassifier clf(model);
      const auto data = nhc::load_dataset_csv(nhc_args.data);
      const auto preds = clf.classify(data.points);

      nhc::ExportMetadata meta;
      meta.seed = nhc_args.seed;
      meta.model_digest = nhc::model_digest(model);

      if (nhc_args.strengths.empty()) nhc_args.strengths.push_back(0.4);
      const EvalOutputs out{nhc_args.out, nhc_args.format};
      for (std::size_t k = 0; k < nhc_args.strengths.size(); ++k) {
        nhc::EstimatorVariant variant;
        variant.noise.strength = nhc_args.strengths[k];
        variant.noise.num_samples = nhc_args.n_samples;
        variant.noise.seed = nhc_args.seed;
        variant.noise.clip_bounds = parse_bounds_flag(nhc_args.clip);
        variant.noise.distribution = *nhc::noise_kind_from_string(nhc_args.distribution);
        variant.strength_index = k;
        if (nhc_args.reference_class >= 0) {
          variant.kind = nhc::EstimatorKind::nhc_ref;
          variant.reference = nhc_args.reference_class;
        }
        const auto scores = nhc::score_points(clf, data.points, variant);
        meta.spec_digests = {scores.front().spec_digest};
        emit_variant_results(data, preds, scores, variant, out, meta);
      }
    } else if (*abc_cmd) {
      const auto model = nhc::load_checkpoint(abc_args.model);
      const nhc::MlpClassifier clf(model);
      const auto data = nhc::load_dataset_csv(abc_args.data);
      const auto preds = clf.classify(data.points);

      nhc::EstimatorVariant variant;
      variant.kind = nhc::EstimatorKind::abc;
      variant.abc.num_samples = abc_args.n_samples;
      variant.abc.lambda_abc = abc_args.lambda;
      variant.abc.seed = abc_args.seed;
      variant.abc.feature_range = parse_bounds_flag(abc_args.feature_range);

      nhc::ExportMetadata meta;
      meta.seed = abc_args.seed;
      meta.model_digest = nhc::model_digest(model);

      const auto scores = nhc::score_points(clf, data.points, variant);
      meta.spec_digests = {scores.front().spec_digest};
      emit_variant_results(data, preds, scores, variant,
                           EvalOutputs{abc_args.out, abc_args.format}, meta);
    } else if (*sweep_cmd) {
      const auto model = nhc::load_checkpoint(sweep_args.model);
      const nhc::MlpClassifier clf(model);
      const auto data = nhc::load_dataset_csv(sweep_args.data);

      nhc::EstimatorVariant variant;
      if (sweep_args.estimator == "abc") {
        variant.kind = nhc::EstimatorKind::abc;
        variant.abc.num_samples = sweep_args.n_samples;
        variant.abc.lambda_abc =
            sweep_args.lambda > 0.0 ? sweep_args.lambda : sweep_args.strength;
        variant.abc.seed = sweep_args.seed;
      } else {
        variant.noise.strength = sweep_args.strength;
        variant.noise.num_samples = sweep_args.n_samples;
        variant.noise.seed = sweep_args.seed;
        variant.noise.distribution = *nhc::noise_kind_from_string(sweep_args.distribution);
        variant.noise.clip_bounds = parse_bounds_flag(sweep_args.clip);
      }

      nhc::PgdConfig attack;
      attack.num_steps = sweep_args.steps;
      attack.step_size = sweep_args.step_size;
      attack.random_start = !sweep_args.no_random_start;
      attack.clip_bounds = parse_bounds_flag(sweep_args.clip);
      attack.seed = sweep_args.seed;

      const std::vector<double> grid =
          sweep_args.epsilons.empty() ? nhc::default_epsilon_grid() : sweep_args.epsilons;
      const auto rows = nhc::epsilon_sweep(clf, data, grid, variant, attack);

      std::vector<nhc::SweepExportRow> exported;
      for (const auto& row : rows)
        exported.push_back({row, nhc::to_string(variant.kind), variant.strength()});

      fs::create_directories(sweep_args.out);
      if (sweep_args.format == "csv") {
        std::ostringstream text;
        nhc::write_sweep_csv(text, exported);
        nhc::write_text_file((fs::path(sweep_args.out) / "sweep.csv").string(), text.str());
      } else {
        nhc::ExportMetadata meta;
        meta.seed = sweep_args.seed;
        meta.model_digest = nhc::model_digest(model);
        nhc::write_text_file((fs::path(sweep_args.out) / "sweep.json").string(),
                             nhc::sweep_json(exported, meta));
      }
      for (const auto& row : rows)
        std::cout << "eps " << nhc::format_double(row.epsilon) << ": mean confidence "
                  << nhc::format_double(row.mean_confidence) << ", accuracy "
                  << nhc::format_double(row.accuracy) << "\n";
    } else if (*report_cmd) {
      auto cfg = nhc::load_experiment_config(report_args.config);
      const fs::path base = fs::path(report_args.config).parent_path();
      auto resolve = [&base](std::string& p) {
        if (!p.empty() && fs::path(p).is_relative()) p = (base / p).string();
      };
      resolve(cfg.checkpoint);
      resolve(cfg.train.data);
      resolve(cfg.eval_data);
      resolve(cfg.out_dir);
      if (!report_args.out.empty()) cfg.out_dir = report_args.out;

      const auto result = nhc::run_experiment(cfg);
      std::cout << "model digest " << result.model_digest << "\n";
      for (const auto& file : result.files) std::cout << "wrote " << file << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
