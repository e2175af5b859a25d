#pragma once

#include <map>
#include <string>
#include <vector>

#include "nhc/attack.hpp"
#include "nhc/dataset.hpp"
#include "nhc/estimators.hpp"
#include "nhc/eval.hpp"
#include "nhc/mlp.hpp"

namespace nhc {

/// One experiment = model + eval data + estimator grid + protocol + export.
/// Parsed from a single JSON document; see README for the schema.
struct ExperimentConfig {
  std::uint64_t seed = 0;

  // model: either a checkpoint to load or a training block
  std::string checkpoint;
  bool has_train = false;
  struct TrainBlock {
    std::string data;
    std::vector<std::size_t> hidden{16};
    int epochs = 60;
    double learning_rate = 0.1;
    int batch_size = 32;
  } train;

  std::string eval_data;

  std::vector<EstimatorVariant> estimators;  // expanded, one entry per variant

  std::string protocol;  // shift | ood | adv

  std::vector<double> epsilons;  // adv protocol; empty = default grid
  PgdConfig attack;

  std::string out_dir;
  std::string format = "csv";  // csv | json
};

struct ExperimentResult {
  std::string model_digest;
  std::vector<std::string> files;
  std::map<std::string, ThresholdCurve> curves;  // by variant id (shift protocol)
  std::map<std::string, EmpiricalCdf> cdfs;      // by variant id (ood protocol)
  std::vector<SweepExportRow> sweep;             // adv protocol
};

/// Parses and validates a config document. Violations are reported with the
/// offending field path, e.g. "config.estimators[1].n_samples: ...". All
/// estimators in one experiment must use the same sample budget.
ExperimentConfig parse_experiment_config(const std::string& json_text);
ExperimentConfig load_experiment_config(const std::string& path);

/// Trains or loads the model, loads the eval data, runs the selected protocol
/// for every estimator variant and writes the exports. Reproducible: the same
/// config yields byte-identical files.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

}  // namespace nhc
