#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "nhc/classifier.hpp"
#include "nhc/dataset.hpp"
#include "nhc/estimators.hpp"

namespace nhc {

/// L-inf bounded projected gradient descent. step_size <= 0 selects the
/// standard 2.5 * epsilon / num_steps.
struct PgdConfig {
  double epsilon = 0.1;
  double step_size = 0.0;
  int num_steps = 20;
  bool random_start = true;
  std::optional<std::pair<double, double>> clip_bounds;
  std::uint64_t seed = 0;
  bool targeted = false;
  Label target_class = 0;

  friend bool operator==(const PgdConfig&, const PgdConfig&) = default;
};

/// Returns the adversarial iterate. Guarantees |result - x|_inf <= epsilon
/// (up to 1e-9) and clip bounds when set; epsilon = 0 returns x unchanged.
/// Random starts are keyed by (seed, point_index), so attacking a batch in
/// any order gives the same per-point results.
FeatureVector pgd_attack(const WhiteBoxClassifier& model, const FeatureVector& x,
                         Label true_label, const PgdConfig& cfg,
                         std::uint64_t point_index = 0);

/// Attacks every row of a labeled dataset at one severity.
Matrix pgd_attack_dataset(const WhiteBoxClassifier& model, const LabeledDataset& data,
                          const PgdConfig& cfg);

struct SweepRow {
  double epsilon = 0.0;
  double mean_confidence = 0.0;
  double accuracy = 0.0;           // post-attack accuracy against true labels
  std::vector<int> histogram;      // score counts by numerator 0..N
};

/// Severity sweep: for each epsilon (ascending, 0 = unattacked data), attacks
/// the whole dataset, scores the attacked points with the chosen estimator,
/// and records mean confidence plus post-attack accuracy.
std::vector<SweepRow> epsilon_sweep(const WhiteBoxClassifier& model,
                                    const LabeledDataset& data,
                                    std::span<const double> epsilons,
                                    const EstimatorVariant& estimator,
                                    const PgdConfig& base_cfg);

/// Fig-style default grid {0, 0.025, ..., 0.25} scaled by `scale`.
std::vector<double> default_epsilon_grid(double scale = 1.0);

}  // namespace nhc
