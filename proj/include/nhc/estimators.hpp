#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nhc/abc.hpp"
#include "nhc/classifier.hpp"
#include "nhc/confidence.hpp"

namespace nhc {

/// One concrete estimator configuration as used by the evaluation protocols:
/// either a neighborhood-confidence spec (optionally with a reference class)
/// or the attribution-based baseline.
struct EstimatorVariant {
  EstimatorKind kind = EstimatorKind::nhc;
  NoiseSpec noise;
  AbcConfig abc;
  std::optional<Label> reference;
  std::uint64_t strength_index = 0;  // stream index when part of a strength grid

  int sample_budget() const {
    return kind == EstimatorKind::abc ? abc.num_samples : noise.num_samples;
  }
  double strength() const {
    return kind == EstimatorKind::abc ? abc.lambda_abc : noise.strength;
  }
  /// Stable id used in export file names and sweep rows, e.g. "nhc_l0.4".
  std::string id() const;
};

/// Scores every row of `points` with the given estimator. Point index i keys
/// the per-point noise stream, so results are independent of evaluation order.
std::vector<ConfidenceScore> score_points(const WhiteBoxClassifier& model,
                                          const Matrix& points,
                                          const EstimatorVariant& variant);

double mean_confidence(const std::vector<ConfidenceScore>& scores);

}  // namespace nhc
