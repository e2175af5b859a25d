#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "nhc/classifier.hpp"
#include "nhc/confidence.hpp"

namespace nhc {

/// Signed per-feature attribution of the predicted class's logit.
struct AttributionMap {
  std::vector<double> values;
  Label source_class = 0;
};

/// Gradient-times-input attribution from one backward pass:
/// attribution_j = d logit_{f(x)} / d x_j * x_j.
AttributionMap attribution_single_pass(const WhiteBoxClassifier& model,
                                       const FeatureVector& x);

/// White-box conformance baseline with the same sample budget as the
/// neighborhood confidence. Each sample mutates features chosen with
/// probability proportional to |attribution| (uniform when the attribution is
/// all zero): bounded features are redrawn uniformly over `feature_range`,
/// unbounded ones step by +-lambda_abc.
struct AbcConfig {
  int num_samples = 7;
  std::uint64_t seed = 0;
  double lambda_abc = 0.4;  // kept equal to the NHC strength in comparisons
  std::optional<std::pair<double, double>> feature_range;
  int features_per_sample = 1;

  friend bool operator==(const AbcConfig&, const AbcConfig&) = default;
};

ConfidenceScore abc_score(const WhiteBoxClassifier& model, const FeatureVector& x,
                          const AbcConfig& cfg, std::uint64_t point_index = 0);

std::vector<ConfidenceScore> abc_score_batch(const WhiteBoxClassifier& model,
                                             const Matrix& points, const AbcConfig& cfg);

}  // namespace nhc
