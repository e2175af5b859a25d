#include "nhc/estimators.hpp"

#include <stdexcept>

#include "nhc/io_util.hpp"

namespace nhc {

std::string EstimatorVariant::id() const {
  switch (kind) {
    case EstimatorKind::nhc: return "nhc_l" + format_double(noise.strength);
    case EstimatorKind::nhc_ref:
      return "nhcref" + std::to_string(reference.value_or(-1)) + "_l" +
             format_double(noise.strength);
    case EstimatorKind::abc: return "abc";
  }
  return "nhc";
}

std::vector<ConfidenceScore> score_points(const WhiteBoxClassifier& model,
                                          const Matrix& points,
                                          const EstimatorVariant& variant) {
  switch (variant.kind) {
    case EstimatorKind::nhc:
      return nhc_batch(model, points, variant.noise, variant.strength_index);
    case EstimatorKind::nhc_ref: {
      if (!variant.reference)
        throw std::invalid_argument("score_points: nhc_ref needs a reference class");
      std::vector<ConfidenceScore> out;
      out.reserve(points.rows());
      for (std::size_t i = 0; i < points.rows(); ++i)
        out.push_back(nhc_reference_class(model, FeatureVector::from_row(points, i),
                                          variant.noise, *variant.reference, i));
      return out;
    }
    case EstimatorKind::abc: return abc_score_batch(model, points, variant.abc);
  }
  throw std::invalid_argument("score_points: unknown estimator kind");
}

double mean_confidence(const std::vector<ConfidenceScore>& scores) {
  if (scores.empty()) throw std::invalid_argument("mean_confidence: no scores");
  double sum = 0.0;
  for (const auto& s : scores) sum += s.value;
  return sum / static_cast<double>(scores.size());
}

}  // namespace nhc
