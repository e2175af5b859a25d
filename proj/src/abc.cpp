#include "nhc/abc.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "nhc/io_util.hpp"
#include "nhc/rng.hpp"

namespace nhc {

AttributionMap attribution_single_pass(const WhiteBoxClassifier& model,
                                       const FeatureVector& x) {
  AttributionMap map;
  map.source_class = model.classify_one(x);
  map.values = model.input_gradient(x, Objective::logit(map.source_class));
  for (std::size_t d = 0; d < map.values.size(); ++d) map.values[d] *= x[d];
  return map;
}

namespace {

std::string abc_digest(const AbcConfig& cfg) {
  std::string text = "est=abc;n=" + std::to_string(cfg.num_samples) +
                     ";seed=" + std::to_string(cfg.seed) +
                     ";l=" + format_double(cfg.lambda_abc) +
                     ";m=" + std::to_string(cfg.features_per_sample);
  if (cfg.feature_range)
    text += ";range=" + format_double(cfg.feature_range->first) + ":" +
            format_double(cfg.feature_range->second);
  return fnv1a_hex(text);
}

void check_config(const AbcConfig& cfg) {
  if (cfg.num_samples < 1) throw std::invalid_argument("abc: num_samples must be >= 1");
  if (!(cfg.lambda_abc > 0.0)) throw std::invalid_argument("abc: lambda_abc must be > 0");
  if (cfg.features_per_sample < 1)
    throw std::invalid_argument("abc: features_per_sample must be >= 1");
  if (cfg.feature_range && !(cfg.feature_range->first < cfg.feature_range->second))
    throw std::invalid_argument("abc: feature_range must satisfy lo < hi");
}

// Inverse-CDF draw over |attribution|; uniform when the mass is zero.
std::size_t pick_feature(const std::vector<double>& cumulative, double total,
                         std::size_t dim, rng::Stream& stream) {
  if (total <= 0.0) return stream.next_below(static_cast<std::uint32_t>(dim));
  const double u = stream.next_unit() * total;
  std::size_t lo = 0;
  std::size_t hi = dim - 1;
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    if (cumulative[mid] > u)
      hi = mid;
    else
      lo = mid + 1;
  }
  return lo;
}

}  // namespace

ConfidenceScore abc_score(const WhiteBoxClassifier& model, const FeatureVector& x,
                          const AbcConfig& cfg, std::uint64_t point_index) {
  check_config(cfg);
  if (x.dim() != model.input_dim())
    throw std::invalid_argument("abc: point dim does not match model input dim");

  const AttributionMap map = attribution_single_pass(model, x);
  const std::size_t dim = x.dim();

  std::vector<double> cumulative(dim);
  double total = 0.0;
  for (std::size_t d = 0; d < dim; ++d) {
    total += std::fabs(map.values[d]);
    cumulative[d] = total;
  }

  rng::Stream stream(rng::derive_key(cfg.seed, point_index, 0xabc));
  Matrix batch(static_cast<std::size_t>(cfg.num_samples) + 1, dim);
  for (std::size_t d = 0; d < dim; ++d) batch(0, d) = x[d];
  for (int i = 0; i < cfg.num_samples; ++i) {
    double* row = batch.row(static_cast<std::size_t>(i) + 1);
    for (std::size_t d = 0; d < dim; ++d) row[d] = x[d];
    for (int f = 0; f < cfg.features_per_sample; ++f) {
      const std::size_t j = pick_feature(cumulative, total, dim, stream);
      if (cfg.feature_range) {
        row[j] = cfg.feature_range->first +
                 (cfg.feature_range->second - cfg.feature_range->first) * stream.next_unit();
      } else {
        row[j] = x[j] + cfg.lambda_abc * stream.next_rademacher();
      }
    }
  }

  const auto labels = model.classify(batch);
  int count = 0;
  for (int i = 1; i <= cfg.num_samples; ++i)
    if (labels[i] == map.source_class) ++count;
  return make_score(count, cfg.num_samples, EstimatorKind::abc, abc_digest(cfg));
}

std::vector<ConfidenceScore> abc_score_batch(const WhiteBoxClassifier& model,
                                             const Matrix& points, const AbcConfig& cfg) {
  check_config(cfg);
  std::vector<ConfidenceScore> out;
  out.reserve(points.rows());
  for (std::size_t i = 0; i < points.rows(); ++i)
    out.push_back(abc_score(model, FeatureVector::from_row(points, i), cfg, i));
  return out;
}

}  // namespace nhc
