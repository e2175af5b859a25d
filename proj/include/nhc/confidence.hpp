#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nhc/classifier.hpp"
#include "nhc/matrix.hpp"

namespace nhc {

enum class NoiseKind { rademacher, gaussian, uniform };

std::string to_string(NoiseKind kind);
std::optional<NoiseKind> noise_kind_from_string(std::string_view s);

/// Neighborhood sampling configuration. Noise vectors have unit amplitude;
/// `strength` scales them, so strengths are relative to unit-scaled features.
/// Defaults follow the setting that worked best across the evaluations:
/// rademacher noise, N = 7 samples, strength 0.4.
struct NoiseSpec {
  NoiseKind distribution = NoiseKind::rademacher;
  double strength = 0.4;
  int num_samples = 7;
  std::uint64_t seed = 0;
  std::optional<std::pair<double, double>> clip_bounds;  // element-wise, after perturbing

  friend bool operator==(const NoiseSpec&, const NoiseSpec&) = default;
};

enum class EstimatorKind { nhc, nhc_ref, abc };
std::string to_string(EstimatorKind kind);

/// A conformance fraction in [0, 1], quantized to multiples of 1/denominator.
/// The exact rational (count, denominator) travels with the real value so
/// downstream thresholds never depend on float rounding.
struct ConfidenceScore {
  double value = 0.0;
  int count = 0;
  int denominator = 1;
  EstimatorKind estimator = EstimatorKind::nhc;
  std::string spec_digest;  // opaque id of the producing configuration

  friend bool operator==(const ConfidenceScore&, const ConfidenceScore&) = default;
};

ConfidenceScore make_score(int count, int denominator, EstimatorKind kind,
                           std::string spec_digest);

/// Digest for provenance tagging; covers the spec, estimator kind, stream
/// index and (for reference-class scoring) the reference label.
std::string noise_spec_digest(const NoiseSpec& spec, EstimatorKind kind,
                              std::uint64_t strength_index, Label reference = -1);

/// N unit-amplitude noise vectors for one data point. Deterministic from
/// (spec.seed, point_index, strength_index), so per-point streams do not
/// depend on evaluation or batching order.
Matrix sample_noise(const NoiseSpec& spec, std::size_t dim, std::uint64_t point_index,
                    std::uint64_t strength_index = 0);

/// Neighborhood confidence of a single point: perturbs x with N scaled noise
/// vectors, classifies [x, x'_0, ..., x'_{N-1}] in one batched call, and
/// returns the fraction of perturbed points that keep the class of x.
ConfidenceScore nhc(const BlackBoxClassifier& classifier, const FeatureVector& x,
                    const NoiseSpec& spec, std::uint64_t point_index = 0,
                    std::uint64_t strength_index = 0);

/// Scores every row of `points`. result[i] is bit-identical to
/// nhc(classifier, row_i, spec, i): batching never changes a score.
std::vector<ConfidenceScore> nhc_batch(const BlackBoxClassifier& classifier,
                                       const Matrix& points, const NoiseSpec& spec,
                                       std::uint64_t strength_index = 0);

/// One score per strength, each from an independent noise stream keyed by
/// (seed, point_index, strength position).
std::vector<ConfidenceScore> nhc_multi_strength(const BlackBoxClassifier& classifier,
                                                const FeatureVector& x,
                                                std::span<const double> strengths,
                                                const NoiseSpec& base_spec,
                                                std::uint64_t point_index = 0);

/// Like nhc, but counts conformance against a fixed reference class rather
/// than the class predicted for the unperturbed point. Approximates the
/// distance to that class's decision region (e.g. a safety-critical class).
ConfidenceScore nhc_reference_class(const BlackBoxClassifier& classifier,
                                    const FeatureVector& x, const NoiseSpec& spec,
                                    Label reference, std::uint64_t point_index = 0);

/// Exact expectation of the rademacher conformance indicator, by enumerating
/// all 2^D sign vectors with equal weight. Validation oracle for the
/// Monte-Carlo estimate; requires dim(x) <= 20 and ignores clip bounds.
double nhc_exact_rademacher(const BlackBoxClassifier& classifier, const FeatureVector& x,
                            double strength);

}  // namespace nhc
