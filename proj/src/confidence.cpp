#include "nhc/confidence.hpp"

#include <cmath>
#include <stdexcept>

#include "nhc/io_util.hpp"
#include "nhc/kernels.hpp"
#include "nhc/rng.hpp"

namespace nhc {

std::string to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::rademacher: return "rademacher";
    case NoiseKind::gaussian: return "gaussian";
    case NoiseKind::uniform: return "uniform";
  }
  return "rademacher";
}

std::optional<NoiseKind> noise_kind_from_string(std::string_view s) {
  if (s == "rademacher") return NoiseKind::rademacher;
  if (s == "gaussian") return NoiseKind::gaussian;
  if (s == "uniform") return NoiseKind::uniform;
  return std::nullopt;
}

std::string to_string(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::nhc: return "nhc";
    case EstimatorKind::nhc_ref: return "nhc_ref";
    case EstimatorKind::abc: return "abc";
  }
  return "nhc";
}

ConfidenceScore make_score(int count, int denominator, EstimatorKind kind,
                           std::string spec_digest) {
  if (denominator < 1) throw std::invalid_argument("score denominator must be >= 1");
  if (count < 0 || count > denominator)
    throw std::invalid_argument("score count out of [0, denominator]");
  ConfidenceScore s;
  s.count = count;
  s.denominator = denominator;
  s.value = static_cast<double>(count) / static_cast<double>(denominator);
  s.estimator = kind;
  s.spec_digest = std::move(spec_digest);
  return s;
}

namespace {

void check_spec(const NoiseSpec& spec) {
  if (!(spec.strength > 0.0)) throw std::invalid_argument("noise strength must be > 0");
  if (spec.num_samples < 1) throw std::invalid_argument("num_samples must be >= 1");
  if (spec.clip_bounds && !(spec.clip_bounds->first < spec.clip_bounds->second))
    throw std::invalid_argument("clip bounds must satisfy lo < hi");
}

void fill_noise_row(rng::Stream& stream, NoiseKind kind, double* row, std::size_t dim) {
  switch (kind) {
    case NoiseKind::rademacher:
      for (std::size_t d = 0; d < dim; ++d) row[d] = stream.next_rademacher();
      return;
    case NoiseKind::gaussian:
      for (std::size_t d = 0; d < dim; ++d) row[d] = stream.next_gaussian();
      return;
    case NoiseKind::uniform:
      for (std::size_t d = 0; d < dim; ++d) row[d] = stream.next_symmetric();
      return;
  }
}

}  // namespace

std::string noise_spec_digest(const NoiseSpec& spec, EstimatorKind kind,
                              std::uint64_t strength_index, Label reference) {
  std::string text = "est=" + to_string(kind) + ";dist=" + to_string(spec.distribution) +
                     ";l=" + format_double(spec.strength) +
                     ";n=" + std::to_string(spec.num_samples) +
                     ";seed=" + std::to_string(spec.seed) +
                     ";k=" + std::to_string(strength_index);
  if (spec.clip_bounds)
    text += ";clip=" + format_double(spec.clip_bounds->first) + ":" +
            format_double(spec.clip_bounds->second);
  if (reference >= 0) text += ";ref=" + std::to_string(reference);
  return fnv1a_hex(text);
}

Matrix sample_noise(const NoiseSpec& spec, std::size_t dim, std::uint64_t point_index,
                    std::uint64_t strength_index) {
  check_spec(spec);
  if (dim < 1) throw std::invalid_argument("sample_noise: dim must be >= 1");
  rng::Stream stream(rng::derive_key(spec.seed, point_index, strength_index));
  Matrix noise(static_cast<std::size_t>(spec.num_samples), dim);
  for (std::size_t i = 0; i < noise.rows(); ++i)
    fill_noise_row(stream, spec.distribution, noise.row(i), dim);
  return noise;
}

namespace {

// Shared core: classify [x, x'_0, ..., x'_{N-1}] in one call and count the
// perturbed labels matching `reference` (or the label of x when reference<0).
ConfidenceScore conformance_score(const BlackBoxClassifier& classifier,
                                  const FeatureVector& x, const NoiseSpec& spec,
                                  std::uint64_t point_index, std::uint64_t strength_index,
                                  Label reference, EstimatorKind kind) {
  check_spec(spec);
  if (x.dim() != classifier.input_dim())
    throw std::invalid_argument("nhc: point dim does not match classifier input dim");

  const auto& kern = kernels::active();
  const std::size_t dim = x.dim();
  const int n = spec.num_samples;
  const Matrix noise = sample_noise(spec, dim, point_index, strength_index);

  Matrix batch(static_cast<std::size_t>(n) + 1, dim);
  for (std::size_t d = 0; d < dim; ++d) batch(0, d) = x[d];
  for (int i = 0; i < n; ++i) {
    double* row = batch.row(static_cast<std::size_t>(i) + 1);
    kern.perturb(x.values().data(), noise.row(i), spec.strength, row, dim);
    if (spec.clip_bounds)
      kern.clamp(row, dim, spec.clip_bounds->first, spec.clip_bounds->second);
  }

  const std::vector<Label> labels = classifier.classify(batch);
  const Label target = reference >= 0 ? reference : labels[0];
  int count = 0;
  for (int i = 1; i <= n; ++i)
    if (labels[i] == target) ++count;
  return make_score(count, n, kind, noise_spec_digest(spec, kind, strength_index, reference));
}

}  // namespace

ConfidenceScore nhc(const BlackBoxClassifier& classifier, const FeatureVector& x,
                    const NoiseSpec& spec, std::uint64_t point_index,
                    std::uint64_t strength_index) {
  return conformance_score(classifier, x, spec, point_index, strength_index,
                           /*reference=*/-1, EstimatorKind::nhc);
}

std::vector<ConfidenceScore> nhc_batch(const BlackBoxClassifier& classifier,
                                       const Matrix& points, const NoiseSpec& spec,
                                       std::uint64_t strength_index) {
  check_spec(spec);
  std::vector<ConfidenceScore> out;
  out.reserve(points.rows());
  for (std::size_t i = 0; i < points.rows(); ++i)
    out.push_back(nhc(classifier, FeatureVector::from_row(points, i), spec, i, strength_index));
  return out;
}

std::vector<ConfidenceScore> nhc_multi_strength(const BlackBoxClassifier& classifier,
                                                const FeatureVector& x,
                                                std::span<const double> strengths,
                                                const NoiseSpec& base_spec,
                                                std::uint64_t point_index) {
  if (strengths.empty()) throw std::invalid_argument("nhc_multi_strength: empty strengths");
  for (double l : strengths)
    if (!(l > 0.0)) throw std::invalid_argument("nhc_multi_strength: strengths must be > 0");

  std::vector<ConfidenceScore> out;
  out.reserve(strengths.size());
  for (std::size_t k = 0; k < strengths.size(); ++k) {
    NoiseSpec spec = base_spec;
    spec.strength = strengths[k];
    out.push_back(nhc(classifier, x, spec, point_index, k));
  }
  return out;
}

ConfidenceScore nhc_reference_class(const BlackBoxClassifier& classifier,
                                    const FeatureVector& x, const NoiseSpec& spec,
                                    Label reference, std::uint64_t point_index) {
  if (reference < 0 || reference >= classifier.num_classes())
    throw std::invalid_argument("nhc_reference_class: reference class out of range");
  return conformance_score(classifier, x, spec, point_index, /*strength_index=*/0,
                           reference, EstimatorKind::nhc_ref);
}

double nhc_exact_rademacher(const BlackBoxClassifier& classifier, const FeatureVector& x,
                            double strength) {
  if (!(strength > 0.0)) throw std::invalid_argument("nhc_exact_rademacher: strength must be > 0");
  const std::size_t dim = x.dim();
  if (dim < 1 || dim > 20)
    throw std::invalid_argument("nhc_exact_rademacher: dim must be in [1, 20]");
  if (dim != classifier.input_dim())
    throw std::invalid_argument("nhc_exact_rademacher: point dim mismatch");

  const auto& kern = kernels::active();
  const Label base = classifier.classify_one(x);

  const std::uint64_t total = 1ULL << dim;
  const std::uint64_t chunk = 4096;
  std::vector<double> signs(dim);
  std::uint64_t conform = 0;

  for (std::uint64_t start = 0; start < total; start += chunk) {
    const std::uint64_t n = std::min(chunk, total - start);
    Matrix batch(n, dim);
    for (std::uint64_t m = 0; m < n; ++m) {
      const std::uint64_t mask = start + m;
      for (std::size_t d = 0; d < dim; ++d)
        signs[d] = (mask >> d) & 1 ? 1.0 : -1.0;
      // same arithmetic path as the Monte-Carlo estimate
      kern.perturb(x.values().data(), signs.data(), strength, batch.row(m), dim);
    }
    const auto labels = classifier.classify(batch);
    for (Label y : labels)
      if (y == base) ++conform;
  }
  return static_cast<double>(conform) / static_cast<double>(total);
}

}  // namespace nhc
