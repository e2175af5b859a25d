#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nhc/attack.hpp"
#include "nhc/classifier.hpp"
#include "nhc/confidence.hpp"

namespace nhc {

/// Selective-classification view: accuracy over the points whose confidence
/// reaches the threshold. Buckets that keep no points carry an explicit
/// empty marker instead of a fabricated number.
struct ThresholdCurveRow {
  double threshold = 0.0;
  std::optional<double> accuracy;
  std::size_t kept_count = 0;

  friend bool operator==(const ThresholdCurveRow&, const ThresholdCurveRow&) = default;
};

struct ThresholdCurve {
  std::vector<ThresholdCurveRow> rows;

  friend bool operator==(const ThresholdCurve&, const ThresholdCurve&) = default;
};

struct CdfRow {
  double confidence = 0.0;
  double cumulative_fraction = 0.0;

  friend bool operator==(const CdfRow&, const CdfRow&) = default;
};

struct EmpiricalCdf {
  std::vector<CdfRow> rows;

  friend bool operator==(const EmpiricalCdf&, const EmpiricalCdf&) = default;
};

/// For each threshold t: keep points with confidence >= t; accuracy is
/// computed over the kept points only. The t = 0 row always equals the plain
/// accuracy over all points.
ThresholdCurve threshold_accuracy_curve(std::span<const Label> truths,
                                        std::span<const Label> preds,
                                        std::span<const ConfidenceScore> confidences,
                                        std::span<const double> thresholds);

/// Step function over the distinct observed score values;
/// fraction at v = |{i : score_i <= v}| / n. Ends at exactly 1.
EmpiricalCdf empirical_cdf(std::span<const ConfidenceScore> confidences);

/// Smallest confidence value whose cumulative fraction reaches q.
double cdf_quantile(const EmpiricalCdf& cdf, double q);

double accuracy(std::span<const Label> truths, std::span<const Label> preds);

/// Thresholds 0, 0.05, ..., 1 matching the evaluation grid.
std::vector<double> default_threshold_grid();

// --- exports -------------------------------------------------------------
// CSV headers are fixed: threshold curves `threshold,accuracy,kept_count`
// (accuracy empty for empty buckets); CDFs `confidence,cumulative_fraction`;
// sweeps `epsilon,mean_confidence,accuracy,estimator,strength`.
// Re-exporting identical inputs yields byte-identical files.

struct SweepExportRow {
  SweepRow row;
  std::string estimator;  // e.g. "nhc" or "abc"
  double strength = 0.0;
};

void write_threshold_curve_csv(std::ostream& out, const ThresholdCurve& curve);
void write_cdf_csv(std::ostream& out, const EmpiricalCdf& cdf);
void write_sweep_csv(std::ostream& out, std::span<const SweepExportRow> rows);

struct ExportMetadata {
  std::uint64_t seed = 0;
  std::string model_digest;
  std::vector<std::string> spec_digests;
};

// JSON mirrors the CSV records and adds a top-level metadata block.
std::string threshold_curve_json(const ThresholdCurve& curve, const ExportMetadata& meta);
std::string cdf_json(const EmpiricalCdf& cdf, const ExportMetadata& meta);
std::string sweep_json(std::span<const SweepExportRow> rows, const ExportMetadata& meta);

ThresholdCurve parse_threshold_curve_json(const std::string& text);
EmpiricalCdf parse_cdf_json(const std::string& text);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace nhc
