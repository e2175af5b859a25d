#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nhc/classifier.hpp"
#include "nhc/matrix.hpp"

namespace nhc {

enum class Regime { in_domain, shifted, ood };

std::string to_string(Regime regime);
std::optional<Regime> regime_from_string(std::string_view s);

/// Points with optional ground truth. Out-of-domain sets carry no labels:
/// by construction their true classes lie outside the classifier's label
/// set, so no prediction on them can be correct.
struct LabeledDataset {
  Matrix points;
  std::vector<Label> labels;  // empty iff regime == ood
  int num_classes = 0;
  Regime regime = Regime::in_domain;

  std::size_t size() const { return points.rows(); }
  std::size_t dim() const { return points.cols(); }
  bool has_labels() const { return regime != Regime::ood; }

  friend bool operator==(const LabeledDataset&, const LabeledDataset&) = default;
};

/// Evenly spaced class centers on a circle in the first two dimensions.
std::vector<std::vector<double>> circle_centers(int num_classes, double radius);

/// Gaussian clusters around the given centers (empty = circle of radius 1.5
/// in 2-D). Labels are balanced: per_class points per class, grouped by class.
LabeledDataset make_blobs(int num_classes, int per_class,
                          std::vector<std::vector<double>> centers, double stddev,
                          std::uint64_t seed);

/// Image-like mode: one random side x side template bitmap per class, jittered
/// per sample with Gaussian noise and clipped to [0, 1]. Feature dim = side^2.
LabeledDataset make_image_blobs(int num_classes, int per_class, int side,
                                double jitter_std, std::uint64_t seed);

/// Environmental-condition stand-in applied to every point: scale, rotation,
/// translation, then additive Gaussian noise. For image_side > 0 the rows are
/// treated as image_side x image_side images and transformed by a pixel-space
/// affine warp (bilinear, zero fill) instead of a plane rotation.
struct ShiftConfig {
  double rotation_deg = 15.0;
  std::vector<double> translate;  // empty = none; otherwise size 2 or dim
  double scale = 1.1;
  double additive_noise_std = 0.0;
  std::uint64_t seed = 0;
  int image_side = 0;
};

/// Default severity: rotation 15 deg, scale 1.1, noise at 0.1x the per-feature
/// standard deviation of the data. Chosen to dent accuracy noticeably without
/// destroying it.
ShiftConfig default_shift_profile(const LabeledDataset& data);

LabeledDataset apply_shift(const LabeledDataset& data, const ShiftConfig& cfg);

/// Points with no valid class: rejection-sampled so that every point lies at
/// Euclidean distance >= min_distance from every class centroid of the
/// exclusion set. num_clusters > 0 groups the points around that many remote
/// cluster seeds instead of spreading them uniformly.
LabeledDataset make_ood(int num_points, const LabeledDataset& exclusion,
                        double min_distance, std::uint64_t seed, int num_clusters = 0);

/// Per-class mean of a labeled dataset.
std::vector<std::vector<double>> class_centroids(const LabeledDataset& data);

// CSV layout: a metadata line `# dim=.. num_classes=.. regime=..`, a header
// line `f0,...,f{D-1},label`, then one row per point. The label column is
// empty for ood rows.
void save_dataset_csv(const LabeledDataset& data, const std::string& path);
LabeledDataset load_dataset_csv(const std::string& path);

}  // namespace nhc
