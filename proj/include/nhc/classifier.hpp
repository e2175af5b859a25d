#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "nhc/matrix.hpp"

namespace nhc {

using Label = std::int32_t;

/// A single input point: a flat vector of finite feature values.
class FeatureVector {
 public:
  FeatureVector() = default;
  explicit FeatureVector(std::vector<double> values);
  static FeatureVector from_row(const Matrix& m, std::size_t r);

  std::size_t dim() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;

 private:
  std::vector<double> values_;
};

/// Scalar objective selector for input gradients: either the training loss at
/// a given label, or a single class logit.
struct Objective {
  enum class Kind { loss, logit };
  Kind kind = Kind::logit;
  Label class_id = 0;

  static Objective loss(Label y) { return {Kind::loss, y}; }
  static Objective logit(Label c) { return {Kind::logit, c}; }
};

/// Hard-label classifier contract: one top-1 class per input row and nothing
/// else. Implementations must be deterministic, and each output may depend
/// only on its own input row.
class BlackBoxClassifier {
 public:
  virtual ~BlackBoxClassifier() = default;

  virtual std::size_t input_dim() const = 0;
  virtual int num_classes() const = 0;
  virtual std::vector<Label> classify(const Matrix& batch) const = 0;

  Label classify_one(const FeatureVector& x) const;
};

/// Extends the hard-label contract with logits and input gradients.
class WhiteBoxClassifier : public BlackBoxClassifier {
 public:
  virtual Matrix logits(const Matrix& batch) const = 0;
  virtual std::vector<double> input_gradient(const FeatureVector& x,
                                             const Objective& objective) const = 0;
};

/// Wraps an arbitrary label function as a black-box classifier. This is the
/// hook for plugging externally supplied systems (or closed-form deciders in
/// tests) into the estimators.
class CallbackClassifier final : public BlackBoxClassifier {
 public:
  using Fn = std::function<Label(std::span<const double>)>;

  CallbackClassifier(std::size_t input_dim, int num_classes, Fn fn)
      : input_dim_(input_dim), num_classes_(num_classes), fn_(std::move(fn)) {}

  std::size_t input_dim() const override { return input_dim_; }
  int num_classes() const override { return num_classes_; }
  std::vector<Label> classify(const Matrix& batch) const override;

 private:
  std::size_t input_dim_;
  int num_classes_;
  Fn fn_;
};

/// Index of the largest value; ties go to the lowest index.
Label argmax_label(std::span<const double> values);

}  // namespace nhc
