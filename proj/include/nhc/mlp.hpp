#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nhc/classifier.hpp"
#include "nhc/matrix.hpp"

namespace nhc {

/// Fully connected network with ReLU hidden activations and identity logits
/// at the output. weights[l] has shape layer_dims[l+1] x layer_dims[l]
/// (row-major); biases[l] has length layer_dims[l+1].
struct MlpModel {
  std::vector<std::size_t> layer_dims;
  std::vector<Matrix> weights;
  std::vector<std::vector<double>> biases;

  std::size_t input_dim() const { return layer_dims.front(); }
  int num_classes() const { return static_cast<int>(layer_dims.back()); }
  std::size_t num_layers() const { return weights.size(); }
  bool all_finite() const;

  friend bool operator==(const MlpModel&, const MlpModel&) = default;
};

/// Seeded Glorot-uniform init: weights in +-sqrt(6/(fan_in+fan_out)), zero biases.
MlpModel make_mlp(const std::vector<std::size_t>& layer_dims, std::uint64_t seed);

/// Batched logits. Row order is preserved; an empty batch yields an empty result.
Matrix mlp_forward(const MlpModel& model, const Matrix& batch);

/// Top-1 labels; ties go to the lowest class index.
std::vector<Label> mlp_predict(const MlpModel& model, const Matrix& batch);

/// Gradient of the selected scalar objective with respect to the input.
std::vector<double> mlp_input_gradient(const MlpModel& model, const FeatureVector& x,
                                       const Objective& objective);

/// Value of the objective at x (used by the finite-difference checks).
double mlp_objective_value(const MlpModel& model, std::span<const double> x,
                           const Objective& objective);

/// Cross-entropy of raw logits against a label, stabilized by max subtraction.
double cross_entropy(std::span<const double> logits, Label y);

/// Max relative error of the analytic input gradient against central finite
/// differences (step 1e-5, denominators floored at 1e-8), taken over both
/// objective kinds at the predicted class.
double mlp_grad_check(const MlpModel& model, const FeatureVector& x);

/// Smallest |pre-activation| over all hidden units at x. Finite-difference
/// probes resample points where this gap is below the probe step.
double min_hidden_preactivation_gap(const MlpModel& model, const FeatureVector& x);

void save_checkpoint(const MlpModel& model, const std::string& path);
MlpModel load_checkpoint(const std::string& path);

/// 16-hex-digit digest over layer dims and raw parameter bits.
std::string model_digest(const MlpModel& model);

/// White-box adapter exposing an MlpModel through the classifier contracts.
/// The wrapped model is immutable, so a single instance is safe to share
/// across concurrent readers.
class MlpClassifier final : public WhiteBoxClassifier {
 public:
  explicit MlpClassifier(MlpModel model) : model_(std::move(model)) {}

  const MlpModel& model() const { return model_; }

  std::size_t input_dim() const override { return model_.input_dim(); }
  int num_classes() const override { return model_.num_classes(); }
  std::vector<Label> classify(const Matrix& batch) const override {
    return mlp_predict(model_, batch);
  }
  Matrix logits(const Matrix& batch) const override { return mlp_forward(model_, batch); }
  std::vector<double> input_gradient(const FeatureVector& x,
                                     const Objective& objective) const override {
    return mlp_input_gradient(model_, x, objective);
  }

 private:
  MlpModel model_;
};

}  // namespace nhc
