#include "nhc/classifier.hpp"

#include <cmath>
#include <stdexcept>

namespace nhc {

FeatureVector::FeatureVector(std::vector<double> values) : values_(std::move(values)) {
  for (double v : values_)
    if (!std::isfinite(v)) throw std::invalid_argument("feature vector has non-finite entries");
}

FeatureVector FeatureVector::from_row(const Matrix& m, std::size_t r) {
  return FeatureVector(std::vector<double>(m.row(r), m.row(r) + m.cols()));
}

Label BlackBoxClassifier::classify_one(const FeatureVector& x) const {
  Matrix batch(1, x.dim());
  for (std::size_t i = 0; i < x.dim(); ++i) batch(0, i) = x[i];
  return classify(batch).front();
}

std::vector<Label> CallbackClassifier::classify(const Matrix& batch) const {
  if (!batch.empty() && batch.cols() != input_dim_)
    throw std::invalid_argument("classify: batch width does not match classifier input dim");
  std::vector<Label> out(batch.rows());
  for (std::size_t r = 0; r < batch.rows(); ++r) out[r] = fn_(batch.row_span(r));
  return out;
}

Label argmax_label(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("argmax of empty vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] > values[best]) best = i;
  return static_cast<Label>(best);
}

}  // namespace nhc
