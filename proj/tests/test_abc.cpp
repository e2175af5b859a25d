#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "nhc/abc.hpp"
#include "nhc/mlp.hpp"
#include "nhc/rng.hpp"

using nhc::AbcConfig;
using nhc::AttributionMap;
using nhc::EstimatorKind;
using nhc::FeatureVector;
using nhc::Label;
using nhc::Matrix;
using nhc::MlpClassifier;
using nhc::MlpModel;
using nhc::Objective;
using nhc::WhiteBoxClassifier;
using nhc::abc_score;
using nhc::abc_score_batch;
using nhc::attribution_single_pass;
using nhc::make_mlp;

namespace {

MlpModel linear_model(const std::vector<std::vector<double>>& w,
                      const std::vector<double>& b) {
  MlpModel m;
  m.layer_dims = {w.front().size(), w.size()};
  m.weights.push_back(Matrix::from_rows(w));
  m.biases.push_back(b);
  return m;
}

// Records every batch the estimator sends to the classifier.
class SpyClassifier final : public WhiteBoxClassifier {
 public:
  explicit SpyClassifier(MlpModel model) : inner_(std::move(model)) {}

  std::size_t input_dim() const override { return inner_.input_dim(); }
  int num_classes() const override { return inner_.num_classes(); }
  std::vector<Label> classify(const Matrix& batch) const override {
    last_batch = batch;
    return inner_.classify(batch);
  }
  Matrix logits(const Matrix& batch) const override { return inner_.logits(batch); }
  std::vector<double> input_gradient(const FeatureVector& x,
                                     const Objective& objective) const override {
    return inner_.input_gradient(x, objective);
  }

  mutable Matrix last_batch;

 private:
  MlpClassifier inner_;
};

}  // namespace

TEST_CASE("attribution of a linear model is weight times input") {
  // logits = (w.x, 0) with w = (2, -1, 0.5); class 0 wins on this input
  const MlpClassifier clf(linear_model({{2, -1, 0.5}, {0, 0, 0}}, {0, 0}));
  const FeatureVector x({0.5, 0.2, -0.4});
  const AttributionMap map = attribution_single_pass(clf, x);
  CHECK(map.source_class == 0);
  CHECK(map.values[0] == doctest::Approx(2 * 0.5));
  CHECK(map.values[1] == doctest::Approx(-1 * 0.2));
  CHECK(map.values[2] == doctest::Approx(0.5 * -0.4));
}

TEST_CASE("attribution at the origin vanishes") {
  const MlpClassifier clf(linear_model({{2, -1}, {1, 3}}, {0.5, 0}));
  const AttributionMap map = attribution_single_pass(clf, FeatureVector({0.0, 0.0}));
  CHECK(map.values == std::vector<double>{0.0, 0.0});
}

TEST_CASE("attribution gradient factor matches finite differences") {
  const auto model = make_mlp({4, 6, 3}, 50);
  const MlpClassifier clf(model);
  const FeatureVector x({0.4, -0.2, 0.7, 0.1});
  const AttributionMap map = attribution_single_pass(clf, x);

  const double step = 1e-5;
  for (std::size_t d = 0; d < 4; ++d) {
    std::vector<double> probe(x.values().begin(), x.values().end());
    probe[d] += step;
    const double hi = clf.logits(Matrix::from_rows({probe}))(0, map.source_class);
    probe[d] -= 2 * step;
    const double lo = clf.logits(Matrix::from_rows({probe}))(0, map.source_class);
    const double numeric = (hi - lo) / (2 * step);
    const double expected = numeric * x[d];
    const double denom = std::max({std::fabs(expected), std::fabs(map.values[d]), 1e-8});
    CHECK(std::fabs(map.values[d] - expected) / denom < 1e-4);
  }
}

TEST_CASE("constant classifier earns full abc confidence via the uniform fallback") {
  // zero weights: prediction is constant class 0 and the attribution is all zero
  const MlpClassifier clf(linear_model({{0, 0}, {0, 0}}, {1.0, 0.0}));
  AbcConfig cfg;
  cfg.num_samples = 9;
  cfg.seed = 51;
  const auto score = abc_score(clf, FeatureVector({0.3, -0.8}), cfg);
  CHECK(score.value == 1.0);
  CHECK(score.count == 9);
  CHECK(score.denominator == 9);
  CHECK(score.estimator == EstimatorKind::abc);
}

TEST_CASE("abc scores are ranged, quantized and deterministic") {
  const auto model = make_mlp({3, 6, 3}, 52);
  const MlpClassifier clf(model);
  nhc::rng::Stream stream(nhc::rng::derive_key(53));
  for (int trial = 0; trial < 30; ++trial) {
    AbcConfig cfg;
    cfg.num_samples = 1 + static_cast<int>(stream.next_below(15));
    cfg.seed = stream.next_u64();
    cfg.lambda_abc = 0.1 + stream.next_unit();
    std::vector<double> coords(3);
    for (double& c : coords) c = stream.next_symmetric();
    const FeatureVector x(coords);

    const auto a = abc_score(clf, x, cfg, trial);
    const auto b = abc_score(clf, x, cfg, trial);
    CHECK(a == b);
    CHECK(a.value >= 0.0);
    CHECK(a.value <= 1.0);
    const double scaled = a.value * cfg.num_samples;
    CHECK(std::fabs(scaled - std::round(scaled)) <= 1e-9);
  }
}

TEST_CASE("feature selection follows the attribution weights") {
  // logits = (w.x, 0): attribution is (0.1, 0.3, 0, 0.6) at this x
  SpyClassifier spy(linear_model({{1, 1, 1, 1}, {0, 0, 0, 0}}, {0, 0}));
  const FeatureVector x({0.1, 0.3, 0.0, 0.6});
  AbcConfig cfg;
  cfg.num_samples = 10000;
  cfg.seed = 54;
  cfg.lambda_abc = 0.01;
  (void)abc_score(spy, x, cfg);

  REQUIRE(spy.last_batch.rows() == 10001);
  std::vector<double> freq(4, 0.0);
  for (std::size_t r = 1; r < spy.last_batch.rows(); ++r) {
    int mutated = -1;
    for (std::size_t d = 0; d < 4; ++d)
      if (spy.last_batch(r, d) != x[d]) {
        REQUIRE(mutated == -1);  // exactly one feature per sample
        mutated = static_cast<int>(d);
      }
    REQUIRE(mutated >= 0);
    freq[mutated] += 1.0 / 10000.0;
  }

  const std::vector<double> expected = {0.1, 0.3, 0.0, 0.6};
  double tv = 0.0;
  for (std::size_t d = 0; d < 4; ++d) tv += std::fabs(freq[d] - expected[d]);
  CHECK(tv / 2.0 <= 0.05);
  CHECK(freq[2] == 0.0);  // zero attribution never gets picked when mass exists
}

TEST_CASE("bounded features are redrawn inside the declared range") {
  SpyClassifier spy(linear_model({{1, 1}, {0, 0}}, {0, 0}));
  const FeatureVector x({0.9, 0.8});
  AbcConfig cfg;
  cfg.num_samples = 200;
  cfg.seed = 55;
  cfg.feature_range = {0.0, 1.0};
  (void)abc_score(spy, x, cfg);
  for (std::size_t r = 1; r < spy.last_batch.rows(); ++r)
    for (std::size_t d = 0; d < 2; ++d) {
      CHECK(spy.last_batch(r, d) >= 0.0);
      CHECK(spy.last_batch(r, d) <= 1.0);
    }
}

TEST_CASE("unbounded mutation steps by exactly lambda") {
  SpyClassifier spy(linear_model({{1, 1}, {0, 0}}, {0, 0}));
  const FeatureVector x({0.4, -0.6});
  AbcConfig cfg;
  cfg.num_samples = 100;
  cfg.seed = 56;
  cfg.lambda_abc = 0.25;
  (void)abc_score(spy, x, cfg);
  for (std::size_t r = 1; r < spy.last_batch.rows(); ++r)
    for (std::size_t d = 0; d < 2; ++d) {
      const double delta = std::fabs(spy.last_batch(r, d) - x[d]);
      CHECK((delta == 0.0 || delta == doctest::Approx(0.25)));
    }
}

TEST_CASE("batch abc matches single-point abc") {
  const auto model = make_mlp({2, 5, 2}, 57);
  const MlpClassifier clf(model);
  AbcConfig cfg;
  cfg.seed = 57;
  const Matrix points = Matrix::from_rows({{0.2, 0.4}, {-0.9, 0.3}, {1.2, -1.0}});
  const auto batch = abc_score_batch(clf, points, cfg);
  REQUIRE(batch.size() == 3);
  for (std::size_t i = 0; i < 3; ++i)
    CHECK(batch[i] == abc_score(clf, FeatureVector::from_row(points, i), cfg, i));
}

TEST_CASE("abc validates its configuration") {
  const MlpClassifier clf(linear_model({{1, 0}, {0, 1}}, {0, 0}));
  AbcConfig bad;
  bad.num_samples = 0;
  CHECK_THROWS_AS(abc_score(clf, FeatureVector({0.1, 0.2}), bad), std::invalid_argument);
  AbcConfig bad2;
  bad2.lambda_abc = 0.0;
  CHECK_THROWS_AS(abc_score(clf, FeatureVector({0.1, 0.2}), bad2), std::invalid_argument);
}
