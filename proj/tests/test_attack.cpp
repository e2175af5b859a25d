#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "nhc/attack.hpp"
#include "nhc/eval.hpp"
#include "nhc/mlp.hpp"
#include "nhc/rng.hpp"
#include "nhc/train.hpp"

using namespace nhc;

namespace {

MlpModel linear_model(const std::vector<std::vector<double>>& w,
                      const std::vector<double>& b) {
  MlpModel m;
  m.layer_dims = {w.front().size(), w.size()};
  m.weights.push_back(Matrix::from_rows(w));
  m.biases.push_back(b);
  return m;
}

MlpClassifier trained_two_blob_model() {
  const auto data = make_blobs(2, 60, {{-0.5, 0.0}, {0.5, 0.0}}, 0.12, 60);
  TrainConfig cfg;
  cfg.epochs = 60;
  cfg.seed = 60;
  return MlpClassifier(train_sgd(make_mlp({2, 8, 2}, 60), data, cfg).model);
}

}  // namespace

TEST_CASE("zero severity returns the input unchanged") {
  const auto clf = trained_two_blob_model();
  PgdConfig cfg;
  cfg.epsilon = 0.0;
  cfg.random_start = true;
  const FeatureVector x({0.37, -0.21});
  CHECK(pgd_attack(clf, x, 0, cfg) == x);
}

TEST_CASE("one logistic step moves by alpha in the sign of w") {
  // logits = (0, w.x + b): ascending the class-0 loss steps along sign(w)
  const MlpClassifier clf(linear_model({{0, 0}, {2, -3}}, {0, 0.1}));
  PgdConfig cfg;
  cfg.epsilon = 0.1;
  cfg.step_size = 0.05;
  cfg.num_steps = 1;
  cfg.random_start = false;
  const FeatureVector x({0.2, 0.4});
  const auto adv = pgd_attack(clf, x, 0, cfg);
  CHECK(adv[0] == doctest::Approx(0.2 + 0.05));
  CHECK(adv[1] == doctest::Approx(0.4 - 0.05));
}

TEST_CASE("attacks at a third of the gap cause misclassifications") {
  const auto clf = trained_two_blob_model();
  const auto data = make_blobs(2, 60, {{-0.5, 0.0}, {0.5, 0.0}}, 0.12, 61);

  const auto clean_preds = clf.classify(data.points);
  const double clean_acc = accuracy(data.labels, clean_preds);

  PgdConfig cfg;
  cfg.epsilon = 0.3;  // 0.3 x the inter-center gap of 1.0
  cfg.seed = 61;
  const Matrix attacked = pgd_attack_dataset(clf, data, cfg);
  const double adv_acc = accuracy(data.labels, clf.classify(attacked));
  CHECK(adv_acc < clean_acc);
}

TEST_CASE("every attacked point stays inside the budget and clip bounds") {
  const auto clf = trained_two_blob_model();
  rng::Stream stream(rng::derive_key(62));
  for (int trial = 0; trial < 40; ++trial) {
    PgdConfig cfg;
    cfg.epsilon = 0.05 + 0.5 * stream.next_unit();
    cfg.num_steps = 1 + static_cast<int>(stream.next_below(25));
    cfg.random_start = stream.next_below(2) == 0;
    cfg.seed = stream.next_u64();
    if (stream.next_below(2) == 0) cfg.clip_bounds = {-0.8, 0.8};
    if (stream.next_below(3) == 0) cfg.step_size = cfg.epsilon;  // deliberately coarse

    const double reach = cfg.clip_bounds ? 0.8 : 1.5;  // inputs must be admissible
    const FeatureVector x({reach * stream.next_symmetric(), reach * stream.next_symmetric()});
    const Label y = stream.next_below(2) == 0 ? 0 : 1;
    const auto adv = pgd_attack(clf, x, y, cfg, trial);
    for (std::size_t d = 0; d < 2; ++d) {
      CHECK(std::fabs(adv[d] - x[d]) <= cfg.epsilon + 1e-9);
      if (cfg.clip_bounds) {
        CHECK(adv[d] >= cfg.clip_bounds->first);
        CHECK(adv[d] <= cfg.clip_bounds->second);
      }
    }
  }
}

TEST_CASE("attacks are deterministic per (seed, point index)") {
  const auto clf = trained_two_blob_model();
  PgdConfig cfg;
  cfg.epsilon = 0.2;
  cfg.seed = 63;
  const FeatureVector x({0.4, 0.1});
  CHECK(pgd_attack(clf, x, 0, cfg, 5) == pgd_attack(clf, x, 0, cfg, 5));

  // with a single tiny step the per-index random starts stay visible
  cfg.num_steps = 1;
  cfg.step_size = 0.01;
  CHECK(pgd_attack(clf, x, 0, cfg, 5) != pgd_attack(clf, x, 0, cfg, 6));
}

TEST_CASE("targeted mode reaches the requested class") {
  const auto clf = trained_two_blob_model();
  PgdConfig cfg;
  cfg.epsilon = 0.6;
  cfg.num_steps = 30;
  cfg.seed = 64;
  cfg.targeted = true;
  cfg.target_class = 0;
  const FeatureVector x({0.5, 0.0});  // solidly class 1 territory
  REQUIRE(clf.classify_one(x) == 1);
  const auto adv = pgd_attack(clf, x, 1, cfg);
  CHECK(clf.classify_one(adv) == 0);
}

TEST_CASE("degenerate sweep at zero severity scores the clean data") {
  const auto clf = trained_two_blob_model();
  const auto data = make_blobs(2, 40, {{-0.5, 0.0}, {0.5, 0.0}}, 0.12, 65);

  EstimatorVariant est;
  est.noise.seed = 65;
  const std::vector<double> eps = {0.0};
  const auto rows = epsilon_sweep(clf, data, eps, est, PgdConfig{});
  REQUIRE(rows.size() == 1);
  const auto clean_scores = score_points(clf, data.points, est);
  CHECK(rows[0].mean_confidence == doctest::Approx(mean_confidence(clean_scores)));
  CHECK(rows[0].accuracy == doctest::Approx(dataset_accuracy(clf.model(), data)));

  int histogram_total = 0;
  for (int c : rows[0].histogram) histogram_total += c;
  CHECK(histogram_total == static_cast<int>(data.size()));
}

TEST_CASE("a constant classifier is untouched by any severity") {
  const MlpClassifier clf(linear_model({{0, 0}, {0, 0}}, {1.0, 0.0}));
  LabeledDataset data;
  data.points = Matrix::from_rows({{0.1, 0.2}, {-0.4, 0.5}, {0.9, -0.3}});
  data.labels = {0, 0, 0};
  data.num_classes = 2;

  EstimatorVariant est;
  est.noise.seed = 66;
  const std::vector<double> eps = {0.0, 0.2, 0.4};
  const auto rows = epsilon_sweep(clf, data, eps, est, PgdConfig{});
  for (const auto& row : rows) {
    CHECK(row.mean_confidence == 1.0);
    CHECK(row.accuracy == 1.0);
  }
}

TEST_CASE("post-attack accuracy trends downward in severity") {
  const auto clf = trained_two_blob_model();
  const auto data = make_blobs(2, 50, {{-0.5, 0.0}, {0.5, 0.0}}, 0.12, 67);

  EstimatorVariant est;
  est.noise.seed = 67;
  std::vector<double> eps;
  for (int k = 0; k <= 10; ++k) eps.push_back(0.05 * k);
  PgdConfig base;
  base.seed = 67;
  const auto rows = epsilon_sweep(clf, data, eps, est, base);

  int violations = 0;
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (rows[i].accuracy > rows[i - 1].accuracy + 1e-12) ++violations;
  CHECK(violations <= static_cast<int>(rows.size()) / 10 + 0);
}

TEST_CASE("abc confidence drops on points attacked at the knee") {
  const auto clf = trained_two_blob_model();
  const auto data = make_blobs(2, 50, {{-0.5, 0.0}, {0.5, 0.0}}, 0.12, 68);

  AbcConfig abc;
  abc.seed = 68;
  abc.lambda_abc = 0.4;
  const auto clean = abc_score_batch(clf, data.points, abc);

  PgdConfig cfg;
  cfg.epsilon = 0.3;
  cfg.seed = 68;
  const Matrix attacked = pgd_attack_dataset(clf, data, cfg);
  const auto adv = abc_score_batch(clf, attacked, abc);

  CHECK(mean_confidence(adv) < mean_confidence(clean));
}

TEST_CASE("sweep validates its inputs") {
  const auto clf = trained_two_blob_model();
  const auto data = make_blobs(2, 10, {{-0.5, 0.0}, {0.5, 0.0}}, 0.12, 69);
  EstimatorVariant est;
  const std::vector<double> unsorted = {0.2, 0.1};
  CHECK_THROWS_AS(epsilon_sweep(clf, data, unsorted, est, PgdConfig{}),
                  std::invalid_argument);
  const std::vector<double> empty;
  CHECK_THROWS_AS(epsilon_sweep(clf, data, empty, est, PgdConfig{}), std::invalid_argument);

  PgdConfig bad;
  bad.epsilon = -0.1;
  CHECK_THROWS_AS(pgd_attack(clf, FeatureVector({0.1, 0.2}), 0, bad), std::invalid_argument);
  PgdConfig bad_label;
  CHECK_THROWS_AS(pgd_attack(clf, FeatureVector({0.1, 0.2}), 9, bad_label),
                  std::invalid_argument);
}

TEST_CASE("the default severity grid spans 0 to 0.25 scaled") {
  const auto grid = default_epsilon_grid(2.0);
  REQUIRE(grid.size() == 11);
  CHECK(grid.front() == 0.0);
  CHECK(grid.back() == doctest::Approx(0.5));
}
