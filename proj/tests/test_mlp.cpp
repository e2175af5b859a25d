#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "nhc/dataset.hpp"
#include "nhc/mlp.hpp"
#include "nhc/rng.hpp"
#include "nhc/train.hpp"

using namespace nhc;

namespace {

MlpModel single_layer(const std::vector<std::vector<double>>& w,
                      const std::vector<double>& b) {
  MlpModel m;
  m.layer_dims = {w.front().size(), w.size()};
  m.weights.push_back(Matrix::from_rows(w));
  m.biases.push_back(b);
  return m;
}

MlpModel two_layer(const std::vector<std::vector<double>>& w1, const std::vector<double>& b1,
                   const std::vector<std::vector<double>>& w2, const std::vector<double>& b2) {
  MlpModel m;
  m.layer_dims = {w1.front().size(), w1.size(), w2.size()};
  m.weights.push_back(Matrix::from_rows(w1));
  m.weights.push_back(Matrix::from_rows(w2));
  m.biases.push_back(b1);
  m.biases.push_back(b2);
  return m;
}

}  // namespace

TEST_CASE("identity single-layer model passes inputs through") {
  const auto m = single_layer({{1, 0}, {0, 1}}, {0, 0});
  const Matrix batch = Matrix::from_rows({{0.3, 0.7}});
  const Matrix logits = mlp_forward(m, batch);
  CHECK(logits(0, 0) == 0.3);
  CHECK(logits(0, 1) == 0.7);
}

TEST_CASE("empty batch yields empty logits") {
  const auto m = single_layer({{1, 0}, {0, 1}}, {0, 0});
  const Matrix logits = mlp_forward(m, Matrix(0, 2));
  CHECK(logits.rows() == 0);
  CHECK(logits.cols() == 2);
  CHECK(mlp_predict(m, Matrix(0, 2)).empty());
}

TEST_CASE("two-layer forward matches the hand evaluation") {
  // z1 = (1*1 - 1*0 + 0.25, 0.5*1 + 2*0 - 0.5) = (1.25, 0); relu keeps (1.25, 0)
  // logits = (2*1.25 + 1*0 + 0.1, -1*1.25 + 3*0 + 0.2) = (2.6, -1.05)
  const auto m = two_layer({{1, -1}, {0.5, 2}}, {0.25, -0.5}, {{2, 1}, {-1, 3}}, {0.1, 0.2});
  const Matrix logits = mlp_forward(m, Matrix::from_rows({{1.0, 0.0}}));
  CHECK(logits(0, 0) == doctest::Approx(2.6));
  CHECK(logits(0, 1) == doctest::Approx(-1.05));
}

TEST_CASE("forward rejects dimension mismatches") {
  const auto m = single_layer({{1, 0}, {0, 1}}, {0, 0});
  CHECK_THROWS_AS(mlp_forward(m, Matrix(1, 3)), std::invalid_argument);
}

TEST_CASE("argmax prediction breaks ties toward the lowest class") {
  CHECK(argmax_label(std::vector<double>{0.3, 0.7}) == 1);
  CHECK(argmax_label(std::vector<double>{0.5, 0.5}) == 0);
  CHECK(argmax_label(std::vector<double>{1.0, 1.0, 2.0, 2.0}) == 2);
}

TEST_CASE("linear model labels follow the sign of w.x + b") {
  // logits = (0, 2x - 1): positive side is class 1, boundary falls to class 0
  const auto m = single_layer({{0}, {2}}, {0, -1});
  const Matrix batch = Matrix::from_rows({{0.0}, {1.0}, {0.5}});
  const auto labels = mlp_predict(m, batch);
  CHECK(labels == std::vector<Label>{0, 1, 0});
}

TEST_CASE("logit-objective gradient of a linear model is the weight row") {
  const auto m = single_layer({{1, 2, 3}, {-1, 0, 1}}, {0.5, -0.5});
  const auto g = mlp_input_gradient(m, FeatureVector({0.2, -0.4, 0.6}), Objective::logit(0));
  CHECK(g == std::vector<double>{1, 2, 3});
  const auto g1 = mlp_input_gradient(m, FeatureVector({0.2, -0.4, 0.6}), Objective::logit(1));
  CHECK(g1 == std::vector<double>{-1, 0, 1});
}

TEST_CASE("zero-weight model has zero gradients and passes the gradient check") {
  const auto m = single_layer({{0, 0}, {0, 0}}, {0, 0});
  const auto g = mlp_input_gradient(m, FeatureVector({1.0, -2.0}), Objective::logit(1));
  CHECK(g == std::vector<double>{0, 0});
  CHECK(mlp_grad_check(m, FeatureVector({1.0, -2.0})) < 1e-8);
}

TEST_CASE("gradient check is exact for linear models") {
  const auto m = single_layer({{1.5, -2}, {0.25, 3}}, {0.1, -0.7});
  CHECK(mlp_grad_check(m, FeatureVector({0.4, 0.9})) < 1e-7);
}

TEST_CASE("input gradient rejects invalid classes") {
  const auto m = single_layer({{1, 0}, {0, 1}}, {0, 0});
  CHECK_THROWS_AS(mlp_input_gradient(m, FeatureVector({1.0, 2.0}), Objective::logit(5)),
                  std::invalid_argument);
}

TEST_CASE("backprop matches finite differences away from relu kinks") {
  rng::Stream picker(rng::derive_key(2024));
  int checked = 0;
  std::uint64_t model_seed = 100;
  while (checked < 20) {
    const auto m = make_mlp({4, 8, 6, 3}, model_seed++);
    FeatureVector x;
    bool found = false;
    for (int attempt = 0; attempt < 50; ++attempt) {
      std::vector<double> v(4);
      for (double& c : v) c = 2.0 * picker.next_symmetric();
      FeatureVector candidate(v);
      if (min_hidden_preactivation_gap(m, candidate) > 1e-3) {
        x = candidate;
        found = true;
        break;
      }
    }
    REQUIRE(found);
    CHECK(mlp_grad_check(m, x) < 1e-4);
    ++checked;
  }
}

TEST_CASE("batched forward equals per-item forward bit for bit") {
  const auto m = make_mlp({3, 5, 4}, 9);
  rng::Stream stream(rng::derive_key(55));
  Matrix batch(6, 3);
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t d = 0; d < 3; ++d) batch(i, d) = stream.next_gaussian();
  const Matrix all = mlp_forward(m, batch);
  for (std::size_t i = 0; i < 6; ++i) {
    Matrix one(1, 3);
    for (std::size_t d = 0; d < 3; ++d) one(0, d) = batch(i, d);
    const Matrix single = mlp_forward(m, one);
    for (std::size_t c = 0; c < 4; ++c) CHECK(all(i, c) == single(0, c));
  }
}

TEST_CASE("prediction equals argmax of forward on random batches") {
  const auto m = make_mlp({2, 6, 5}, 77);
  rng::Stream stream(rng::derive_key(78));
  Matrix batch(40, 2);
  for (std::size_t i = 0; i < batch.rows(); ++i)
    for (std::size_t d = 0; d < 2; ++d) batch(i, d) = 3.0 * stream.next_symmetric();
  const auto labels = mlp_predict(m, batch);
  const Matrix logits = mlp_forward(m, batch);
  for (std::size_t i = 0; i < batch.rows(); ++i)
    CHECK(labels[i] == argmax_label(logits.row_span(i)));
}

TEST_CASE("sgd separates two blobs") {
  const auto data = make_blobs(2, 40, {{-1.0, 0.0}, {1.0, 0.0}}, 0.2, 5);
  TrainConfig cfg;
  cfg.learning_rate = 0.1;
  cfg.epochs = 50;
  cfg.batch_size = 16;
  cfg.seed = 5;
  const auto result = train_sgd(make_mlp({2, 8, 2}, 5), data, cfg);
  CHECK(dataset_accuracy(result.model, data) >= 0.99);
  CHECK(result.epoch_loss.size() == 50);
  CHECK(result.epoch_loss.back() < result.epoch_loss.front());
}

TEST_CASE("zero learning rate leaves the model untouched") {
  const auto data = make_blobs(2, 10, {{-1.0, 0.0}, {1.0, 0.0}}, 0.3, 6);
  const auto init = make_mlp({2, 4, 2}, 6);
  TrainConfig cfg;
  cfg.learning_rate = 0.0;
  cfg.epochs = 3;
  cfg.seed = 6;
  const auto result = train_sgd(init, data, cfg);
  CHECK(result.model == init);
}

TEST_CASE("a single point is overfit to near-zero loss") {
  LabeledDataset data;
  data.points = Matrix::from_rows({{0.5, -0.3}});
  data.labels = {1};
  data.num_classes = 2;
  TrainConfig cfg;
  cfg.learning_rate = 0.5;
  cfg.epochs = 300;
  cfg.batch_size = 1;
  cfg.seed = 7;
  const auto result = train_sgd(make_mlp({2, 4, 2}, 7), data, cfg);
  const Matrix logits = mlp_forward(result.model, data.points);
  CHECK(cross_entropy(logits.row_span(0), 1) < 0.01);
}

TEST_CASE("training is bit-reproducible from the seed") {
  const auto data = make_blobs(3, 15, {}, 0.25, 8);
  TrainConfig cfg;
  cfg.learning_rate = 0.1;
  cfg.epochs = 10;
  cfg.seed = 8;
  const auto a = train_sgd(make_mlp({2, 6, 3}, 8), data, cfg);
  const auto b = train_sgd(make_mlp({2, 6, 3}, 8), data, cfg);
  CHECK(a.model == b.model);
  CHECK(a.epoch_loss == b.epoch_loss);
}

TEST_CASE("training rejects bad inputs") {
  const auto init = make_mlp({2, 4, 2}, 1);
  LabeledDataset empty;
  empty.points = Matrix(0, 2);
  empty.num_classes = 2;
  CHECK_THROWS_AS(train_sgd(init, empty, TrainConfig{}), std::invalid_argument);

  LabeledDataset bad;
  bad.points = Matrix::from_rows({{0.0, 0.0}});
  bad.labels = {5};
  bad.num_classes = 6;
  CHECK_THROWS_AS(train_sgd(init, bad, TrainConfig{}), std::invalid_argument);
}

TEST_CASE("checkpoints round-trip bit-exactly") {
  const auto data = make_blobs(2, 15, {{-1.0, 0.0}, {1.0, 0.0}}, 0.2, 9);
  TrainConfig cfg;
  cfg.epochs = 5;
  cfg.seed = 9;
  const auto trained = train_sgd(make_mlp({2, 5, 2}, 9), data, cfg).model;

  const std::string path = "test_checkpoint.json";
  save_checkpoint(trained, path);
  const auto loaded = load_checkpoint(path);
  CHECK(loaded == trained);
  CHECK(mlp_predict(loaded, data.points) == mlp_predict(trained, data.points));
  CHECK(model_digest(loaded) == model_digest(trained));
  std::remove(path.c_str());
}

TEST_CASE("truncated checkpoints are rejected with a position diagnostic") {
  const auto m = make_mlp({2, 3, 2}, 10);
  const std::string path = "test_truncated.json";
  save_checkpoint(m, path);
  {
    std::ifstream in(path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::ofstream out(path, std::ios::trunc);
    out << text.substr(0, text.size() / 2);
  }
  CHECK_THROWS_WITH_AS(load_checkpoint(path), doctest::Contains("malformed"),
                       std::runtime_error);
  std::remove(path.c_str());
}

TEST_CASE("checkpoints with inconsistent dims are rejected") {
  const auto m = make_mlp({2, 3, 2}, 11);
  const std::string path = "test_baddims.json";
  save_checkpoint(m, path);
  {
    std::ifstream in(path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const std::string needle = "\"layer_dims\": [\n    2,";
    const auto pos = text.find(needle);
    REQUIRE(pos != std::string::npos);
    text.replace(pos, needle.size(), "\"layer_dims\": [\n    4,");
    std::ofstream out(path, std::ios::trunc);
    out << text;
  }
  CHECK_THROWS_AS(load_checkpoint(path), std::runtime_error);
  std::remove(path.c_str());
}
