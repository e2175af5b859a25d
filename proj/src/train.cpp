#include "nhc/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "nhc/kernels.hpp"
#include "nhc/rng.hpp"

namespace nhc {

namespace {

Matrix transposed(const Matrix& w) {
  Matrix t(w.cols(), w.rows());
  for (std::size_t r = 0; r < w.rows(); ++r)
    for (std::size_t c = 0; c < w.cols(); ++c) t(c, r) = w(r, c);
  return t;
}

void fisher_yates(std::vector<std::size_t>& idx, rng::Stream& stream) {
  for (std::size_t i = idx.size(); i > 1; --i) {
    const std::size_t j = stream.next_below(static_cast<std::uint32_t>(i));
    std::swap(idx[i - 1], idx[j]);
  }
}

}  // namespace

TrainResult train_sgd(const MlpModel& init, const LabeledDataset& data,
                      const TrainConfig& cfg) {
  if (data.size() == 0) throw std::invalid_argument("train_sgd: empty dataset");
  if (!data.has_labels()) throw std::invalid_argument("train_sgd: dataset has no labels");
  if (data.dim() != init.input_dim())
    throw std::invalid_argument("train_sgd: data dim does not match model input dim");
  for (Label y : data.labels)
    if (y < 0 || y >= init.num_classes())
      throw std::invalid_argument("train_sgd: label out of model range");
  if (cfg.learning_rate < 0.0) throw std::invalid_argument("train_sgd: negative learning rate");
  if (cfg.epochs < 1) throw std::invalid_argument("train_sgd: epochs must be >= 1");
  if (cfg.batch_size < 1) throw std::invalid_argument("train_sgd: batch_size must be >= 1");

  const auto& kern = kernels::active();
  const std::size_t n = data.size();
  const std::size_t num_layers = init.num_layers();
  const auto& dims = init.layer_dims;

  TrainResult result;
  result.model = init;
  MlpModel& m = result.model;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng::Stream shuffle_stream(rng::derive_key(cfg.seed, static_cast<std::uint64_t>(epoch)));
    fisher_yates(order, shuffle_stream);

    double epoch_loss_sum = 0.0;
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t bs = std::min<std::size_t>(cfg.batch_size, n - start);

      Matrix batch(bs, data.dim());
      std::vector<Label> labels(bs);
      for (std::size_t r = 0; r < bs; ++r) {
        const std::size_t src = order[start + r];
        for (std::size_t d = 0; d < data.dim(); ++d) batch(r, d) = data.points(src, d);
        labels[r] = data.labels[src];
      }

      // forward, keeping pre-activations for the backward pass
      std::vector<Matrix> acts;   // acts[l]: input to layer l
      std::vector<Matrix> pre;    // pre[l]: pre-activation of layer l
      acts.push_back(std::move(batch));
      for (std::size_t l = 0; l < num_layers; ++l) {
        const Matrix w_t = transposed(m.weights[l]);
        Matrix z(bs, dims[l + 1]);
        kern.dense_forward(w_t.data(), m.biases[l].data(), dims[l], dims[l + 1],
                           acts[l].data(), z.data(), bs);
        pre.push_back(z);
        if (l + 1 < num_layers) kern.relu(z.data(), z.rows() * z.cols());
        acts.push_back(std::move(z));
      }

      // loss and logit gradient, scaled to the batch mean
      const Matrix& logits = pre.back();
      Matrix delta(bs, dims.back());
      for (std::size_t r = 0; r < bs; ++r) {
        const auto row = logits.row_span(r);
        const double mx = *std::max_element(row.begin(), row.end());
        double sum = 0.0;
        for (std::size_t c = 0; c < row.size(); ++c) {
          delta(r, c) = std::exp(row[c] - mx);
          sum += delta(r, c);
        }
        epoch_loss_sum += mx + std::log(sum) - row[labels[r]];
        for (std::size_t c = 0; c < row.size(); ++c) delta(r, c) /= sum;
        delta(r, labels[r]) -= 1.0;
        for (std::size_t c = 0; c < row.size(); ++c) delta(r, c) /= static_cast<double>(bs);
      }
      if (!std::isfinite(epoch_loss_sum))
        throw std::runtime_error("train_sgd: non-finite loss at epoch " + std::to_string(epoch));

      // backward + SGD update, layer by layer from the top
      for (std::size_t l = num_layers; l-- > 0;) {
        Matrix prev_delta;
        if (l > 0) {
          prev_delta = Matrix(bs, dims[l]);
          kern.dense_forward(m.weights[l].data(), nullptr, dims[l + 1], dims[l],
                             delta.data(), prev_delta.data(), bs);
          for (std::size_t r = 0; r < bs; ++r)
            for (std::size_t k = 0; k < dims[l]; ++k)
              if (pre[l - 1](r, k) <= 0.0) prev_delta(r, k) = 0.0;
        }

        Matrix& w = m.weights[l];
        std::vector<double>& b = m.biases[l];
        for (std::size_t j = 0; j < dims[l + 1]; ++j) {
          double db = 0.0;
          for (std::size_t r = 0; r < bs; ++r) db += delta(r, j);
          b[j] -= cfg.learning_rate * db;
          for (std::size_t k = 0; k < dims[l]; ++k) {
            double dw = 0.0;
            for (std::size_t r = 0; r < bs; ++r) dw += delta(r, j) * acts[l](r, k);
            w(j, k) -= cfg.learning_rate * dw;
          }
        }
        if (l > 0) delta = std::move(prev_delta);
      }
    }

    result.epoch_loss.push_back(epoch_loss_sum / static_cast<double>(n));
    if (!m.all_finite())
      throw std::runtime_error("train_sgd: non-finite parameters at epoch " +
                               std::to_string(epoch));
  }
  return result;
}

double dataset_accuracy(const MlpModel& model, const LabeledDataset& data) {
  if (!data.has_labels() || data.size() == 0)
    throw std::invalid_argument("dataset_accuracy: labeled, non-empty dataset required");
  const auto preds = mlp_predict(model, data.points);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < preds.size(); ++i)
    if (preds[i] == data.labels[i]) ++correct;
  return static_cast<double>(correct) / static_cast<double>(preds.size());
}

}  // namespace nhc
