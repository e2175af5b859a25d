#pragma once

#include <cstdint>
#include <vector>

#include "nhc/dataset.hpp"
#include "nhc/mlp.hpp"

namespace nhc {

struct TrainConfig {
  double learning_rate = 0.1;
  int epochs = 60;
  int batch_size = 32;
  std::uint64_t seed = 0;
};

struct TrainResult {
  MlpModel model;
  std::vector<double> epoch_loss;  // mean cross-entropy per epoch
};

/// Minibatch SGD on cross-entropy. Training works on a private copy of the
/// initial model; runs are bit-reproducible from the seed. Aborts with a
/// diagnostic if the loss or any parameter turns non-finite.
TrainResult train_sgd(const MlpModel& init, const LabeledDataset& data,
                      const TrainConfig& cfg);

/// Fraction of points the model labels correctly.
double dataset_accuracy(const MlpModel& model, const LabeledDataset& data);

}  // namespace nhc
