#include "nhc/attack.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "nhc/rng.hpp"

namespace nhc {

namespace {

void check_config(const PgdConfig& cfg) {
  if (cfg.epsilon < 0.0) throw std::invalid_argument("pgd: epsilon must be >= 0");
  if (cfg.num_steps < 1) throw std::invalid_argument("pgd: num_steps must be >= 1");
  if (cfg.clip_bounds && !(cfg.clip_bounds->first < cfg.clip_bounds->second))
    throw std::invalid_argument("pgd: clip bounds must satisfy lo < hi");
}

double signum(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

}  // namespace

FeatureVector pgd_attack(const WhiteBoxClassifier& model, const FeatureVector& x,
                         Label true_label, const PgdConfig& cfg,
                         std::uint64_t point_index) {
  check_config(cfg);
  if (x.dim() != model.input_dim())
    throw std::invalid_argument("pgd: point dim does not match model input dim");
  if (true_label < 0 || true_label >= model.num_classes())
    throw std::invalid_argument("pgd: label out of range");
  if (cfg.targeted && (cfg.target_class < 0 || cfg.target_class >= model.num_classes()))
    throw std::invalid_argument("pgd: target class out of range");
  if (cfg.clip_bounds)
    for (std::size_t d = 0; d < x.dim(); ++d)
      if (x[d] < cfg.clip_bounds->first || x[d] > cfg.clip_bounds->second)
        throw std::invalid_argument("pgd: input lies outside the clip bounds");

  if (cfg.epsilon == 0.0) return x;  // projection collapses to the input

  const std::size_t dim = x.dim();
  const double alpha =
      cfg.step_size > 0.0 ? cfg.step_size : 2.5 * cfg.epsilon / cfg.num_steps;

  std::vector<double> current(x.values().begin(), x.values().end());
  if (cfg.random_start) {
    rng::Stream stream(rng::derive_key(cfg.seed, point_index, 0x96d));
    for (std::size_t d = 0; d < dim; ++d)
      current[d] += cfg.epsilon * stream.next_symmetric();
  }

  auto project = [&](std::vector<double>& p) {
    if (cfg.clip_bounds)
      for (std::size_t d = 0; d < dim; ++d)
        p[d] = std::min(std::max(p[d], cfg.clip_bounds->first), cfg.clip_bounds->second);
    for (std::size_t d = 0; d < dim; ++d)
      p[d] = std::min(std::max(p[d], x[d] - cfg.epsilon), x[d] + cfg.epsilon);
  };
  project(current);

  const Objective objective =
      cfg.targeted ? Objective::loss(cfg.target_class) : Objective::loss(true_label);
  const double direction = cfg.targeted ? -1.0 : 1.0;  // descend loss toward the target

  for (int step = 0; step < cfg.num_steps; ++step) {
    const auto grad = model.input_gradient(FeatureVector(current), objective);
    for (std::size_t d = 0; d < dim; ++d)
      current[d] += direction * alpha * signum(grad[d]);
    project(current);
  }
  return FeatureVector(std::move(current));
}

Matrix pgd_attack_dataset(const WhiteBoxClassifier& model, const LabeledDataset& data,
                          const PgdConfig& cfg) {
  if (!data.has_labels())
    throw std::invalid_argument("pgd_attack_dataset: labeled dataset required");
  Matrix out(data.size(), data.dim());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const FeatureVector adv =
        pgd_attack(model, FeatureVector::from_row(data.points, i), data.labels[i], cfg, i);
    for (std::size_t d = 0; d < data.dim(); ++d) out(i, d) = adv[d];
  }
  return out;
}

std::vector<SweepRow> epsilon_sweep(const WhiteBoxClassifier& model,
                                    const LabeledDataset& data,
                                    std::span<const double> epsilons,
                                    const EstimatorVariant& estimator,
                                    const PgdConfig& base_cfg) {
  if (epsilons.empty()) throw std::invalid_argument("epsilon_sweep: empty grid");
  if (!std::is_sorted(epsilons.begin(), epsilons.end()))
    throw std::invalid_argument("epsilon_sweep: epsilons must be ascending");
  if (!(epsilons.front() >= 0.0)) throw std::invalid_argument("epsilon_sweep: negative epsilon");
  if (!data.has_labels() || data.size() == 0)
    throw std::invalid_argument("epsilon_sweep: labeled, non-empty dataset required");
  if (data.dim() != model.input_dim())
    throw std::invalid_argument("epsilon_sweep: data dim does not match model");

  std::vector<SweepRow> rows;
  rows.reserve(epsilons.size());
  for (double eps : epsilons) {
    PgdConfig cfg = base_cfg;
    cfg.epsilon = eps;
    const Matrix attacked = eps == 0.0 ? data.points : pgd_attack_dataset(model, data, cfg);

    const auto preds = model.classify(attacked);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < preds.size(); ++i)
      if (preds[i] == data.labels[i]) ++correct;

    const auto scores = score_points(model, attacked, estimator);
    SweepRow row;
    row.epsilon = eps;
    row.mean_confidence = mean_confidence(scores);
    row.accuracy = static_cast<double>(correct) / static_cast<double>(preds.size());
    row.histogram.assign(static_cast<std::size_t>(estimator.sample_budget()) + 1, 0);
    for (const auto& s : scores) row.histogram[static_cast<std::size_t>(s.count)]++;
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<double> default_epsilon_grid(double scale) {
  std::vector<double> grid;
  for (int k = 0; k <= 10; ++k) grid.push_back(scale * 0.025 * k);
  return grid;
}

}  // namespace nhc
