#include "nhc/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "json.hpp"
#include "nhc/kernels.hpp"
#include "nhc/rng.hpp"

namespace nhc {

namespace {

void check_model(const MlpModel& m) {
  if (m.layer_dims.size() < 2) throw std::invalid_argument("model needs at least one layer");
  if (m.weights.size() != m.layer_dims.size() - 1 || m.biases.size() != m.weights.size())
    throw std::invalid_argument("model layer count mismatch");
  for (std::size_t l = 0; l < m.weights.size(); ++l) {
    if (m.weights[l].rows() != m.layer_dims[l + 1] || m.weights[l].cols() != m.layer_dims[l])
      throw std::invalid_argument("weight shape does not match layer dims at layer " +
                                  std::to_string(l));
    if (m.biases[l].size() != m.layer_dims[l + 1])
      throw std::invalid_argument("bias length does not match layer dims at layer " +
                                  std::to_string(l));
  }
}

// Input-major copy of a weight matrix, the layout the forward kernel expects.
Matrix transposed(const Matrix& w) {
  Matrix t(w.cols(), w.rows());
  for (std::size_t r = 0; r < w.rows(); ++r)
    for (std::size_t c = 0; c < w.cols(); ++c) t(c, r) = w(r, c);
  return t;
}

}  // namespace

bool MlpModel::all_finite() const {
  for (const auto& w : weights)
    if (!w.all_finite()) return false;
  for (const auto& b : biases)
    for (double v : b)
      if (!std::isfinite(v)) return false;
  return true;
}

MlpModel make_mlp(const std::vector<std::size_t>& layer_dims, std::uint64_t seed) {
  if (layer_dims.size() < 2) throw std::invalid_argument("make_mlp: need at least two dims");
  for (std::size_t d : layer_dims)
    if (d == 0) throw std::invalid_argument("make_mlp: zero layer width");

  MlpModel m;
  m.layer_dims = layer_dims;
  for (std::size_t l = 0; l + 1 < layer_dims.size(); ++l) {
    const std::size_t fan_in = layer_dims[l];
    const std::size_t fan_out = layer_dims[l + 1];
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    rng::Stream stream(rng::derive_key(seed, l));
    Matrix w(fan_out, fan_in);
    for (std::size_t r = 0; r < fan_out; ++r)
      for (std::size_t c = 0; c < fan_in; ++c) w(r, c) = limit * stream.next_symmetric();
    m.weights.push_back(std::move(w));
    m.biases.emplace_back(fan_out, 0.0);
  }
  return m;
}

Matrix mlp_forward(const MlpModel& model, const Matrix& batch) {
  check_model(model);
  if (batch.rows() == 0) return Matrix(0, model.layer_dims.back());
  if (batch.cols() != model.input_dim())
    throw std::invalid_argument("forward: batch width " + std::to_string(batch.cols()) +
                                " does not match model input dim " +
                                std::to_string(model.input_dim()));

  const auto& k = kernels::active();
  Matrix act = batch;
  for (std::size_t l = 0; l < model.num_layers(); ++l) {
    const Matrix w_t = transposed(model.weights[l]);
    Matrix next(act.rows(), model.layer_dims[l + 1]);
    k.dense_forward(w_t.data(), model.biases[l].data(), model.layer_dims[l],
                    model.layer_dims[l + 1], act.data(), next.data(), act.rows());
    if (l + 1 < model.num_layers()) k.relu(next.data(), next.rows() * next.cols());
    act = std::move(next);
  }
  if (!act.all_finite()) throw std::runtime_error("forward produced non-finite logits");
  return act;
}

std::vector<Label> mlp_predict(const MlpModel& model, const Matrix& batch) {
  const Matrix logits = mlp_forward(model, batch);
  std::vector<Label> out(logits.rows());
  for (std::size_t r = 0; r < logits.rows(); ++r) out[r] = argmax_label(logits.row_span(r));
  return out;
}

double cross_entropy(std::span<const double> logits, Label y) {
  if (y < 0 || static_cast<std::size_t>(y) >= logits.size())
    throw std::invalid_argument("cross_entropy: label out of range");
  const double m = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double v : logits) sum += std::exp(v - m);
  return m + std::log(sum) - logits[y];
}

namespace {

struct ForwardTrace {
  std::vector<std::vector<double>> pre;   // pre[l]: pre-activation of layer l
  std::vector<std::vector<double>> post;  // post[0] = x, post[l+1] = activation
};

ForwardTrace trace_forward(const MlpModel& model, std::span<const double> x) {
  const auto& k = kernels::active();
  ForwardTrace t;
  t.post.emplace_back(x.begin(), x.end());
  for (std::size_t l = 0; l < model.num_layers(); ++l) {
    const Matrix w_t = transposed(model.weights[l]);
    std::vector<double> z(model.layer_dims[l + 1]);
    k.dense_forward(w_t.data(), model.biases[l].data(), model.layer_dims[l],
                    model.layer_dims[l + 1], t.post.back().data(), z.data(), 1);
    t.pre.push_back(z);
    if (l + 1 < model.num_layers()) k.relu(z.data(), z.size());
    t.post.push_back(std::move(z));
  }
  return t;
}

std::vector<double> softmax(std::span<const double> logits) {
  const double m = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = std::exp(logits[i] - m);
    sum += p[i];
  }
  for (double& v : p) v /= sum;
  return p;
}

}  // namespace

std::vector<double> mlp_input_gradient(const MlpModel& model, const FeatureVector& x,
                                       const Objective& objective) {
  check_model(model);
  if (x.dim() != model.input_dim())
    throw std::invalid_argument("input_gradient: point dim does not match model");
  if (objective.class_id < 0 || objective.class_id >= model.num_classes())
    throw std::invalid_argument("input_gradient: class id out of range");

  const auto& k = kernels::active();
  const ForwardTrace t = trace_forward(model, x.values());
  const std::size_t last = model.num_layers() - 1;

  std::vector<double> delta;
  if (objective.kind == Objective::Kind::logit) {
    delta.assign(model.layer_dims.back(), 0.0);
    delta[objective.class_id] = 1.0;
  } else {
    delta = softmax(t.pre[last]);
    delta[objective.class_id] -= 1.0;
  }

  // Walk layers backwards: delta_{l-1} = (W_l^T delta_l) masked by relu'(z_{l-1}).
  // W_l in row-major is exactly the input-major layout of its transpose.
  for (std::size_t l = last; l > 0; --l) {
    std::vector<double> g(model.layer_dims[l]);
    k.dense_forward(model.weights[l].data(), nullptr, model.layer_dims[l + 1],
                    model.layer_dims[l], delta.data(), g.data(), 1);
    for (std::size_t i = 0; i < g.size(); ++i)
      if (t.pre[l - 1][i] <= 0.0) g[i] = 0.0;
    delta = std::move(g);
  }

  std::vector<double> grad(model.layer_dims[0]);
  k.dense_forward(model.weights[0].data(), nullptr, model.layer_dims[1],
                  model.layer_dims[0], delta.data(), grad.data(), 1);
  return grad;
}

double mlp_objective_value(const MlpModel& model, std::span<const double> x,
                           const Objective& objective) {
  Matrix batch(1, x.size());
  for (std::size_t i = 0; i < x.size(); ++i) batch(0, i) = x[i];
  const Matrix logits = mlp_forward(model, batch);
  if (objective.kind == Objective::Kind::logit) return logits(0, objective.class_id);
  return cross_entropy(logits.row_span(0), objective.class_id);
}

double mlp_grad_check(const MlpModel& model, const FeatureVector& x) {
  Matrix one(1, x.dim());
  for (std::size_t i = 0; i < x.dim(); ++i) one(0, i) = x[i];
  const Label predicted = mlp_predict(model, one).front();
  const double step = 1e-5;
  double worst = 0.0;
  for (const Objective& obj : {Objective::logit(predicted), Objective::loss(predicted)}) {
    const std::vector<double> analytic = mlp_input_gradient(model, x, obj);
    std::vector<double> probe(x.values().begin(), x.values().end());
    for (std::size_t i = 0; i < probe.size(); ++i) {
      const double orig = probe[i];
      probe[i] = orig + step;
      const double hi = mlp_objective_value(model, probe, obj);
      probe[i] = orig - step;
      const double lo = mlp_objective_value(model, probe, obj);
      probe[i] = orig;
      const double numeric = (hi - lo) / (2.0 * step);
      const double denom = std::max({std::fabs(analytic[i]), std::fabs(numeric), 1e-8});
      worst = std::max(worst, std::fabs(analytic[i] - numeric) / denom);
    }
  }
  return worst;
}

double min_hidden_preactivation_gap(const MlpModel& model, const FeatureVector& x) {
  const ForwardTrace t = trace_forward(model, x.values());
  double gap = std::numeric_limits<double>::infinity();
  // only hidden layers carry a ReLU kink
  for (std::size_t l = 0; l + 1 < model.num_layers(); ++l)
    for (double z : t.pre[l]) gap = std::min(gap, std::fabs(z));
  return gap;
}

void save_checkpoint(const MlpModel& model, const std::string& path) {
  check_model(model);
  nlohmann::json j;
  j["version"] = 1;
  j["layer_dims"] = model.layer_dims;
  j["activation"] = "relu";
  nlohmann::json weights = nlohmann::json::array();
  for (const auto& w : model.weights)
    weights.push_back(std::vector<double>(w.data(), w.data() + w.rows() * w.cols()));
  j["weights"] = std::move(weights);
  j["biases"] = model.biases;

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open checkpoint for writing: " + path);
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("failed writing checkpoint: " + path);
}

MlpModel load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    // parse_error messages carry the byte offset of the failure
    throw std::runtime_error("malformed checkpoint " + path + ": " + e.what());
  }

  try {
    if (!j.contains("version") || j["version"] != 1)
      throw std::runtime_error("unsupported or missing checkpoint version");
    if (j.value("activation", "") != std::string("relu"))
      throw std::runtime_error("unsupported activation tag");
    MlpModel m;
    m.layer_dims = j.at("layer_dims").get<std::vector<std::size_t>>();
    if (m.layer_dims.size() < 2) throw std::runtime_error("layer_dims too short");
    const auto& jw = j.at("weights");
    const auto& jb = j.at("biases");
    if (jw.size() != m.layer_dims.size() - 1 || jb.size() != jw.size())
      throw std::runtime_error("layer count mismatch between header and payload");
    for (std::size_t l = 0; l + 1 < m.layer_dims.size(); ++l) {
      const auto flat = jw[l].get<std::vector<double>>();
      if (flat.size() != m.layer_dims[l] * m.layer_dims[l + 1])
        throw std::runtime_error("weight payload size mismatch at layer " + std::to_string(l));
      Matrix w(m.layer_dims[l + 1], m.layer_dims[l]);
      std::copy(flat.begin(), flat.end(), w.data());
      m.weights.push_back(std::move(w));
      m.biases.push_back(jb[l].get<std::vector<double>>());
      if (m.biases.back().size() != m.layer_dims[l + 1])
        throw std::runtime_error("bias payload size mismatch at layer " + std::to_string(l));
    }
    if (!m.all_finite()) throw std::runtime_error("checkpoint has non-finite parameters");
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("invalid checkpoint " + path + ": " + e.what());
  } catch (const std::runtime_error& e) {
    throw std::runtime_error("invalid checkpoint " + path + ": " + e.what());
  }
}

std::string model_digest(const MlpModel& model) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xff;
      h *= 0x100000001b3ULL;
    }
  };
  auto mix_double = [&](double d) {
    std::uint64_t bits;
    static_assert(sizeof(bits) == sizeof(d));
    std::memcpy(&bits, &d, sizeof(bits));
    mix(bits);
  };
  for (std::size_t d : model.layer_dims) mix(d);
  for (const auto& w : model.weights)
    for (std::size_t i = 0; i < w.rows() * w.cols(); ++i) mix_double(w.data()[i]);
  for (const auto& b : model.biases)
    for (double v : b) mix_double(v);

  static const char* hex = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = hex[h & 0xf];
    h >>= 4;
  }
  return out;
}

}  // namespace nhc
