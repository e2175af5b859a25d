#include "nhc/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "nhc/io_util.hpp"
#include "nhc/rng.hpp"

namespace nhc {

std::string to_string(Regime regime) {
  switch (regime) {
    case Regime::in_domain: return "in_domain";
    case Regime::shifted: return "shifted";
    case Regime::ood: return "ood";
  }
  return "in_domain";
}

std::optional<Regime> regime_from_string(std::string_view s) {
  if (s == "in_domain") return Regime::in_domain;
  if (s == "shifted") return Regime::shifted;
  if (s == "ood") return Regime::ood;
  return std::nullopt;
}

std::vector<std::vector<double>> circle_centers(int num_classes, double radius) {
  std::vector<std::vector<double>> centers;
  for (int c = 0; c < num_classes; ++c) {
    const double a = 2.0 * std::numbers::pi * c / num_classes;
    centers.push_back({radius * std::cos(a), radius * std::sin(a)});
  }
  return centers;
}

LabeledDataset make_blobs(int num_classes, int per_class,
                          std::vector<std::vector<double>> centers, double stddev,
                          std::uint64_t seed) {
  if (num_classes < 2) throw std::invalid_argument("make_blobs: need at least 2 classes");
  if (per_class < 1) throw std::invalid_argument("make_blobs: per_class must be >= 1");
  if (!(stddev > 0.0)) throw std::invalid_argument("make_blobs: stddev must be > 0");

  if (centers.empty()) centers = circle_centers(num_classes, 1.5);
  if (centers.size() != static_cast<std::size_t>(num_classes))
    throw std::invalid_argument("make_blobs: centers count does not match num_classes");
  const std::size_t dim = centers.front().size();
  for (const auto& c : centers)
    if (c.size() != dim) throw std::invalid_argument("make_blobs: ragged centers");
  for (std::size_t a = 0; a < centers.size(); ++a)
    for (std::size_t b = a + 1; b < centers.size(); ++b)
      if (centers[a] == centers[b])
        throw std::invalid_argument("make_blobs: duplicate class centers");

  LabeledDataset ds;
  ds.num_classes = num_classes;
  ds.regime = Regime::in_domain;
  ds.points = Matrix(static_cast<std::size_t>(num_classes) * per_class, dim);
  ds.labels.resize(ds.points.rows());

  std::size_t row = 0;
  for (int c = 0; c < num_classes; ++c) {
    rng::Stream stream(rng::derive_key(seed, static_cast<std::uint64_t>(c)));
    for (int i = 0; i < per_class; ++i, ++row) {
      for (std::size_t d = 0; d < dim; ++d)
        ds.points(row, d) = centers[c][d] + stddev * stream.next_gaussian();
      ds.labels[row] = c;
    }
  }
  return ds;
}

LabeledDataset make_image_blobs(int num_classes, int per_class, int side,
                                double jitter_std, std::uint64_t seed) {
  if (num_classes < 2) throw std::invalid_argument("make_image_blobs: need at least 2 classes");
  if (per_class < 1) throw std::invalid_argument("make_image_blobs: per_class must be >= 1");
  if (side < 2) throw std::invalid_argument("make_image_blobs: side must be >= 2");
  if (jitter_std < 0.0) throw std::invalid_argument("make_image_blobs: jitter_std must be >= 0");

  const std::size_t dim = static_cast<std::size_t>(side) * side;
  std::vector<std::vector<double>> templates;
  for (int c = 0; c < num_classes; ++c) {
    rng::Stream stream(rng::derive_key(seed, static_cast<std::uint64_t>(c), 1));
    std::vector<double> t(dim);
    for (double& px : t) px = (stream.next_u64() >> 63) ? 0.85 : 0.15;
    templates.push_back(std::move(t));
  }

  LabeledDataset ds;
  ds.num_classes = num_classes;
  ds.regime = Regime::in_domain;
  ds.points = Matrix(static_cast<std::size_t>(num_classes) * per_class, dim);
  ds.labels.resize(ds.points.rows());

  std::size_t row = 0;
  for (int c = 0; c < num_classes; ++c) {
    rng::Stream stream(rng::derive_key(seed, static_cast<std::uint64_t>(c), 2));
    for (int i = 0; i < per_class; ++i, ++row) {
      for (std::size_t d = 0; d < dim; ++d) {
        double v = templates[c][d] + jitter_std * stream.next_gaussian();
        v = v > 0.0 ? v : 0.0;
        ds.points(row, d) = v < 1.0 ? v : 1.0;
      }
      ds.labels[row] = c;
    }
  }
  return ds;
}

ShiftConfig default_shift_profile(const LabeledDataset& data) {
  double mean = 0.0;
  const std::size_t n = data.points.rows() * data.points.cols();
  for (std::size_t i = 0; i < n; ++i) mean += data.points.data()[i];
  if (n > 0) mean /= static_cast<double>(n);
  double var = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = data.points.data()[i] - mean;
    var += d * d;
  }
  if (n > 0) var /= static_cast<double>(n);

  ShiftConfig cfg;
  cfg.rotation_deg = 15.0;
  cfg.scale = 1.1;
  cfg.additive_noise_std = 0.1 * std::sqrt(var);
  return cfg;
}

namespace {

// Inverse-mapped affine warp about the image center with bilinear sampling
// and zero fill outside the frame.
void warp_image(const double* src, double* dst, int side, double rotation_deg,
                double scale, double tx, double ty) {
  const double theta = rotation_deg * std::numbers::pi / 180.0;
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  const double mid = (side - 1) / 2.0;

  auto sample = [&](int y, int x) -> double {
    if (y < 0 || y >= side || x < 0 || x >= side) return 0.0;
    return src[y * side + x];
  };

  for (int yo = 0; yo < side; ++yo) {
    for (int xo = 0; xo < side; ++xo) {
      // invert translate, then rotate/scale about the center
      const double xr = (xo - tx) - mid;
      const double yr = (yo - ty) - mid;
      const double xs = (c * xr + s * yr) / scale + mid;
      const double ys = (-s * xr + c * yr) / scale + mid;

      const double xf = std::floor(xs);
      const double yf = std::floor(ys);
      const int x0 = static_cast<int>(xf);
      const int y0 = static_cast<int>(yf);
      const double fx = xs - xf;
      const double fy = ys - yf;

      const double v = (1.0 - fy) * ((1.0 - fx) * sample(y0, x0) + fx * sample(y0, x0 + 1)) +
                       fy * ((1.0 - fx) * sample(y0 + 1, x0) + fx * sample(y0 + 1, x0 + 1));
      dst[yo * side + xo] = v;
    }
  }
}

}  // namespace

LabeledDataset apply_shift(const LabeledDataset& data, const ShiftConfig& cfg) {
  if (data.regime != Regime::in_domain)
    throw std::invalid_argument("apply_shift: expects an in_domain dataset");
  if (!(cfg.scale > 0.0)) throw std::invalid_argument("apply_shift: scale must be > 0");
  if (cfg.additive_noise_std < 0.0)
    throw std::invalid_argument("apply_shift: noise std must be >= 0");

  const std::size_t dim = data.dim();
  const bool image_mode = cfg.image_side > 0;
  if (image_mode && static_cast<std::size_t>(cfg.image_side) * cfg.image_side != dim)
    throw std::invalid_argument("apply_shift: image_side^2 does not match feature dim");
  if (!cfg.translate.empty() && cfg.translate.size() != 2 && cfg.translate.size() != dim)
    throw std::invalid_argument("apply_shift: translate must have size 2 or dim");

  LabeledDataset out = data;
  out.regime = Regime::shifted;

  const double theta = cfg.rotation_deg * std::numbers::pi / 180.0;
  const double rc = std::cos(theta);
  const double rs = std::sin(theta);

  std::vector<double> scratch(dim);
  for (std::size_t i = 0; i < data.size(); ++i) {
    double* p = out.points.row(i);
    if (image_mode) {
      const double tx = cfg.translate.empty() ? 0.0 : cfg.translate[0];
      const double ty = cfg.translate.size() >= 2 ? cfg.translate[1] : 0.0;
      warp_image(data.points.row(i), scratch.data(), cfg.image_side, cfg.rotation_deg,
                 cfg.scale, tx, ty);
      for (std::size_t d = 0; d < dim; ++d) p[d] = scratch[d];
    } else {
      for (std::size_t d = 0; d < dim; ++d) p[d] = p[d] * cfg.scale;
      if (dim >= 2) {
        const double x = p[0];
        const double y = p[1];
        p[0] = x * rc - y * rs;
        p[1] = x * rs + y * rc;
      }
      for (std::size_t d = 0; d < cfg.translate.size(); ++d) p[d] += cfg.translate[d];
    }

    if (cfg.additive_noise_std > 0.0) {
      rng::Stream stream(rng::derive_key(cfg.seed, i));
      for (std::size_t d = 0; d < dim; ++d)
        p[d] += cfg.additive_noise_std * stream.next_gaussian();
    }
    if (image_mode) {
      for (std::size_t d = 0; d < dim; ++d) {
        const double lo = p[d] > 0.0 ? p[d] : 0.0;
        p[d] = lo < 1.0 ? lo : 1.0;
      }
    }
  }
  return out;
}

std::vector<std::vector<double>> class_centroids(const LabeledDataset& data) {
  if (!data.has_labels() || data.size() == 0)
    throw std::invalid_argument("class_centroids: labeled, non-empty dataset required");
  std::vector<std::vector<double>> centroids(data.num_classes,
                                             std::vector<double>(data.dim(), 0.0));
  std::vector<std::size_t> counts(data.num_classes, 0);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const Label c = data.labels[i];
    counts[c]++;
    for (std::size_t d = 0; d < data.dim(); ++d) centroids[c][d] += data.points(i, d);
  }
  for (int c = 0; c < data.num_classes; ++c) {
    if (counts[c] == 0)
      throw std::invalid_argument("class_centroids: class " + std::to_string(c) +
                                  " has no points");
    for (double& v : centroids[c]) v /= static_cast<double>(counts[c]);
  }
  return centroids;
}

LabeledDataset make_ood(int num_points, const LabeledDataset& exclusion,
                        double min_distance, std::uint64_t seed, int num_clusters) {
  if (!(min_distance > 0.0)) throw std::invalid_argument("make_ood: min_distance must be > 0");
  if (num_points < 0) throw std::invalid_argument("make_ood: num_points must be >= 0");
  const auto centroids = class_centroids(exclusion);
  const std::size_t dim = exclusion.dim();

  // sampling box: exclusion bounding box padded by 1.5 * min_distance
  std::vector<double> lo(dim, std::numeric_limits<double>::infinity());
  std::vector<double> hi(dim, -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < exclusion.size(); ++i)
    for (std::size_t d = 0; d < dim; ++d) {
      lo[d] = std::min(lo[d], exclusion.points(i, d));
      hi[d] = std::max(hi[d], exclusion.points(i, d));
    }
  for (std::size_t d = 0; d < dim; ++d) {
    lo[d] -= 1.5 * min_distance;
    hi[d] += 1.5 * min_distance;
  }

  auto far_enough = [&](const std::vector<double>& p) {
    for (const auto& c : centroids) {
      double sq = 0.0;
      for (std::size_t d = 0; d < dim; ++d) {
        const double diff = p[d] - c[d];
        sq += diff * diff;
      }
      if (std::sqrt(sq) < min_distance) return false;
    }
    return true;
  };

  constexpr int kMaxAttempts = 10000;
  rng::Stream stream(rng::derive_key(seed, 0x00d));
  std::vector<double> candidate(dim);

  auto draw_uniform = [&]() {
    for (std::size_t d = 0; d < dim; ++d)
      candidate[d] = lo[d] + (hi[d] - lo[d]) * stream.next_unit();
  };

  std::vector<std::vector<double>> cluster_seeds;
  if (num_clusters > 0) {
    for (int c = 0; c < num_clusters; ++c) {
      int attempt = 0;
      for (;; ++attempt) {
        if (attempt >= kMaxAttempts)
          throw std::runtime_error("make_ood: no feasible cluster seed after bounded retries");
        draw_uniform();
        if (far_enough(candidate)) break;
      }
      cluster_seeds.push_back(candidate);
    }
  }

  LabeledDataset ds;
  ds.num_classes = exclusion.num_classes;
  ds.regime = Regime::ood;
  ds.points = Matrix(static_cast<std::size_t>(num_points), dim);

  const double cluster_spread = 0.25 * min_distance;
  for (int i = 0; i < num_points; ++i) {
    int attempt = 0;
    for (;; ++attempt) {
      if (attempt >= kMaxAttempts)
        throw std::runtime_error("make_ood: no feasible point after bounded retries");
      if (num_clusters > 0) {
        const auto& seed_pt = cluster_seeds[static_cast<std::size_t>(i) % cluster_seeds.size()];
        for (std::size_t d = 0; d < dim; ++d)
          candidate[d] = seed_pt[d] + cluster_spread * stream.next_gaussian();
      } else {
        draw_uniform();
      }
      if (far_enough(candidate)) break;
    }
    for (std::size_t d = 0; d < dim; ++d) ds.points(i, d) = candidate[d];
  }
  return ds;
}

void save_dataset_csv(const LabeledDataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open dataset file for writing: " + path);

  out << "# dim=" << data.dim() << " num_classes=" << data.num_classes
      << " regime=" << to_string(data.regime) << "\n";
  for (std::size_t d = 0; d < data.dim(); ++d) out << 'f' << d << ',';
  out << "label\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (std::size_t d = 0; d < data.dim(); ++d) out << format_double(data.points(i, d)) << ',';
    if (data.has_labels()) out << data.labels[i];
    out << '\n';
  }
  if (!out) throw std::runtime_error("failed writing dataset: " + path);
}

LabeledDataset load_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset file: " + path);

  std::string line;
  if (!std::getline(in, line) || line.rfind("# ", 0) != 0)
    throw std::runtime_error(path + ": missing dataset metadata line");

  std::size_t dim = 0;
  int num_classes = 0;
  std::optional<Regime> regime;
  {
    std::istringstream meta(line.substr(2));
    std::string token;
    while (meta >> token) {
      const auto eq = token.find('=');
      if (eq == std::string::npos)
        throw std::runtime_error(path + ": bad metadata token '" + token + "'");
      const std::string key = token.substr(0, eq);
      const std::string value = token.substr(eq + 1);
      if (key == "dim")
        dim = static_cast<std::size_t>(std::stoul(value));
      else if (key == "num_classes")
        num_classes = std::stoi(value);
      else if (key == "regime")
        regime = regime_from_string(value);
    }
  }
  if (dim == 0 || num_classes <= 0 || !regime)
    throw std::runtime_error(path + ": incomplete metadata (need dim, num_classes, regime)");

  if (!std::getline(in, line)) throw std::runtime_error(path + ": missing header line");

  std::vector<std::vector<double>> rows;
  std::vector<Label> labels;
  std::size_t line_no = 2;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != dim + 1)
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": expected " +
                               std::to_string(dim + 1) + " fields, got " +
                               std::to_string(fields.size()));
    std::vector<double> row(dim);
    for (std::size_t d = 0; d < dim; ++d)
      row[d] = parse_double(fields[d], path + ":" + std::to_string(line_no));
    rows.push_back(std::move(row));

    const auto label_field = fields.back();
    if (*regime == Regime::ood) {
      if (!label_field.empty())
        throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                 ": ood rows must have an empty label");
    } else {
      if (label_field.empty())
        throw std::runtime_error(path + ":" + std::to_string(line_no) + ": missing label");
      const long v = std::stol(std::string(label_field));
      if (v < 0 || v >= num_classes)
        throw std::runtime_error(path + ":" + std::to_string(line_no) + ": label out of range");
      labels.push_back(static_cast<Label>(v));
    }
  }

  LabeledDataset ds;
  ds.points = rows.empty() ? Matrix(0, dim) : Matrix::from_rows(rows);
  ds.labels = std::move(labels);
  ds.num_classes = num_classes;
  ds.regime = *regime;
  return ds;
}

}  // namespace nhc
