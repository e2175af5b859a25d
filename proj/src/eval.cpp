#include "nhc/eval.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <ostream>
#include <stdexcept>

#include "json.hpp"
#include "nhc/io_util.hpp"

namespace nhc {

ThresholdCurve threshold_accuracy_curve(std::span<const Label> truths,
                                        std::span<const Label> preds,
                                        std::span<const ConfidenceScore> confidences,
                                        std::span<const double> thresholds) {
  if (truths.size() != preds.size() || truths.size() != confidences.size())
    throw std::invalid_argument("threshold_accuracy_curve: length mismatch");
  if (truths.empty()) throw std::invalid_argument("threshold_accuracy_curve: empty input");
  if (thresholds.empty()) throw std::invalid_argument("threshold_accuracy_curve: no thresholds");
  for (std::size_t i = 0; i + 1 < thresholds.size(); ++i)
    if (!(thresholds[i] < thresholds[i + 1]))
      throw std::invalid_argument("threshold_accuracy_curve: thresholds must strictly increase");
  if (thresholds.front() < 0.0 || thresholds.back() > 1.0)
    throw std::invalid_argument("threshold_accuracy_curve: thresholds must lie in [0, 1]");

  ThresholdCurve curve;
  for (double t : thresholds) {
    ThresholdCurveRow row;
    row.threshold = t;
    std::size_t kept = 0;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < truths.size(); ++i) {
      if (confidences[i].value >= t) {
        ++kept;
        if (preds[i] == truths[i]) ++correct;
      }
    }
    row.kept_count = kept;
    if (kept > 0) row.accuracy = static_cast<double>(correct) / static_cast<double>(kept);
    curve.rows.push_back(row);
  }
  return curve;
}

EmpiricalCdf empirical_cdf(std::span<const ConfidenceScore> confidences) {
  if (confidences.empty()) throw std::invalid_argument("empirical_cdf: empty input");
  std::map<double, std::size_t> counts;
  for (const auto& s : confidences) counts[s.value]++;

  EmpiricalCdf cdf;
  std::size_t running = 0;
  for (const auto& [value, count] : counts) {
    running += count;
    cdf.rows.push_back(
        {value, static_cast<double>(running) / static_cast<double>(confidences.size())});
  }
  return cdf;
}

double cdf_quantile(const EmpiricalCdf& cdf, double q) {
  if (cdf.rows.empty()) throw std::invalid_argument("cdf_quantile: empty cdf");
  if (q < 0.0 || q > 1.0) throw std::invalid_argument("cdf_quantile: q must be in [0, 1]");
  for (const auto& row : cdf.rows)
    if (row.cumulative_fraction >= q) return row.confidence;
  return cdf.rows.back().confidence;
}

double accuracy(std::span<const Label> truths, std::span<const Label> preds) {
  if (truths.size() != preds.size() || truths.empty())
    throw std::invalid_argument("accuracy: bad input lengths");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < truths.size(); ++i)
    if (truths[i] == preds[i]) ++correct;
  return static_cast<double>(correct) / static_cast<double>(truths.size());
}

std::vector<double> default_threshold_grid() {
  std::vector<double> grid;
  for (int k = 0; k <= 20; ++k) grid.push_back(k / 20.0);
  return grid;
}

void write_threshold_curve_csv(std::ostream& out, const ThresholdCurve& curve) {
  out << "threshold,accuracy,kept_count\n";
  for (const auto& row : curve.rows) {
    out << format_double(row.threshold) << ',';
    if (row.accuracy) out << format_double(*row.accuracy);
    out << ',' << row.kept_count << '\n';
  }
}

void write_cdf_csv(std::ostream& out, const EmpiricalCdf& cdf) {
  out << "confidence,cumulative_fraction\n";
  for (const auto& row : cdf.rows)
    out << format_double(row.confidence) << ',' << format_double(row.cumulative_fraction)
        << '\n';
}

void write_sweep_csv(std::ostream& out, std::span<const SweepExportRow> rows) {
  out << "epsilon,mean_confidence,accuracy,estimator,strength\n";
  for (const auto& r : rows)
    out << format_double(r.row.epsilon) << ',' << format_double(r.row.mean_confidence) << ','
        << format_double(r.row.accuracy) << ',' << r.estimator << ','
        << format_double(r.strength) << '\n';
}

namespace {

nlohmann::json metadata_json(const ExportMetadata& meta) {
  nlohmann::json j;
  j["seed"] = meta.seed;
  j["model_digest"] = meta.model_digest;
  j["spec_digests"] = meta.spec_digests;
  return j;
}

}  // namespace

std::string threshold_curve_json(const ThresholdCurve& curve, const ExportMetadata& meta) {
  nlohmann::json j;
  j["metadata"] = metadata_json(meta);
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : curve.rows) {
    nlohmann::json r;
    r["threshold"] = row.threshold;
    if (row.accuracy)
      r["accuracy"] = *row.accuracy;
    else
      r["accuracy"] = nullptr;
    r["kept_count"] = row.kept_count;
    rows.push_back(std::move(r));
  }
  j["rows"] = std::move(rows);
  return j.dump(2) + "\n";
}

std::string cdf_json(const EmpiricalCdf& cdf, const ExportMetadata& meta) {
  nlohmann::json j;
  j["metadata"] = metadata_json(meta);
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : cdf.rows)
    rows.push_back({{"confidence", row.confidence},
                    {"cumulative_fraction", row.cumulative_fraction}});
  j["rows"] = std::move(rows);
  return j.dump(2) + "\n";
}

std::string sweep_json(std::span<const SweepExportRow> rows, const ExportMetadata& meta) {
  nlohmann::json j;
  j["metadata"] = metadata_json(meta);
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json e;
    e["epsilon"] = r.row.epsilon;
    e["mean_confidence"] = r.row.mean_confidence;
    e["accuracy"] = r.row.accuracy;
    e["estimator"] = r.estimator;
    e["strength"] = r.strength;
    e["histogram"] = r.row.histogram;
    out.push_back(std::move(e));
  }
  j["rows"] = std::move(out);
  return j.dump(2) + "\n";
}

ThresholdCurve parse_threshold_curve_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  ThresholdCurve curve;
  for (const auto& r : j.at("rows")) {
    ThresholdCurveRow row;
    row.threshold = r.at("threshold").get<double>();
    if (!r.at("accuracy").is_null()) row.accuracy = r.at("accuracy").get<double>();
    row.kept_count = r.at("kept_count").get<std::size_t>();
    curve.rows.push_back(row);
  }
  return curve;
}

EmpiricalCdf parse_cdf_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  EmpiricalCdf cdf;
  for (const auto& r : j.at("rows"))
    cdf.rows.push_back(
        {r.at("confidence").get<double>(), r.at("cumulative_fraction").get<double>()});
  return cdf;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << content;
  if (!out) throw std::runtime_error("failed writing: " + path);
}

}  // namespace nhc
