#include <sstream>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "nhc/eval.hpp"

using namespace nhc;

namespace {

std::vector<ConfidenceScore> scores_from(const std::vector<std::pair<int, int>>& fractions) {
  std::vector<ConfidenceScore> out;
  for (auto [count, denom] : fractions)
    out.push_back(make_score(count, denom, EstimatorKind::nhc, "test"));
  return out;
}

}  // namespace

TEST_CASE("threshold curve follows the keep-and-count definition") {
  const std::vector<Label> truths = {0, 1, 0};
  const std::vector<Label> preds = {0, 1, 1};
  const auto confidences = scores_from({{10, 10}, {5, 10}, {2, 10}});
  const std::vector<double> thresholds = {0.0, 0.3};

  const auto curve = threshold_accuracy_curve(truths, preds, confidences, thresholds);
  REQUIRE(curve.rows.size() == 2);
  CHECK(curve.rows[0].threshold == 0.0);
  CHECK(curve.rows[0].kept_count == 3);
  CHECK(*curve.rows[0].accuracy == doctest::Approx(2.0 / 3.0));
  CHECK(curve.rows[1].kept_count == 2);
  CHECK(*curve.rows[1].accuracy == 1.0);
}

TEST_CASE("all-correct predictions give accuracy one at every non-empty threshold") {
  const std::vector<Label> truths = {0, 1, 2};
  const std::vector<Label> preds = {0, 1, 2};
  const auto confidences = scores_from({{7, 7}, {3, 7}, {1, 7}});
  const auto curve =
      threshold_accuracy_curve(truths, preds, confidences, default_threshold_grid());
  for (const auto& row : curve.rows)
    if (row.accuracy) CHECK(*row.accuracy == 1.0);
}

TEST_CASE("the zero threshold equals the plain accuracy and keeps everything") {
  const std::vector<Label> truths = {0, 1, 1, 0, 1};
  const std::vector<Label> preds = {0, 0, 1, 0, 1};
  const auto confidences = scores_from({{0, 7}, {1, 7}, {7, 7}, {3, 7}, {5, 7}});
  const auto curve =
      threshold_accuracy_curve(truths, preds, confidences, default_threshold_grid());
  CHECK(curve.rows[0].kept_count == 5);
  CHECK(*curve.rows[0].accuracy == accuracy(truths, preds));
}

TEST_CASE("kept counts never increase along the threshold axis") {
  const std::vector<Label> truths = {0, 1, 0, 1, 0, 1};
  const std::vector<Label> preds = {0, 1, 1, 1, 0, 0};
  const auto confidences =
      scores_from({{0, 5}, {1, 5}, {2, 5}, {3, 5}, {4, 5}, {5, 5}});
  const auto curve =
      threshold_accuracy_curve(truths, preds, confidences, default_threshold_grid());
  for (std::size_t i = 1; i < curve.rows.size(); ++i)
    CHECK(curve.rows[i].kept_count <= curve.rows[i - 1].kept_count);
}

TEST_CASE("unreachable thresholds carry the empty marker, not a number") {
  const std::vector<Label> truths = {0};
  const std::vector<Label> preds = {0};
  const auto confidences = scores_from({{1, 2}});
  const std::vector<double> thresholds = {0.0, 0.9};
  const auto curve = threshold_accuracy_curve(truths, preds, confidences, thresholds);
  CHECK(curve.rows[1].kept_count == 0);
  CHECK_FALSE(curve.rows[1].accuracy.has_value());

  std::ostringstream out;
  write_threshold_curve_csv(out, curve);
  CHECK(out.str() == "threshold,accuracy,kept_count\n0,1,1\n0.9,,0\n");
}

TEST_CASE("threshold curve validates its inputs") {
  const std::vector<Label> truths = {0, 1};
  const std::vector<Label> preds = {0};
  const auto confidences = scores_from({{1, 2}, {2, 2}});
  const std::vector<double> grid = {0.0, 0.5};
  CHECK_THROWS_AS(threshold_accuracy_curve(truths, preds, confidences, grid),
                  std::invalid_argument);

  const std::vector<Label> both = {0, 1};
  const std::vector<double> unsorted = {0.5, 0.2};
  CHECK_THROWS_AS(threshold_accuracy_curve(both, both, confidences, unsorted),
                  std::invalid_argument);
  const std::vector<double> outside = {0.0, 1.5};
  CHECK_THROWS_AS(threshold_accuracy_curve(both, both, confidences, outside),
                  std::invalid_argument);
}

TEST_CASE("cdf of identical scores is a single full step") {
  const auto cdf = empirical_cdf(scores_from({{0, 5}, {0, 5}, {0, 5}}));
  REQUIRE(cdf.rows.size() == 1);
  CHECK(cdf.rows[0].confidence == 0.0);
  CHECK(cdf.rows[0].cumulative_fraction == 1.0);
}

TEST_CASE("cdf of a half-half mix steps at both values") {
  const auto cdf = empirical_cdf(scores_from({{0, 1}, {1, 1}, {0, 1}, {1, 1}}));
  REQUIRE(cdf.rows.size() == 2);
  CHECK(cdf.rows[0].confidence == 0.0);
  CHECK(cdf.rows[0].cumulative_fraction == 0.5);
  CHECK(cdf.rows[1].confidence == 1.0);
  CHECK(cdf.rows[1].cumulative_fraction == 1.0);
}

TEST_CASE("cdf is non-decreasing and ends at exactly one") {
  const auto cdf =
      empirical_cdf(scores_from({{3, 7}, {1, 7}, {7, 7}, {1, 7}, {0, 7}, {5, 7}}));
  double prev = 0.0;
  for (const auto& row : cdf.rows) {
    CHECK(row.cumulative_fraction >= prev);
    prev = row.cumulative_fraction;
  }
  CHECK(prev == 1.0);
  CHECK_THROWS_AS(empirical_cdf({}), std::invalid_argument);
}

TEST_CASE("cdf quantiles pick the smallest qualifying value") {
  const auto cdf = empirical_cdf(scores_from({{0, 4}, {1, 4}, {2, 4}, {4, 4}}));
  CHECK(cdf_quantile(cdf, 0.25) == 0.0);
  CHECK(cdf_quantile(cdf, 0.5) == 0.25);
  CHECK(cdf_quantile(cdf, 1.0) == 1.0);
}

TEST_CASE("csv exports carry the declared headers and are deterministic") {
  const auto cdf = empirical_cdf(scores_from({{1, 2}, {2, 2}}));
  std::ostringstream a;
  std::ostringstream b;
  write_cdf_csv(a, cdf);
  write_cdf_csv(b, cdf);
  CHECK(a.str() == b.str());
  CHECK(a.str() == "confidence,cumulative_fraction\n0.5,0.5\n1,1\n");

  std::ostringstream empty_curve;
  write_threshold_curve_csv(empty_curve, ThresholdCurve{});
  CHECK(empty_curve.str() == "threshold,accuracy,kept_count\n");

  SweepRow row;
  row.epsilon = 0.1;
  row.mean_confidence = 0.75;
  row.accuracy = 0.5;
  const std::vector<SweepExportRow> rows = {{row, "nhc", 0.4}};
  std::ostringstream sweep;
  write_sweep_csv(sweep, rows);
  CHECK(sweep.str() ==
        "epsilon,mean_confidence,accuracy,estimator,strength\n0.1,0.75,0.5,nhc,0.4\n");
}

TEST_CASE("json exports round-trip curves exactly") {
  ThresholdCurve curve;
  curve.rows.push_back({0.0, 0.875, 40});
  curve.rows.push_back({0.5, std::nullopt, 0});
  curve.rows.push_back({0.75, 1.0, 12});
  ExportMetadata meta;
  meta.seed = 99;
  meta.model_digest = "abc123";
  const std::string text = threshold_curve_json(curve, meta);
  CHECK(parse_threshold_curve_json(text) == curve);

  const auto cdf = empirical_cdf(scores_from({{1, 3}, {2, 3}, {3, 3}}));
  CHECK(parse_cdf_json(cdf_json(cdf, meta)) == cdf);
}
