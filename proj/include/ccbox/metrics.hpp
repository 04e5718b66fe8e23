#pragma once

#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "ccbox/skymap.hpp"

namespace ccbox {

/// Mean over all pixels of (a - b)^2. Throws DimensionMismatchError.
double mse(const SkyMap &a, const SkyMap &b);

/// Windowed SSIM parameters. Defaults are the canonical Gaussian window
/// (11x11, sigma 1.5) with K1 = 0.01, K2 = 0.03 and unit dynamic range.
struct SsimParams {
  int window{11};
  double sigma{1.5};
  double k1{0.01};
  double k2{0.03};
  double dynamic_range{1.0};
};

/// Mean local SSIM over every window position fully inside the image.
/// Throws DimensionMismatchError or ParameterError.
double ssim(const SkyMap &a, const SkyMap &b, const SsimParams &params = {});

/// Intensity-weighted centroid in (u, v) mapped back to a unit direction.
/// Throws EmptyMapError when no pixel is positive.
Vec3 weighted_centroid(const SkyMap &map);

/// Angle (deg) between the centroid of `prediction` and `truth`.
double peak_offset_deg(const SkyMap &prediction, const Vec3 &truth);

struct Quartiles {
  double q25;
  double q75;
};

/// Linear-interpolation quantile of already sorted values, h = (n - 1) p.
double sorted_quantile(std::span<const double> sorted, double p);

/// 25th and 75th percentiles. Throws ParameterError for fewer than 2 values.
Quartiles iqr(std::span<const double> values);

struct MetricSummary {
  std::size_t count{0};
  double mean{0.0};
  double std{0.0};  // sample (n - 1) standard deviation
  double q25{0.0};
  double q75{0.0};
  double median{0.0};
};

/// Summary of one metric; permutation invariant. Throws ParameterError when
/// empty.
MetricSummary summarize(std::span<const double> values);

/// Metrics of one evaluated run. peak_offset_deg is NaN when the prediction
/// was an empty map.
struct RunMetrics {
  std::string run_id;
  double mse{0.0};
  double ssim{0.0};
  double peak_offset_deg{0.0};
};

struct MetricReport {
  std::vector<RunMetrics> runs;  // sorted by run id
  MetricSummary mse;
  MetricSummary ssim;
  MetricSummary peak_offset_deg;
  std::size_t empty_predictions{0};
};

/// Aggregate per-run metrics. Throws ParameterError for an empty input.
MetricReport summarize_runs(std::span<const RunMetrics> runs);

nlohmann::ordered_json to_json(const MetricReport &report);
/// Aligned-column text table: one row per run, then the aggregates.
std::string format_table(const MetricReport &report);

}  // namespace ccbox
