#include "ccbox/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "ccbox/constants.hpp"
#include "ccbox/error.hpp"

namespace ccbox {

namespace {

void require_same_shape(const SkyMap &a, const SkyMap &b, const char *what) {
  if (!a.same_shape(b)) {
    throw DimensionMismatchError(fmt::format("{}: {}x{} vs {}x{}", what, a.width(), a.height(), b.width(), b.height()));
  }
}

std::vector<double> gaussian_kernel(int size, double sigma) {
  std::vector<double> k(static_cast<std::size_t>(size));
  const double c = 0.5 * (size - 1);
  double sum = 0.0;
  for (int t = 0; t < size; ++t) {
    k[t] = std::exp(-((t - c) * (t - c)) / (2.0 * sigma * sigma));
    sum += k[t];
  }
  for (double &v : k) v /= sum;
  return k;
}

// 'valid' separable filtering: output is (w - n + 1) x (h - n + 1).
std::vector<double> filter_valid(const std::vector<double> &img, int w, int h, const std::vector<double> &k) {
  const int n = static_cast<int>(k.size());
  const int ow = w - n + 1;
  const int oh = h - n + 1;
  std::vector<double> rows(static_cast<std::size_t>(ow) * h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < ow; ++x) {
      double s = 0.0;
      for (int t = 0; t < n; ++t) s += k[t] * img[static_cast<std::size_t>(y) * w + x + t];
      rows[static_cast<std::size_t>(y) * ow + x] = s;
    }
  }
  std::vector<double> out(static_cast<std::size_t>(ow) * oh);
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      double s = 0.0;
      for (int t = 0; t < n; ++t) s += k[t] * rows[static_cast<std::size_t>(y + t) * ow + x];
      out[static_cast<std::size_t>(y) * ow + x] = s;
    }
  }
  return out;
}

}  // namespace

double mse(const SkyMap &a, const SkyMap &b) {
  require_same_shape(a, b, "mse");
  const auto da = a.data();
  const auto db = b.data();
  double sum = 0.0;
  for (std::size_t k = 0; k < da.size(); ++k) {
    const double d = static_cast<double>(da[k]) - static_cast<double>(db[k]);
    sum += d * d;
  }
  return sum / static_cast<double>(da.size());
}

double ssim(const SkyMap &a, const SkyMap &b, const SsimParams &params) {
  require_same_shape(a, b, "ssim");
  if (!(params.dynamic_range > 0.0)) throw ParameterError("ssim: dynamic range must be positive");
  if (params.window < 1 || params.window > a.width() || params.window > a.height()) {
    throw ParameterError("ssim: window larger than the image");
  }
  const int w = a.width();
  const int h = a.height();
  const std::size_t n = a.size();
  std::vector<double> x(n), y(n), xx(n), yy(n), xy(n);
  for (std::size_t k = 0; k < n; ++k) {
    x[k] = a.data()[k];
    y[k] = b.data()[k];
    xx[k] = x[k] * x[k];
    yy[k] = y[k] * y[k];
    xy[k] = x[k] * y[k];
  }
  const auto kernel = gaussian_kernel(params.window, params.sigma);
  const auto mx = filter_valid(x, w, h, kernel);
  const auto my = filter_valid(y, w, h, kernel);
  const auto mxx = filter_valid(xx, w, h, kernel);
  const auto myy = filter_valid(yy, w, h, kernel);
  const auto mxy = filter_valid(xy, w, h, kernel);

  const double c1 = (params.k1 * params.dynamic_range) * (params.k1 * params.dynamic_range);
  const double c2 = (params.k2 * params.dynamic_range) * (params.k2 * params.dynamic_range);
  double total = 0.0;
  for (std::size_t k = 0; k < mx.size(); ++k) {
    const double mu_xy = mx[k] * my[k];
    const double var_x = mxx[k] - mx[k] * mx[k];
    const double var_y = myy[k] - my[k] * my[k];
    const double cov = mxy[k] - mu_xy;
    total += ((2.0 * mu_xy + c1) * (2.0 * cov + c2)) /
             ((mx[k] * mx[k] + my[k] * my[k] + c1) * (var_x + var_y + c2));
  }
  return total / static_cast<double>(mx.size());
}

Vec3 weighted_centroid(const SkyMap &map) {
  double sw = 0.0;
  double su = 0.0;
  double sv = 0.0;
  for (int j = 0; j < map.height(); ++j) {
    for (int i = 0; i < map.width(); ++i) {
      const double w = map.at(i, j);
      if (!(w > 0.0) || !pixel_valid(i, j)) continue;
      sw += w;
      su += w * pixel_u(i);
      sv += w * pixel_v(j);
    }
  }
  if (!(sw > 0.0)) throw EmptyMapError("weighted centroid of an empty map");
  return direction_from_uv(su / sw, sv / sw);
}

double peak_offset_deg(const SkyMap &prediction, const Vec3 &truth) {
  return angle_between(weighted_centroid(prediction), truth) * kRadToDeg;
}

double sorted_quantile(std::span<const double> sorted, double p) {
  const double h = static_cast<double>(sorted.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = static_cast<std::size_t>(std::ceil(h));
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

Quartiles iqr(std::span<const double> values) {
  if (values.size() < 2) throw ParameterError("iqr: need at least two values");
  std::vector<double> s(values.begin(), values.end());
  std::sort(s.begin(), s.end());
  return {sorted_quantile(s, 0.25), sorted_quantile(s, 0.75)};
}

MetricSummary summarize(std::span<const double> values) {
  if (values.empty()) throw ParameterError("summarize: no values");
  std::vector<double> s(values.begin(), values.end());
  std::sort(s.begin(), s.end());
  MetricSummary out;
  out.count = s.size();
  out.mean = std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(s.size());
  if (s.size() > 1) {
    double ss = 0.0;
    for (double v : s) ss += (v - out.mean) * (v - out.mean);
    out.std = std::sqrt(ss / static_cast<double>(s.size() - 1));
  }
  out.q25 = sorted_quantile(s, 0.25);
  out.q75 = sorted_quantile(s, 0.75);
  out.median = sorted_quantile(s, 0.5);
  return out;
}

MetricReport summarize_runs(std::span<const RunMetrics> runs) {
  if (runs.empty()) throw ParameterError("summarize_runs: no runs");
  MetricReport report;
  report.runs.assign(runs.begin(), runs.end());
  std::sort(report.runs.begin(), report.runs.end(),
            [](const RunMetrics &a, const RunMetrics &b) { return a.run_id < b.run_id; });

  std::vector<double> m, s, o;
  for (const auto &r : report.runs) {
    m.push_back(r.mse);
    s.push_back(r.ssim);
    if (std::isfinite(r.peak_offset_deg)) {
      o.push_back(r.peak_offset_deg);
    } else {
      ++report.empty_predictions;
    }
  }
  report.mse = summarize(m);
  report.ssim = summarize(s);
  if (!o.empty()) {
    report.peak_offset_deg = summarize(o);
  } else {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    report.peak_offset_deg = {0, nan, nan, nan, nan, nan};
  }
  return report;
}

namespace {

nlohmann::ordered_json summary_json(const MetricSummary &s) {
  return {{"count", s.count}, {"mean", s.mean}, {"std", s.std}, {"q25", s.q25}, {"q75", s.q75}, {"median", s.median}};
}

}  // namespace

nlohmann::ordered_json to_json(const MetricReport &report) {
  nlohmann::ordered_json j;
  j["aggregate"] = {{"mse", summary_json(report.mse)},
                    {"ssim", summary_json(report.ssim)},
                    {"peak_offset_deg", summary_json(report.peak_offset_deg)}};
  j["empty_predictions"] = report.empty_predictions;
  auto runs = nlohmann::ordered_json::array();
  for (const auto &r : report.runs) {
    nlohmann::ordered_json row{{"run_id", r.run_id}, {"mse", r.mse}, {"ssim", r.ssim}};
    if (std::isfinite(r.peak_offset_deg)) {
      row["peak_offset_deg"] = r.peak_offset_deg;
    } else {
      row["peak_offset_deg"] = nullptr;
    }
    runs.push_back(std::move(row));
  }
  j["runs"] = std::move(runs);
  return j;
}

std::string format_table(const MetricReport &report) {
  std::size_t id_width = 6;
  for (const auto &r : report.runs) id_width = std::max(id_width, r.run_id.size());
  std::string out = fmt::format("{:<{}}  {:>12}  {:>9}  {:>11}\n", "run_id", id_width, "mse", "ssim", "offset_deg");
  for (const auto &r : report.runs) {
    out += fmt::format("{:<{}}  {:>12.6e}  {:>9.6f}  {:>11.4f}\n", r.run_id, id_width, r.mse, r.ssim,
                       r.peak_offset_deg);
  }
  out += "\n";
  out += fmt::format("{:<8}  {:>12}  {:>12}  {:>12}  {:>12}  {:>12}\n", "metric", "mean", "std", "q25", "q75",
                     "median");
  auto row = [&](const char *name, const MetricSummary &s) {
    out += fmt::format("{:<8}  {:>12.6g}  {:>12.6g}  {:>12.6g}  {:>12.6g}  {:>12.6g}\n", name, s.mean, s.std, s.q25,
                       s.q75, s.median);
  };
  row("mse", report.mse);
  row("ssim", report.ssim);
  row("offset", report.peak_offset_deg);
  if (report.empty_predictions > 0) {
    out += fmt::format("({} empty predictions excluded from offset statistics)\n", report.empty_predictions);
  }
  return out;
}

}  // namespace ccbox
