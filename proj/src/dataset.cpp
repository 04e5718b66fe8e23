#include "ccbox/dataset.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

#include <fmt/format.h>

#include "ccbox/error.hpp"
#include "ccbox/sampling.hpp"

namespace ccbox {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

std::string_view to_string(Split split) {
  switch (split) {
    case Split::train:
      return "train";
    case Split::val:
      return "val";
    case Split::test:
      return "test";
  }
  return "?";
}

Split parse_split(std::string_view text) {
  if (text == "train") return Split::train;
  if (text == "val") return Split::val;
  if (text == "test") return Split::test;
  throw ParameterError(fmt::format("unknown split '{}' (train|val|test)", text));
}

SplitCounts split_counts(int runs) {
  if (runs < 1) throw ParameterError("split_counts: need at least one run");
  const int train = static_cast<int>(std::lround(0.64 * runs));
  const int val = std::min(static_cast<int>(std::lround(0.16 * runs)), runs - train);
  return {train, val, runs - train - val};
}

Split split_of(int index, const SplitCounts &counts) {
  if (index < 0 || index >= counts.train + counts.val + counts.test) throw ParameterError("split_of: index out of range");
  if (index < counts.train) return Split::train;
  if (index < counts.train + counts.val) return Split::val;
  return Split::test;
}

std::string run_id(double duration_s, int index) {
  std::string d = fmt::format("{}", duration_s);
  std::replace(d.begin(), d.end(), '.', 'p');
  return fmt::format("d{}_r{:04d}", d, index);
}

std::uint64_t run_seed(std::uint64_t master, double duration_s, int index) {
  const auto duration_key = static_cast<std::uint64_t>(std::llround(duration_s * 1000.0));
  return Rng::derive_seed(Rng::derive_seed(master, duration_key), static_cast<std::uint64_t>(index));
}

std::uint64_t truth_seed(std::uint64_t master, int index) {
  return Rng::derive_seed(Rng::derive_seed(master, kTruthStream), static_cast<std::uint64_t>(index));
}

SkyMap make_truth_map(const Vec3 &direction, double sigma_px) {
  if (!(direction.z > 0.0)) throw ParameterError("make_truth_map: direction below the horizon");
  if (!(sigma_px >= 0.0) || !std::isfinite(sigma_px)) throw ParameterError("make_truth_map: bad sigma");
  const Vec3 d = normalized(direction);
  const auto [ci, cj] = direction_to_pixel_coords(d);

  SkyMap map;
  if (sigma_px > 0.0) {
    const double inv = 1.0 / (2.0 * sigma_px * sigma_px);
    const int reach = static_cast<int>(std::ceil(10.0 * sigma_px)) + 1;
    const int i0 = std::max(0, static_cast<int>(std::floor(ci)) - reach);
    const int i1 = std::min(map.width() - 1, static_cast<int>(std::ceil(ci)) + reach);
    const int j0 = std::max(0, static_cast<int>(std::floor(cj)) - reach);
    const int j1 = std::min(map.height() - 1, static_cast<int>(std::ceil(cj)) + reach);
    for (int j = j0; j <= j1; ++j) {
      for (int i = i0; i <= i1; ++i) {
        if (!pixel_valid(i, j)) continue;
        const double r2 = (i - ci) * (i - ci) + (j - cj) * (j - cj);
        map.at(i, j) = static_cast<float>(std::exp(-r2 * inv));
      }
    }
    if (map.max_value() > 0.0f) return normalized_to_max(map);
  }

  // Delta: the containing pixel, or the nearest valid one at the disk rim.
  std::optional<PixelIndex> px = direction_to_pixel(d);
  if (!px) {
    double best = INFINITY;
    for (int j = 0; j < map.height(); ++j) {
      for (int i = 0; i < map.width(); ++i) {
        const double r2 = (i - ci) * (i - ci) + (j - cj) * (j - cj);
        if (pixel_valid(i, j) && r2 < best) {
          best = r2;
          px = PixelIndex{i, j};
        }
      }
    }
  }
  map = SkyMap();
  map.at(px->i, px->j) = 1.0f;
  return map;
}

namespace {

ordered_json origin_counts(const std::array<std::uint64_t, kSourceKindCount> &counts) {
  ordered_json j = ordered_json::object();
  for (std::size_t k = 0; k < kSourceKindCount; ++k) j[std::string(to_string(static_cast<SourceKind>(k)))] = counts[k];
  return j;
}

std::array<std::uint64_t, kSourceKindCount> origin_counts_from(const json &j) {
  std::array<std::uint64_t, kSourceKindCount> out{};
  for (std::size_t k = 0; k < kSourceKindCount; ++k) {
    out[k] = j.at(std::string(to_string(static_cast<SourceKind>(k)))).get<std::uint64_t>();
  }
  return out;
}

void write_text(const fs::path &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(fmt::format("cannot open {} for writing", path.string()));
  out << text;
  out.close();
  if (!out) throw IoError(fmt::format("write failed: {}", path.string()));
}

json read_json(const fs::path &path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open {}", path.string()));
  try {
    return json::parse(in);
  } catch (const json::exception &e) {
    throw FormatError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

}  // namespace

ordered_json to_json(const RunTruth &t) {
  ordered_json j;
  j["run_id"] = t.run_id;
  j["split"] = std::string(to_string(t.split));
  j["direction"] = {t.direction.x, t.direction.y, t.direction.z};
  j["photon_index"] = t.photon_index;
  j["duration_s"] = t.duration_s;
  j["flux"] = t.flux;
  j["seed"] = t.seed;
  j["background"] = t.background;
  j["event_count"] = t.event_count;
  j["generated_photons"] = origin_counts(t.generated_photons);
  j["events_by_origin"] = origin_counts(t.events_by_origin);
  return j;
}

RunTruth truth_from_json(const json &j) {
  try {
    RunTruth t;
    t.run_id = j.at("run_id").get<std::string>();
    t.split = parse_split(j.at("split").get<std::string>());
    const auto d = j.at("direction").get<std::vector<double>>();
    if (d.size() != 3) throw FormatError("truth: direction must have 3 components");
    t.direction = {d[0], d[1], d[2]};
    t.photon_index = j.at("photon_index").get<double>();
    t.duration_s = j.at("duration_s").get<double>();
    t.flux = j.at("flux").get<double>();
    t.seed = j.at("seed").get<std::uint64_t>();
    t.background = j.at("background").get<bool>();
    t.event_count = j.at("event_count").get<std::size_t>();
    t.generated_photons = origin_counts_from(j.at("generated_photons"));
    t.events_by_origin = origin_counts_from(j.at("events_by_origin"));
    return t;
  } catch (const json::exception &e) {
    throw FormatError(fmt::format("truth: {}", e.what()));
  } catch (const ParameterError &e) {
    throw FormatError(fmt::format("truth: {}", e.what()));
  }
}

RunTruth read_truth(const fs::path &path) { return truth_from_json(read_json(path)); }

DatasetContext::DatasetContext(SimulationConfig cfg, MaterialLibrary mats)
    : config(std::move(cfg)),
      geometry(config.geometry),
      materials(std::move(mats)),
      bounds(NormalizationBounds::for_geometry(geometry, config.e_max_kev)) {
  config.validate();
}

ReconstructionConfig DatasetContext::reconstruction_config() const {
  ReconstructionConfig rc;
  rc.thresholds = config.thresholds;
  rc.cone_width_rad = config.cone_sigma_deg * kDegToRad;
  rc.jobs = 1;
  return rc;
}

GeneratedRun generate_run(const DatasetContext &ctx, double duration_s, int index) {
  const SimulationConfig &cfg = ctx.config;
  const std::uint64_t seed = run_seed(cfg.seed, duration_s, index);
  Rng truth_rng = Rng::derive(truth_seed(cfg.seed, index), 0);

  SourceSpec grb;
  grb.kind = SourceKind::grb_point;
  grb.flux = cfg.flux;
  grb.direction = sample_source_direction(cfg.fov_half_angle_deg, truth_rng);
  grb.photon_index = truth_rng.uniform(cfg.photon_index_min, cfg.photon_index_max);
  grb.duration_s = duration_s;
  grb.e_min_kev = cfg.e_min_kev;
  grb.e_max_kev = cfg.e_max_kev;
  grb.fov_half_angle_deg = cfg.fov_half_angle_deg;

  RunConfig rc;
  rc.sources.push_back(grb);
  if (cfg.background.enabled) {
    SourceSpec cxb = grb;
    cxb.kind = SourceKind::cxb;
    cxb.flux = cfg.background.cxb_flux;
    cxb.photon_index = cfg.background.cxb_index;
    SourceSpec albedo = grb;
    albedo.kind = SourceKind::albedo;
    albedo.flux = cfg.background.albedo_flux;
    albedo.photon_index = cfg.background.albedo_index;
    if (cxb.flux > 0.0) rc.sources.push_back(cxb);
    if (albedo.flux > 0.0) rc.sources.push_back(albedo);
  }
  rc.resolution = cfg.resolution;
  rc.trigger_kev = cfg.thresholds.trigger_kev;
  rc.generation_radius_mm = cfg.generation_radius_mm;
  rc.seed = Rng::derive_seed(seed, 1);

  GeneratedRun run;
  run.record = simulate_run(rc, ctx.geometry, ctx.materials);

  run.stored_events.reserve(run.record.events.size());
  std::vector<EventRecord> decoded;
  decoded.reserve(run.record.events.size());
  for (const auto &e : run.record.events) {
    run.stored_events.push_back(encode_event(e, ctx.bounds));
    decoded.push_back(decode_event(run.stored_events.back(), ctx.bounds));
  }
  auto maps = reconstruct(decoded, ReconMode::both, ctx.reconstruction_config(), ctx.geometry);
  run.compton = std::move(maps.compton);
  run.pinhole = std::move(maps.pinhole);
  run.target = make_truth_map(grb.direction, cfg.truth_sigma_px);

  RunTruth &t = run.truth;
  t.run_id = run_id(duration_s, index);
  t.split = split_of(index, split_counts(cfg.runs_per_duration));
  t.direction = grb.direction;
  t.photon_index = grb.photon_index;
  t.duration_s = duration_s;
  t.flux = cfg.flux;
  t.seed = seed;
  t.background = rc.sources.size() > 1;
  t.event_count = run.record.events.size();
  t.generated_photons = run.record.generated_photons;
  for (SourceKind k : run.record.event_origin) ++t.events_by_origin[static_cast<std::size_t>(k)];
  return run;
}

ordered_json to_json(const DatasetManifest &m) {
  ordered_json j;
  j["format_version"] = m.format_version;
  json cfg = m.config;
  j["config"] = ordered_json::parse(cfg.dump());
  auto runs = ordered_json::array();
  for (const auto &r : m.runs) {
    runs.push_back({{"id", r.id},
                    {"split", std::string(to_string(r.split))},
                    {"duration_s", r.duration_s},
                    {"index", r.index},
                    {"seed", r.seed},
                    {"dir", r.dir}});
  }
  j["runs"] = std::move(runs);
  return j;
}

DatasetManifest manifest_from_json(const json &j) {
  try {
    DatasetManifest m;
    m.format_version = j.at("format_version").get<int>();
    if (m.format_version != kDatasetFormatVersion) {
      throw FormatError(fmt::format("manifest: unsupported format version {}", m.format_version));
    }
    m.config = j.at("config").get<SimulationConfig>();
    for (const auto &r : j.at("runs")) {
      ManifestEntry e;
      e.id = r.at("id").get<std::string>();
      e.split = parse_split(r.at("split").get<std::string>());
      e.duration_s = r.at("duration_s").get<double>();
      e.index = r.at("index").get<int>();
      e.seed = r.at("seed").get<std::uint64_t>();
      e.dir = r.at("dir").get<std::string>();
      m.runs.push_back(std::move(e));
    }
    return m;
  } catch (const json::exception &e) {
    throw FormatError(fmt::format("manifest: {}", e.what()));
  } catch (const ParameterError &e) {
    throw FormatError(fmt::format("manifest: {}", e.what()));
  }
}

DatasetManifest read_manifest(const fs::path &dataset_dir) {
  const fs::path path = dataset_dir / kManifestFile;
  if (!fs::is_regular_file(path)) throw IoError(fmt::format("no dataset manifest at {}", path.string()));
  return manifest_from_json(read_json(path));
}

int resolve_jobs(int jobs) {
  if (jobs < 0) throw ParameterError("jobs must be >= 0");
  if (jobs > 0) return jobs;
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)> &task) {
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(resolve_jobs(jobs)), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        while (!failed.load()) {
          const std::size_t i = next.fetch_add(1);
          if (i >= count) return;
          try {
            task(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
            failed.store(true);
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

namespace {

void prepare_output(const fs::path &out) {
  if (!fs::exists(out)) {
    fs::create_directories(out);
    return;
  }
  if (!fs::is_directory(out)) throw ParameterError(fmt::format("{} is not a directory", out.string()));
  if (fs::is_empty(out)) return;
  if (!fs::exists(out / kManifestFile)) {
    throw ParameterError(fmt::format("{} is not empty and holds no dataset; refusing to overwrite", out.string()));
  }
  fs::remove(out / kManifestFile);
  fs::remove_all(out / "runs");
}

}  // namespace

DatasetManifest generate_dataset(const SimulationConfig &config, const MaterialLibrary &materials, const fs::path &out,
                                 int jobs) {
  const DatasetContext ctx(config, materials);
  prepare_output(out);

  DatasetManifest manifest;
  manifest.config = config;
  for (double d : config.durations_s) {
    for (int i = 0; i < config.runs_per_duration; ++i) {
      ManifestEntry e;
      e.id = run_id(d, i);
      e.split = split_of(i, split_counts(config.runs_per_duration));
      e.duration_s = d;
      e.index = i;
      e.seed = run_seed(config.seed, d, i);
      e.dir = (fs::path("runs") / std::string(to_string(e.split)) / e.id).generic_string();
      manifest.runs.push_back(std::move(e));
    }
  }

  try {
    parallel_for(manifest.runs.size(), jobs, [&](std::size_t k) {
      const ManifestEntry &e = manifest.runs[k];
      const GeneratedRun run = generate_run(ctx, e.duration_s, e.index);
      const fs::path dir = out / e.dir;
      fs::create_directories(dir);
      write_events(dir / kEventsFile, run.stored_events);
      write_text(dir / kTruthFile, to_json(run.truth).dump(2) + "\n");
      write_map(dir / kComptonFile, run.compton);
      write_map(dir / kPinholeFile, run.pinhole);
      write_map(dir / kTargetFile, run.target);
    });
    write_text(out / kManifestFile, to_json(manifest).dump(2) + "\n");
  } catch (...) {
    std::error_code ec;
    fs::remove_all(out / "runs", ec);
    fs::remove(out / kManifestFile, ec);
    throw;
  }
  return manifest;
}

namespace {

std::vector<const ManifestEntry *> select_runs(const DatasetManifest &m, std::optional<Split> split) {
  std::vector<const ManifestEntry *> out;
  for (const auto &r : m.runs) {
    if (!split || r.split == *split) out.push_back(&r);
  }
  return out;
}

}  // namespace

ReconstructSummary reconstruct_dataset(const fs::path &dataset_dir, const MaterialLibrary &materials,
                                       const ReconstructOptions &options) {
  const DatasetManifest manifest = read_manifest(dataset_dir);
  const DatasetContext ctx(manifest.config, materials);
  if (options.arm_window_rad && !(*options.arm_window_rad >= 0.0)) throw ParameterError("ARM window must be >= 0");
  const auto runs = select_runs(manifest, options.split);

  std::vector<ReconstructSummary> partial(runs.size());
  parallel_for(runs.size(), options.jobs, [&](std::size_t k) {
    const fs::path dir = dataset_dir / runs[k]->dir;
    const auto stored = read_events(dir / kEventsFile);
    std::vector<EventRecord> events;
    events.reserve(stored.size());
    for (const auto &s : stored) events.push_back(decode_event(s, ctx.bounds));
    if (options.arm_window_rad) {
      const RunTruth truth = read_truth(dir / kTruthFile);
      events = arm_filter(events, truth.direction, *options.arm_window_rad, ctx.config.thresholds);
    }
    const auto maps = reconstruct(events, options.mode, ctx.reconstruction_config(), ctx.geometry);
    if (options.mode != ReconMode::pinhole) write_map(dir / kComptonFile, maps.compton);
    if (options.mode != ReconMode::compton) write_map(dir / kPinholeFile, maps.pinhole);
    partial[k] = {1, maps.compton_events, maps.pinhole_events};
  });

  ReconstructSummary total;
  for (const auto &p : partial) {
    total.runs += p.runs;
    total.compton_events += p.compton_events;
    total.pinhole_events += p.pinhole_events;
  }
  return total;
}

MetricReport evaluate_dataset(const fs::path &dataset_dir, const PredictionSource &source, std::optional<Split> split) {
  const DatasetManifest manifest = read_manifest(dataset_dir);
  const auto runs = select_runs(manifest, split);
  if (runs.empty()) throw ParameterError("evaluate: no runs in the selected split");

  std::vector<RunMetrics> metrics;
  metrics.reserve(runs.size());
  for (const ManifestEntry *e : runs) {
    const fs::path dir = dataset_dir / e->dir;
    const SkyMap target = read_map(dir / kTargetFile);
    SkyMap pred;
    if (source.pred_dir) {
      pred = read_map(*source.pred_dir / (e->id + ".img"));
    } else if (source.name == "combined") {
      pred = combine_maps(read_map(dir / kComptonFile), read_map(dir / kPinholeFile));
    } else if (source.name == "compton") {
      pred = read_map(dir / kComptonFile);
    } else if (source.name == "pinhole") {
      pred = read_map(dir / kPinholeFile);
    } else if (source.name == "target") {
      pred = target;
    } else {
      const fs::path name(source.name);
      if (name.has_parent_path() || name.empty()) throw ParameterError("prediction file must be a plain file name");
      pred = read_map(dir / name);
    }
    const RunTruth truth = read_truth(dir / kTruthFile);
    RunMetrics m;
    m.run_id = e->id;
    m.mse = mse(pred, target);
    m.ssim = ssim(pred, target);
    try {
      m.peak_offset_deg = peak_offset_deg(pred, truth.direction);
    } catch (const EmptyMapError &) {
      m.peak_offset_deg = std::numeric_limits<double>::quiet_NaN();
    }
    metrics.push_back(std::move(m));
  }
  return summarize_runs(metrics);
}

}  // namespace ccbox
