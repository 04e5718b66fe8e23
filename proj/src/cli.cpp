#include "ccbox/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "ccbox/dataset.hpp"
#include "ccbox/error.hpp"

namespace ccbox {

namespace fs = std::filesystem;

namespace {

// Raised for argument combinations CLI11 cannot express.
struct UsageError : Error {
  using Error::Error;
};

double parse_number(std::string_view text) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v)) {
    throw ParameterError(fmt::format("not a number: '{}'", text));
  }
  return v;
}

std::optional<Split> parse_split_option(const std::string &text) {
  if (text == "all") return std::nullopt;
  return parse_split(text);
}

void require_dataset(const fs::path &dir) {
  if (!fs::is_regular_file(dir / kManifestFile)) {
    throw UsageError(fmt::format("no dataset at {} (missing {})", dir.string(), kManifestFile));
  }
}

struct SimulateArgs {
  std::string config;
  std::vector<double> durations;
  std::optional<double> flux;
  std::optional<int> runs;
  std::optional<std::uint64_t> seed;
  bool no_background{false};
  std::string out;
  std::string materials;
  int jobs{0};
};

int cmd_simulate(const SimulateArgs &a, std::ostream &out) {
  SimulationConfig cfg;
  if (!a.config.empty()) cfg = load_simulation_config(a.config);
  if (!a.durations.empty()) cfg.durations_s = a.durations;
  if (a.flux) cfg.flux = *a.flux;
  if (a.runs) cfg.runs_per_duration = *a.runs;
  if (a.seed) cfg.seed = *a.seed;
  if (a.no_background) cfg.background.enabled = false;
  cfg.validate();
  const int jobs = resolve_jobs(a.jobs);

  const fs::path mat_dir = a.materials.empty() ? MaterialLibrary::default_dir() : fs::path(a.materials);
  if (!fs::is_directory(mat_dir)) throw UsageError(fmt::format("material directory {} not found", mat_dir.string()));
  const MaterialLibrary materials = MaterialLibrary::load(mat_dir);

  const DatasetManifest m = generate_dataset(cfg, materials, a.out, jobs);
  out << fmt::format("wrote {} runs to {}\n", m.runs.size(), a.out);
  return kExitOk;
}

struct ReconstructArgs {
  std::string dataset;
  std::string mode{"both"};
  std::string arm_window;
  bool source_from_truth{false};
  std::string split{"all"};
  std::string materials;
  int jobs{0};
};

int cmd_reconstruct(const ReconstructArgs &a, std::ostream &out) {
  ReconstructOptions opt;
  opt.mode = parse_recon_mode(a.mode);
  opt.split = parse_split_option(a.split);
  opt.jobs = resolve_jobs(a.jobs);
  if (!a.arm_window.empty()) {
    if (!a.source_from_truth) throw UsageError("--arm-window needs --source-from-truth");
    opt.arm_window_rad = parse_angle(a.arm_window);
  }
  require_dataset(a.dataset);
  const fs::path mat_dir = a.materials.empty() ? MaterialLibrary::default_dir() : fs::path(a.materials);
  const MaterialLibrary materials = MaterialLibrary::load(mat_dir);

  const ReconstructSummary s = reconstruct_dataset(a.dataset, materials, opt);
  out << fmt::format("reconstructed {} runs: {} compton cones, {} pinhole events\n", s.runs, s.compton_events,
                     s.pinhole_events);
  return kExitOk;
}

struct EvaluateArgs {
  std::string dataset;
  std::string pred{"combined"};
  std::string pred_dir;
  std::string split{"test"};
  std::string out;
};

int cmd_evaluate(const EvaluateArgs &a, std::ostream &out) {
  require_dataset(a.dataset);
  PredictionSource source;
  source.name = a.pred;
  if (!a.pred_dir.empty()) {
    if (!fs::is_directory(a.pred_dir)) throw UsageError(fmt::format("prediction directory {} not found", a.pred_dir));
    source.pred_dir = a.pred_dir;
  }
  const MetricReport report = evaluate_dataset(a.dataset, source, parse_split_option(a.split));
  if (!a.out.empty()) {
    const fs::path path(a.out);
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw IoError(fmt::format("cannot open {} for writing", a.out));
    f << to_json(report).dump(2) << "\n";
    if (!f) throw IoError(fmt::format("write failed: {}", a.out));
  }
  out << format_table(report);
  return kExitOk;
}

struct PlotArgs {
  std::string input;
  std::string dataset;
  std::string run;
  std::vector<std::string> maps{"compton", "pinhole", "combined", "target"};
  std::string out;
  std::string colormap{"gray"};
};

int cmd_plot(const PlotArgs &a, std::ostream &out) {
  const Colormap cmap = parse_colormap(a.colormap);
  if (!a.input.empty()) {
    if (!a.dataset.empty() || !a.run.empty()) throw UsageError("--input excludes --dataset/--run");
    const fs::path dst(a.out);
    if (dst.has_parent_path()) fs::create_directories(dst.parent_path());
    export_png(read_map(a.input), dst, cmap);
    out << fmt::format("wrote {}\n", dst.string());
    return kExitOk;
  }
  if (a.dataset.empty() || a.run.empty()) throw UsageError("plot needs --input, or --dataset with --run");
  require_dataset(a.dataset);
  const DatasetManifest m = read_manifest(a.dataset);
  const auto it = std::find_if(m.runs.begin(), m.runs.end(), [&](const ManifestEntry &e) { return e.id == a.run; });
  if (it == m.runs.end()) throw UsageError(fmt::format("run {} not in dataset", a.run));
  const fs::path dir = fs::path(a.dataset) / it->dir;
  fs::create_directories(a.out);
  for (const auto &name : a.maps) {
    SkyMap map;
    if (name == "combined") {
      map = combine_maps(read_map(dir / kComptonFile), read_map(dir / kPinholeFile));
    } else if (name == "compton" || name == "pinhole" || name == "target") {
      map = read_map(dir / (name + ".img"));
    } else {
      throw UsageError(fmt::format("unknown map '{}' (compton|pinhole|combined|target)", name));
    }
    const fs::path dst = fs::path(a.out) / fmt::format("{}_{}.png", a.run, name);
    export_png(map, dst, cmap);
    out << fmt::format("wrote {}\n", dst.string());
  }
  return kExitOk;
}

}  // namespace

double parse_angle(const std::string &text) {
  std::string_view t = text;
  double scale = kDegToRad;
  if (t.ends_with("deg")) {
    t.remove_suffix(3);
  } else if (t.ends_with("rad")) {
    t.remove_suffix(3);
    scale = 1.0;
  }
  const double v = parse_number(t);
  if (v < 0.0) throw ParameterError(fmt::format("angle must be non-negative: '{}'", text));
  return v * scale;
}

int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
  CLI::App app{"Compton camera simulation, reconstruction and evaluation", "ccbox"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto *simulate = app.add_subcommand("simulate", "Generate a dataset");
  simulate->add_option("--config", sim.config, "JSON configuration file")->check(CLI::ExistingFile);
  simulate->add_option("--duration", sim.durations, "Burst duration(s) in s; overrides the config");
  simulate->add_option("--flux", sim.flux, "GRB flux, photons/cm^2/s");
  simulate->add_option("--runs", sim.runs, "Runs per duration");
  simulate->add_option("--seed", sim.seed, "Master seed");
  simulate->add_flag("--no-background", sim.no_background, "Disable CXB and albedo");
  simulate->add_option("--out", sim.out, "Output dataset directory")->required();
  simulate->add_option("--materials", sim.materials, "Directory with gagg.csv and bgo.csv");
  simulate->add_option("--jobs", sim.jobs, "Parallel runs (0: all cores)");

  ReconstructArgs rec;
  auto *reconstruct = app.add_subcommand("reconstruct", "Recompute back-projection maps of a dataset");
  reconstruct->add_option("--dataset", rec.dataset, "Dataset directory")->required();
  reconstruct->add_option("--mode", rec.mode, "compton | pinhole | both");
  reconstruct->add_option("--arm-window", rec.arm_window, "ARM half-width, e.g. 10deg or 0.1rad");
  reconstruct->add_flag("--source-from-truth", rec.source_from_truth, "Use the true direction for the ARM cut");
  reconstruct->add_option("--split", rec.split, "train | val | test | all");
  reconstruct->add_option("--materials", rec.materials, "Directory with gagg.csv and bgo.csv");
  reconstruct->add_option("--jobs", rec.jobs, "Parallel runs (0: all cores)");

  EvaluateArgs ev;
  auto *evaluate = app.add_subcommand("evaluate", "Score predicted maps against targets");
  evaluate->add_option("--dataset", ev.dataset, "Dataset directory")->required();
  evaluate->add_option("--pred", ev.pred, "compton | pinhole | combined | target | map file name in each run");
  evaluate->add_option("--pred-dir", ev.pred_dir, "Directory of <run id>.img predictions");
  evaluate->add_option("--split", ev.split, "train | val | test | all");
  evaluate->add_option("--out", ev.out, "JSON report path");

  PlotArgs pl;
  auto *plot = app.add_subcommand("plot", "Export maps as PNG");
  plot->add_option("--input", pl.input, "Single map file")->check(CLI::ExistingFile);
  plot->add_option("--dataset", pl.dataset, "Dataset directory");
  plot->add_option("--run", pl.run, "Run id");
  plot->add_option("--maps", pl.maps, "Maps to export")->delimiter(',');
  plot->add_option("--out", pl.out, "PNG path (--input) or output directory")->required();
  plot->add_option("--colormap", pl.colormap, "gray | heat");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp &) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp &) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError &e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (*simulate) return cmd_simulate(sim, out);
    if (*reconstruct) return cmd_reconstruct(rec, out);
    if (*evaluate) return cmd_evaluate(ev, out);
    return cmd_plot(pl, out);
  } catch (const UsageError &e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ParameterError &e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DimensionMismatchError &e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception &e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace ccbox
