#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ccbox/config.hpp"
#include "ccbox/formats.hpp"
#include "ccbox/materials.hpp"
#include "ccbox/metrics.hpp"
#include "ccbox/reconstruction.hpp"
#include "ccbox/skymap.hpp"

namespace ccbox {

inline constexpr int kDatasetFormatVersion = 1;

enum class Split { train, val, test };
std::string_view to_string(Split split);
Split parse_split(std::string_view text);

struct SplitCounts {
  int train;
  int val;
  int test;
};

/// 64/16/20 proportions rounded to nearest for train and val; test takes the
/// rest. 1000 -> 640/160/200, 10 -> 6/2/2.
SplitCounts split_counts(int runs);
/// Runs are assigned to splits in index order: train first, then val, test.
Split split_of(int index, const SplitCounts &counts);

/// "d<duration>_r<index>", e.g. d30_r0007; a decimal point becomes 'p'.
std::string run_id(double duration_s, int index);
/// Seed of one run, derived from the master seed, duration and index only.
std::uint64_t run_seed(std::uint64_t master, double duration_s, int index);

/// Stream label reserved for truth sampling; no duration key maps to it.
inline constexpr std::uint64_t kTruthStream = ~std::uint64_t{0};
/// Seed of the source direction and photon index of run `index`. It does not
/// depend on the duration, so run k sees the same source at every duration.
std::uint64_t truth_seed(std::uint64_t master, int index);

/// Isotropic Gaussian in pixel space centred on the direction's continuous
/// pixel coordinates, peak 1, zero outside the valid disk. sigma_px = 0 gives
/// a single-pixel delta. Throws ParameterError below the horizon.
SkyMap make_truth_map(const Vec3 &direction, double sigma_px);

/// Ground truth of one run as stored in truth.json.
struct RunTruth {
  std::string run_id;
  Split split{Split::train};
  Vec3 direction{0.0, 0.0, 1.0};
  double photon_index{0.0};
  double duration_s{0.0};
  double flux{0.0};
  std::uint64_t seed{0};
  bool background{false};
  std::size_t event_count{0};
  std::array<std::uint64_t, kSourceKindCount> generated_photons{};
  std::array<std::uint64_t, kSourceKindCount> events_by_origin{};
};

nlohmann::ordered_json to_json(const RunTruth &truth);
RunTruth truth_from_json(const nlohmann::json &j);
RunTruth read_truth(const std::filesystem::path &path);

/// One simulated run before it is written.
struct GeneratedRun {
  RunTruth truth;
  RunRecord record;
  std::vector<StoredEvent> stored_events;
  SkyMap compton;
  SkyMap pinhole;
  SkyMap target;
};

/// Shared, immutable context for generating and reconstructing runs.
struct DatasetContext {
  SimulationConfig config;
  DetectorGeometry geometry;
  MaterialLibrary materials;
  NormalizationBounds bounds;

  DatasetContext(SimulationConfig config, MaterialLibrary materials);
  ReconstructionConfig reconstruction_config() const;
};

/// Sample truth, simulate, encode the events and reconstruct both maps from
/// the decoded events, so stored maps equal a reconstruction of the file.
GeneratedRun generate_run(const DatasetContext &context, double duration_s, int index);

struct ManifestEntry {
  std::string id;
  Split split{Split::train};
  double duration_s{0.0};
  int index{0};
  std::uint64_t seed{0};
  std::string dir;  // relative to the dataset root
};

struct DatasetManifest {
  int format_version{kDatasetFormatVersion};
  SimulationConfig config;
  std::vector<ManifestEntry> runs;  // by duration, then index
};

nlohmann::ordered_json to_json(const DatasetManifest &manifest);
DatasetManifest manifest_from_json(const nlohmann::json &j);
/// Throws IoError when the manifest is missing, FormatError when malformed.
DatasetManifest read_manifest(const std::filesystem::path &dataset_dir);

inline constexpr std::string_view kEventsFile = "events.bin";
inline constexpr std::string_view kTruthFile = "truth.json";
inline constexpr std::string_view kComptonFile = "compton.img";
inline constexpr std::string_view kPinholeFile = "pinhole.img";
inline constexpr std::string_view kTargetFile = "target.img";
inline constexpr std::string_view kManifestFile = "manifest.json";

/// Generate every run, `jobs` runs at a time, then write the manifest. The
/// output directory must be absent, empty or a previous dataset (which is
/// replaced). On failure the partial output is removed. Output bytes do not
/// depend on `jobs`.
DatasetManifest generate_dataset(const SimulationConfig &config, const MaterialLibrary &materials,
                                 const std::filesystem::path &out, int jobs);

struct ReconstructOptions {
  ReconMode mode{ReconMode::both};
  /// Apply arm_filter around the truth direction with this half-width.
  std::optional<double> arm_window_rad;
  std::optional<Split> split;
  int jobs{1};
};

struct ReconstructSummary {
  std::size_t runs{0};
  std::size_t compton_events{0};
  std::size_t pinhole_events{0};
};

/// Recompute and overwrite the maps selected by `mode` for every run.
ReconstructSummary reconstruct_dataset(const std::filesystem::path &dataset_dir, const MaterialLibrary &materials,
                                       const ReconstructOptions &options);

/// Prediction source for evaluation: one of the stored map files, the
/// combined Compton + pinhole map, or <pred_dir>/<run id>.img.
struct PredictionSource {
  std::string name{"combined"};  // compton | pinhole | combined | target | <file name>
  std::optional<std::filesystem::path> pred_dir;
};

/// Score predictions against target maps. Throws DimensionMismatchError for
/// maps of the wrong shape and ParameterError when the split is empty.
MetricReport evaluate_dataset(const std::filesystem::path &dataset_dir, const PredictionSource &source,
                              std::optional<Split> split);

/// Run `task(i)` for i in [0, count) on `jobs` threads. The first exception
/// stops further work and is rethrown.
void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)> &task);

/// Worker count for a --jobs value; 0 means all available cores.
int resolve_jobs(int jobs);

}  // namespace ccbox
