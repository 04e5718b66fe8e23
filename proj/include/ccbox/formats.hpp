#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "ccbox/events.hpp"
#include "ccbox/skymap.hpp"

namespace ccbox {

// All on-disk numbers are little-endian regardless of host order.
inline constexpr std::string_view kMapMagic = "CCIMG001";
inline constexpr std::string_view kEventsMagic = "CCEVT001";

/// Magic + u32 width + u32 height + row-major float32.
void write_map(const std::filesystem::path &path, const SkyMap &map);

/// Throws FormatError for a bad magic or truncated/oversized payload, and
/// DimensionMismatchError when the shape is not expected_width x
/// expected_height.
SkyMap read_map(const std::filesystem::path &path, int expected_width = kMapSize, int expected_height = kMapSize);

/// One event as stored: 16 normalized features in float32.
using StoredEvent = std::array<float, kFeatureCount>;

StoredEvent encode_event(const EventRecord &event, const NormalizationBounds &bounds);
EventRecord decode_event(const StoredEvent &stored, const NormalizationBounds &bounds);

/// Magic + u32 count + count x 16 float32.
void write_events(const std::filesystem::path &path, std::span<const StoredEvent> events);
/// Throws FormatError for a bad magic, or a count that disagrees with the
/// payload size.
std::vector<StoredEvent> read_events(const std::filesystem::path &path);

enum class Colormap { gray, heat };
Colormap parse_colormap(std::string_view text);

/// 8-bit PNG of the map with [0, max] scaled linearly to [0, 255]; +v is up.
/// Throws IoError.
void export_png(const SkyMap &map, const std::filesystem::path &path, Colormap colormap = Colormap::gray);

}  // namespace ccbox
