#include "ccbox/formats.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <memory>

#include <fmt/format.h>

#include "ccbox/error.hpp"

namespace ccbox {

namespace {

void put_u32(std::vector<unsigned char> &out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<unsigned char>((v >> (8 * b)) & 0xffu));
}

void put_f32(std::vector<unsigned char> &out, float v) { put_u32(out, std::bit_cast<std::uint32_t>(v)); }

std::uint32_t get_u32(const unsigned char *p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint32_t byteswap32(std::uint32_t v) {
  return ((v & 0xffu) << 24) | ((v & 0xff00u) << 8) | ((v >> 8) & 0xff00u) | (v >> 24);
}

float get_f32(const unsigned char *p) { return std::bit_cast<float>(get_u32(p)); }

void write_bytes(const std::filesystem::path &path, const std::vector<unsigned char> &bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(fmt::format("cannot open {} for writing", path.string()));
  out.write(reinterpret_cast<const char *>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  out.close();
  if (!out) throw IoError(fmt::format("write failed: {}", path.string()));
}

std::vector<unsigned char> read_bytes(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open {}", path.string()));
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError(fmt::format("read failed: {}", path.string()));
  return bytes;
}

void check_magic(const std::vector<unsigned char> &bytes, std::string_view magic, const std::filesystem::path &path) {
  if (bytes.size() < magic.size() || std::memcmp(bytes.data(), magic.data(), magic.size()) != 0) {
    throw FormatError(fmt::format("{}: bad magic, expected {}", path.string(), magic));
  }
}

}  // namespace

void write_map(const std::filesystem::path &path, const SkyMap &map) {
  std::vector<unsigned char> bytes(kMapMagic.begin(), kMapMagic.end());
  bytes.reserve(kMapMagic.size() + 8 + 4 * map.size());
  put_u32(bytes, static_cast<std::uint32_t>(map.width()));
  put_u32(bytes, static_cast<std::uint32_t>(map.height()));
  for (float v : map.data()) put_f32(bytes, v);
  write_bytes(path, bytes);
}

SkyMap read_map(const std::filesystem::path &path, int expected_width, int expected_height) {
  const auto bytes = read_bytes(path);
  check_magic(bytes, kMapMagic, path);
  const std::size_t header = kMapMagic.size() + 8;
  if (bytes.size() < header) throw FormatError(fmt::format("{}: truncated header", path.string()));
  const std::uint32_t w = get_u32(bytes.data() + kMapMagic.size());
  const std::uint32_t h = get_u32(bytes.data() + kMapMagic.size() + 4);
  const auto ew = static_cast<std::uint32_t>(expected_width);
  const auto eh = static_cast<std::uint32_t>(expected_height);
  if (w != ew || h != eh) {
    if (byteswap32(w) == ew && byteswap32(h) == eh) {
      throw FormatError(fmt::format("{}: big-endian header; the format is little-endian", path.string()));
    }
    throw DimensionMismatchError(fmt::format("{}: map is {}x{}, expected {}x{}", path.string(), w, h, ew, eh));
  }
  const std::size_t expected = header + 4ull * w * h;
  if (bytes.size() != expected) {
    throw FormatError(fmt::format("{}: payload is {} bytes, expected {}", path.string(), bytes.size(), expected));
  }
  SkyMap map(expected_width, expected_height);
  auto data = map.data();
  for (std::size_t k = 0; k < data.size(); ++k) data[k] = get_f32(bytes.data() + header + 4 * k);
  return map;
}

StoredEvent encode_event(const EventRecord &event, const NormalizationBounds &bounds) {
  const FeatureVector f = normalize_event(event, bounds);
  StoredEvent out{};
  for (std::size_t k = 0; k < kFeatureCount; ++k) out[k] = static_cast<float>(f[k]);
  return out;
}

EventRecord decode_event(const StoredEvent &stored, const NormalizationBounds &bounds) {
  FeatureVector f{};
  for (std::size_t k = 0; k < kFeatureCount; ++k) f[k] = stored[k];
  return denormalize_event(f, bounds);
}

void write_events(const std::filesystem::path &path, std::span<const StoredEvent> events) {
  if (events.size() > UINT32_MAX) throw ParameterError("too many events for one file");
  std::vector<unsigned char> bytes(kEventsMagic.begin(), kEventsMagic.end());
  bytes.reserve(kEventsMagic.size() + 4 + events.size() * kFeatureCount * 4);
  put_u32(bytes, static_cast<std::uint32_t>(events.size()));
  for (const auto &e : events) {
    for (float v : e) put_f32(bytes, v);
  }
  write_bytes(path, bytes);
}

std::vector<StoredEvent> read_events(const std::filesystem::path &path) {
  const auto bytes = read_bytes(path);
  check_magic(bytes, kEventsMagic, path);
  const std::size_t header = kEventsMagic.size() + 4;
  if (bytes.size() < header) throw FormatError(fmt::format("{}: truncated header", path.string()));
  const std::uint32_t count = get_u32(bytes.data() + kEventsMagic.size());
  const std::size_t record = kFeatureCount * 4;
  const std::size_t expected = header + record * count;
  if (bytes.size() != expected) {
    throw FormatError(fmt::format("{}: header count {} needs {} bytes, file has {}", path.string(), count, expected,
                                  bytes.size()));
  }
  std::vector<StoredEvent> events(count);
  for (std::size_t n = 0; n < count; ++n) {
    for (std::size_t k = 0; k < kFeatureCount; ++k) events[n][k] = get_f32(bytes.data() + header + n * record + 4 * k);
  }
  return events;
}

Colormap parse_colormap(std::string_view text) {
  if (text == "gray") return Colormap::gray;
  if (text == "heat") return Colormap::heat;
  throw ParameterError(fmt::format("unknown colormap '{}' (gray|heat)", text));
}

namespace {

// Black -> red -> yellow -> white, piecewise linear in the level.
std::array<unsigned char, 3> heat_rgb(unsigned char level) {
  const int l = level * 3;
  const auto clamp255 = [](int v) { return static_cast<unsigned char>(std::clamp(v, 0, 255)); };
  return {clamp255(l), clamp255(l - 255), clamp255(l - 510)};
}

}  // namespace

void export_png(const SkyMap &map, const std::filesystem::path &path, Colormap colormap) {
  const int w = map.width();
  const int h = map.height();
  const double peak = map.max_value();
  const int channels = colormap == Colormap::gray ? 1 : 3;

  // Row 0 of the PNG is the top, which is the largest v.
  std::vector<unsigned char> pixels(static_cast<std::size_t>(w) * h * channels);
  for (int row = 0; row < h; ++row) {
    const int j = h - 1 - row;
    for (int i = 0; i < w; ++i) {
      const double v = map.at(i, j);
      unsigned char level = 0;
      if (peak > 0.0 && v > 0.0) level = static_cast<unsigned char>(std::lround(std::min(v / peak, 1.0) * 255.0));
      unsigned char *px = &pixels[(static_cast<std::size_t>(row) * w + i) * channels];
      if (channels == 1) {
        px[0] = level;
      } else {
        const auto rgb = heat_rgb(level);
        std::copy(rgb.begin(), rgb.end(), px);
      }
    }
  }

  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(w);
  image.height = static_cast<png_uint_32>(h);
  image.format = channels == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  const std::string file = path.string();
  if (png_image_write_to_file(&image, file.c_str(), 0, pixels.data(), 0, nullptr) == 0) {
    const std::string message = image.message;
    png_image_free(&image);
    throw IoError(fmt::format("png write failed: {}: {}", file, message));
  }
}

}  // namespace ccbox
