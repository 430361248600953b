// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dysflux Authors

#include "dysflux/features_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <limits>

#include "dysflux/error.hpp"
#include "dysflux/files.hpp"

namespace dysflux {
namespace {

namespace fs = std::filesystem;

void put_u16(std::vector<std::byte>& out, std::uint16_t v) {
  out.push_back(static_cast<std::byte>(v & 0xFFu));
  out.push_back(static_cast<std::byte>(v >> 8));
}

void put_u32(std::vector<std::byte>& out, std::uint32_t v) {
  for (int shift = 0; shift < 32; shift += 8) {
    out.push_back(static_cast<std::byte>((v >> shift) & 0xFFu));
  }
}

std::uint16_t get_u16(std::span<const std::byte> b, std::size_t at) {
  return static_cast<std::uint16_t>(std::to_integer<unsigned>(b[at]) |
                                    std::to_integer<unsigned>(b[at + 1]) << 8);
}

std::uint32_t get_u32(std::span<const std::byte> b, std::size_t at) {
  std::uint32_t v = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    v |= std::to_integer<std::uint32_t>(b[at + i]) << (8 * i);
  }
  return v;
}

void validate_clip_id(std::string_view clip_id) {
  if (clip_id.empty() || clip_id == "." || clip_id == ".." ||
      clip_id.find_first_of("/\\") != std::string_view::npos ||
      clip_id.find('\0') != std::string_view::npos) {
    throw ConfigError("clip_id '" + std::string(clip_id) +
                      "' cannot be used as a feature file name");
  }
}

}  // namespace

Tensor FeatureFile::to_tensor() const {
  std::vector<double> data(values.begin(), values.end());
  return Tensor({layers, frames, width}, std::move(data));
}

FeatureFile FeatureFile::from_tensor(std::string clip_id, const Tensor& hidden) {
  require_rank(hidden, 3, "hidden states");
  FeatureFile file;
  file.clip_id = std::move(clip_id);
  const auto narrow = [](std::size_t n) {
    if (n > std::numeric_limits<std::uint32_t>::max()) {
      throw ShapeError("feature dimension exceeds u32 range");
    }
    return static_cast<std::uint32_t>(n);
  };
  file.layers = narrow(hidden.dim(0));
  file.frames = narrow(hidden.dim(1));
  file.width = narrow(hidden.dim(2));
  file.values.reserve(hidden.size());
  constexpr double kMax = std::numeric_limits<float>::max();
  for (std::size_t i = 0; i < hidden.size(); ++i) {
    const double v = hidden[i];
    if (!std::isfinite(v) || std::fabs(v) > kMax) {
      throw DomainError("hidden state value at flat index " +
                        std::to_string(i) + " is not representable as f32");
    }
    file.values.push_back(static_cast<float>(v));
  }
  return file;
}

std::vector<std::byte> encode_features(const FeatureFile& file) {
  if (file.layers == 0 || file.frames == 0 || file.width == 0) {
    throw ShapeError("feature file shape must be positive");
  }
  const std::uint64_t count = static_cast<std::uint64_t>(file.layers) *
                              file.frames * file.width;
  if (count != file.values.size()) {
    throw ShapeError("feature file declares " + std::to_string(count) +
                     " values but holds " + std::to_string(file.values.size()));
  }
  if (file.clip_id.size() > std::numeric_limits<std::uint32_t>::max()) {
    throw ShapeError("clip_id too long");
  }
  for (std::size_t i = 0; i < file.values.size(); ++i) {
    if (!std::isfinite(file.values[i])) {
      throw DomainError("refusing to write non-finite value at flat index " +
                        std::to_string(i) + " of clip " + file.clip_id);
    }
  }

  std::vector<std::byte> out;
  out.reserve(kFeatureHeaderBytes + file.clip_id.size() + 4 * count);
  for (const char c : kFeatureMagic) out.push_back(static_cast<std::byte>(c));
  put_u16(out, kFeatureVersion);
  put_u16(out, 0);
  put_u32(out, file.layers);
  put_u32(out, file.frames);
  put_u32(out, file.width);
  put_u32(out, static_cast<std::uint32_t>(file.clip_id.size()));
  for (const char c : file.clip_id) out.push_back(static_cast<std::byte>(c));
  for (const float v : file.values) put_u32(out, std::bit_cast<std::uint32_t>(v));
  return out;
}

FeatureFile decode_features(std::span<const std::byte> bytes) {
  if (bytes.size() < 4 ||
      std::memcmp(bytes.data(), kFeatureMagic, sizeof kFeatureMagic) != 0) {
    throw FormatError("magic", "bad magic: not a .dyfh feature file");
  }
  if (bytes.size() < kFeatureHeaderBytes) {
    throw FormatError("payload length",
                      "payload length: file ends inside the " +
                          std::to_string(kFeatureHeaderBytes) + "-byte header (" +
                          std::to_string(bytes.size()) + " bytes)");
  }
  const auto version = get_u16(bytes, 4);
  if (version != kFeatureVersion) {
    throw FormatError("version",
                      "unsupported version " + std::to_string(version));
  }
  const auto flags = get_u16(bytes, 6);
  if (flags != 0) {
    throw FormatError("flags", "unsupported flags " + std::to_string(flags));
  }
  FeatureFile file;
  file.layers = get_u32(bytes, 8);
  file.frames = get_u32(bytes, 12);
  file.width = get_u32(bytes, 16);
  if (file.layers == 0 || file.frames == 0 || file.width == 0) {
    throw FormatError("shape", "shape " + std::to_string(file.layers) + "x" +
                                   std::to_string(file.frames) + "x" +
                                   std::to_string(file.width) +
                                   " has a zero dimension");
  }
  const std::uint64_t id_len = get_u32(bytes, 20);
  const std::uint64_t available = bytes.size() - kFeatureHeaderBytes;
  if (id_len == 0 || id_len > available) {
    throw FormatError("clip_id_len", "clip_id_len " + std::to_string(id_len) +
                                         " does not fit the file");
  }
  file.clip_id.assign(reinterpret_cast<const char*>(bytes.data()) +
                          kFeatureHeaderBytes,
                      id_len);
  const std::uint64_t payload = available - id_len;
  // L·T fits in 64 bits; dividing instead of multiplying by D keeps the
  // comparison overflow-free for hostile headers.
  const std::uint64_t layer_frames =
      static_cast<std::uint64_t>(file.layers) * file.frames;
  if (layer_frames > payload / 4 / file.width ||
      payload != 4 * layer_frames * file.width) {
    throw FormatError("payload length",
                      "payload length " + std::to_string(payload) +
                          " bytes does not match shape " +
                          std::to_string(file.layers) + "x" +
                          std::to_string(file.frames) + "x" +
                          std::to_string(file.width) + " for clip " +
                          file.clip_id);
  }
  const std::uint64_t count = layer_frames * file.width;
  file.values.resize(count);
  const std::size_t base = kFeatureHeaderBytes + id_len;
  for (std::size_t i = 0; i < count; ++i) {
    file.values[i] = std::bit_cast<float>(get_u32(bytes, base + 4 * i));
  }
  return file;
}

fs::path feature_path(const fs::path& dir, std::string_view clip_id) {
  validate_clip_id(clip_id);
  return dir / (std::string(clip_id) + std::string(kFeatureExtension));
}

fs::path write_features(const fs::path& dir, const FeatureFile& file) {
  const auto path = feature_path(dir, file.clip_id);
  const auto bytes = encode_features(file);
  write_file_atomic(path, std::string_view(
                              reinterpret_cast<const char*>(bytes.data()),
                              bytes.size()));
  return path;
}

fs::path write_features(const fs::path& dir, std::string_view clip_id,
                        const Tensor& hidden) {
  return write_features(dir, FeatureFile::from_tensor(std::string(clip_id), hidden));
}

FeatureFile read_features(const fs::path& path) {
  const std::string raw = read_file(path);
  return decode_features(std::as_bytes(std::span<const char>(raw)));
}

Tensor load_hidden(const fs::path& dir, std::string_view clip_id) {
  const auto path = feature_path(dir, clip_id);
  if (!fs::exists(path)) {
    throw DataError("missing feature file for clip " + std::string(clip_id) +
                    " (" + path.string() + ")");
  }
  const auto file = read_features(path);
  if (file.clip_id != clip_id) {
    throw FormatError("clip_id", path.string() + " stores clip_id '" +
                                     file.clip_id + "', expected '" +
                                     std::string(clip_id) + "'");
  }
  return file.to_tensor();
}

}  // namespace dysflux
