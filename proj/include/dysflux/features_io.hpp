// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dysflux Authors

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dysflux/tensor.hpp"

namespace dysflux {

/// Per-clip backbone hidden states as stored on disk: L layers × T frames ×
/// D dims of 32-bit floats, row-major [layer][time][dim].
///
/// File layout (all integers little-endian):
///   "DYFH" | u16 version = 1 | u16 flags = 0 | u32 L | u32 T | u32 D |
///   u32 clip_id_len | clip_id (UTF-8) | L·T·D × f32
struct FeatureFile {
  std::string clip_id;
  std::uint32_t layers = 0;
  std::uint32_t frames = 0;
  std::uint32_t width = 0;
  std::vector<float> values;

  /// Values promoted to double, shape (L, T, D).
  Tensor to_tensor() const;
  /// Narrows a rank-3 tensor to f32. Throws DomainError on non-finite input
  /// or magnitudes beyond the f32 range.
  static FeatureFile from_tensor(std::string clip_id, const Tensor& hidden);

  bool operator==(const FeatureFile&) const = default;
};

inline constexpr char kFeatureMagic[4] = {'D', 'Y', 'F', 'H'};
inline constexpr std::uint16_t kFeatureVersion = 1;
inline constexpr std::size_t kFeatureHeaderBytes = 24;
inline constexpr std::string_view kFeatureExtension = ".dyfh";

/// Serialises to the byte layout above. Throws DomainError if any value is
/// non-finite and ShapeError if the declared shape does not match `values`.
std::vector<std::byte> encode_features(const FeatureFile& file);

/// Parses and validates a complete file image. Throws FormatError whose
/// field() is one of "magic", "version", "flags", "shape", "clip_id_len",
/// "clip_id" or "payload length".
FeatureFile decode_features(std::span<const std::byte> bytes);

/// <dir>/<clip_id>.dyfh. Throws ConfigError for ids that are not usable as a
/// single file name.
std::filesystem::path feature_path(const std::filesystem::path& dir,
                                   std::string_view clip_id);

/// Writes `file` into `dir` atomically (temporary file + rename) and
/// returns the final path. Throws IoError on filesystem failure.
std::filesystem::path write_features(const std::filesystem::path& dir,
                                     const FeatureFile& file);
std::filesystem::path write_features(const std::filesystem::path& dir,
                                     std::string_view clip_id,
                                     const Tensor& hidden);

/// Reads and validates one file. Throws IoError if it cannot be opened.
FeatureFile read_features(const std::filesystem::path& path);

/// Loads the hidden states for `clip_id` from `dir`. Throws DataError naming
/// the clip when the file is missing, FormatError when the stored id differs.
Tensor load_hidden(const std::filesystem::path& dir, std::string_view clip_id);

}  // namespace dysflux
