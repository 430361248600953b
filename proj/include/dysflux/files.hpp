// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dysflux Authors

#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace dysflux {

/// Whole-file read. Throws IoError if the file cannot be opened.
std::string read_file(const std::filesystem::path& path);

/// Writes `contents` to a sibling temporary file and renames it over `path`,
/// so readers never observe a partial file. Creates parent directories.
void write_file_atomic(const std::filesystem::path& path,
                       std::string_view contents);

}  // namespace dysflux
