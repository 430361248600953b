// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dysflux Authors

#include "dysflux/files.hpp"

#include <fstream>
#include <iterator>
#include <system_error>

#include "dysflux/error.hpp"

namespace dysflux {

namespace fs = std::filesystem;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string data((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read of " + path.string() + " failed");
  return data;
}

void write_file_atomic(const fs::path& path, std::string_view contents) {
  std::error_code ec;
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path(), ec);
    if (ec) {
      throw IoError("cannot create " + path.parent_path().string() + ": " +
                    ec.message());
    }
  }
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out.flush()) throw IoError("write to " + tmp.string() + " failed");
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot rename onto " + path.string() + ": " + ec.message());
  }
}

}  // namespace dysflux
