// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dysflux Authors
//
// Shared fixtures: scratch directories and small synthetic manifests.

#pragma once

#include <atomic>
#include <filesystem>
#include <string>
#include <unistd.h>

#include "dysflux/datasets.hpp"

namespace dysflux::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("dysflux-test-" + std::to_string(::getpid()) + "-" +
             std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const {
    return path_ / name;
  }

 private:
  std::filesystem::path path_;
};

/// Record with the given dysfluency classes set (No-Df iff none).
inline ClipRecord make_record(std::string clip_id, std::string dataset_id,
                              std::string speaker_id, Split split,
                              std::initializer_list<std::size_t> positives = {}) {
  ClipRecord r;
  r.clip_id = std::move(clip_id);
  r.dataset_id = std::move(dataset_id);
  r.speaker_id = std::move(speaker_id);
  r.split = split;
  for (auto i : positives) r.labels[i] = 1;
  if (!r.any_label()) r.labels[kNoDfIndex] = 1;
  return r;
}

/// `n` clips of one corpus with ids "<prefix>-<i>" and speakers "<prefix>s<i%k>".
inline Manifest make_manifest(std::string name, std::string dataset_id,
                              ClassSet set, std::size_t n,
                              const std::string& prefix) {
  Manifest m;
  m.name = std::move(name);
  m.dataset_id = dataset_id;
  m.class_set = set;
  for (std::size_t i = 0; i < n; ++i) {
    const Split split = i % 10 < 8 ? Split::train : (i % 10 == 8 ? Split::dev : Split::test);
    m.records.push_back(make_record(prefix + "-" + std::to_string(i), dataset_id,
                                    prefix + "s" + std::to_string(i % 10), split,
                                    {1 + i % 5}));
  }
  return m;
}

}  // namespace dysflux::testing
