// Copyright 2026 The hyperprobe Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


/** Binary checkpoints ("HPCK"): a trained probe, its optimizer state and a
 * list of string metadata. The byte layout is described in
 * docs/checkpoint.md. Writing is deterministic, so identical models give
 * identical files. */

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "hyperprobe/probes.hpp"
#include "hyperprobe/train.hpp"

namespace hyperprobe::checkpoint {

inline constexpr std::uint32_t kVersion = 1;

struct Checkpoint {
  probes::ProbeModel model;
  std::vector<train::OptimizerSlot> optimizer;  ///< may be empty
  std::vector<std::pair<std::string, std::string>> metadata;
};

void write(std::ostream& out, const Checkpoint& ckpt);
void write(const std::filesystem::path& path, const Checkpoint& ckpt);
/// Throws DataError on a malformed, truncated or inconsistent file.
Checkpoint read(std::istream& in);
Checkpoint read(const std::filesystem::path& path);

}  // namespace hyperprobe::checkpoint
