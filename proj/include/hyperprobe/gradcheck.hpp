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

// Finite-difference verification of every probe loss on small random sentences.

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "hyperprobe/probes.hpp"

namespace hyperprobe::gradcheck {

struct Case {
  probes::Task task = probes::Task::distance;
  probes::Geometry geometry = probes::Geometry::poincare;
  probes::Nonlinearity nonlinearity = probes::Nonlinearity::none;
  bool two_layer = false;
  bool use_q = true;
  double curvature = 1.0;
  bool trainable_heads = true;

  std::string label() const;
};

struct Options {
  double tolerance = 1e-4;
  double step = 1e-5;
  std::uint64_t seed = 0;
  int sentences = 3;
  Eigen::Index input_dim = 6;
  Eigen::Index rank = 4;
  /// Applied to the flattened analytic gradient before comparison.
  std::function<void(std::vector<double>&)> corrupt;
};

struct CaseResult {
  Case spec;
  double max_rel_error = 0.0;
  std::string worst_param;
  std::size_t worst_offset = 0;
  std::size_t parameter_count = 0;
  bool passed = false;
};

struct Report {
  std::vector<CaseResult> cases;
  double max_rel_error = 0.0;
  bool passed = true;
};

/// Every task x geometry x nonlinearity x c in {0.1, 1}, plus the Q-bypass and
/// frozen-head variants.
std::vector<Case> default_cases();

CaseResult run_case(const Case& spec, const Options& options = {});
Report run(const std::vector<Case>& cases, const Options& options = {});

}  // namespace hyperprobe::gradcheck
