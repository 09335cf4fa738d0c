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


/** Figure export: PCA of probed coordinates, 2-D scenes with tree edges or
 * sentiment-pole connectors, a TSV form of a scene and a deterministic SVG
 * renderer. */

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hyperprobe/data.hpp"
#include "hyperprobe/eval.hpp"
#include "hyperprobe/probes.hpp"

namespace hyperprobe::viz {

struct Pca {
  Eigen::MatrixXd coords;      ///< m x 2
  Eigen::MatrixXd components;  ///< k x 2, orthonormal columns
  Eigen::VectorXd mean;
  Eigen::VectorXd eigenvalues;  ///< covariance spectrum, descending
  double explained[2] = {0.0, 0.0};  ///< variance fraction per component
};

/// Rows are points. Each component is oriented so that its largest-magnitude
/// entry is positive (first such entry on ties). Needs at least two points
/// that are not all identical.
Pca pca_project(const Eigen::MatrixXd& points);

enum class PointKind { token, positive_pole, negative_pole };

struct ScenePoint {
  PointKind kind = PointKind::token;
  std::string label;
  double x = 0.0, y = 0.0;
};

struct SceneEdge {
  int a = 0, b = 0;
  bool gold = false;
  bool predicted = false;
};

/// Token to its closer pole, closeness measured in the probe metric.
struct Connector {
  int token = 0;
  PointKind pole = PointKind::positive_pole;
  bool significant = true;
};

struct Scene {
  std::string text;
  bool unit_disk = false;  ///< coordinates renormalized into the unit disk
  std::vector<ScenePoint> points;
  std::vector<SceneEdge> edges;
  std::vector<Connector> connectors;
  std::vector<std::string> notes;
};

/// Tokens of one parsed sentence with gold and MST-predicted edges.
Scene syntax_scene(const probes::ProbeModel& model, const data::SentenceRecord& record,
                   const data::PunctuationSet& punctuation = {});

struct SentimentSceneOptions {
  /// Connectors whose pole-distance gap is below this fraction of the
  /// distance between the poles are drawn dashed.
  double significance = 0.05;
};

/// Tokens plus the two poles.
Scene sentiment_scene(const probes::ProbeModel& model, const data::SentimentExample& example,
                      const SentimentSceneOptions& options = {});

void write_scene_tsv(std::ostream& out, const Scene& scene);
Scene read_scene_tsv(std::istream& in);

struct RenderOptions {
  int size = 480;
  int margin = 40;
};

/// SVG document; a pure function of its inputs.
std::string render_svg(const Scene& scene, const RenderOptions& options = {});

}  // namespace hyperprobe::viz
