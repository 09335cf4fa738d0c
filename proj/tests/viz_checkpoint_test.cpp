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


#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "hyperprobe/checkpoint.hpp"
#include "hyperprobe/error.hpp"
#include "hyperprobe/synthetic.hpp"
#include "hyperprobe/train.hpp"
#include "hyperprobe/viz.hpp"
#include "test_support.hpp"

using namespace hyperprobe;
using Eigen::MatrixXd;

namespace {

std::string to_bytes(const checkpoint::Checkpoint& c) {
  std::ostringstream out(std::ios::binary);
  checkpoint::write(out, c);
  return out.str();
}

checkpoint::Checkpoint from_bytes(const std::string& s) {
  std::istringstream in(s, std::ios::binary);
  return checkpoint::read(in);
}

checkpoint::Checkpoint trained(probes::ModelSpec spec) {
  checkpoint::Checkpoint c;
  c.model = probes::init_model(spec, 4);
  c.optimizer = train::make_optimizer(c.model, 0.01);
  testkit::Gen gen(3);
  auto grad = probes::zeros_like(c.model);
  for (auto& p : probes::parameters(grad))
    if (p.trainable)
      for (double& v : p.values) v = gen.normal();
  train::apply_gradient(c.model, grad, c.optimizer);
  c.metadata = {{"seed", "4"}, {"note", "tab\tand\nnewline"}};
  return c;
}

std::vector<probes::ModelSpec> all_kinds() {
  std::vector<probes::ModelSpec> specs;
  for (auto task : {probes::Task::distance, probes::Task::joint, probes::Task::sentiment}) {
    probes::ModelSpec p{.task = task, .input_dim = 5, .rank = 3, .curvature = 0.5};
    specs.push_back(p);
    p.use_q = false;
    p.trainable_heads = false;
    specs.push_back(p);
    probes::ModelSpec e{.task = task,
                        .geometry = probes::Geometry::euclidean,
                        .input_dim = 5,
                        .rank = 3,
                        .nonlinearity = probes::Nonlinearity::tanh,
                        .two_layer = true};
    specs.push_back(e);
    e.two_layer = false;
    e.nonlinearity = probes::Nonlinearity::none;
    specs.push_back(e);
  }
  return specs;
}

viz::Scene fixture_scene() {
  viz::Scene s;
  s.text = "the <cat> sat";
  s.unit_disk = true;
  s.points = {{viz::PointKind::token, "the", -0.5, 0.1},
              {viz::PointKind::token, "<cat>", 0.0, 0.0},
              {viz::PointKind::token, "sat", 0.4, -0.3},
              {viz::PointKind::positive_pole, "c_pos", 0.7, 0.7},
              {viz::PointKind::negative_pole, "c_neg", -0.7, -0.7}};
  s.edges = {{0, 1, true, true}, {1, 2, true, false}, {0, 2, false, true}};
  s.connectors = {{0, viz::PointKind::negative_pole, false},
                  {2, viz::PointKind::positive_pole, true}};
  s.notes = {"fixture"};
  return s;
}

std::size_t count(const std::string& hay, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = hay.find(needle); p != std::string::npos; p = hay.find(needle, p + 1)) ++n;
  return n;
}

}  // namespace

TEST(Checkpoint, RoundTripIsExactForEveryProbeKind) {
  for (const auto& spec : all_kinds()) {
    const auto c = trained(spec);
    const auto bytes = to_bytes(c);
    const auto back = from_bytes(bytes);
    EXPECT_EQ(to_bytes(back), bytes);
    EXPECT_EQ(probes::flatten_trainable(back.model), probes::flatten_trainable(c.model));
    EXPECT_EQ(back.model.task, c.model.task);
    EXPECT_EQ(back.model.geometry(), c.model.geometry());
    EXPECT_EQ(back.metadata, c.metadata);
    ASSERT_EQ(back.optimizer.size(), c.optimizer.size());
    for (std::size_t i = 0; i < c.optimizer.size(); ++i) {
      EXPECT_EQ(back.optimizer[i].name, c.optimizer[i].name);
      EXPECT_EQ(back.optimizer[i].state.index(), c.optimizer[i].state.index());
      EXPECT_EQ(back.optimizer[i].adam().step_count, 1u);
      EXPECT_EQ(back.optimizer[i].adam().second_moment, c.optimizer[i].adam().second_moment);
    }
  }
}

TEST(Checkpoint, HeaderLayout) {
  probes::ModelSpec spec{.task = probes::Task::depth, .input_dim = 7, .rank = 2, .curvature = 0.25};
  checkpoint::Checkpoint c;
  c.model = probes::init_model(spec, 0);
  const auto b = to_bytes(c);
  ASSERT_GE(b.size(), 40u);
  EXPECT_EQ(b.substr(0, 4), "HPCK");
  EXPECT_EQ(b[4], 1);  // version, little-endian
  EXPECT_EQ(b[8], 1);  // depth
  EXPECT_EQ(b[9], 1);  // poincare
  EXPECT_EQ(b[12], 7);
  EXPECT_EQ(b[16], 2);
  double c_value;
  std::memcpy(&c_value, b.data() + 20, 8);
  EXPECT_EQ(c_value, 0.25);
  // header 44 + P (8 + 2*7*8) + Q (8 + 2*2*8) + 2 empty counts
  EXPECT_EQ(b.size(), 44u + 8 + 112 + 8 + 32 + 8);
}

TEST(Checkpoint, ResumedOptimizerContinuesIdentically) {
  const auto c = trained({.task = probes::Task::sentiment, .input_dim = 5, .rank = 3});
  auto a = c;
  auto b = from_bytes(to_bytes(c));
  testkit::Gen gen(9);
  auto grad = probes::zeros_like(c.model);
  for (auto& p : probes::parameters(grad))
    if (p.trainable)
      for (double& v : p.values) v = gen.normal();
  train::apply_gradient(a.model, grad, a.optimizer);
  train::apply_gradient(b.model, grad, b.optimizer);
  EXPECT_EQ(probes::flatten_trainable(a.model), probes::flatten_trainable(b.model));
}

TEST(Checkpoint, CorruptionIsDataError) {
  const auto good = to_bytes(trained({.task = probes::Task::sentiment, .input_dim = 5, .rank = 3}));
  EXPECT_THROW(from_bytes("HPCX" + good.substr(4)), DataError);
  auto version = good;
  version[4] = 9;
  EXPECT_THROW(from_bytes(version), DataError);
  for (std::size_t cut : {std::size_t{0}, std::size_t{10}, good.size() / 2, good.size() - 1}) {
    EXPECT_THROW(from_bytes(good.substr(0, cut)), DataError) << cut;
  }
  EXPECT_THROW(from_bytes(good + "x"), DataError);
  auto task = good;
  task[8] = 7;
  EXPECT_THROW(from_bytes(task), DataError);
  auto nan = good;
  std::memset(nan.data() + 44 + 8, 0xff, 8);  // first entry of P
  EXPECT_THROW(from_bytes(nan), DataError);
  EXPECT_THROW(checkpoint::read(std::filesystem::path("/nonexistent/x.hpck")), DataError);
}

TEST(Checkpoint, FileRoundTrip) {
  const auto c = trained({.input_dim = 4, .rank = 2});
  const auto path = std::filesystem::temp_directory_path() / "hyperprobe_ckpt_test.hpck";
  checkpoint::write(path, c);
  const auto back = checkpoint::read(path);
  std::filesystem::remove(path);
  EXPECT_EQ(to_bytes(back), to_bytes(c));
}

TEST(Pca, PlanarPointsExplainAllVariance) {
  testkit::Gen gen(1);
  const MatrixXd basis = gen.gaussian(6, 2);
  const MatrixXd pts = gen.gaussian(30, 2) * basis.transpose() + MatrixXd::Ones(30, 6);
  const auto pca = viz::pca_project(pts);
  EXPECT_NEAR(pca.explained[0] + pca.explained[1], 1.0, 1e-12);
  EXPECT_GE(pca.explained[0], pca.explained[1]);
}

TEST(Pca, ReconstructionErrorIsTrailingSpectrum) {
  testkit::Gen gen(2);
  for (int trial = 0; trial < 20; ++trial) {
    const int m = gen.integer(3, 40), k = gen.integer(2, 8);
    const MatrixXd pts = gen.gaussian(m, k) * gen.gaussian(k, k);
    const auto pca = viz::pca_project(pts);
    const MatrixXd centered = pts.rowwise() - pca.mean.transpose();
    const double err =
        (centered - pca.coords * pca.components.transpose()).squaredNorm() / (m - 1);
    // Oracle: full spectrum from an independent SVD.
    Eigen::JacobiSVD<MatrixXd> svd(centered);
    double trailing = 0.0;
    for (Eigen::Index j = 2; j < svd.singularValues().size(); ++j)
      trailing += svd.singularValues()(j) * svd.singularValues()(j) / (m - 1);
    EXPECT_NEAR(err, trailing, 1e-9 * (1.0 + trailing));
  }
}

TEST(Pca, ProjectedCovarianceIsDiagonal) {
  testkit::Gen gen(3);
  for (int trial = 0; trial < 20; ++trial) {
    const MatrixXd pts = gen.gaussian(gen.integer(3, 30), gen.integer(2, 10));
    const auto pca = viz::pca_project(pts);
    const MatrixXd cov = pca.coords.transpose() * pca.coords / (pts.rows() - 1);
    EXPECT_NEAR(cov(0, 1), 0.0, 1e-9);
    EXPECT_NEAR((pca.components.transpose() * pca.components - Eigen::Matrix2d::Identity()).norm(),
                0.0, 1e-12);
  }
}

TEST(Pca, SignRuleMakesMirroredDataAgree) {
  testkit::Gen gen(4);
  const MatrixXd pts = gen.gaussian(12, 4);
  const auto a = viz::pca_project(pts);
  const auto b = viz::pca_project(-pts);
  // Mirroring negates the centered data, so the oriented components agree and
  // the coordinates flip.
  EXPECT_LT((a.components - b.components).norm(), 1e-10);
  EXPECT_LT((a.coords + b.coords).norm(), 1e-10);
  for (int j = 0; j < 2; ++j) {
    Eigen::Index arg;
    a.components.col(j).cwiseAbs().maxCoeff(&arg);
    EXPECT_GT(a.components(arg, j), 0.0);
  }
}

TEST(Pca, DegenerateInputs) {
  EXPECT_THROW(viz::pca_project(MatrixXd::Ones(5, 3)), DataError);
  EXPECT_THROW(viz::pca_project(MatrixXd::Ones(1, 3)), UsageError);
  MatrixXd line(3, 1);
  line << 1, 2, 4;
  const auto pca = viz::pca_project(line);
  EXPECT_DOUBLE_EQ(pca.explained[0], 1.0);
  EXPECT_EQ(pca.coords.col(1), Eigen::VectorXd::Zero(3));
}

TEST(Scene, SyntaxSceneHasGoldAndPredictedEdges) {
  synthetic::SyntaxOptions so;
  so.sentences = 1;
  so.input_dim = 20;
  const auto corpus = synthetic::make_syntax_corpus(so);
  const auto& record = corpus.examples[0].record;
  const auto model = probes::init_model({.input_dim = 20, .rank = 4}, 0);
  const auto scene = viz::syntax_scene(model, record);
  EXPECT_EQ(scene.points.size(), record.size());
  EXPECT_TRUE(scene.unit_disk);
  std::size_t gold = 0, predicted = 0;
  for (const auto& e : scene.edges) gold += e.gold, predicted += e.predicted;
  EXPECT_EQ(gold, record.size() - 1);
  EXPECT_EQ(predicted, record.size() - 1);
  for (const auto& p : scene.points) EXPECT_LT(std::hypot(p.x, p.y), 1.0);
}

TEST(Scene, SentimentSceneAddsPolesAndConnectors) {
  const auto corpus = synthetic::make_sentiment_corpus({.sentences = 2, .input_dim = 8});
  auto model = probes::init_model(
      {.task = probes::Task::sentiment, .input_dim = 8, .rank = 3, .init_scale = 0.5}, 1);
  const auto scene = viz::sentiment_scene(model, corpus[0]);
  EXPECT_EQ(scene.points.size(), corpus[0].size() + 2);
  EXPECT_EQ(scene.connectors.size(), corpus[0].size());
  EXPECT_EQ(scene.points[corpus[0].size()].kind, viz::PointKind::positive_pole);
  // Everything dashed at threshold 1 unless a token sits on a pole.
  const auto strict = viz::sentiment_scene(model, corpus[0], {.significance = 1.0});
  for (const auto& c : strict.connectors) EXPECT_FALSE(c.significant);
  const auto loose = viz::sentiment_scene(model, corpus[0], {.significance = 0.0});
  for (const auto& c : loose.connectors) EXPECT_TRUE(c.significant);
  const auto svg = viz::render_svg(scene);
  EXPECT_EQ(count(svg, "<line"), corpus[0].size());
}

TEST(Scene, TsvRoundTrip) {
  const auto s = fixture_scene();
  std::ostringstream out;
  viz::write_scene_tsv(out, s);
  std::istringstream in(out.str());
  const auto back = viz::read_scene_tsv(in);
  std::ostringstream again;
  viz::write_scene_tsv(again, back);
  EXPECT_EQ(again.str(), out.str());
  EXPECT_EQ(back.text, s.text);
  std::istringstream bad("edge\t0\t9\t1\t1\n");
  EXPECT_THROW(viz::read_scene_tsv(bad), DataError);
}

TEST(Render, EdgeCounts) {
  viz::Scene s;
  s.points = {{viz::PointKind::token, "a", 0, 0}, {viz::PointKind::token, "b", 1, 1}};
  EXPECT_EQ(count(viz::render_svg(s), "<line"), 0u);
  EXPECT_EQ(count(viz::render_svg(s), "<circle"), 2u);
  s.edges = {{0, 1, true, true}};
  EXPECT_EQ(count(viz::render_svg(s), "<line"), 1u);
  EXPECT_EQ(count(viz::render_svg(s), "r=\"200.00\""), 0u);
  s.unit_disk = true;
  EXPECT_EQ(count(viz::render_svg(s), "r=\"200.00\""), 1u);
}

namespace {

const char kGoldenHeader[] =
    "<!--\n"
    "  Copyright 2026 The hyperprobe Authors.\n"
    "\n"
    "  Licensed under the Apache License, Version 2.0 (the \"License\");\n"
    "  you may not use this file except in compliance with the License.\n"
    "  You may obtain a copy of the License at\n"
    "\n"
    "     http://www.apache.org/licenses/LICENSE-2.0\n"
    "\n"
    "  Unless required by applicable law or agreed to in writing, software\n"
    "  distributed under the License is distributed on an \"AS IS\" BASIS,\n"
    "  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.\n"
    "  See the License for the specific language governing permissions and\n"
    "  limitations under the License.\n"
    "-->\n";

}  // namespace

TEST(Render, MatchesGoldenFile) {
  const std::string path = std::string(HYPERPROBE_TEST_DATA_DIR) + "/scene_golden.svg";
  const auto svg = viz::render_svg(fixture_scene());
  if (std::getenv("HYPERPROBE_UPDATE_GOLDEN")) {
    std::ofstream(path, std::ios::binary) << kGoldenHeader << svg;
  }
  std::ifstream in(path, std::ios::binary);
  ASSERT_TRUE(in) << path;
  std::ostringstream golden;
  golden << in.rdbuf();
  // The stored file carries a license comment ahead of the rendered document.
  std::string expected = golden.str();
  ASSERT_TRUE(expected.starts_with("<!--"));
  expected.erase(0, expected.find("-->\n") + 4);
  EXPECT_EQ(svg, expected);
  EXPECT_EQ(svg, viz::render_svg(fixture_scene()));
  EXPECT_EQ(count(svg, "stroke-dasharray"), 2u);
  EXPECT_NE(svg.find("&lt;cat&gt;"), std::string::npos);
}
