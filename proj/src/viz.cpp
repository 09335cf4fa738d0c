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


#include "hyperprobe/viz.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "hyperprobe/error.hpp"

namespace hyperprobe::viz {

namespace {

constexpr double kDiskFill = 0.98;

const char* kind_name(PointKind k) {
  switch (k) {
    case PointKind::token: return "token";
    case PointKind::positive_pole: return "pos";
    case PointKind::negative_pole: return "neg";
  }
  return "token";
}

PointKind parse_kind(const std::string& s) {
  if (s == "token") return PointKind::token;
  if (s == "pos") return PointKind::positive_pole;
  if (s == "neg") return PointKind::negative_pole;
  throw DataError("unknown scene point kind: " + s);
}

std::string escape_field(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\\': out += "\\\\"; break;
      default: out += ch;
    }
  }
  return out;
}

std::string unescape_field(const std::string& s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '\\' || i + 1 == s.size()) {
      out += s[i];
      continue;
    }
    const char next = s[++i];
    out += next == 't' ? '\t' : next == 'n' ? '\n' : next;
  }
  return out;
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> f;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    f.push_back(line.substr(start, tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return f;
}

int parse_int(const std::string& s) {
  std::size_t used = 0;
  int v = 0;
  try {
    v = std::stoi(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty()) throw DataError("bad integer in scene: " + s);
  return v;
}

double parse_double(const std::string& s) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty() || !std::isfinite(v)) {
    throw DataError("bad number in scene: " + s);
  }
  return v;
}

bool parse_flag(const std::string& s) {
  if (s == "0") return false;
  if (s == "1") return true;
  throw DataError("bad flag in scene: " + s);
}

std::string pca_note(const Pca& pca) {
  std::ostringstream os;
  os << std::setprecision(4) << "pca explained variance " << pca.explained[0] << " "
     << pca.explained[1];
  return os.str();
}

void place(Scene& scene, const Pca& pca, std::size_t offset) {
  for (Eigen::Index i = 0; i < pca.coords.rows(); ++i) {
    scene.points[offset + i].x = pca.coords(i, 0);
    scene.points[offset + i].y = pca.coords(i, 1);
  }
}

// Scales the plane by sqrt(c) and shrinks it into the unit disk if needed.
void fit_disk(Scene& scene, double sqrt_c) {
  double r = 0.0;
  for (auto& p : scene.points) {
    p.x *= sqrt_c;
    p.y *= sqrt_c;
    r = std::max(r, std::hypot(p.x, p.y));
  }
  if (r > kDiskFill) {
    for (auto& p : scene.points) {
      p.x *= kDiskFill / r;
      p.y *= kDiskFill / r;
    }
    scene.notes.push_back("coordinates rescaled into the unit disk");
  }
  scene.unit_disk = true;
}

const char* kBallCaveat =
    "pca of ball coordinates; planar distances do not preserve hyperbolic distances";

}  // namespace

Pca pca_project(const Eigen::MatrixXd& points) {
  const Eigen::Index m = points.rows(), k = points.cols();
  if (m < 2 || k < 1) throw UsageError("pca needs at least two points");
  if (!points.allFinite()) throw DataError("pca input is not finite");
  Pca out;
  out.mean = points.colwise().mean().transpose();
  const Eigen::MatrixXd centered = points.rowwise() - out.mean.transpose();
  if (centered.norm() <= 1e-12 * (1.0 + points.norm())) {
    throw DataError("pca input has rank 0 (all points identical)");
  }
  const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(m - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success) throw NumericalError("pca eigendecomposition failed");
  out.eigenvalues = eig.eigenvalues().reverse().cwiseMax(0.0);
  const Eigen::MatrixXd vecs = eig.eigenvectors().rowwise().reverse();

  out.components = Eigen::MatrixXd::Zero(k, 2);
  for (Eigen::Index j = 0; j < std::min<Eigen::Index>(2, k); ++j) {
    Eigen::VectorXd v = vecs.col(j);
    Eigen::Index arg = 0;
    for (Eigen::Index i = 1; i < k; ++i)
      if (std::abs(v(i)) > std::abs(v(arg))) arg = i;
    if (v(arg) < 0) v = -v;
    out.components.col(j) = v;
  }
  out.coords = centered * out.components;
  const double total = out.eigenvalues.sum();
  for (Eigen::Index j = 0; j < std::min<Eigen::Index>(2, k); ++j) {
    out.explained[j] = out.eigenvalues(j) / total;
  }
  return out;
}

Scene syntax_scene(const probes::ProbeModel& model, const data::SentenceRecord& record,
                   const data::PunctuationSet& punctuation) {
  if (record.size() < 2) throw DataError("sentence too short to plot");
  const Eigen::MatrixXd q = probes::project_sentence(model.probe, record.embedding);
  const Pca pca = pca_project(q);

  Scene scene;
  for (std::size_t i = 0; i < record.size(); ++i) {
    scene.text += (i ? " " : "") + record.tokens[i];
    scene.points.push_back({PointKind::token, record.tokens[i], 0.0, 0.0});
  }
  place(scene, pca, 0);
  scene.notes.push_back(pca_note(pca));
  if (const auto* pp = std::get_if<probes::PoincareProbeParams>(&model.probe)) {
    fit_disk(scene, pp->ball.c.sqrt());
    scene.notes.push_back(kBallCaveat);
  }

  const auto eligible = punctuation.eligible(record);
  const auto gold = eval::gold_edges(record, eligible);
  const auto predicted =
      eval::mst_decode(probes::predicted_distances(model.probe, record.embedding), eligible);
  std::set<eval::Edge> all(gold.begin(), gold.end());
  all.insert(predicted.begin(), predicted.end());
  for (const auto& e : all) {
    scene.edges.push_back({e.first, e.second,
                           std::binary_search(gold.begin(), gold.end(), e),
                           std::binary_search(predicted.begin(), predicted.end(), e)});
  }
  return scene;
}

Scene sentiment_scene(const probes::ProbeModel& model, const data::SentimentExample& example,
                      const SentimentSceneOptions& options) {
  if (!model.heads) throw UsageError("sentiment scene needs a sentiment probe");
  if (example.size() == 0) throw DataError("empty sentence");
  const auto& heads = *model.heads;
  const Eigen::MatrixXd q = probes::project_sentence(model.probe, example.embedding);
  const Eigen::Index t = q.rows();
  Eigen::MatrixXd all(t + 2, q.cols());
  all.topRows(t) = q;
  all.row(t) = heads.pos.transpose();
  all.row(t + 1) = heads.neg.transpose();
  const Pca pca = pca_project(all);

  Scene scene;
  for (std::size_t i = 0; i < example.size(); ++i) {
    scene.text += (i ? " " : "") + example.tokens[i];
    scene.points.push_back({PointKind::token, example.tokens[i], 0.0, 0.0});
  }
  scene.points.push_back({PointKind::positive_pole, "c_pos", 0.0, 0.0});
  scene.points.push_back({PointKind::negative_pole, "c_neg", 0.0, 0.0});
  place(scene, pca, 0);
  scene.notes.push_back(pca_note(pca));
  if (const auto* pp = std::get_if<probes::PoincareProbeParams>(&model.probe)) {
    fit_disk(scene, pp->ball.c.sqrt());
    scene.notes.push_back(kBallCaveat);
  }

  const double pole_gap = probes::pole_distances(model, heads.pos).second;
  const double threshold = options.significance * pole_gap;
  for (Eigen::Index i = 0; i < t; ++i) {
    const auto [to_pos, to_neg] = probes::pole_distances(model, q.row(i).transpose());
    // Equal distances go to the negative pole, as in prediction.
    const PointKind pole = to_pos < to_neg ? PointKind::positive_pole : PointKind::negative_pole;
    scene.connectors.push_back(
        {static_cast<int>(i), pole, std::abs(to_neg - to_pos) >= threshold});
  }
  std::ostringstream os;
  os << std::setprecision(4) << "connector threshold " << threshold << " ("
     << options.significance << " of pole distance)";
  scene.notes.push_back(os.str());
  return scene;
}

void write_scene_tsv(std::ostream& out, const Scene& scene) {
  out << "# hyperprobe scene v1\n";
  out << "text\t" << escape_field(scene.text) << "\n";
  out << "unit_disk\t" << (scene.unit_disk ? 1 : 0) << "\n";
  for (const auto& n : scene.notes) out << "note\t" << escape_field(n) << "\n";
  out << std::setprecision(17);
  for (const auto& p : scene.points) {
    out << "point\t" << kind_name(p.kind) << "\t" << p.x << "\t" << p.y << "\t"
        << escape_field(p.label) << "\n";
  }
  for (const auto& e : scene.edges) {
    out << "edge\t" << e.a << "\t" << e.b << "\t" << e.gold << "\t" << e.predicted << "\n";
  }
  for (const auto& c : scene.connectors) {
    out << "connector\t" << c.token << "\t" << kind_name(c.pole) << "\t" << c.significant
        << "\n";
  }
}

Scene read_scene_tsv(std::istream& in) {
  Scene scene;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    const auto f = split_tabs(line);
    const auto need = [&](std::size_t n) {
      if (f.size() != n) {
        throw DataError("scene line " + std::to_string(lineno) + ": expected " +
                        std::to_string(n) + " fields");
      }
    };
    if (f[0] == "text") {
      need(2);
      scene.text = unescape_field(f[1]);
    } else if (f[0] == "unit_disk") {
      need(2);
      scene.unit_disk = parse_flag(f[1]);
    } else if (f[0] == "note") {
      need(2);
      scene.notes.push_back(unescape_field(f[1]));
    } else if (f[0] == "point") {
      need(5);
      scene.points.push_back(
          {parse_kind(f[1]), unescape_field(f[4]), parse_double(f[2]), parse_double(f[3])});
    } else if (f[0] == "edge") {
      need(5);
      scene.edges.push_back({parse_int(f[1]), parse_int(f[2]), parse_flag(f[3]), parse_flag(f[4])});
    } else if (f[0] == "connector") {
      need(4);
      scene.connectors.push_back({parse_int(f[1]), parse_kind(f[2]), parse_flag(f[3])});
    } else {
      throw DataError("scene line " + std::to_string(lineno) + ": unknown record " + f[0]);
    }
  }
  const int n = static_cast<int>(scene.points.size());
  for (const auto& e : scene.edges) {
    if (e.a < 0 || e.b < 0 || e.a >= n || e.b >= n) throw DataError("scene edge out of range");
  }
  for (const auto& c : scene.connectors) {
    if (c.token < 0 || c.token >= n || c.pole == PointKind::token) {
      throw DataError("scene connector out of range");
    }
  }
  return scene;
}

std::string render_svg(const Scene& scene, const RenderOptions& options) {
  const double size = options.size, margin = options.margin;
  if (size <= 2 * margin) throw UsageError("render size must exceed twice the margin");
  double range = 1.0;
  if (!scene.unit_disk) {
    double r = 0.0;
    for (const auto& p : scene.points) r = std::max({r, std::abs(p.x), std::abs(p.y)});
    range = r > 0.0 ? 1.05 * r : 1.0;
  }
  const double span = size - 2 * margin;
  const auto px = [&](double x) { return margin + (x + range) / (2 * range) * span; };
  const auto py = [&](double y) { return margin + (range - y) / (2 * range) * span; };

  const auto find_pole = [&](PointKind kind) -> const ScenePoint* {
    for (const auto& p : scene.points)
      if (p.kind == kind) return &p;
    return nullptr;
  };

  std::ostringstream os;
  os << std::fixed << std::setprecision(2);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << options.size << "\" height=\""
     << options.size << "\" viewBox=\"0 0 " << options.size << " " << options.size << "\">\n";
  os << "<desc>" << escape_xml(scene.text);
  for (const auto& n : scene.notes) os << "; " << escape_xml(n);
  os << "</desc>\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
  if (scene.unit_disk) {
    os << "<circle cx=\"" << px(0) << "\" cy=\"" << py(0) << "\" r=\"" << span / 2
       << "\" fill=\"none\" stroke=\"#888888\" stroke-width=\"1\"/>\n";
  }
  for (const auto& e : scene.edges) {
    const auto& a = scene.points.at(e.a);
    const auto& b = scene.points.at(e.b);
    const char* color = e.gold && e.predicted ? "#1b7837" : e.gold ? "#999999" : "#d6604d";
    os << "<line x1=\"" << px(a.x) << "\" y1=\"" << py(a.y) << "\" x2=\"" << px(b.x)
       << "\" y2=\"" << py(b.y) << "\" stroke=\"" << color << "\" stroke-width=\"1.5\"";
    if (!e.predicted) os << " stroke-dasharray=\"4 3\"";
    os << "/>\n";
  }
  for (const auto& c : scene.connectors) {
    const auto& a = scene.points.at(c.token);
    const ScenePoint* pole = find_pole(c.pole);
    if (!pole) continue;
    const char* color = c.pole == PointKind::positive_pole ? "#2166ac" : "#b2182b";
    os << "<line x1=\"" << px(a.x) << "\" y1=\"" << py(a.y) << "\" x2=\"" << px(pole->x)
       << "\" y2=\"" << py(pole->y) << "\" stroke=\"" << color << "\" stroke-width=\"1\"";
    if (!c.significant) os << " stroke-dasharray=\"3 3\"";
    os << "/>\n";
  }
  for (const auto& p : scene.points) {
    const bool token = p.kind == PointKind::token;
    const char* fill = token ? "#333333" : p.kind == PointKind::positive_pole ? "#2166ac" : "#b2182b";
    os << "<circle cx=\"" << px(p.x) << "\" cy=\"" << py(p.y) << "\" r=\"" << (token ? 3 : 6)
       << "\" fill=\"" << fill << "\"/>\n";
    os << "<text x=\"" << px(p.x) + 5 << "\" y=\"" << py(p.y) - 5
       << "\" font-family=\"sans-serif\" font-size=\"11\">" << escape_xml(p.label)
       << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace hyperprobe::viz
