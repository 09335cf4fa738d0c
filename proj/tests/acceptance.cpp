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

// End-to-end acceptance run. One PASS/FAIL/SKIP line per criterion; the exit
// status is nonzero when any criterion fails.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <thread>
#include <string>
#include <vector>

#include "hyperprobe/error.hpp"
#include "hyperprobe/eval.hpp"
#include "hyperprobe/geometry.hpp"
#include "hyperprobe/gradcheck.hpp"
#include "hyperprobe/optim.hpp"
#include "hyperprobe/synthetic.hpp"
#include "hyperprobe/train.hpp"
#include "json.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;
using namespace hyperprobe;
using geometry::Ball;
using geometry::BallPoint;
using geometry::Matrix;
using geometry::TangentVector;
using geometry::Vector;

namespace {

// Pinned tolerances and budgets.
constexpr int kGeometryCases = 1000;
constexpr double kIdentityTol = 1e-12;
constexpr double kRoundTripTol = 1e-9;
constexpr double kTriangleSlack = 1e-9;
constexpr double kGeometryBudget = 10.0;
constexpr double kLimitCurvature = 1e-8;
constexpr double kLimitTol = 1e-3;
constexpr double kGradTol = 1e-4;
constexpr double kGradBudget = 60.0;
constexpr int kMstMatrices = 200;
constexpr int kMstTrees = 500;
constexpr double kRecoverMin = 0.95;
constexpr double kRecoverLoss = 0.05;
constexpr double kRecoverBudget = 300.0;
constexpr double kSentimentMin = 0.95;
constexpr int kSoakSteps = 10000;
constexpr double kUuasTarget = 83.7, kUuasBand = 1.5;
constexpr double kDsprTarget = 0.88, kDsprBand = 0.02;
constexpr double kRootTarget = 91.3, kRootBand = 1.5;
constexpr double kSentTarget = 84.9, kSentBand = 1.5;

enum class Verdict { pass, fail, skip };

struct Outcome {
  Verdict verdict = Verdict::pass;
  std::string detail;
};

class Clock {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* pattern, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, pattern, args...);
  return buf;
}

// Counts violations of one property over seeded random cases.
struct Property {
  std::string name;
  int failures = 0;
  double worst = 0.0;

  void check(double error, double tol) {
    worst = std::max(worst, error);
    if (!(error <= tol)) ++failures;
  }
};

Outcome geometry_identities() {
  const Clock clock;
  const double curvatures[] = {0.1, 0.5, 1.0, 2.0};
  testkit::Gen gen(1001);
  Property left_identity{"left identity"}, left_inverse{"left inverse"},
      exp_log{"log(exp(v))"}, log_exp{"exp(log(y))"}, symmetry{"symmetry"},
      triangle{"triangle"}, matvec_identity{"matvec identity"}, matvec_zero{"matvec zero"};

  for (int i = 0; i < kGeometryCases; ++i) {
    const double c = curvatures[i % 4];
    const Ball ball(c);
    const Eigen::Index k = gen.integer(1, 10);
    const BallPoint x(gen.ball_point(k, c, 0.99), ball);
    const BallPoint y(gen.ball_point(k, c, 0.99), ball);
    const BallPoint z(gen.ball_point(k, c, 0.99), ball);
    const BallPoint o = BallPoint::origin(k, ball);

    left_identity.check((geometry::mobius_add(o, y).coords() - y.coords()).norm(), kIdentityTol);
    left_inverse.check(geometry::mobius_add(-x, x).coords().norm(), kIdentityTol);

    // Round trips stay away from the boundary, where exp saturates.
    const BallPoint xr(gen.ball_point(k, c, 0.9), ball);
    const BallPoint yr(gen.ball_point(k, c, 0.9), ball);
    const Vector v = gen.gaussian(k).normalized() * gen.uniform(0.0, 3.0) /
                     geometry::conformal_factor(xr);
    exp_log.check(
        (geometry::log_map(xr, geometry::exp_map(xr, TangentVector(v))).coords() - v).norm(),
        kRoundTripTol);
    log_exp.check((geometry::exp_map(xr, geometry::log_map(xr, yr)).coords() - yr.coords()).norm(),
                  kRoundTripTol);

    const double dxy = geometry::distance(x, y);
    symmetry.check(std::abs(dxy - geometry::distance(y, x)), kIdentityTol);
    triangle.check(
        std::max(0.0, geometry::distance(x, z) - dxy - geometry::distance(y, z)), kTriangleSlack);

    matvec_identity.check(
        (geometry::mobius_matvec(Matrix::Identity(k, k), x).coords() - x.coords()).norm(),
        kIdentityTol);
    // Each zero branch must return the origin exactly.
    const Matrix m = gen.gaussian(gen.integer(1, 6), k);
    const Vector xn = x.coords().normalized();
    const Matrix killer = m - (m * xn) * xn.transpose();
    double zero_err = geometry::mobius_matvec(Matrix::Zero(m.rows(), k), x).coords().norm();
    zero_err += geometry::mobius_matvec(m, o).coords().norm();
    if (k > 1) zero_err += geometry::mobius_matvec(killer, x).coords().norm() > 1e-12 ? 1.0 : 0.0;
    matvec_zero.check(zero_err, 0.0);
  }
  const double elapsed = clock.seconds();

  Outcome out;
  std::string worst;
  for (const Property* p : {&left_identity, &left_inverse, &exp_log, &log_exp, &symmetry, &triangle,
                            &matvec_identity, &matvec_zero}) {
    if (p->failures > 0) {
      out.verdict = Verdict::fail;
      worst += fmt(" %s: %d bad (worst %.3g);", p->name.c_str(), p->failures, p->worst);
    }
  }
  if (elapsed >= kGeometryBudget) out.verdict = Verdict::fail;
  out.detail = fmt("8 properties x %d cases, %.2f s", kGeometryCases, elapsed) + worst;
  return out;
}

Outcome curvature_limit() {
  testkit::Gen gen(1002);
  const Ball ball(kLimitCurvature);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const Eigen::Index k = gen.integer(1, 10);
    const Vector x = gen.gaussian(k), y = gen.gaussian(k);
    const double d = geometry::distance(BallPoint(x, ball), BallPoint(y, ball));
    const double e = 2.0 * (x - y).norm();
    worst = std::max(worst, std::abs(d - e) / e);
  }
  return {worst < kLimitTol ? Verdict::pass : Verdict::fail,
          fmt("c = %g, 1000 pairs, max relative deviation %.3g", kLimitCurvature, worst)};
}

Outcome gradient_gate() {
  const Clock clock;
  const auto cases = gradcheck::default_cases();
  double worst = 0.0;
  std::string worst_label;
  bool passed = true;
  for (std::uint64_t seed : {0, 1, 2}) {
    gradcheck::Options options;
    options.seed = seed;
    options.tolerance = kGradTol;
    const auto report = gradcheck::run(cases, options);
    passed = passed && report.passed;
    for (const auto& r : report.cases) {
      if (r.max_rel_error > worst) {
        worst = r.max_rel_error;
        worst_label = r.spec.label();
      }
    }
  }
  const double elapsed = clock.seconds();
  passed = passed && worst < kGradTol && elapsed < kGradBudget;
  return {passed ? Verdict::pass : Verdict::fail,
          fmt("%zu variants x 3 seeds, max relative error %.3g (%s), %.2f s", cases.size(), worst,
              worst_label.c_str(), elapsed)};
}

Outcome mst_oracle() {
  testkit::Gen gen(1004);
  int weight_mismatches = 0;
  for (int trial = 0; trial < kMstMatrices; ++trial) {
    const int n = gen.integer(2, 6);
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) w(i, j) = w(j, i) = trial % 2 ? gen.uniform(0, 10) : gen.integer(0, 3);
    }
    const auto edges = eval::mst_decode(w, std::vector<bool>(n, true));
    if (std::abs(eval::tree_weight(w, edges) - testkit::brute_force_min_tree(w)) > 1e-12) {
      ++weight_mismatches;
    }
  }
  std::size_t hit = 0, total = 0;
  for (int trial = 0; trial < kMstTrees; ++trial) {
    const auto r = testkit::record_from_heads(gen.random_heads(gen.integer(2, 25)));
    const std::vector<bool> all(r.size(), true);
    const auto gold = eval::gold_edges(r, all);
    auto pred = eval::mst_decode(data::tree_metrics(r).dist.cast<double>(), all);
    for (const auto& e : pred) hit += std::count(gold.begin(), gold.end(), e);
    total += gold.size();
  }
  const double uuas = static_cast<double>(hit) / static_cast<double>(total);
  return {weight_mismatches == 0 && uuas == 1.0 ? Verdict::pass : Verdict::fail,
          fmt("%d/%d matrices match brute force; UUAS %.4f on %d gold metrics",
              kMstMatrices - weight_mismatches, kMstMatrices, uuas, kMstTrees)};
}

Outcome recoverability() {
  const Clock clock;
  const auto corpus = synthetic::make_syntax_corpus({});
  double worst_fit = 0.0;
  for (double l : corpus.fit_losses) worst_fit = std::max(worst_fit, l);

  train::TrainConfig cfg;
  cfg.rank = 16;
  cfg.use_q = false;
  cfg.lr = 0.01;
  cfg.batch_size = 10;
  cfg.max_epochs = 40;
  cfg.threads = 1;
  const auto result = train::train_syntax(cfg, corpus.examples, corpus.examples);
  const auto report = eval::evaluate_syntax(result.model, corpus.examples);
  const double elapsed = clock.seconds();
  const double uuas = report.metrics.at("uuas"), dspr = report.metrics.at("dspr");
  const bool ok = !result.diverged && worst_fit < 0.01 && uuas >= kRecoverMin &&
                  dspr >= kRecoverMin && result.best_dev_loss < kRecoverLoss &&
                  elapsed < kRecoverBudget;
  return {ok ? Verdict::pass : Verdict::fail,
          fmt("200 sentences, n=128, k=16: UUAS %.4f, DSpr %.4f, dev loss %.4f, worst fit %.6f, "
              "%zu epochs, %.1f s",
              uuas, dspr, result.best_dev_loss, worst_fit, result.log.size(), elapsed)};
}

bool heads_gradient_is_zero(const probes::ProbeModel& model,
                            const std::vector<data::SentimentExample>& corpus) {
  std::vector<const data::SentimentExample*> batch;
  for (const auto& ex : corpus) batch.push_back(&ex);
  const auto lg = probes::sentiment_loss(model, batch);
  if (!lg.grad.heads) return true;
  return (lg.grad.heads->pos.array() == 0.0).all() && (lg.grad.heads->neg.array() == 0.0).all();
}

Outcome planted_sentiment() {
  synthetic::SentimentOptions train_opts;
  train_opts.seed = 1;
  synthetic::SentimentOptions dev_opts = train_opts;
  dev_opts.sentences = 200;
  dev_opts.seed = 2;
  const auto train_set = synthetic::make_sentiment_corpus(train_opts);
  const auto dev_set = synthetic::make_sentiment_corpus(dev_opts);

  std::string detail;
  bool ok = true;
  for (auto geometry : {probes::Geometry::poincare, probes::Geometry::euclidean}) {
    for (bool trainable : {true, false}) {
      train::TrainConfig cfg;
      cfg.task = probes::Task::sentiment;
      cfg.geometry = geometry;
      cfg.rank = 16;
      cfg.trainable_heads = trainable;
      const auto r = train::train_sentiment(cfg, train_set, dev_set);
      const double acc = eval::evaluate_sentiment(r.model, dev_set).metrics.at("accuracy");
      ok = ok && !r.diverged && acc >= kSentimentMin;
      detail += fmt("%s%s %s %.3f", detail.empty() ? "" : ", ", probes::to_string(geometry),
                    trainable ? "trainable" : "fixed", acc);
      if (!trainable) {
        // Frozen poles: no gradient reaches them and they never move.
        const auto init = probes::fixed_heads(geometry, cfg.rank, Ball(cfg.curvature), false);
        const bool frozen = heads_gradient_is_zero(r.model, train_set) &&
                            r.model.heads->pos == init.pos && r.model.heads->neg == init.neg;
        ok = ok && frozen;
        if (!frozen) detail += " (meta-embedding gradient nonzero)";
      }
    }
  }
  return {ok ? Verdict::pass : Verdict::fail, "dev accuracy: " + detail};
}

Outcome ball_soak() {
  testkit::Gen gen(1007);
  long violations = 0;
  double max_scaled = 0.0;
  for (double c : {0.1, 1.0, 2.0}) {
    const Ball ball(c);
    Vector x = gen.ball_point(8, c, 0.5);
    auto state = optim::RiemannianAdamState::fresh(8, {.lr = 0.5});
    for (int step = 0; step < kSoakSteps; ++step) {
      // Outward pressure plus periodic huge kicks and sign flips.
      Vector g = -x * gen.uniform(0.0, 1e6) + gen.gaussian(8) * (step % 7 == 0 ? 1e8 : 1.0);
      if (step % 11 == 0) g = -g * 1e4;
      optim::riemannian_adam_step({x.data(), 8}, {g.data(), 8}, ball, state);
      const double s = c * x.squaredNorm();
      max_scaled = std::max(max_scaled, s);
      if (!(s < 1.0 - ball.ball_eps) || !x.allFinite()) ++violations;
    }
  }
  return {violations == 0 ? Verdict::pass : Verdict::fail,
          fmt("3 x %d steps, %ld violations, max c|x|^2 = %.15f", kSoakSteps, violations,
              max_scaled)};
}

// ---- CLI determinism -------------------------------------------------------

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd =
      "\"" HYPERPROBE_CLI "\" " + args + " >>\"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// Every artifact byte for byte; manifests agree except for timestamps, wall
// time and the output directory.
std::string compare_dirs(const fs::path& a, const fs::path& b) {
  std::vector<std::string> names;
  for (const auto& entry : fs::directory_iterator(a)) names.push_back(entry.path().filename());
  std::sort(names.begin(), names.end());
  std::size_t count_b = 0;
  for ([[maybe_unused]] const auto& entry : fs::directory_iterator(b)) ++count_b;
  if (names.empty() || count_b != names.size()) return "different file sets";
  for (const auto& name : names) {
    if (!fs::exists(b / name)) return name + " missing";
    if (name.ends_with("manifest.json")) {
      auto ma = nlohmann::json::parse(slurp(a / name)), mb = nlohmann::json::parse(slurp(b / name));
      for (auto* m : {&ma, &mb}) {
        m->erase("started_at");
        m->erase("finished_at");
        if (m->contains("config")) m->at("config").erase("out");
        if (m->contains("summary") && m->at("summary").is_object()) {
          m->at("summary").erase("wall_seconds");
        }
      }
      if (ma != mb) return name + " differs";
    } else if (slurp(a / name) != slurp(b / name)) {
      return name + " differs";
    }
  }
  return {};
}

Outcome cli_determinism() {
  const fs::path root = fs::temp_directory_path() / "hyperprobe_acceptance";
  fs::remove_all(root);
  fs::create_directories(root);
  const fs::path log = root / "cli.log";
  auto q = [&](const std::string& rel) { return "\"" + (root / rel).string() + "\""; };

  // Shared inputs, produced once; synth itself is compared below.
  const std::vector<std::string> setup = {
      "synth --sentences 24 --input-dim 24 --seed 1 --out " + q("tr"),
      "synth --sentences 8 --input-dim 24 --seed 2 --out " + q("dv"),
      "synth --kind sentiment --sentences 60 --input-dim 8 --seed 1 --out " + q("st"),
      "synth --kind sentiment --sentences 20 --input-dim 8 --seed 2 --out " + q("sd"),
  };
  for (const auto& cmd : setup) {
    if (run_cli(cmd, log) != 0) return {Verdict::fail, "setup failed: " + cmd};
  }
  const std::string syn_train = " --treebank " + q("tr/corpus.conllu") + " --emb " + q("tr/corpus.pemb");
  const std::string syn_dev = " --treebank " + q("dv/corpus.conllu") + " --emb " + q("dv/corpus.pemb");
  const std::string sen_dev = " --labels " + q("sd/corpus.tsv") + " --emb " + q("sd/corpus.pemb");
  if (run_cli("train-syntax" + syn_train + " --dev-treebank " + q("dv/corpus.conllu") +
                  " --dev-emb " + q("dv/corpus.pemb") + " --rank 4 --epochs 3 --lr 0.05 --out " +
                  q("ref_syn"),
              log) != 0 ||
      run_cli("train-sentiment --labels " + q("st/corpus.tsv") + " --emb " + q("st/corpus.pemb") +
                  " --dev-labels " + q("sd/corpus.tsv") + " --dev-emb " + q("sd/corpus.pemb") +
                  " --rank 4 --epochs 3 --out " + q("ref_sen"),
              log) != 0) {
    return {Verdict::fail, "reference training failed"};
  }

  struct Command {
    std::string name;
    std::string args;  // "{out}" is replaced per run
  };
  const std::vector<Command> commands = {
      {"synth", "synth --sentences 6 --input-dim 24 --seed 5 --out {out}"},
      {"synth-sentiment", "synth --kind sentiment --sentences 12 --input-dim 8 --seed 5 --out {out}"},
      {"train-syntax", "train-syntax" + syn_train + " --dev-treebank " + q("dv/corpus.conllu") +
                           " --dev-emb " + q("dv/corpus.pemb") +
                           " --rank 4 --epochs 3 --lr 0.05 --seed 7 --out {out}"},
      {"train-sentiment", "train-sentiment --labels " + q("st/corpus.tsv") + " --emb " +
                              q("st/corpus.pemb") + " --dev-labels " + q("sd/corpus.tsv") +
                              " --dev-emb " + q("sd/corpus.pemb") + " --rank 4 --epochs 3 --out {out}"},
      {"eval", "eval --checkpoint " + q("ref_syn/model.hpck") + syn_dev + " --out {out}"},
      {"eval-sentiment", "eval --checkpoint " + q("ref_sen/model.hpck") + sen_dev + " --out {out}"},
      {"sweep", "sweep --ranks 2,4 --train " + q("tr/corpus.conllu") + " --emb " +
                    q("tr/corpus.pemb") + " --dev " + q("dv/corpus.conllu") + " --dev-emb " +
                    q("dv/corpus.pemb") + " --epochs 2 --lr 0.05 --out {out}"},
      {"viz", "viz --checkpoint " + q("ref_syn/model.hpck") + syn_dev + " --index 1 --out {out}"},
      {"viz-sentiment", "viz --checkpoint " + q("ref_sen/model.hpck") + sen_dev + " --out {out}"},
      {"gradcheck", "gradcheck --seed 3 --out {out}"},
  };

  std::string failures;
  for (const auto& c : commands) {
    std::string result;
    for (const char* run : {"a", "b"}) {
      std::string args = c.args;
      args.replace(args.find("{out}"), 5, q(c.name + "_" + run));
      const int status = run_cli(args, log);
      if (status != 0) result = fmt("exit %d", status);
    }
    if (result.empty()) result = compare_dirs(root / (c.name + "_a"), root / (c.name + "_b"));
    if (!result.empty()) failures += " " + c.name + ": " + result + ";";
  }
  if (failures.empty()) fs::remove_all(root);
  return {failures.empty() ? Verdict::pass : Verdict::fail,
          fmt("%zu commands run twice, artifacts compared byte for byte", commands.size()) +
              failures};
}

// ---- conditional full-scale checks -----------------------------------------

const char* env(const char* name) {
  const char* v = std::getenv(name);
  return v && *v ? v : nullptr;
}

Outcome full_scale() {
  const char* ptb = env("HYPERPROBE_PTB_DIR");
  const char* mr = env("HYPERPROBE_MR_DIR");
  if (!ptb && !mr) return {Verdict::skip, "set HYPERPROBE_PTB_DIR and/or HYPERPROBE_MR_DIR"};
  const unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  std::string detail;
  bool ok = true;
  auto band = [&](const char* what, double got, double target, double width) {
    const bool in = std::abs(got - target) <= width;
    ok = ok && in;
    detail += fmt("%s%s %.3f (target %.3f +/- %.3f)", detail.empty() ? "" : ", ", what, got, target,
                  width);
  };

  if (ptb) {
    const fs::path d(ptb);
    const auto tr = data::load_syntax_corpus(d / "train.conllu", d / "train.pemb");
    const auto dv = data::load_syntax_corpus(d / "dev.conllu", d / "dev.pemb");
    const auto te = data::load_syntax_corpus(d / "test.conllu", d / "test.pemb");
    train::TrainConfig cfg;
    cfg.threads = threads;
    const auto dist = train::train_syntax(cfg, tr, dv);
    eval::EvalOptions eo;
    eo.threads = threads;
    const auto rd = eval::evaluate_syntax(dist.model, te, eo);
    band("UUAS", 100.0 * rd.metrics.at("uuas"), kUuasTarget, kUuasBand);
    band("DSpr", rd.metrics.at("dspr"), kDsprTarget, kDsprBand);
    cfg.task = probes::Task::depth;
    const auto depth = train::train_syntax(cfg, tr, dv);
    band("root%", 100.0 * eval::evaluate_syntax(depth.model, te, eo).metrics.at("root_acc"),
         kRootTarget, kRootBand);
  }
  if (mr) {
    const fs::path d(mr);
    const auto tr = data::load_sentiment_corpus(d / "train.tsv", d / "train.pemb");
    const auto dv = data::load_sentiment_corpus(d / "dev.tsv", d / "dev.pemb");
    const auto te = data::load_sentiment_corpus(d / "test.tsv", d / "test.pemb");
    auto accuracy = [&](probes::Geometry g, bool trainable) {
      train::TrainConfig cfg;
      cfg.task = probes::Task::sentiment;
      cfg.geometry = g;
      cfg.trainable_heads = trainable;
      cfg.threads = threads;
      const auto r = train::train_sentiment(cfg, tr, dv);
      return 100.0 * eval::evaluate_sentiment(r.model, te).metrics.at("accuracy");
    };
    band("Poincare trainable acc", accuracy(probes::Geometry::poincare, true), kSentTarget,
         kSentBand);
    const double drop = accuracy(probes::Geometry::euclidean, false) -
                        accuracy(probes::Geometry::euclidean, true);
    ok = ok && drop < 0.0;
    detail += fmt(", Euclidean fixed-minus-trainable %.2f (expected < 0)", drop);
  }
  return {ok ? Verdict::pass : Verdict::fail, detail};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"geometry identity suite", geometry_identities},
      {"curvature limit", curvature_limit},
      {"gradient gate", gradient_gate},
      {"mst oracle", mst_oracle},
      {"synthetic recoverability", recoverability},
      {"planted sentiment", planted_sentiment},
      {"ball safety soak", ball_soak},
      {"cli determinism", cli_determinism},
      {"full-scale reference numbers", full_scale},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {Verdict::fail, std::string("exception: ") + e.what()};
    }
    const char* tag = o.verdict == Verdict::pass ? "PASS" : o.verdict == Verdict::fail ? "FAIL" : "SKIP";
    if (o.verdict == Verdict::fail) ++failed;
    std::cout << tag << "  " << name << "  " << o.detail << std::endl;
  }
  std::cout << (failed ? "acceptance: " + std::to_string(failed) + " failed" : "acceptance: all passed")
            << std::endl;
  return failed ? 1 : 0;
}
