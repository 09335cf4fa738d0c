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


// Command-line front end. Talks to the toolkit only through hyperprobe.h.

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "hyperprobe/hyperprobe.h"
#include "json.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

// Exit codes: 0 success, 1 usage, 2 data, 3 numerical or internal failure.
struct Failure {
  int code;
  std::string message;
};

void check(hp_status s) {
  if (s == HP_OK) return;
  const int code = s == HP_ERR_USAGE ? 1 : s == HP_ERR_DATA ? 2 : 3;
  throw Failure{code, hp_last_error()};
}

struct CString {
  char* p = nullptr;
  ~CString() { hp_string_free(p); }
  char** out() { return &p; }
  std::string str() const { return p ? p : ""; }
};

struct ModelDeleter {
  void operator()(hp_model* m) const { hp_model_free(m); }
};
struct SyntaxDeleter {
  void operator()(hp_syntax_corpus* c) const { hp_syntax_corpus_free(c); }
};
struct SentimentDeleter {
  void operator()(hp_sentiment_corpus* c) const { hp_sentiment_corpus_free(c); }
};
using Model = std::unique_ptr<hp_model, ModelDeleter>;
using SyntaxCorpus = std::unique_ptr<hp_syntax_corpus, SyntaxDeleter>;
using SentimentCorpus = std::unique_ptr<hp_sentiment_corpus, SentimentDeleter>;

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

std::string sha256(const std::string& path) {
  CString hex;
  check(hp_sha256_file(path.c_str(), hex.out()));
  return hex.str();
}

unsigned default_threads() {
  if (const char* env = std::getenv("HYPERPROBE_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
    throw Failure{1, std::string("HYPERPROBE_THREADS must be a positive integer, got '") + env + "'"};
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Failure{2, "cannot write " + path.string()};
  out << text;
  if (!out.flush()) throw Failure{2, "failed to write " + path.string()};
}

fs::path prepare_out(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Failure{2, "cannot create output directory " + dir + ": " + ec.message()};
  return fs::path(dir);
}

json parse_json(const std::string& text) { return json::parse(text); }

// Collects inputs, outputs and the resolved configuration of one run.
class Manifest {
 public:
  explicit Manifest(std::string command) : started_(utc_now()) { j_["command"] = std::move(command); }

  json& config() { return j_["config"]; }
  void seed(std::uint64_t s) { j_["seed"] = s; }
  void input(const std::string& role, const std::string& path) {
    inputs_.push_back({{"role", role}, {"path", path}, {"sha256", sha256(path)}});
  }
  void output(const fs::path& path) {
    outputs_.push_back({{"path", path.filename().string()}, {"sha256", sha256(path.string())}});
  }
  void summary(const json& s) { j_["summary"] = s; }

  void write(const fs::path& path) {
    json out;
    out["command"] = j_["command"];
    out["toolkit_version"] = hp_version();
    if (j_.contains("seed")) out["seed"] = j_["seed"];
    out["config"] = j_.contains("config") ? j_["config"] : json::object();
    out["inputs"] = inputs_;
    out["outputs"] = outputs_;
    if (j_.contains("summary")) out["summary"] = j_["summary"];
    out["started_at"] = started_;
    out["finished_at"] = utc_now();
    write_text(path, out.dump(2) + "\n");
  }

 private:
  json j_;
  json inputs_ = json::array();
  json outputs_ = json::array();
  std::string started_;
};

// Echoes every option of a subcommand, as given or defaulted.
json resolved_options(const CLI::App& sub) {
  json j;
  for (const CLI::Option* opt : sub.get_options()) {
    const auto& names = opt->get_lnames();
    if (names.empty() || names[0] == "help" || names[0] == "config") continue;
    const std::string key = names[0];
    if (opt->get_expected_min() == 0) {
      j[key] = opt->count() > 0 && opt->as<bool>();
    } else if (opt->count() > 0) {
      const auto& r = opt->results();
      if (opt->get_expected_max() > 1) {
        j[key] = r;
      } else {
        j[key] = r.empty() ? "" : r.back();
      }
    } else {
      j[key] = opt->get_default_str();
    }
  }
  return j;
}

struct TrainFlags {
  std::string task = "distance";
  std::string geometry = "poincare";
  long rank = 64;
  double curvature = 1.0;
  double lr = 1e-3;
  int epochs = 40;
  long batch = 20;
  std::uint64_t seed = 0;
  double decay_factor = 0.1;
  int patience = 1;
  double min_lr = 1e-6;
  std::string nonlinearity = "none";
  bool two_layer = false;
  bool no_q = false;
  bool fixed_heads = false;
  double init_scale = 0.05;
  std::size_t max_length = 60;
  unsigned threads = 1;

  json config(bool sentiment) const {
    json j;
    j["task"] = sentiment ? "sentiment" : task;
    j["geometry"] = geometry;
    j["rank"] = rank;
    j["curvature"] = curvature;
    j["lr"] = lr;
    j["epochs"] = epochs;
    j["batch"] = batch;
    j["seed"] = seed;
    j["decay_factor"] = decay_factor;
    j["patience"] = patience;
    j["min_lr"] = min_lr;
    j["nonlinearity"] = nonlinearity;
    j["two_layer"] = two_layer;
    j["use_q"] = !no_q;
    j["trainable_heads"] = !fixed_heads;
    j["init_scale"] = init_scale;
    j["threads"] = threads;
    return j;
  }
};

void add_train_flags(CLI::App* sub, TrainFlags& f, bool sentiment) {
  if (!sentiment) {
    sub->add_option("--task", f.task, "distance, depth or joint")
        ->check(CLI::IsMember({"distance", "depth", "joint"}))
        ->capture_default_str();
  }
  sub->add_option("--geometry", f.geometry, "poincare or euclidean")
      ->check(CLI::IsMember({"poincare", "euclidean"}))
      ->capture_default_str();
  sub->add_option("--rank", f.rank, "probe rank k")->capture_default_str();
  sub->add_option("--curvature", f.curvature, "ball curvature c > 0")->capture_default_str();
  sub->add_option("--lr", f.lr, "initial learning rate")->capture_default_str();
  sub->add_option("--epochs", f.epochs, "maximum epochs")->capture_default_str();
  sub->add_option("--batch", f.batch, "sentences per batch")->capture_default_str();
  sub->add_option("--seed", f.seed, "random seed")->capture_default_str();
  sub->add_option("--decay-factor", f.decay_factor, "lr multiplier on a stalled epoch")
      ->capture_default_str();
  sub->add_option("--patience", f.patience, "stalled epochs before decay")->capture_default_str();
  sub->add_option("--min-lr", f.min_lr, "stop once lr falls below this")->capture_default_str();
  sub->add_option("--nonlinearity", f.nonlinearity, "euclidean probe: none, relu, sigmoid, tanh")
      ->check(CLI::IsMember({"none", "relu", "sigmoid", "tanh"}))
      ->capture_default_str();
  sub->add_flag("--two-layer", f.two_layer, "euclidean probe: add a second k x k layer");
  sub->add_flag("--no-q", f.no_q, "poincare probe: skip the Mobius matrix Q");
  if (sentiment) sub->add_flag("--fixed-heads", f.fixed_heads, "freeze the sentiment poles");
  sub->add_option("--init-scale", f.init_scale, "uniform init half-width")->capture_default_str();
  sub->add_option("--max-length", f.max_length, "drop longer sentences")->capture_default_str();
}

void add_threads(CLI::App* sub, unsigned& threads) {
  sub->add_option("--threads", threads, "worker threads (default: HYPERPROBE_THREADS or all cores)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
}

SyntaxCorpus load_syntax(const std::string& treebank, const std::string& emb, std::size_t max_length,
                         Manifest& m, const std::string& role) {
  hp_syntax_corpus* c = nullptr;
  check(hp_syntax_corpus_load(treebank.c_str(), emb.c_str(), max_length, &c, nullptr));
  SyntaxCorpus out(c);
  m.input(role + "_treebank", treebank);
  m.input(role + "_embeddings", emb);
  return out;
}

SentimentCorpus load_sentiment(const std::string& labels, const std::string& emb,
                               std::size_t max_length, Manifest& m, const std::string& role) {
  hp_sentiment_corpus* c = nullptr;
  check(hp_sentiment_corpus_load(labels.c_str(), emb.c_str(), max_length, &c, nullptr));
  SentimentCorpus out(c);
  m.input(role + "_labels", labels);
  m.input(role + "_embeddings", emb);
  return out;
}

Model load_model(const std::string& path, Manifest& m) {
  hp_model* model = nullptr;
  check(hp_model_load(path.c_str(), &model));
  m.input("checkpoint", path);
  return Model(model);
}

void print_metrics(const json& report) {
  for (const auto& [k, v] : report.at("metrics").items()) {
    std::cout << k << "\t" << std::setprecision(6) << v.get<double>() << "\n";
  }
}

// ---- commands ---------------------------------------------------------------

struct TrainArgs {
  TrainFlags flags;
  std::string text, emb, dev_text, dev_emb, out;
};

int run_train(const CLI::App& sub, TrainArgs& a, bool sentiment) {
  Manifest m(sentiment ? "train-sentiment" : "train-syntax");
  CString resolved;
  check(hp_resolve_train_config(a.flags.config(sentiment).dump().c_str(), resolved.out()));
  m.config() = resolved_options(sub);
  m.config()["train"] = parse_json(resolved.str());
  m.seed(a.flags.seed);
  const fs::path out = prepare_out(a.out);

  hp_model* raw = nullptr;
  CString log, summary, report, words;
  const std::string cfg = resolved.str();
  const std::string eval_opts = json{{"threads", a.flags.threads}}.dump();
  if (sentiment) {
    auto tr = load_sentiment(a.text, a.emb, a.flags.max_length, m, "train");
    auto dv = load_sentiment(a.dev_text, a.dev_emb, a.flags.max_length, m, "dev");
    check(hp_train_sentiment(cfg.c_str(), tr.get(), dv.get(), &raw, log.out(), summary.out()));
    Model model(raw);
    check(hp_evaluate_sentiment(model.get(), dv.get(), eval_opts.c_str(), report.out()));
    check(hp_rank_words(model.get(), tr.get(), words.out()));
    check(hp_model_save(model.get(), (out / "model.hpck").c_str()));
  } else {
    auto tr = load_syntax(a.text, a.emb, a.flags.max_length, m, "train");
    auto dv = load_syntax(a.dev_text, a.dev_emb, a.flags.max_length, m, "dev");
    check(hp_train_syntax(cfg.c_str(), tr.get(), dv.get(), &raw, log.out(), summary.out()));
    Model model(raw);
    check(hp_evaluate_syntax(model.get(), dv.get(), eval_opts.c_str(), report.out()));
    check(hp_model_save(model.get(), (out / "model.hpck").c_str()));
  }
  m.output(out / "model.hpck");
  write_text(out / "train_log.tsv", log.str());
  m.output(out / "train_log.tsv");
  write_text(out / "dev_report.json", report.str() + "\n");
  m.output(out / "dev_report.json");
  if (sentiment) {
    write_text(out / "top_words.tsv", words.str());
    m.output(out / "top_words.tsv");
  }
  const json s = parse_json(summary.str());
  m.summary(s);
  m.write(out / "manifest.json");

  std::cout << "best epoch " << s.at("best_epoch") << ", dev loss " << std::setprecision(6)
            << s.at("best_dev_loss").get<double>() << " (" << s.at("stop_reason").get<std::string>()
            << ")\n";
  print_metrics(parse_json(report.str()));
  if (s.at("diverged").get<bool>()) {
    std::cerr << "error: training diverged; kept the last finite checkpoint\n";
    return 3;
  }
  return 0;
}

struct EvalArgs {
  std::string checkpoint, treebank, labels, emb, out;
  bool include_punct = false, macro_uuas = false;
  std::optional<int> layer;
  std::size_t max_length = 60;
  std::size_t top_words = 0;
  unsigned threads = 1;
};

int run_eval(const CLI::App& sub, EvalArgs& a) {
  if (a.treebank.empty() == a.labels.empty()) {
    throw Failure{1, "eval needs exactly one of --treebank or --labels"};
  }
  Manifest m("eval");
  m.config() = resolved_options(sub);
  const fs::path out = prepare_out(a.out);
  Model model = load_model(a.checkpoint, m);
  json opts{{"include_punct", a.include_punct}, {"macro_uuas", a.macro_uuas}, {"threads", a.threads}};
  if (a.layer) opts["layer"] = *a.layer;
  CString report;
  if (!a.treebank.empty()) {
    auto corpus = load_syntax(a.treebank, a.emb, a.max_length, m, "eval");
    check(hp_evaluate_syntax(model.get(), corpus.get(), opts.dump().c_str(), report.out()));
  } else {
    auto corpus = load_sentiment(a.labels, a.emb, a.max_length, m, "eval");
    check(hp_evaluate_sentiment(model.get(), corpus.get(), opts.dump().c_str(), report.out()));
    CString words;
    check(hp_rank_words(model.get(), corpus.get(), words.out()));
    write_text(out / "top_words.tsv", words.str());
    m.output(out / "top_words.tsv");
  }
  write_text(out / "report.json", report.str() + "\n");
  m.output(out / "report.json");
  m.write(out / "manifest.json");
  print_metrics(parse_json(report.str()));
  return 0;
}

struct SweepArgs {
  TrainFlags flags;
  std::string kind = "syntax", axis;
  std::string text, emb, dev_text, dev_emb, out;
  std::vector<double> layers, ranks, curvatures, lengths;
  bool include_punct = false;
  std::optional<int> layer;
};

int run_sweep(const CLI::App& sub, SweepArgs& a) {
  const std::vector<std::pair<std::string, const std::vector<double>*>> grids{
      {"layer", &a.layers}, {"rank", &a.ranks}, {"curvature", &a.curvatures},
      {"sentence_length", &a.lengths}};
  if (a.axis.empty()) {
    for (const auto& [name, grid] : grids) {
      if (!grid->empty()) {
        if (!a.axis.empty()) throw Failure{1, "several grids given; choose one with --axis"};
        a.axis = name;
      }
    }
    if (a.axis.empty()) throw Failure{1, "empty sweep grid"};
  }
  std::vector<double> grid;
  for (const auto& [name, g] : grids)
    if (name == a.axis) grid = *g;

  Manifest m("sweep");
  m.config() = resolved_options(sub);
  m.seed(a.flags.seed);
  const fs::path out = prepare_out(a.out);
  json request;
  request["kind"] = a.kind;
  request["axis"] = a.axis;
  request["grid"] = grid;
  request["config"] = a.flags.config(a.kind == "sentiment");
  json eval_opts{{"include_punct", a.include_punct}, {"threads", a.flags.threads}};
  if (a.layer) eval_opts["layer"] = *a.layer;
  request["eval"] = eval_opts;
  request["train_text"] = a.text;
  request["train_embeddings"] = a.emb;
  request["dev_text"] = a.dev_text;
  request["dev_embeddings"] = a.dev_emb;
  request["max_length"] = a.flags.max_length;
  m.config()["request"] = request;

  CString report, tsv;
  check(hp_sweep(request.dump().c_str(), report.out(), tsv.out()));
  m.input("train_text", a.text);
  m.input("dev_text", a.dev_text);
  if (a.axis != "layer" || a.emb.find("{layer}") == std::string::npos) {
    m.input("train_embeddings", a.emb);
    m.input("dev_embeddings", a.dev_emb);
  }
  write_text(out / "sweep.json", report.str() + "\n");
  write_text(out / "sweep.tsv", tsv.str());
  m.output(out / "sweep.json");
  m.output(out / "sweep.tsv");

  const json r = parse_json(report.str());
  std::size_t i = 0;
  for (const auto& point : r.at("points")) {
    Manifest pm("sweep-point");
    pm.seed(a.flags.seed);
    pm.config() = request;
    pm.config()["point_value"] = point.at("value");
    pm.summary(point);
    pm.write(out / ("point_" + std::to_string(i++) + ".manifest.json"));
  }
  m.write(out / "manifest.json");
  std::cout << tsv.str();
  for (const auto& note : r.at("notes")) std::cerr << "notice: " << note.get<std::string>() << "\n";
  return 0;
}

struct GradArgs {
  std::uint64_t seed = 0;
  double tol = 1e-4;
  double step = 1e-5;
  int sentences = 3;
  bool corrupt = false;
  std::string out;
};

int run_gradcheck(const CLI::App& sub, GradArgs& a) {
  json opts{{"seed", a.seed}, {"tolerance", a.tol}, {"step", a.step}, {"sentences", a.sentences}};
  if (a.corrupt) opts["corrupt"] = true;
  CString report;
  int passed = 0;
  check(hp_gradcheck(opts.dump().c_str(), report.out(), &passed));
  const json r = parse_json(report.str());
  for (const auto& c : r.at("cases")) {
    std::cout << (c.at("passed").get<bool>() ? "pass" : "FAIL") << "\t" << std::scientific
              << std::setprecision(3) << c.at("max_rel_error").get<double>() << "\t"
              << c.at("case").get<std::string>() << "\n";
  }
  std::cout << (passed ? "all cases pass" : "gradient check failed") << " (tolerance "
            << a.tol << ")\n";
  if (!a.out.empty()) {
    const fs::path out = prepare_out(a.out);
    Manifest m("gradcheck");
    m.config() = resolved_options(sub);
    m.seed(a.seed);
    write_text(out / "gradcheck.json", report.str() + "\n");
    m.output(out / "gradcheck.json");
    m.summary({{"passed", passed != 0}, {"max_rel_error", r.at("max_rel_error")}});
    m.write(out / "manifest.json");
  }
  return passed ? 0 : 3;
}

struct VizArgs {
  std::string checkpoint, treebank, labels, emb, out;
  std::size_t index = 0;
  bool include_punct = false;
  double significance = 0.05;
  std::size_t max_length = 60;
};

int run_viz(const CLI::App& sub, VizArgs& a) {
  if (a.treebank.empty() == a.labels.empty()) {
    throw Failure{1, "viz needs exactly one of --treebank or --labels"};
  }
  Manifest m("viz");
  m.config() = resolved_options(sub);
  const fs::path out = prepare_out(a.out);
  Model model = load_model(a.checkpoint, m);
  CString svg, tsv;
  if (!a.treebank.empty()) {
    auto corpus = load_syntax(a.treebank, a.emb, a.max_length, m, "viz");
    const json opts{{"include_punct", a.include_punct}};
    check(hp_viz_syntax(model.get(), corpus.get(), a.index, opts.dump().c_str(), svg.out(),
                        tsv.out()));
  } else {
    auto corpus = load_sentiment(a.labels, a.emb, a.max_length, m, "viz");
    const json opts{{"significance", a.significance}};
    check(hp_viz_sentiment(model.get(), corpus.get(), a.index, opts.dump().c_str(), svg.out(),
                           tsv.out()));
  }
  write_text(out / "scene.svg", svg.str());
  write_text(out / "scene.tsv", tsv.str());
  m.output(out / "scene.svg");
  m.output(out / "scene.tsv");
  m.write(out / "manifest.json");
  std::cout << "wrote " << (out / "scene.svg").string() << "\n";
  return 0;
}

struct SynthArgs {
  std::string kind = "syntax", out;
  std::size_t sentences = 200;
  std::uint64_t seed = 0, world_seed = 0;
  std::optional<long> input_dim, rank, min_length, max_length, vocabulary;
  std::optional<double> curvature, signal, noise;
};

int run_synth(const CLI::App& sub, SynthArgs& a) {
  json opts{{"sentences", a.sentences}, {"seed", a.seed}, {"world_seed", a.world_seed}};
  if (a.input_dim) opts["input_dim"] = *a.input_dim;
  if (a.min_length) opts["min_length"] = *a.min_length;
  if (a.max_length) opts["max_length"] = *a.max_length;
  if (a.kind == "syntax") {
    if (a.rank) opts["rank"] = *a.rank;
    if (a.curvature) opts["curvature"] = *a.curvature;
    if (a.signal || a.noise || a.vocabulary) {
      throw Failure{1, "--signal, --noise and --vocabulary apply to sentiment corpora"};
    }
  } else {
    if (a.signal) opts["signal"] = *a.signal;
    if (a.noise) opts["noise"] = *a.noise;
    if (a.vocabulary) opts["vocabulary"] = *a.vocabulary;
    if (a.rank || a.curvature) throw Failure{1, "--rank and --curvature apply to syntax corpora"};
  }
  Manifest m("synth");
  m.config() = resolved_options(sub);
  m.config()["generator"] = opts;
  m.seed(a.seed);
  const fs::path out = prepare_out(a.out);
  const fs::path text = out / (a.kind == "syntax" ? "corpus.conllu" : "corpus.tsv");
  const fs::path emb = out / "corpus.pemb";
  CString summary;
  check(hp_synth(a.kind.c_str(), opts.dump().c_str(), text.c_str(), emb.c_str(), summary.out()));
  m.output(text);
  m.output(emb);
  m.summary(parse_json(summary.str()));
  m.write(out / "manifest.json");
  std::cout << "wrote " << text.string() << " and " << emb.string() << "\n";
  return 0;
}

// Splices "--key value" pairs from a --config file in front of the
// subcommand's own arguments, skipping keys that were given as flags.
std::vector<std::string> with_config(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  if (args.size() < 2 || args[1].rfind("-", 0) == 0) return args;
  std::string path;
  std::vector<std::string> given;
  for (std::size_t i = 2; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (a.rfind("--", 0) != 0) continue;
    const std::string name = a.substr(2, a.find('=') - 2);
    given.push_back(name);
    if (name == "config") {
      if (a.find('=') != std::string::npos) {
        path = a.substr(a.find('=') + 1);
      } else if (i + 1 < args.size()) {
        path = args[i + 1];
      }
    }
  }
  if (path.empty()) return args;
  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigTOML().from_file(path);
  } catch (const CLI::Error& e) {
    throw Failure{2, "cannot read config file " + path + ": " + e.what()};
  }
  std::vector<std::string> spliced;
  for (const auto& item : items) {
    if (item.name == "++" || item.name == "--") continue;
    if (!item.parents.empty() && item.parents.front() != args[1]) continue;
    if (std::find(given.begin(), given.end(), item.name) != given.end()) continue;
    if (item.inputs.size() == 1 && (item.inputs[0] == "true" || item.inputs[0] == "false")) {
      if (item.inputs[0] == "true") spliced.push_back("--" + item.name);
      continue;
    }
    std::string joined;
    for (const auto& v : item.inputs) joined += (joined.empty() ? "" : ",") + v;
    spliced.push_back("--" + item.name);
    spliced.push_back(joined);
  }
  args.insert(args.begin() + 2, spliced.begin(), spliced.end());
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hyperprobe: hyperbolic structural probes"};
  app.set_version_flag("--version", std::string(hp_version()));
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  unsigned threads = 1;
  try {
    threads = default_threads();
  } catch (const Failure& f) {
    std::cerr << "error: " << f.message << "\n";
    return f.code;
  }
  // train-syntax / train-sentiment
  TrainArgs ts, tm;
  EvalArgs ev;
  SweepArgs sw;
  ts.flags.threads = tm.flags.threads = ev.threads = sw.flags.threads = threads;
  auto* train_syntax = app.add_subcommand("train-syntax", "train a distance, depth or joint probe");
  train_syntax->add_option("--treebank", ts.text, "training CoNLL-U")->required();
  train_syntax->add_option("--emb", ts.emb, "training PEMB embeddings")->required();
  train_syntax->add_option("--dev-treebank", ts.dev_text, "dev CoNLL-U")->required();
  train_syntax->add_option("--dev-emb", ts.dev_emb, "dev PEMB embeddings")->required();
  train_syntax->add_option("--out", ts.out, "output directory")->required();
  add_train_flags(train_syntax, ts.flags, false);
  add_threads(train_syntax, ts.flags.threads);

  auto* train_sent = app.add_subcommand("train-sentiment", "train a sentiment probe");
  train_sent->add_option("--labels", tm.text, "training label TSV")->required();
  train_sent->add_option("--emb", tm.emb, "training PEMB embeddings")->required();
  train_sent->add_option("--dev-labels", tm.dev_text, "dev label TSV")->required();
  train_sent->add_option("--dev-emb", tm.dev_emb, "dev PEMB embeddings")->required();
  train_sent->add_option("--out", tm.out, "output directory")->required();
  add_train_flags(train_sent, tm.flags, true);
  add_threads(train_sent, tm.flags.threads);

  // eval
  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint");
  eval->add_option("--checkpoint", ev.checkpoint, "model.hpck")->required();
  eval->add_option("--treebank", ev.treebank, "CoNLL-U (syntax probes)");
  eval->add_option("--labels", ev.labels, "label TSV (sentiment probes)");
  eval->add_option("--emb", ev.emb, "PEMB embeddings")->required();
  eval->add_option("--out", ev.out, "output directory")->required();
  eval->add_flag("--include-punct", ev.include_punct, "score punctuation tokens too");
  eval->add_flag("--macro-uuas", ev.macro_uuas, "average UUAS per sentence");
  eval->add_option("--layer", ev.layer, "layer number recorded in the report");
  eval->add_option("--max-length", ev.max_length, "drop longer sentences")->capture_default_str();
  add_threads(eval, ev.threads);

  // sweep
  auto* sweep = app.add_subcommand("sweep", "train and evaluate over a grid");
  sweep->add_option("--kind", sw.kind, "syntax or sentiment")
      ->check(CLI::IsMember({"syntax", "sentiment"}))
      ->capture_default_str();
  sweep->add_option("--axis", sw.axis, "layer, rank, curvature or sentence_length")
      ->check(CLI::IsMember({"layer", "rank", "curvature", "sentence_length"}));
  sweep->add_option("--layers", sw.layers, "layer grid")
      ->delimiter(',')
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  sweep->add_option("--ranks", sw.ranks, "rank grid")
      ->delimiter(',')
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  sweep->add_option("--curvatures", sw.curvatures, "curvature grid")
      ->delimiter(',')
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  sweep->add_option("--lengths", sw.lengths, "sentence lengths to report")
      ->delimiter(',')
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  sweep->add_option("--train", sw.text, "training CoNLL-U or label TSV")->required();
  sweep->add_option("--emb", sw.emb, "training PEMB; may contain {layer}")->required();
  sweep->add_option("--dev", sw.dev_text, "dev CoNLL-U or label TSV")->required();
  sweep->add_option("--dev-emb", sw.dev_emb, "dev PEMB; may contain {layer}")->required();
  sweep->add_option("--out", sw.out, "output directory")->required();
  sweep->add_flag("--include-punct", sw.include_punct, "score punctuation tokens too");
  sweep->add_option("--layer", sw.layer, "layer recorded for non-layer sweeps");
  add_train_flags(sweep, sw.flags, false);
  sweep->add_flag("--fixed-heads", sw.flags.fixed_heads, "sentiment: freeze the poles");
  add_threads(sweep, sw.flags.threads);

  // gradcheck
  GradArgs gc;
  auto* grad = app.add_subcommand("gradcheck", "finite-difference check of every loss variant");
  grad->add_option("--seed", gc.seed, "random seed")->capture_default_str();
  grad->add_option("--tol", gc.tol, "maximum relative error")->capture_default_str();
  grad->add_option("--step", gc.step, "finite-difference step")->capture_default_str();
  grad->add_option("--sentences", gc.sentences, "sentences per case")->capture_default_str();
  grad->add_option("--out", gc.out, "optional output directory");
  grad->add_flag("--corrupt", gc.corrupt, "perturb the analytic gradient (self-test)")
      ->group("");

  // viz
  VizArgs vz;
  auto* viz = app.add_subcommand("viz", "render one sentence");
  viz->add_option("--checkpoint", vz.checkpoint, "model.hpck")->required();
  viz->add_option("--treebank", vz.treebank, "CoNLL-U (syntax probes)");
  viz->add_option("--labels", vz.labels, "label TSV (sentiment probes)");
  viz->add_option("--emb", vz.emb, "PEMB embeddings")->required();
  viz->add_option("--index", vz.index, "0-based sentence index")->capture_default_str();
  viz->add_option("--out", vz.out, "output directory")->required();
  viz->add_flag("--include-punct", vz.include_punct, "keep punctuation edges");
  viz->add_option("--significance", vz.significance,
                  "dashed connector threshold as a fraction of the pole distance")
      ->capture_default_str();
  viz->add_option("--max-length", vz.max_length, "drop longer sentences")->capture_default_str();

  // synth
  SynthArgs sy;
  auto* synth = app.add_subcommand("synth", "write a generated corpus");
  synth->add_option("--kind", sy.kind, "syntax or sentiment")
      ->check(CLI::IsMember({"syntax", "sentiment"}))
      ->capture_default_str();
  synth->add_option("--sentences", sy.sentences, "sentence count")->capture_default_str();
  synth->add_option("--seed", sy.seed, "sentence sampling seed")->capture_default_str();
  synth->add_option("--world-seed", sy.world_seed,
                    "seed of the shared generator; splits with equal values are compatible")
      ->capture_default_str();
  synth->add_option("--input-dim", sy.input_dim, "embedding width");
  synth->add_option("--rank", sy.rank, "syntax: dimension of the hidden tree points");
  synth->add_option("--curvature", sy.curvature, "syntax: curvature of the hidden points");
  synth->add_option("--min-length", sy.min_length, "shortest sentence");
  synth->add_option("--max-length", sy.max_length, "longest sentence");
  synth->add_option("--signal", sy.signal, "sentiment: planted shift size");
  synth->add_option("--noise", sy.noise, "sentiment: token noise scale");
  synth->add_option("--vocabulary", sy.vocabulary, "sentiment: filler vocabulary size");
  synth->add_option("--out", sy.out, "output directory")->required();

  std::string config_path;
  for (CLI::App* sub : app.get_subcommands({})) {
    sub->add_option("--config", config_path,
                    "TOML or INI file supplying option values; flags take precedence");
  }

  try {
    auto args = with_config(argc, argv);
    std::vector<const char*> cargs;
    for (const auto& a : args) cargs.push_back(a.c_str());
    app.parse(static_cast<int>(cargs.size()), cargs.data());
    if (*train_syntax) return run_train(*train_syntax, ts, false);
    if (*train_sent) return run_train(*train_sent, tm, true);
    if (*eval) return run_eval(*eval, ev);
    if (*sweep) return run_sweep(*sweep, sw);
    if (*grad) return run_gradcheck(*grad, gc);
    if (*viz) return run_viz(*viz, vz);
    if (*synth) return run_synth(*synth, sy);
    return 1;
  } catch (const CLI::ParseError& e) {
    // Help and version requests exit 0; every other parse error is a usage error.
    return app.exit(e) == 0 ? 0 : 1;
  } catch (const Failure& f) {
    std::cerr << "error: " << f.message << "\n";
    return f.code;
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
