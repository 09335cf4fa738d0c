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


#include "hyperprobe/hyperprobe.h"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <new>
#include <sstream>
#include <string>

#include <openssl/evp.h>

#include "hyperprobe/checkpoint.hpp"
#include "hyperprobe/data.hpp"
#include "hyperprobe/error.hpp"
#include "hyperprobe/eval.hpp"
#include "hyperprobe/gradcheck.hpp"
#include "hyperprobe/synthetic.hpp"
#include "hyperprobe/train.hpp"
#include "hyperprobe/viz.hpp"
#include "json.hpp"

#ifndef HYPERPROBE_VERSION
#define HYPERPROBE_VERSION "0.0.0"
#endif

using namespace hyperprobe;
using json = nlohmann::ordered_json;

struct hp_model {
  checkpoint::Checkpoint ckpt;
};
struct hp_syntax_corpus {
  std::vector<data::SyntaxExample> examples;
};
struct hp_sentiment_corpus {
  std::vector<data::SentimentExample> examples;
};

namespace {

thread_local std::string g_last_error;

template <typename F>
hp_status guard(F&& body) {
  try {
    body();
    g_last_error.clear();
    return HP_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return static_cast<hp_status>(e.kind());
  } catch (const json::exception& e) {
    g_last_error = std::string("invalid options: ") + e.what();
    return HP_ERR_USAGE;
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return HP_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return HP_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown failure";
    return HP_ERR_INTERNAL;
  }
}

template <typename T>
T& need(T* p, const char* what) {
  if (!p) throw UsageError(std::string(what) + " is null");
  return *p;
}

const char* need_str(const char* s, const char* what) {
  if (!s) throw UsageError(std::string(what) + " is null");
  return s;
}

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

void put(char** out, const std::string& s) {
  if (out) *out = dup(s);
}

json parse_object(const char* text) {
  if (!text || !*text) return json::object();
  json j = json::parse(text);
  if (!j.is_object()) throw UsageError("options must be a JSON object");
  return j;
}

// Reads allowed keys from an object; anything else is a usage error.
class Options {
 public:
  Options(json j, std::initializer_list<const char*> allowed) : j_(std::move(j)) {
    for (const auto& [key, value] : j_.items()) {
      if (std::find_if(allowed.begin(), allowed.end(),
                       [&](const char* a) { return key == a; }) == allowed.end()) {
        throw UsageError("unknown option '" + key + "'");
      }
    }
  }
  template <typename T>
  void read(const char* key, T& into) const {
    if (!j_.contains(key)) return;
    const auto& v = j_.at(key);
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw UsageError(std::string(key) + " must be a boolean");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw UsageError(std::string(key) + " must be a string");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) throw UsageError(std::string(key) + " must be an integer");
      if (std::is_unsigned_v<T> && !v.is_number_unsigned()) {
        throw UsageError(std::string(key) + " must be non-negative");
      }
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw UsageError(std::string(key) + " must be a number");
    }
    into = v.get<T>();
  }
  bool has(const char* key) const { return j_.contains(key); }
  const json& raw(const char* key) const { return j_.at(key); }

 private:
  json j_;
};

train::TrainConfig parse_train_config(const char* text) {
  const Options o(parse_object(text),
                  {"task", "geometry", "rank", "curvature", "lr", "epochs", "batch", "seed",
                   "decay_factor", "patience", "min_lr", "nonlinearity", "two_layer", "use_q",
                   "trainable_heads", "init_scale", "ball_eps", "atanh_eps", "threads"});
  train::TrainConfig c;
  std::string s;
  if (o.has("task")) {
    o.read("task", s);
    c.task = probes::parse_task(s);
  }
  if (o.has("geometry")) {
    o.read("geometry", s);
    c.geometry = probes::parse_geometry(s);
  }
  if (o.has("nonlinearity")) {
    o.read("nonlinearity", s);
    c.nonlinearity = probes::parse_nonlinearity(s);
  }
  std::int64_t rank = c.rank, batch = static_cast<std::int64_t>(c.batch_size), threads = c.threads;
  o.read("rank", rank);
  o.read("batch", batch);
  o.read("threads", threads);
  if (rank <= 0 || batch <= 0 || threads <= 0) {
    throw UsageError("rank, batch and threads must be positive");
  }
  c.rank = rank;
  c.batch_size = static_cast<std::size_t>(batch);
  c.threads = static_cast<unsigned>(threads);
  o.read("curvature", c.curvature);
  o.read("lr", c.lr);
  o.read("epochs", c.max_epochs);
  o.read("seed", c.seed);
  o.read("decay_factor", c.decay_factor);
  o.read("patience", c.patience);
  o.read("min_lr", c.min_lr);
  o.read("two_layer", c.two_layer);
  o.read("use_q", c.use_q);
  o.read("trainable_heads", c.trainable_heads);
  o.read("init_scale", c.init_scale);
  o.read("ball_eps", c.ball_eps);
  o.read("atanh_eps", c.atanh_eps);
  c.validate();
  return c;
}

json train_config_json(const train::TrainConfig& c) {
  json j;
  j["task"] = probes::to_string(c.task);
  j["geometry"] = probes::to_string(c.geometry);
  j["rank"] = c.rank;
  j["curvature"] = c.curvature;
  j["lr"] = c.lr;
  j["epochs"] = c.max_epochs;
  j["batch"] = c.batch_size;
  j["seed"] = c.seed;
  j["decay_factor"] = c.decay_factor;
  j["patience"] = c.patience;
  j["min_lr"] = c.min_lr;
  j["nonlinearity"] = probes::to_string(c.nonlinearity);
  j["two_layer"] = c.two_layer;
  j["use_q"] = c.use_q;
  j["trainable_heads"] = c.trainable_heads;
  j["init_scale"] = c.init_scale;
  j["ball_eps"] = c.ball_eps;
  j["atanh_eps"] = c.atanh_eps;
  j["threads"] = c.threads;
  return j;
}

eval::EvalOptions parse_eval_options(const json& j) {
  const Options o(j, {"include_punct", "macro_uuas", "threads", "layer", "punct_tags"});
  eval::EvalOptions e;
  o.read("include_punct", e.punctuation.include_punct);
  o.read("macro_uuas", e.macro_uuas);
  std::int64_t threads = 1;
  o.read("threads", threads);
  if (threads <= 0) throw UsageError("threads must be positive");
  e.threads = static_cast<unsigned>(threads);
  if (o.has("layer")) {
    int layer = 0;
    o.read("layer", layer);
    e.layer = layer;
  }
  if (o.has("punct_tags")) {
    e.punctuation.tags.clear();
    for (const auto& t : o.raw("punct_tags")) e.punctuation.tags.insert(t.get<std::string>());
  }
  return e;
}

json load_summary_json(const data::LoadSummary& s) {
  json j;
  j["loaded"] = s.loaded;
  j["dropped_malformed"] = s.dropped_malformed;
  j["dropped_too_long"] = s.dropped_too_long;
  j["dim"] = s.dim;
  j["warnings"] = s.warnings;
  return j;
}

std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

json train_summary(const train::TrainResult& r, double wall) {
  json j;
  j["best_epoch"] = r.best_epoch;
  j["best_dev_loss"] = r.best_dev_loss;
  j["final_lr"] = r.final_lr;
  j["epochs_run"] = r.log.size();
  j["diverged"] = r.diverged;
  j["stop_reason"] = r.stop_reason;
  j["wall_seconds"] = wall;
  return j;
}

hp_model* wrap_result(train::TrainResult&& r, const train::TrainConfig& cfg) {
  // Thread count does not change the result, so it stays out of the file.
  json stored = train_config_json(cfg);
  stored.erase("threads");
  auto* m = new hp_model;
  m->ckpt.model = std::move(r.model);
  m->ckpt.optimizer = std::move(r.optimizer);
  m->ckpt.metadata = {{"config", stored.dump()},
                      {"best_epoch", std::to_string(r.best_epoch)},
                      {"best_dev_loss", format_double(r.best_dev_loss)},
                      {"toolkit_version", HYPERPROBE_VERSION}};
  return m;
}

template <typename Corpus, typename TrainFn>
void train_common(const char* config_json, const Corpus* tr, const Corpus* dev, hp_model** model,
                  char** log_tsv, char** summary_json, TrainFn fn) {
  need(model, "model output");
  const auto cfg = parse_train_config(config_json);
  const auto t0 = std::chrono::steady_clock::now();
  auto result = fn(cfg, need(tr, "train corpus").examples, need(dev, "dev corpus").examples);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::ostringstream log;
  train::write_log(log, result.log, false);
  const auto summary = train_summary(result, wall).dump(2);
  *model = wrap_result(std::move(result), cfg);
  put(log_tsv, log.str());
  put(summary_json, summary);
}

std::string substitute_layer(std::string path, int layer) {
  const std::string token = "{layer}";
  for (auto p = path.find(token); p != std::string::npos; p = path.find(token)) {
    path.replace(p, token.size(), std::to_string(layer));
  }
  return path;
}

data::FloatRows to_float(const Eigen::MatrixXd& m) { return m.cast<float>(); }

std::string words_tsv(const std::vector<probes::WordScore>& words) {
  std::ostringstream os;
  os << "# word\tgap\tcount\n" << std::setprecision(17);
  for (const auto& w : words) os << w.word << "\t" << w.gap << "\t" << w.count << "\n";
  return os.str();
}

}  // namespace

extern "C" {

const char* hp_version(void) { return HYPERPROBE_VERSION; }

const char* hp_last_error(void) { return g_last_error.c_str(); }

void hp_string_free(char* s) { std::free(s); }

hp_status hp_sha256_file(const char* path, char** hex) {
  return guard([&] {
    need(hex, "hex output");
    std::ifstream in(need_str(path, "path"), std::ios::binary);
    if (!in) throw DataError(std::string("cannot open ") + path);
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
      throw std::runtime_error("sha256 initialisation failed");
    }
    std::vector<char> buf(1 << 16);
    while (in) {
      in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
      if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
    }
    if (in.bad()) throw DataError(std::string("read failure on ") + path);
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx.get(), digest, &len);
    std::ostringstream os;
    for (unsigned i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
    *hex = dup(os.str());
  });
}

hp_status hp_syntax_corpus_load(const char* treebank, const char* embeddings, size_t max_length,
                                hp_syntax_corpus** out, char** summary_json) {
  return guard([&] {
    need(out, "corpus output");
    data::LoadOptions opts;
    if (max_length) opts.max_length = max_length;
    data::LoadSummary summary;
    auto c = std::make_unique<hp_syntax_corpus>();
    c->examples = data::load_syntax_corpus(need_str(treebank, "treebank"),
                                           need_str(embeddings, "embeddings"), opts, &summary);
    put(summary_json, load_summary_json(summary).dump(2));
    *out = c.release();
  });
}

size_t hp_syntax_corpus_size(const hp_syntax_corpus* corpus) {
  return corpus ? corpus->examples.size() : 0;
}

void hp_syntax_corpus_free(hp_syntax_corpus* corpus) { delete corpus; }

hp_status hp_sentiment_corpus_load(const char* labels, const char* embeddings, size_t max_length,
                                   hp_sentiment_corpus** out, char** summary_json) {
  return guard([&] {
    need(out, "corpus output");
    data::LoadOptions opts;
    if (max_length) opts.max_length = max_length;
    data::LoadSummary summary;
    auto c = std::make_unique<hp_sentiment_corpus>();
    c->examples = data::load_sentiment_corpus(need_str(labels, "labels"),
                                              need_str(embeddings, "embeddings"), opts, &summary);
    put(summary_json, load_summary_json(summary).dump(2));
    *out = c.release();
  });
}

size_t hp_sentiment_corpus_size(const hp_sentiment_corpus* corpus) {
  return corpus ? corpus->examples.size() : 0;
}

void hp_sentiment_corpus_free(hp_sentiment_corpus* corpus) { delete corpus; }

hp_status hp_synth(const char* kind, const char* options_json, const char* text_path,
                   const char* embeddings_path, char** summary_json) {
  return guard([&] {
    const std::string k = need_str(kind, "kind");
    need_str(text_path, "text path");
    need_str(embeddings_path, "embeddings path");
    json summary;
    data::EmbeddingFile emb;
    if (k == "syntax") {
      const Options o(parse_object(options_json),
                      {"sentences", "min_length", "max_length", "input_dim", "rank", "curvature",
                       "seed", "world_seed", "target_loss"});
      synthetic::SyntaxOptions so;
      o.read("sentences", so.sentences);
      o.read("min_length", so.min_length);
      o.read("max_length", so.max_length);
      o.read("input_dim", so.input_dim);
      o.read("rank", so.rank);
      o.read("curvature", so.curvature);
      o.read("seed", so.seed);
      o.read("world_seed", so.world_seed);
      o.read("target_loss", so.fit.target_loss);
      so.fit.seed = so.seed;
      const auto corpus = synthetic::make_syntax_corpus(so);
      std::vector<data::SentenceRecord> records;
      emb.dim = static_cast<std::uint32_t>(so.input_dim);
      for (const auto& ex : corpus.examples) {
        records.push_back(ex.record);
        emb.sentences.push_back(to_float(ex.record.embedding));
      }
      std::ofstream out(text_path, std::ios::binary | std::ios::trunc);
      if (!out) throw DataError(std::string("cannot write ") + text_path);
      data::write_conllu(out, records);
      summary["sentences"] = records.size();
      summary["rejected_fits"] = corpus.rejected;
      summary["max_fit_loss"] =
          corpus.fit_losses.empty() ? 0.0 : *std::max_element(corpus.fit_losses.begin(), corpus.fit_losses.end());
    } else if (k == "sentiment") {
      const Options o(parse_object(options_json),
                      {"sentences", "min_length", "max_length", "input_dim", "signal", "noise",
                       "vocabulary", "seed", "world_seed"});
      synthetic::SentimentOptions so;
      o.read("sentences", so.sentences);
      o.read("min_length", so.min_length);
      o.read("max_length", so.max_length);
      o.read("input_dim", so.input_dim);
      o.read("signal", so.signal);
      o.read("noise", so.noise);
      o.read("vocabulary", so.vocabulary);
      o.read("seed", so.seed);
      o.read("world_seed", so.world_seed);
      const auto corpus = synthetic::make_sentiment_corpus(so);
      emb.dim = static_cast<std::uint32_t>(so.input_dim);
      for (const auto& ex : corpus) emb.sentences.push_back(to_float(ex.embedding));
      std::ofstream out(text_path, std::ios::binary | std::ios::trunc);
      if (!out) throw DataError(std::string("cannot write ") + text_path);
      data::write_sentiment_tsv(out, corpus);
      summary["sentences"] = corpus.size();
    } else {
      throw UsageError("synth kind must be syntax or sentiment");
    }
    data::write_pemb(std::filesystem::path(embeddings_path), emb);
    summary["dim"] = emb.dim;
    put(summary_json, summary.dump(2));
  });
}

hp_status hp_resolve_train_config(const char* config_json, char** resolved_json) {
  return guard([&] {
    need(resolved_json, "output");
    *resolved_json = dup(train_config_json(parse_train_config(config_json)).dump(2));
  });
}

hp_status hp_train_syntax(const char* config_json, const hp_syntax_corpus* train,
                          const hp_syntax_corpus* dev, hp_model** model, char** log_tsv,
                          char** summary_json) {
  return guard([&] {
    train_common(config_json, train, dev, model, log_tsv, summary_json,
                 [](const train::TrainConfig& c, const auto& tr, const auto& dv) {
                   return train::train_syntax(c, tr, dv);
                 });
  });
}

hp_status hp_train_sentiment(const char* config_json, const hp_sentiment_corpus* train,
                             const hp_sentiment_corpus* dev, hp_model** model, char** log_tsv,
                             char** summary_json) {
  return guard([&] {
    train_common(config_json, train, dev, model, log_tsv, summary_json,
                 [](const train::TrainConfig& c, const auto& tr, const auto& dv) {
                   return train::train_sentiment(c, tr, dv);
                 });
  });
}

hp_status hp_model_load(const char* path, hp_model** out) {
  return guard([&] {
    need(out, "model output");
    auto m = std::make_unique<hp_model>();
    m->ckpt = checkpoint::read(std::filesystem::path(need_str(path, "path")));
    *out = m.release();
  });
}

hp_status hp_model_save(const hp_model* model, const char* path) {
  return guard([&] {
    checkpoint::write(std::filesystem::path(need_str(path, "path")), need(model, "model").ckpt);
  });
}

void hp_model_free(hp_model* model) { delete model; }

hp_status hp_model_set_metadata(hp_model* model, const char* key, const char* value) {
  return guard([&] {
    auto& meta = need(model, "model").ckpt.metadata;
    const std::string k = need_str(key, "key");
    const std::string v = need_str(value, "value");
    const auto it = std::find_if(meta.begin(), meta.end(), [&](const auto& kv) { return kv.first == k; });
    if (it != meta.end()) {
      it->second = v;
    } else {
      meta.emplace_back(k, v);
    }
  });
}

hp_status hp_model_info(const hp_model* model, char** info_json) {
  return guard([&] {
    need(info_json, "output");
    const auto& m = need(model, "model").ckpt.model;
    json j;
    j["task"] = probes::to_string(m.task);
    j["geometry"] = probes::to_string(m.geometry());
    j["input_dim"] = m.input_dim();
    j["rank"] = m.rank();
    if (const auto* pp = std::get_if<probes::PoincareProbeParams>(&m.probe)) {
      j["curvature"] = pp->ball.c.value();
      j["use_q"] = pp->use_q;
    } else {
      const auto& ep = std::get<probes::EuclideanProbeParams>(m.probe);
      j["nonlinearity"] = probes::to_string(ep.nonlinearity);
      j["two_layer"] = ep.B2.has_value();
    }
    if (m.heads) j["trainable_heads"] = m.heads->trainable;
    json meta = json::object();
    for (const auto& [k, v] : model->ckpt.metadata) meta[k] = v;
    j["metadata"] = meta;
    *info_json = dup(j.dump(2));
  });
}

hp_status hp_evaluate_syntax(const hp_model* model, const hp_syntax_corpus* corpus,
                             const char* options_json, char** report_json) {
  return guard([&] {
    need(report_json, "output");
    const auto& m = need(model, "model").ckpt.model;
    if (m.task == probes::Task::sentiment) throw UsageError("checkpoint is a sentiment probe");
    const auto report = eval::evaluate_syntax(m, need(corpus, "corpus").examples,
                                              parse_eval_options(parse_object(options_json)));
    *report_json = dup(eval::to_json(report));
  });
}

hp_status hp_evaluate_sentiment(const hp_model* model, const hp_sentiment_corpus* corpus,
                                const char* options_json, char** report_json) {
  return guard([&] {
    need(report_json, "output");
    const auto& m = need(model, "model").ckpt.model;
    if (m.task != probes::Task::sentiment) throw UsageError("checkpoint is a syntax probe");
    const auto report = eval::evaluate_sentiment(m, need(corpus, "corpus").examples,
                                                 parse_eval_options(parse_object(options_json)));
    *report_json = dup(eval::to_json(report));
  });
}

hp_status hp_rank_words(const hp_model* model, const hp_sentiment_corpus* corpus,
                        char** words) {
  return guard([&] {
    need(words, "output");
    *words = dup(words_tsv(probes::rank_word_sentiment(need(model, "model").ckpt.model,
                                                       need(corpus, "corpus").examples)));
  });
}

hp_status hp_sweep(const char* request_json, char** report_json, char** report_tsv) {
  return guard([&] {
    const Options o(parse_object(need_str(request_json, "request")),
                    {"kind", "axis", "grid", "config", "eval", "train_text", "train_embeddings",
                     "dev_text", "dev_embeddings", "max_length"});
    std::string kind = "syntax", axis_name;
    o.read("kind", kind);
    o.read("axis", axis_name);
    const auto axis = eval::parse_sweep_axis(axis_name);
    std::vector<double> grid;
    if (o.has("grid")) {
      if (!o.raw("grid").is_array()) throw UsageError("grid must be an array");
      for (const auto& v : o.raw("grid")) {
        if (!v.is_number()) throw UsageError("grid values must be numbers");
        grid.push_back(v.get<double>());
      }
    }
    const auto cfg = parse_train_config(o.has("config") ? o.raw("config").dump().c_str() : nullptr);
    const auto eo = parse_eval_options(o.has("eval") ? o.raw("eval") : json::object());
    std::string train_text, train_emb, dev_text, dev_emb;
    o.read("train_text", train_text);
    o.read("train_embeddings", train_emb);
    o.read("dev_text", dev_text);
    o.read("dev_embeddings", dev_emb);
    data::LoadOptions lo;
    o.read("max_length", lo.max_length);
    if (train_text.empty() || train_emb.empty() || dev_text.empty() || dev_emb.empty()) {
      throw UsageError("sweep needs train and dev text and embedding paths");
    }

    const auto resolve = [&](const std::string& path, int layer) -> std::optional<std::string> {
      if (axis != eval::SweepAxis::layer || path.find("{layer}") == std::string::npos) return path;
      auto p = substitute_layer(path, layer);
      if (!std::filesystem::exists(p)) return std::nullopt;
      return p;
    };
    eval::SweepReport report;
    if (kind == "syntax") {
      eval::SplitProvider<data::SyntaxExample> provider =
          [&](int layer) -> std::optional<eval::Split<data::SyntaxExample>> {
        const auto te = resolve(train_emb, layer), de = resolve(dev_emb, layer);
        if (!te || !de) return std::nullopt;
        return eval::Split<data::SyntaxExample>{data::load_syntax_corpus(train_text, *te, lo),
                                                data::load_syntax_corpus(dev_text, *de, lo)};
      };
      report = eval::sweep_syntax(axis, grid, cfg, provider, eo);
    } else if (kind == "sentiment") {
      eval::SplitProvider<data::SentimentExample> provider =
          [&](int layer) -> std::optional<eval::Split<data::SentimentExample>> {
        const auto te = resolve(train_emb, layer), de = resolve(dev_emb, layer);
        if (!te || !de) return std::nullopt;
        return eval::Split<data::SentimentExample>{
            data::load_sentiment_corpus(train_text, *te, lo),
            data::load_sentiment_corpus(dev_text, *de, lo)};
      };
      report = eval::sweep_sentiment(axis, grid, cfg, provider, eo);
    } else {
      throw UsageError("sweep kind must be syntax or sentiment");
    }
    put(report_json, eval::to_json(report));
    put(report_tsv, eval::to_tsv(report));
  });
}

hp_status hp_gradcheck(const char* options_json, char** report_json, int* passed) {
  return guard([&] {
    const Options o(parse_object(options_json),
                    {"seed", "tolerance", "step", "sentences", "corrupt"});
    gradcheck::Options go;
    o.read("seed", go.seed);
    o.read("tolerance", go.tolerance);
    o.read("step", go.step);
    o.read("sentences", go.sentences);
    if (!(go.tolerance > 0) || !(go.step > 0) || go.sentences <= 0) {
      throw UsageError("tolerance, step and sentences must be positive");
    }
    bool corrupt = false;
    o.read("corrupt", corrupt);
    if (corrupt) {
      go.corrupt = [](std::vector<double>& g) {
        if (!g.empty()) g[g.size() / 2] += 1e-2 * (1.0 + std::abs(g[g.size() / 2]));
      };
    }
    const auto report = gradcheck::run(gradcheck::default_cases(), go);
    json j;
    j["tolerance"] = go.tolerance;
    j["seed"] = go.seed;
    j["passed"] = report.passed;
    j["max_rel_error"] = report.max_rel_error;
    json cases = json::array();
    for (const auto& c : report.cases) {
      json cj;
      cj["case"] = c.spec.label();
      cj["passed"] = c.passed;
      cj["max_rel_error"] = c.max_rel_error;
      cj["worst_param"] = c.worst_param;
      cj["worst_offset"] = c.worst_offset;
      cj["parameters"] = c.parameter_count;
      cases.push_back(cj);
    }
    j["cases"] = cases;
    put(report_json, j.dump(2));
    if (passed) *passed = report.passed ? 1 : 0;
  });
}

hp_status hp_viz_syntax(const hp_model* model, const hp_syntax_corpus* corpus, size_t index,
                        const char* options_json, char** svg, char** scene_tsv) {
  return guard([&] {
    const auto& m = need(model, "model").ckpt.model;
    const auto& examples = need(corpus, "corpus").examples;
    if (m.task == probes::Task::sentiment) throw UsageError("checkpoint is a sentiment probe");
    if (index >= examples.size()) {
      throw UsageError("sentence index " + std::to_string(index) + " out of range (corpus has " +
                       std::to_string(examples.size()) + ")");
    }
    const Options o(parse_object(options_json), {"include_punct"});
    data::PunctuationSet punct;
    o.read("include_punct", punct.include_punct);
    const auto scene = viz::syntax_scene(m, examples[index].record, punct);
    std::ostringstream tsv;
    viz::write_scene_tsv(tsv, scene);
    put(svg, viz::render_svg(scene));
    put(scene_tsv, tsv.str());
  });
}

hp_status hp_viz_sentiment(const hp_model* model, const hp_sentiment_corpus* corpus, size_t index,
                           const char* options_json, char** svg, char** scene_tsv) {
  return guard([&] {
    const auto& m = need(model, "model").ckpt.model;
    const auto& examples = need(corpus, "corpus").examples;
    if (m.task != probes::Task::sentiment) throw UsageError("checkpoint is a syntax probe");
    if (index >= examples.size()) {
      throw UsageError("sentence index " + std::to_string(index) + " out of range (corpus has " +
                       std::to_string(examples.size()) + ")");
    }
    const Options o(parse_object(options_json), {"significance"});
    viz::SentimentSceneOptions so;
    o.read("significance", so.significance);
    if (!(so.significance >= 0)) throw UsageError("significance must be non-negative");
    const auto scene = viz::sentiment_scene(m, examples[index], so);
    std::ostringstream tsv;
    viz::write_scene_tsv(tsv, scene);
    put(svg, viz::render_svg(scene));
    put(scene_tsv, tsv.str());
  });
}

}  // extern "C"
