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

#include "hyperprobe/data.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <deque>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string_view>

#include "hyperprobe/error.hpp"

namespace hyperprobe::data {

namespace {

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string_view trim_cr(std::string_view s) {
  if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
  return s;
}

std::optional<int> parse_int(std::string_view s) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

struct ParsedSentence {
  SentenceRecord record;
  std::optional<std::string> error;
  std::size_t first_line = 0;
};

// Every sentence block in file order, malformed ones included, so that PEMB
// blocks can be paired positionally before anything is dropped.
std::vector<ParsedSentence> parse_conllu_blocks(std::istream& in) {
  std::vector<ParsedSentence> out;
  ParsedSentence cur;
  bool open = false;
  std::string raw;
  std::size_t line_no = 0;

  auto flush = [&] {
    if (open) {
      if (!cur.error) cur.error = validate_heads(cur.record.head);
      out.push_back(std::move(cur));
    }
    cur = ParsedSentence{};
    open = false;
  };

  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = trim_cr(raw);
    if (line.empty()) {
      flush();
      continue;
    }
    if (line.front() == '#') continue;
    if (!open) {
      open = true;
      cur.first_line = line_no;
    }
    if (cur.error) continue;
    const auto cols = split(line, '\t');
    if (cols.size() != 10) {
      cur.error = "line " + std::to_string(line_no) + ": expected 10 columns, found " +
                  std::to_string(cols.size());
      continue;
    }
    // Multiword-token ranges (1-2) and empty nodes (1.1) carry no head.
    if (cols[0].find_first_of("-.") != std::string_view::npos) continue;
    const auto id = parse_int(cols[0]);
    const auto head = parse_int(cols[6]);
    if (!id || !head) {
      cur.error = "line " + std::to_string(line_no) + ": non-integer ID or HEAD";
      continue;
    }
    if (*id != static_cast<int>(cur.record.size()) + 1) {
      cur.error = "line " + std::to_string(line_no) + ": token IDs are not consecutive";
      continue;
    }
    auto& r = cur.record;
    r.tokens.emplace_back(cols[1]);
    r.upos.emplace_back(cols[3]);
    r.xpos.emplace_back(cols[4]);
    r.head.push_back(*head);
    r.deprel.emplace_back(cols[7]);
  }
  flush();
  return out;
}

std::ifstream open_input(const std::filesystem::path& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

std::ofstream open_output(const std::filesystem::path& path,
                          std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

void put_u32(std::ostream& out, std::uint32_t v) {
  const std::array<char, 4> b{static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                              static_cast<char>((v >> 16) & 0xff),
                              static_cast<char>((v >> 24) & 0xff)};
  out.write(b.data(), 4);
}

std::uint32_t get_u32(std::istream& in, const char* what) {
  std::array<unsigned char, 4> b{};
  if (!in.read(reinterpret_cast<char*>(b.data()), 4)) {
    throw DataError(std::string("PEMB truncated while reading ") + what);
  }
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

template <typename Item>
void attach_blocks(std::vector<Item>& items, const EmbeddingFile& file) {
  if (items.size() != file.sentences.size()) {
    throw DataError("embedding file holds " + std::to_string(file.sentences.size()) +
                    " sentences but the paired text file has " + std::to_string(items.size()));
  }
  for (std::size_t s = 0; s < items.size(); ++s) {
    const auto& block = file.sentences[s];
    if (static_cast<std::size_t>(block.rows()) != items[s].tokens.size()) {
      throw DataError("sentence " + std::to_string(s) + ": " + std::to_string(block.rows()) +
                      " embedding rows for " + std::to_string(items[s].tokens.size()) +
                      " tokens");
    }
    items[s].embedding = block.template cast<double>();
  }
}

}  // namespace

std::size_t SentenceRecord::root() const {
  const auto it = std::find(head.begin(), head.end(), 0);
  if (it == head.end()) throw DataError("sentence has no root");
  return static_cast<std::size_t>(it - head.begin());
}

std::optional<std::string> validate_heads(const std::vector<int>& head) {
  const int t = static_cast<int>(head.size());
  if (t == 0) return "empty sentence";
  int roots = 0;
  for (int i = 0; i < t; ++i) {
    if (head[i] < 0 || head[i] > t) return "head index out of range at token " + std::to_string(i + 1);
    if (head[i] == i + 1) return "token " + std::to_string(i + 1) + " is its own head";
    if (head[i] == 0) ++roots;
  }
  if (roots != 1) return "expected exactly one root, found " + std::to_string(roots);
  for (int i = 0; i < t; ++i) {
    int node = i + 1;
    for (int steps = 0; node != 0; ++steps) {
      if (steps > t) return "head cycle through token " + std::to_string(i + 1);
      node = head[node - 1];
    }
  }
  return std::nullopt;
}

std::vector<SentenceRecord> parse_conllu(std::istream& in, ParseStats* stats) {
  std::vector<SentenceRecord> out;
  ParseStats local;
  for (auto& block : parse_conllu_blocks(in)) {
    if (block.error) {
      ++local.dropped;
      local.warnings.push_back("dropped sentence starting at line " +
                               std::to_string(block.first_line) + ": " + *block.error);
      continue;
    }
    ++local.kept;
    out.push_back(std::move(block.record));
  }
  if (stats) *stats = std::move(local);
  return out;
}

std::vector<SentenceRecord> parse_conllu(const std::filesystem::path& path, ParseStats* stats) {
  auto in = open_input(path);
  ParseStats local;
  auto out = parse_conllu(in, &local);
  if (out.empty()) throw DataError("no parsable sentences in " + path.string());
  if (stats) *stats = std::move(local);
  return out;
}

void write_conllu(std::ostream& out, const std::vector<SentenceRecord>& sentences) {
  for (const auto& s : sentences) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      auto field = [](const std::vector<std::string>& v, std::size_t k) {
        return k < v.size() && !v[k].empty() ? v[k] : std::string("_");
      };
      out << (i + 1) << '\t' << s.tokens[i] << "\t_\t" << field(s.upos, i) << '\t'
          << field(s.xpos, i) << "\t_\t" << s.head[i] << '\t' << field(s.deprel, i)
          << "\t_\t_\n";
    }
    out << '\n';
  }
}

TreeGold tree_metrics(const SentenceRecord& record) {
  const auto t = static_cast<int>(record.size());
  std::vector<std::vector<int>> adj(t);
  for (int i = 0; i < t; ++i) {
    if (record.head[i] > 0) {
      adj[i].push_back(record.head[i] - 1);
      adj[record.head[i] - 1].push_back(i);
    }
  }
  TreeGold gold{Eigen::MatrixXi::Constant(t, t, -1), Eigen::VectorXi::Zero(t)};
  std::deque<int> queue;
  for (int src = 0; src < t; ++src) {
    gold.dist(src, src) = 0;
    queue.assign(1, src);
    while (!queue.empty()) {
      const int u = queue.front();
      queue.pop_front();
      for (int v : adj[u]) {
        if (gold.dist(src, v) < 0) {
          gold.dist(src, v) = gold.dist(src, u) + 1;
          queue.push_back(v);
        }
      }
    }
  }
  const auto root = static_cast<Eigen::Index>(record.root());
  gold.depth = gold.dist.row(root).transpose();
  return gold;
}

SentenceRecord linear_baseline(SentenceRecord record) {
  for (std::size_t i = 0; i < record.size(); ++i) record.head[i] = static_cast<int>(i);
  return record;
}

EmbeddingFile read_pemb(std::istream& in) {
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), 4)) throw DataError("PEMB truncated while reading magic");
  if (std::string_view(magic.data(), 4) != "PEMB") throw DataError("bad PEMB magic");
  const std::uint32_t version = get_u32(in, "version");
  if (version != kPembVersion) {
    throw DataError("unsupported PEMB version " + std::to_string(version));
  }
  const std::uint32_t count = get_u32(in, "sentence count");
  EmbeddingFile file;
  file.dim = get_u32(in, "dimension");
  file.sentences.reserve(count);
  for (std::uint32_t s = 0; s < count; ++s) {
    const std::uint32_t t = get_u32(in, "token count");
    const std::size_t n = static_cast<std::size_t>(t) * file.dim;
    std::vector<unsigned char> bytes(n * 4);
    if (!in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()))) {
      throw DataError("PEMB truncated in sentence " + std::to_string(s));
    }
    FloatRows block(t, file.dim);
    float* dst = block.data();
    for (std::size_t k = 0; k < n; ++k) {
      const std::uint32_t w = static_cast<std::uint32_t>(bytes[4 * k]) |
                              (static_cast<std::uint32_t>(bytes[4 * k + 1]) << 8) |
                              (static_cast<std::uint32_t>(bytes[4 * k + 2]) << 16) |
                              (static_cast<std::uint32_t>(bytes[4 * k + 3]) << 24);
      dst[k] = std::bit_cast<float>(w);
    }
    file.sentences.push_back(std::move(block));
  }
  return file;
}

EmbeddingFile read_pemb(const std::filesystem::path& path) {
  auto in = open_input(path, std::ios::binary);
  return read_pemb(in);
}

void write_pemb(std::ostream& out, const EmbeddingFile& file) {
  out.write("PEMB", 4);
  put_u32(out, kPembVersion);
  put_u32(out, static_cast<std::uint32_t>(file.sentences.size()));
  put_u32(out, file.dim);
  for (const auto& block : file.sentences) {
    if (static_cast<std::uint32_t>(block.cols()) != file.dim && block.rows() > 0) {
      throw UsageError("write_pemb: block width differs from the file dimension");
    }
    put_u32(out, static_cast<std::uint32_t>(block.rows()));
    const float* src = block.data();
    for (Eigen::Index k = 0; k < block.size(); ++k) put_u32(out, std::bit_cast<std::uint32_t>(src[k]));
  }
  if (!out) throw DataError("PEMB write failed");
}

void write_pemb(const std::filesystem::path& path, const EmbeddingFile& file) {
  auto out = open_output(path, std::ios::binary);
  write_pemb(out, file);
}

std::vector<SentimentExample> load_sentiment_tsv(std::istream& in, ParseStats* stats) {
  std::vector<SentimentExample> out;
  ParseStats local;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = trim_cr(raw);
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string_view::npos) {
      throw DataError("line " + std::to_string(line_no) + ": expected label<TAB>text");
    }
    const std::string_view label = line.substr(0, tab);
    SentimentExample ex;
    if (label == "1") {
      ex.label = Label::positive;
    } else if (label == "0") {
      ex.label = Label::negative;
    } else {
      throw DataError("line " + std::to_string(line_no) + ": unknown label '" +
                      std::string(label) + "'");
    }
    std::istringstream words{std::string(line.substr(tab + 1))};
    for (std::string w; words >> w;) ex.tokens.push_back(std::move(w));
    if (ex.tokens.empty()) {
      local.warnings.push_back("line " + std::to_string(line_no) + ": empty text");
    }
    ++local.kept;
    out.push_back(std::move(ex));
  }
  if (stats) *stats = std::move(local);
  return out;
}

std::vector<SentimentExample> load_sentiment_tsv(const std::filesystem::path& path,
                                                 ParseStats* stats) {
  auto in = open_input(path);
  return load_sentiment_tsv(in, stats);
}

void write_sentiment_tsv(std::ostream& out, const std::vector<SentimentExample>& examples) {
  for (const auto& ex : examples) {
    out << (ex.label == Label::positive ? '1' : '0') << '\t';
    for (std::size_t i = 0; i < ex.tokens.size(); ++i) out << (i ? " " : "") << ex.tokens[i];
    out << '\n';
  }
}

bool PunctuationSet::is_punct(const SentenceRecord& record, std::size_t i) const {
  if (include_punct) return false;
  return (i < record.upos.size() && tags.contains(record.upos[i])) ||
         (i < record.xpos.size() && tags.contains(record.xpos[i]));
}

std::vector<bool> PunctuationSet::eligible(const SentenceRecord& record) const {
  std::vector<bool> mask(record.size());
  for (std::size_t i = 0; i < record.size(); ++i) mask[i] = !is_punct(record, i);
  return mask;
}

void attach_embeddings(std::vector<SentenceRecord>& sentences, const EmbeddingFile& file) {
  attach_blocks(sentences, file);
}

void attach_embeddings(std::vector<SentimentExample>& examples, const EmbeddingFile& file) {
  attach_blocks(examples, file);
}

std::vector<SyntaxExample> load_syntax_corpus(const std::filesystem::path& treebank,
                                              const std::filesystem::path& embeddings,
                                              const LoadOptions& options, LoadSummary* summary) {
  auto in = open_input(treebank);
  auto blocks = parse_conllu_blocks(in);
  const EmbeddingFile file = read_pemb(embeddings);

  if (file.sentences.size() != blocks.size()) {
    throw DataError("embedding file holds " + std::to_string(file.sentences.size()) +
                    " sentences but " + treebank.string() + " has " +
                    std::to_string(blocks.size()));
  }
  std::vector<SentenceRecord> records;
  records.reserve(blocks.size());
  for (std::size_t s = 0; s < blocks.size(); ++s) {
    auto& record = blocks[s].record;
    // Malformed blocks are dropped below; their token counts are unreliable.
    if (!blocks[s].error) {
      const auto& block = file.sentences[s];
      if (static_cast<std::size_t>(block.rows()) != record.size()) {
        throw DataError("sentence " + std::to_string(s) + ": " + std::to_string(block.rows()) +
                        " embedding rows for " + std::to_string(record.size()) + " tokens");
      }
      record.embedding = block.cast<double>();
    }
    records.push_back(std::move(record));
  }

  LoadSummary local;
  local.dim = file.dim;
  std::vector<SyntaxExample> out;
  for (std::size_t s = 0; s < records.size(); ++s) {
    if (blocks[s].error) {
      ++local.dropped_malformed;
      local.warnings.push_back("dropped sentence " + std::to_string(s) + ": " + *blocks[s].error);
      continue;
    }
    if (records[s].size() > options.max_length) {
      ++local.dropped_too_long;
      continue;
    }
    TreeGold gold = tree_metrics(records[s]);
    out.push_back({std::move(records[s]), std::move(gold)});
  }
  local.loaded = out.size();
  if (out.empty()) throw DataError("no usable sentences in " + treebank.string());
  if (summary) *summary = std::move(local);
  return out;
}

std::vector<SentimentExample> load_sentiment_corpus(const std::filesystem::path& labels,
                                                    const std::filesystem::path& embeddings,
                                                    const LoadOptions& options,
                                                    LoadSummary* summary) {
  ParseStats stats;
  auto examples = load_sentiment_tsv(labels, &stats);
  const EmbeddingFile file = read_pemb(embeddings);
  attach_embeddings(examples, file);

  LoadSummary local;
  local.dim = file.dim;
  local.warnings = std::move(stats.warnings);
  std::vector<SentimentExample> out;
  for (auto& ex : examples) {
    if (ex.tokens.empty()) {
      ++local.dropped_malformed;
      continue;
    }
    if (ex.size() > options.max_length) {
      ++local.dropped_too_long;
      continue;
    }
    out.push_back(std::move(ex));
  }
  local.loaded = out.size();
  if (out.empty()) throw DataError("no usable examples in " + labels.string());
  if (summary) *summary = std::move(local);
  return out;
}

}  // namespace hyperprobe::data
