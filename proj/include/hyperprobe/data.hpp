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

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace hyperprobe::data {

/// One dependency-parsed sentence. Heads are 1-based with 0 marking the root;
/// the embedding (t x n) is empty until paired with a PEMB block.
struct SentenceRecord {
  std::vector<std::string> tokens;
  std::vector<int> head;
  std::vector<std::string> upos;
  std::vector<std::string> xpos;
  std::vector<std::string> deprel;
  Eigen::MatrixXd embedding;

  std::size_t size() const noexcept { return tokens.size(); }
  /// 0-based index of the root token.
  std::size_t root() const;
};

/// Pairwise tree distances and per-token depth (root depth 0).
struct TreeGold {
  Eigen::MatrixXi dist;
  Eigen::VectorXi depth;
};

enum class Label { negative = 0, positive = 1 };

struct SentimentExample {
  std::vector<std::string> tokens;
  Eigen::MatrixXd embedding;
  Label label = Label::negative;

  std::size_t size() const noexcept { return tokens.size(); }
};

struct ParseStats {
  std::size_t kept = 0;
  std::size_t dropped = 0;
  std::vector<std::string> warnings;
};

/// Returns an explanation when heads do not form a single-rooted tree.
std::optional<std::string> validate_heads(const std::vector<int>& head);

std::vector<SentenceRecord> parse_conllu(std::istream& in, ParseStats* stats = nullptr);
std::vector<SentenceRecord> parse_conllu(const std::filesystem::path& path,
                                         ParseStats* stats = nullptr);
void write_conllu(std::ostream& out, const std::vector<SentenceRecord>& sentences);

TreeGold tree_metrics(const SentenceRecord& record);

/// Same tokens, heads rewritten into a left-to-right chain rooted at token 1.
SentenceRecord linear_baseline(SentenceRecord record);

// PEMB container: "PEMB", u32 version, u32 sentence count, u32 dim, then per
// sentence a u32 token count and t*dim little-endian f32 values, row-major.
inline constexpr std::uint32_t kPembVersion = 1;

using FloatRows = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct EmbeddingFile {
  std::uint32_t dim = 0;
  std::vector<FloatRows> sentences;
};

EmbeddingFile read_pemb(std::istream& in);
EmbeddingFile read_pemb(const std::filesystem::path& path);
void write_pemb(std::ostream& out, const EmbeddingFile& file);
void write_pemb(const std::filesystem::path& path, const EmbeddingFile& file);

std::vector<SentimentExample> load_sentiment_tsv(std::istream& in, ParseStats* stats = nullptr);
std::vector<SentimentExample> load_sentiment_tsv(const std::filesystem::path& path,
                                                 ParseStats* stats = nullptr);
void write_sentiment_tsv(std::ostream& out, const std::vector<SentimentExample>& examples);

/// Tags (matched against UPOS or XPOS) treated as punctuation.
struct PunctuationSet {
  std::set<std::string> tags{"PUNCT", "''", ",", ".", ":", "``", "-LRB-", "-RRB-"};
  bool include_punct = false;

  bool is_punct(const SentenceRecord& record, std::size_t i) const;
  /// Mask of tokens that participate in edge/root/depth scoring.
  std::vector<bool> eligible(const SentenceRecord& record) const;
};

struct SyntaxExample {
  SentenceRecord record;
  TreeGold gold;
};

struct LoadOptions {
  std::size_t max_length = 60;
};

struct LoadSummary {
  std::size_t loaded = 0;
  std::size_t dropped_malformed = 0;
  std::size_t dropped_too_long = 0;
  std::uint32_t dim = 0;
  std::vector<std::string> warnings;
};

/// Parses the treebank, pairs each sentence with its PEMB block in order, and
/// applies the length cap. Token-count disagreements throw DataError.
std::vector<SyntaxExample> load_syntax_corpus(const std::filesystem::path& treebank,
                                              const std::filesystem::path& embeddings,
                                              const LoadOptions& options = {},
                                              LoadSummary* summary = nullptr);

std::vector<SentimentExample> load_sentiment_corpus(const std::filesystem::path& labels,
                                                    const std::filesystem::path& embeddings,
                                                    const LoadOptions& options = {},
                                                    LoadSummary* summary = nullptr);

/// Attaches PEMB blocks to sentences in order (f32 promoted to f64).
void attach_embeddings(std::vector<SentenceRecord>& sentences, const EmbeddingFile& file);
void attach_embeddings(std::vector<SentimentExample>& examples, const EmbeddingFile& file);

}  // namespace hyperprobe::data
