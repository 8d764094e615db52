#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "roadkg/bayes.hpp"
#include "roadkg/common.hpp"
#include "roadkg/graph_builder.hpp"

#include "json.hpp"

namespace roadkg {

// ---------------------------------------------------------------------------
// Deterministic template explanation
// ---------------------------------------------------------------------------

// Renders one sentence from the prediction trace: the chosen label, every
// evidence category in assignment order, and the activated rule ids. Pure
// function of its inputs; bit-identical across runs.
inline std::string render_template(const Prediction& pred, const LinguisticFrame& frame,
                                   const std::vector<std::string>& activated_rules) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(4);
  double chosen_posterior = 0.0;
  for (size_t i = 0; i < pred.labels.size(); ++i)
    if (pred.labels[i] == pred.chosen) chosen_posterior = pred.posterior[i];
  os << "Road user " << frame.user_id << " at frame " << frame.frame << " is predicted to "
     << pred.chosen << " (raw posterior " << chosen_posterior << ") because the observed state is";
  bool first = true;
  for (const auto& [rel, inst] : frame.assignments) {
    os << (first ? " " : ", ") << inst << " (" << rel << ")";
    first = false;
  }
  os << ".";
  if (!activated_rules.empty()) {
    os << " Activated rules:";
    for (size_t i = 0; i < activated_rules.size(); ++i)
      os << (i == 0 ? " " : ", ") << activated_rules[i];
    os << ".";
  }
  return os.str();
}

// The retrieval query extends the linguistic inputs with the prediction.
inline std::string build_query(const LinguisticFrame& frame, const Prediction& pred) {
  std::ostringstream os;
  os << "Observed state:";
  bool first = true;
  for (const auto& [rel, inst] : frame.assignments) {
    os << (first ? " " : ", ") << rel << "=" << inst;
    first = false;
  }
  os << ". Predicted behavior: " << pred.chosen << ".";
  return os.str();
}

// ---------------------------------------------------------------------------
// Corpus chunking
// ---------------------------------------------------------------------------

struct Chunk {
  std::string id;
  std::string text;
  size_t tokens = 0;    // whitespace-delimited words
  std::string source;
};

inline size_t count_tokens(const std::string& text) {
  std::istringstream is(text);
  std::string tok;
  size_t n = 0;
  while (is >> tok) ++n;
  return n;
}

// Splits a document into chunks of at most `size` whitespace tokens, cutting
// on token boundaries so that the concatenation of chunk texts reproduces the
// document byte for byte. Chunk ids are deterministic.
inline std::vector<Chunk> chunk_corpus(const std::string& doc, size_t size,
                                       const std::string& source = "corpus") {
  if (size < 1) fail("chunk_corpus: chunk size must be >= 1");
  if (doc.empty()) fail("chunk_corpus: empty document");
  std::vector<Chunk> chunks;
  size_t pos = 0, chunk_start = 0, tokens = 0;
  auto flush = [&](size_t end) {
    Chunk c;
    c.id = source + "#" + std::to_string(chunks.size());
    c.text = doc.substr(chunk_start, end - chunk_start);
    c.tokens = tokens;
    c.source = source;
    chunks.push_back(std::move(c));
    chunk_start = end;
    tokens = 0;
  };
  while (pos < doc.size()) {
    while (pos < doc.size() && std::isspace(static_cast<unsigned char>(doc[pos]))) ++pos;
    if (pos == doc.size()) break;
    while (pos < doc.size() && !std::isspace(static_cast<unsigned char>(doc[pos]))) ++pos;
    ++tokens;  // one word consumed
    if (tokens == size) flush(pos);
  }
  if (tokens > 0) {
    flush(doc.size());
  } else if (chunk_start < doc.size() && !chunks.empty()) {
    chunks.back().text += doc.substr(chunk_start);  // trailing whitespace
  }
  if (chunks.empty()) fail("chunk_corpus: document contains no tokens");
  return chunks;
}

// ---------------------------------------------------------------------------
// Embedding backends
// ---------------------------------------------------------------------------

class TextEmbedder {
 public:
  virtual ~TextEmbedder() = default;
  virtual std::vector<double> embed(const std::string& text) const = 0;
  virtual size_t dimension() const = 0;
};

// Deterministic feature-hashing embedder: each token lands in a bucket with a
// sign, via FNV-1a (stable across platforms, unlike std::hash). Vectors are
// L2-normalized.
class HashingEmbedder : public TextEmbedder {
 public:
  explicit HashingEmbedder(size_t dim = 64) : dim_(dim) {
    if (dim_ < 1) fail("HashingEmbedder: dimension must be >= 1");
  }

  std::vector<double> embed(const std::string& text) const override {
    std::vector<double> v(dim_, 0.0);
    std::istringstream is(text);
    std::string tok;
    while (is >> tok) {
      uint64_t h = fnv1a(tok);
      size_t bucket = h % dim_;
      double sign = (h >> 63) ? -1.0 : 1.0;
      v[bucket] += sign;
    }
    double norm = 0.0;
    for (double x : v) norm += x * x;
    if (norm == 0.0) {
      v[fnv1a(text) % dim_] = 1.0;  // tokens cancelled out; fall back to whole-text bucket
      return v;
    }
    norm = std::sqrt(norm);
    for (auto& x : v) x /= norm;
    return v;
  }

  size_t dimension() const override { return dim_; }

  static uint64_t fnv1a(const std::string& s) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ull;
    }
    return h;
  }

 private:
  size_t dim_;
};

// ---------------------------------------------------------------------------
// Vector store with exact cosine retrieval
// ---------------------------------------------------------------------------

struct RetrievalHit {
  std::string chunk_id;
  double similarity = 0.0;
};

class VectorStore {
 public:
  explicit VectorStore(size_t dim) : dim_(dim) {
    if (dim_ < 1) fail("VectorStore: dimension must be >= 1");
  }

  size_t dimension() const { return dim_; }
  size_t size() const { return ids_.size(); }

  // Vectors are unit-normalized on insertion.
  void add(const std::string& chunk_id, std::vector<double> vec) {
    if (vec.size() != dim_) fail("VectorStore: dimension mismatch for chunk '" + chunk_id + "'");
    double norm = 0.0;
    for (double x : vec) norm += x * x;
    if (norm == 0.0) fail("VectorStore: zero vector for chunk '" + chunk_id + "'");
    norm = std::sqrt(norm);
    for (auto& x : vec) x /= norm;
    ids_.push_back(chunk_id);
    vectors_.push_back(std::move(vec));
  }

  // Exact top-k by cosine similarity, descending; ties broken by chunk id.
  // Returns all chunks when k exceeds the store size.
  std::vector<RetrievalHit> retrieve(const std::vector<double>& query, size_t k) const {
    if (query.size() != dim_) fail("VectorStore: query dimension mismatch");
    double qnorm = 0.0;
    for (double x : query) qnorm += x * x;
    if (qnorm == 0.0) fail("VectorStore: zero query vector");
    qnorm = std::sqrt(qnorm);
    std::vector<RetrievalHit> hits;
    hits.reserve(ids_.size());
    for (size_t i = 0; i < ids_.size(); ++i) {
      double dot = 0.0;
      for (size_t j = 0; j < dim_; ++j) dot += query[j] * vectors_[i][j];
      hits.push_back({ids_[i], dot / qnorm});
    }
    std::sort(hits.begin(), hits.end(), [](const RetrievalHit& a, const RetrievalHit& b) {
      if (a.similarity != b.similarity) return a.similarity > b.similarity;
      return a.chunk_id < b.chunk_id;
    });
    if (hits.size() > k) hits.resize(k);
    return hits;
  }

 private:
  size_t dim_;
  std::vector<std::string> ids_;
  std::vector<std::vector<double>> vectors_;
};

// ---------------------------------------------------------------------------
// Generation backends
// ---------------------------------------------------------------------------

struct PromptBundle {
  std::string system_prompt;
  std::vector<Chunk> retrieved;  // rank order
  std::string user_query;

  // The augmented user message: query followed by the retrieved context.
  std::string augmented_user_message() const {
    std::ostringstream os;
    os << user_query << "\n\nContext:\n";
    for (const auto& c : retrieved) os << "[" << c.id << "] " << c.text << "\n";
    return os.str();
  }
};

class LlmBackend {
 public:
  virtual ~LlmBackend() = default;
  virtual std::string complete(const PromptBundle& bundle) = 0;
};

// Deterministic test backend: canonical concatenation naming every retrieved
// chunk id.
class StubBackend : public LlmBackend {
 public:
  std::string complete(const PromptBundle& bundle) override {
    std::ostringstream os;
    os << "stub-explanation query=\"" << bundle.user_query << "\" chunks=[";
    for (size_t i = 0; i < bundle.retrieved.size(); ++i)
      os << (i ? "," : "") << bundle.retrieved[i].id;
    os << "]";
    return os.str();
  }
};

// Retry policy for remote backends.
struct RetryPolicy {
  int attempts = 3;
  int base_delay_ms = 200;  // doubles per attempt
};

inline std::string generate(const PromptBundle& bundle, LlmBackend& backend,
                            const RetryPolicy& retry = {}) {
  std::string last_error;
  for (int attempt = 0; attempt < retry.attempts; ++attempt) {
    if (attempt > 0)
      std::this_thread::sleep_for(
          std::chrono::milliseconds(retry.base_delay_ms * (1 << (attempt - 1))));
    try {
      return backend.complete(bundle);
    } catch (const Error& e) {
      last_error = e.what();
    }
  }
  fail("generation failed after " + std::to_string(retry.attempts) +
       " attempts: " + last_error);
}

}  // namespace roadkg
