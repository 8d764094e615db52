#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "roadkg/common.hpp"
#include "roadkg/triple_store.hpp"

namespace roadkg {

enum class ScorerKind { TransE, ComplEx };

inline const char* scorer_name(ScorerKind s) {
  return s == ScorerKind::TransE ? "TransE" : "ComplEx";
}

inline ScorerKind scorer_from_name(const std::string& name) {
  if (name == "TransE" || name == "transe") return ScorerKind::TransE;
  if (name == "ComplEx" || name == "complex") return ScorerKind::ComplEx;
  fail("unknown scorer '" + name + "' (expected transe or complex)");
}

// Numerically safe log(sigmoid(x)) and sigmoid(x).
inline double log_sigmoid(double x) {
  if (x >= 0.0) return -std::log1p(std::exp(-x));
  return x - std::log1p(std::exp(x));
}

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

// Entity and relation vectors for one trained model. TransE vectors have
// `dim` reals; ComplEx vectors have `dim` complex numbers stored as
// interleaved (real, imaginary) pairs in one flat row of 2*dim reals.
struct EmbeddingTable {
  ScorerKind scorer = ScorerKind::TransE;
  int dim = 0;
  std::vector<std::string> entity_names;
  std::vector<std::string> relation_names;
  std::unordered_map<std::string, uint32_t> entity_index;
  std::unordered_map<std::string, uint32_t> relation_index;
  std::vector<double> entities;   // entity_count x storage_dim, row-major
  std::vector<double> relations;  // relation_count x storage_dim, row-major

  int storage_dim() const { return scorer == ScorerKind::ComplEx ? 2 * dim : dim; }
  size_t entity_count() const { return entity_names.size(); }
  size_t relation_count() const { return relation_names.size(); }

  std::span<double> entity(uint32_t i) {
    return {entities.data() + static_cast<size_t>(i) * storage_dim(),
            static_cast<size_t>(storage_dim())};
  }
  std::span<const double> entity(uint32_t i) const {
    return {entities.data() + static_cast<size_t>(i) * storage_dim(),
            static_cast<size_t>(storage_dim())};
  }
  std::span<double> relation(uint32_t i) {
    return {relations.data() + static_cast<size_t>(i) * storage_dim(),
            static_cast<size_t>(storage_dim())};
  }
  std::span<const double> relation(uint32_t i) const {
    return {relations.data() + static_cast<size_t>(i) * storage_dim(),
            static_cast<size_t>(storage_dim())};
  }

  uint32_t entity_id(const std::string& name) const {
    auto it = entity_index.find(name);
    if (it == entity_index.end()) fail("unknown entity id '" + name + "'");
    return it->second;
  }

  uint32_t relation_id(const std::string& name) const {
    auto it = relation_index.find(name);
    if (it == relation_index.end()) fail("unknown relation id '" + name + "'");
    return it->second;
  }

  bool has_entity(const std::string& name) const { return entity_index.count(name) > 0; }
  bool has_relation(const std::string& name) const { return relation_index.count(name) > 0; }

  bool finite() const {
    for (double v : entities)
      if (!std::isfinite(v)) return false;
    for (double v : relations)
      if (!std::isfinite(v)) return false;
    return true;
  }

  // Uniform init in [-6/sqrt(k), +6/sqrt(k)], the classic TransE recipe.
  static EmbeddingTable init(const TripleStore& store, ScorerKind scorer, int dim, Rng& rng) {
    if (dim <= 0) fail("embedding dimension must be positive");
    if (store.size() == 0) fail("cannot initialize embeddings for an empty store");
    EmbeddingTable t;
    t.scorer = scorer;
    t.dim = dim;
    t.entity_names = store.entity_names();
    t.relation_names = store.relation_names();
    for (uint32_t i = 0; i < t.entity_names.size(); ++i) t.entity_index[t.entity_names[i]] = i;
    for (uint32_t i = 0; i < t.relation_names.size(); ++i)
      t.relation_index[t.relation_names[i]] = i;
    double bound = 6.0 / std::sqrt(static_cast<double>(dim));
    t.entities.resize(t.entity_count() * t.storage_dim());
    t.relations.resize(t.relation_count() * t.storage_dim());
    for (auto& v : t.entities) v = uniform_real(rng, -bound, bound);
    for (auto& v : t.relations) v = uniform_real(rng, -bound, bound);
    return t;
  }
};

namespace scoring {

// TransE: -||h + r - t||_1 (<= 0, maximal when t = h + r).
inline double transe(std::span<const double> h, std::span<const double> r,
                     std::span<const double> t) {
  double s = 0.0;
  for (size_t i = 0; i < h.size(); ++i) s += std::fabs(h[i] + r[i] - t[i]);
  return -s;
}

// ComplEx: Re<h, r, conj(t)> over interleaved (re, im) pairs.
inline double complex_trilinear(std::span<const double> h, std::span<const double> r,
                                std::span<const double> t) {
  double s = 0.0;
  for (size_t i = 0; i + 1 < h.size(); i += 2) {
    double hr = h[i], hi = h[i + 1];
    double rr = r[i], ri = r[i + 1];
    double tr = t[i], ti = t[i + 1];
    s += hr * rr * tr + hi * rr * ti + hr * ri * ti - hi * ri * tr;
  }
  return s;
}

inline double score(ScorerKind kind, std::span<const double> h, std::span<const double> r,
                    std::span<const double> t) {
  return kind == ScorerKind::TransE ? transe(h, r, t) : complex_trilinear(h, r, t);
}

// Score plus analytic gradients with respect to the three vectors. Gradient
// buffers must have the storage dimension; they are overwritten.
inline double score_grad(ScorerKind kind, std::span<const double> h, std::span<const double> r,
                         std::span<const double> t, std::span<double> gh, std::span<double> gr,
                         std::span<double> gt) {
  if (kind == ScorerKind::TransE) {
    double s = 0.0;
    for (size_t i = 0; i < h.size(); ++i) {
      double d = h[i] + r[i] - t[i];
      s += std::fabs(d);
      double sign = d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
      gh[i] = -sign;
      gr[i] = -sign;
      gt[i] = sign;
    }
    return -s;
  }
  double s = 0.0;
  for (size_t i = 0; i + 1 < h.size(); i += 2) {
    double hr = h[i], hi = h[i + 1];
    double rr = r[i], ri = r[i + 1];
    double tr = t[i], ti = t[i + 1];
    s += hr * rr * tr + hi * rr * ti + hr * ri * ti - hi * ri * tr;
    gh[i] = rr * tr + ri * ti;
    gh[i + 1] = rr * ti - ri * tr;
    gr[i] = hr * tr + hi * ti;
    gr[i + 1] = hr * ti - hi * tr;
    gt[i] = hr * rr - hi * ri;
    gt[i + 1] = hi * rr + hr * ri;
  }
  return s;
}

}  // namespace scoring

inline double score(const EmbeddingTable& table, const IndexedTriple& t) {
  return scoring::score(table.scorer, table.entity(t.head), table.relation(t.relation),
                        table.entity(t.tail));
}

inline double score(const EmbeddingTable& table, const Triple& t) {
  return score(table, IndexedTriple{table.entity_id(t.head), table.relation_id(t.relation),
                                    table.entity_id(t.tail)});
}

// ---------------------------------------------------------------------------
// Self-adversarial loss
//
//   L = -log sigma(margin + s_pos) - sum_i w_i * log sigma(-s_neg_i - margin)
//   w_i = softmax(alpha * s_neg_i), treated as constants by the gradients.
// ---------------------------------------------------------------------------

inline std::vector<double> adversarial_weights(std::span<const double> neg_scores, double alpha) {
  if (neg_scores.empty()) fail("adversarial_weights: no negative scores");
  std::vector<double> w(neg_scores.size());
  double mx = neg_scores[0] * alpha;
  for (double s : neg_scores) mx = std::max(mx, alpha * s);
  double sum = 0.0;
  for (size_t i = 0; i < w.size(); ++i) {
    w[i] = std::exp(alpha * neg_scores[i] - mx);
    sum += w[i];
  }
  for (auto& v : w) v /= sum;
  return w;
}

// Loss value at fixed negative weights; the independent path used by the
// finite-difference checks.
inline double weighted_loss_value(double pos_score, std::span<const double> neg_scores,
                                  double margin, std::span<const double> weights) {
  double L = -log_sigmoid(margin + pos_score);
  for (size_t i = 0; i < neg_scores.size(); ++i)
    L -= weights[i] * log_sigmoid(-neg_scores[i] - margin);
  return L;
}

struct LossResult {
  double value = 0.0;
  double dpos = 0.0;               // dL / d s_pos
  std::vector<double> dneg;        // dL / d s_neg_i
  std::vector<double> weights;     // softmax weights used
};

inline LossResult self_adversarial_loss(double pos_score, std::span<const double> neg_scores,
                                        double margin, double alpha) {
  if (neg_scores.empty()) fail("self_adversarial_loss: at least one negative required");
  LossResult out;
  out.weights = adversarial_weights(neg_scores, alpha);
  out.value = weighted_loss_value(pos_score, neg_scores, margin, out.weights);
  out.dpos = sigmoid(margin + pos_score) - 1.0;
  out.dneg.resize(neg_scores.size());
  for (size_t i = 0; i < neg_scores.size(); ++i)
    out.dneg[i] = out.weights[i] * sigmoid(neg_scores[i] + margin);
  return out;
}

// ---------------------------------------------------------------------------
// Negative sampling
// ---------------------------------------------------------------------------

// Draws n corruptions of `t`, each differing in exactly the head or the tail,
// uniformly over the valid candidates: all (side, entity) replacements that
// are distinct from the original triple, not known true, and not already
// drawn. Throws when fewer than n candidates exist.
inline std::vector<IndexedTriple> corrupt(const IndexedTriple& t, const TripleStore& store,
                                          int n, Rng& rng) {
  if (n < 1) fail("corrupt: n must be >= 1");
  size_t n_entities = store.entity_names().size();
  std::vector<IndexedTriple> out;
  out.reserve(n);
  auto taken = [&](const IndexedTriple& c) {
    for (const auto& d : out)
      if (d == c) return true;
    return false;
  };
  // Uniform over the union of head-side and tail-side candidates: one draw
  // over 2 * n_entities slots, rejecting invalid ones.
  size_t attempts = 0;
  const size_t max_attempts = 200 + 40ull * n;
  while (out.size() < static_cast<size_t>(n) && attempts < max_attempts) {
    ++attempts;
    uint64_t u = uniform_index(rng, 2 * n_entities);
    bool head_side = u < n_entities;
    auto e = static_cast<uint32_t>(head_side ? u : u - n_entities);
    IndexedTriple c = t;
    (head_side ? c.head : c.tail) = e;
    if (c == t || store.contains(c) || taken(c)) continue;
    out.push_back(c);
  }
  if (out.size() < static_cast<size_t>(n)) {
    // Rejection stalled; enumerate the remaining candidates exactly.
    std::vector<IndexedTriple> pool;
    for (uint32_t e = 0; e < n_entities; ++e) {
      IndexedTriple c = t;
      c.head = e;
      if (c != t && !store.contains(c) && !taken(c)) pool.push_back(c);
      c = t;
      c.tail = e;
      if (c != t && !store.contains(c) && !taken(c)) pool.push_back(c);
    }
    while (out.size() < static_cast<size_t>(n)) {
      if (pool.empty())
        fail("corrupt: entity pool too small to produce " + std::to_string(n) +
             " distinct corruptions");
      size_t pick = static_cast<size_t>(uniform_index(rng, pool.size()));
      out.push_back(pool[pick]);
      pool.erase(pool.begin() + static_cast<long>(pick));
    }
  }
  return out;
}

inline std::vector<Triple> corrupt(const Triple& t, const TripleStore& store, int n, Rng& rng) {
  auto h = store.find_entity(t.head);
  auto r = store.find_relation(t.relation);
  auto tl = store.find_entity(t.tail);
  if (!h || !r || !tl) fail("corrupt: triple ids not present in store");
  auto indexed = corrupt(IndexedTriple{*h, *r, *tl}, store, n, rng);
  std::vector<Triple> out;
  out.reserve(indexed.size());
  for (const auto& it : indexed) out.push_back(store.resolve(it));
  return out;
}

}  // namespace roadkg
