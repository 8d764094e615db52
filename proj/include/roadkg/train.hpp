#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <numeric>
#include <string>
#include <unordered_map>
#include <vector>

#include "roadkg/common.hpp"
#include "roadkg/embedding.hpp"
#include "roadkg/ranking.hpp"
#include "roadkg/triple_store.hpp"
#include "json.hpp"

namespace roadkg {

struct TrainConfig {
  ScorerKind scorer = ScorerKind::TransE;
  int dim = 100;
  int negatives = 5;       // corruptions per positive
  double learning_rate = 5e-4;
  int batch_size = 10000;
  int max_epochs = 100;
  int burn_in = 5;         // epochs before the validation baseline
  int frequency = 5;       // epochs between validations after burn-in
  int patience = 5;        // non-improving validations before stopping
  int validation_batch = 100;  // triples per evaluation chunk
  double margin = 5.0;
  double adversarial_alpha = 1.0;
  uint64_t seed = 0;

  void validate() const {
    if (dim <= 0) fail("train config: dim must be positive");
    if (negatives < 1) fail("train config: negatives must be >= 1");
    if (learning_rate <= 0) fail("train config: learning rate must be positive");
    if (batch_size < 1) fail("train config: batch size must be >= 1");
    if (max_epochs < 1) fail("train config: max epochs must be >= 1");
    if (burn_in < 0) fail("train config: burn-in must be >= 0");
    if (frequency < 1) fail("train config: frequency must be >= 1");
    if (patience < 1) fail("train config: patience must be >= 1");
    if (validation_batch < 1) fail("train config: validation batch must be >= 1");
    if (margin <= 0) fail("train config: margin must be positive");
    if (adversarial_alpha < 0) fail("train config: adversarial alpha must be >= 0");
  }

  nlohmann::json to_json() const {
    return {{"scorer", scorer_name(scorer)},
            {"dim", dim},
            {"negatives", negatives},
            {"learning_rate", learning_rate},
            {"batch_size", batch_size},
            {"max_epochs", max_epochs},
            {"burn_in", burn_in},
            {"frequency", frequency},
            {"patience", patience},
            {"validation_batch", validation_batch},
            {"margin", margin},
            {"adversarial_alpha", adversarial_alpha},
            {"seed", seed}};
  }

  static TrainConfig from_json(const nlohmann::json& j) {
    TrainConfig c;
    c.scorer = scorer_from_name(j.at("scorer").get<std::string>());
    c.dim = j.at("dim").get<int>();
    c.negatives = j.at("negatives").get<int>();
    c.learning_rate = j.at("learning_rate").get<double>();
    c.batch_size = j.at("batch_size").get<int>();
    c.max_epochs = j.at("max_epochs").get<int>();
    c.burn_in = j.at("burn_in").get<int>();
    c.frequency = j.at("frequency").get<int>();
    c.patience = j.at("patience").get<int>();
    c.validation_batch = j.at("validation_batch").get<int>();
    c.margin = j.at("margin").get<double>();
    c.adversarial_alpha = j.at("adversarial_alpha").get<double>();
    c.seed = j.at("seed").get<uint64_t>();
    return c;
  }
};

namespace detail {

// Lazy per-row Adam: moments and bias-correction steps advance only for rows
// touched in a batch.
class AdamState {
 public:
  AdamState(size_t rows, int dim, double lr)
      : dim_(dim), lr_(lr), m_(rows * dim, 0.0), v_(rows * dim, 0.0), step_(rows, 0) {}

  void apply(size_t row, std::span<double> params, std::span<const double> grad) {
    double* m = m_.data() + row * dim_;
    double* v = v_.data() + row * dim_;
    double t = static_cast<double>(++step_[row]);
    double bc1 = 1.0 - std::pow(kBeta1, t);
    double bc2 = 1.0 - std::pow(kBeta2, t);
    for (int i = 0; i < dim_; ++i) {
      m[i] = kBeta1 * m[i] + (1.0 - kBeta1) * grad[i];
      v[i] = kBeta2 * v[i] + (1.0 - kBeta2) * grad[i] * grad[i];
      params[i] -= lr_ * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + kEps);
    }
  }

 private:
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEps = 1e-8;
  int dim_;
  double lr_;
  std::vector<double> m_, v_;
  std::vector<uint64_t> step_;
};

// Deterministic sparse gradient accumulator: rows are replayed in first-touch
// order.
class GradBuffer {
 public:
  explicit GradBuffer(int dim) : dim_(dim) {}

  void accumulate(uint32_t row, std::span<const double> grad, double scale) {
    auto [it, inserted] = slot_.emplace(row, order_.size());
    if (inserted) {
      order_.push_back(row);
      data_.resize(order_.size() * dim_, 0.0);
    }
    double* dst = data_.data() + it->second * dim_;
    for (int i = 0; i < dim_; ++i) dst[i] += scale * grad[i];
  }

  template <typename Fn>
  void for_each(Fn&& fn) const {
    for (size_t s = 0; s < order_.size(); ++s)
      fn(order_[s], std::span<const double>(data_.data() + s * dim_, dim_));
  }

  void clear() {
    slot_.clear();
    order_.clear();
    data_.clear();
  }

 private:
  int dim_;
  std::unordered_map<uint32_t, size_t> slot_;
  std::vector<uint32_t> order_;
  std::vector<double> data_;
};

}  // namespace detail

struct TrainReport {
  int epochs_run = 0;
  int validations = 0;       // post-burn-in validations (baseline excluded)
  double baseline_metric = 0.0;
  double best_metric = 0.0;
  int best_epoch = 0;
  bool stopped_early = false;
  std::vector<std::pair<int, double>> history;  // (epoch, metric) incl. baseline
};

struct TrainResult {
  EmbeddingTable table;
  TrainReport report;
};

// Optional override of the validation metric, used by tests; default is the
// filtered MRR of the validation triples.
using ValidationMetric = std::function<double(const EmbeddingTable&, int epoch)>;

// Mini-batch training with self-adversarial loss, uniform corruption of head
// or tail filtered against the training set, Adam updates, and MRR early
// stopping: a baseline snapshot is taken after `burn_in` epochs, the metric
// is evaluated every `frequency` epochs thereafter, and training halts after
// `patience` consecutive validations without improvement, restoring the best
// table. Deterministic for a fixed seed.
inline TrainResult train(const TripleStore& store, const std::vector<Triple>& valid,
                         const TrainConfig& cfg, ValidationMetric metric_override = nullptr) {
  cfg.validate();
  if (store.size() == 0) fail("train: empty store");
  for (const auto& t : valid)
    if (store.contains(t)) fail("train: validation triple duplicated in training store");

  Rng rng(cfg.seed);
  TrainResult result;
  result.table = EmbeddingTable::init(store, cfg.scorer, cfg.dim, rng);
  EmbeddingTable& table = result.table;
  const int sdim = table.storage_dim();

  // Filter for validation ranking: everything known true.
  TripleStore filter;
  for (const auto& t : store.triples()) filter.add(t);
  for (const auto& t : valid) filter.add(t);

  ValidationMetric metric = metric_override;
  if (!metric && !valid.empty()) {
    metric = [&](const EmbeddingTable& tb, int) {
      double sum = 0.0;
      size_t n = 0;
      for (size_t off = 0; off < valid.size(); off += cfg.validation_batch) {
        size_t end = std::min(valid.size(), off + cfg.validation_batch);
        std::vector<Triple> chunk(valid.begin() + off, valid.begin() + end);
        auto rep = evaluate_ranks(tb, chunk, filter, CorruptSide::Both);
        sum += rep.mrr * static_cast<double>(rep.ranks.size());
        n += rep.ranks.size();
      }
      return sum / static_cast<double>(n);
    };
  }

  const auto& triples = store.indexed();
  std::vector<size_t> order(triples.size());
  std::iota(order.begin(), order.end(), 0);

  detail::AdamState adam_entities(table.entity_count(), sdim, cfg.learning_rate);
  detail::AdamState adam_relations(table.relation_count(), sdim, cfg.learning_rate);
  detail::GradBuffer grad_entities(sdim), grad_relations(sdim);
  std::vector<double> pgh(sdim), pgr(sdim), pgt(sdim);
  size_t negs_n = static_cast<size_t>(cfg.negatives);
  std::vector<double> ngh(negs_n * sdim), ngr(negs_n * sdim), ngt(negs_n * sdim);
  std::vector<double> neg_scores(negs_n);
  auto neg_span = [&](std::vector<double>& buf, size_t ni) {
    return std::span<double>(buf.data() + ni * sdim, sdim);
  };

  EmbeddingTable best = table;
  bool have_best = false;
  double best_metric = 0.0;
  int best_epoch = 0;
  int bad_validations = 0;

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    shuffle_deterministic(order, rng);
    for (size_t batch_start = 0; batch_start < order.size();
         batch_start += static_cast<size_t>(cfg.batch_size)) {
      size_t batch_end =
          std::min(order.size(), batch_start + static_cast<size_t>(cfg.batch_size));
      grad_entities.clear();
      grad_relations.clear();
      for (size_t oi = batch_start; oi < batch_end; ++oi) {
        const IndexedTriple& pos = triples[order[oi]];
        auto negs = corrupt(pos, store, cfg.negatives, rng);

        double pos_score =
            scoring::score_grad(table.scorer, table.entity(pos.head),
                                table.relation(pos.relation), table.entity(pos.tail), pgh, pgr,
                                pgt);
        for (size_t ni = 0; ni < negs.size(); ++ni) {
          neg_scores[ni] = scoring::score_grad(
              table.scorer, table.entity(negs[ni].head), table.relation(negs[ni].relation),
              table.entity(negs[ni].tail), neg_span(ngh, ni), neg_span(ngr, ni),
              neg_span(ngt, ni));
        }

        auto loss = self_adversarial_loss(pos_score, neg_scores, cfg.margin,
                                          cfg.adversarial_alpha);
        grad_entities.accumulate(pos.head, pgh, loss.dpos);
        grad_relations.accumulate(pos.relation, pgr, loss.dpos);
        grad_entities.accumulate(pos.tail, pgt, loss.dpos);
        for (size_t ni = 0; ni < negs.size(); ++ni) {
          grad_entities.accumulate(negs[ni].head, neg_span(ngh, ni), loss.dneg[ni]);
          grad_relations.accumulate(negs[ni].relation, neg_span(ngr, ni), loss.dneg[ni]);
          grad_entities.accumulate(negs[ni].tail, neg_span(ngt, ni), loss.dneg[ni]);
        }
      }
      grad_entities.for_each([&](uint32_t row, std::span<const double> g) {
        adam_entities.apply(row, table.entity(row), g);
      });
      grad_relations.for_each([&](uint32_t row, std::span<const double> g) {
        adam_relations.apply(row, table.relation(row), g);
      });
    }

    // TransE entity vectors are projected back onto the unit L2 ball.
    if (table.scorer == ScorerKind::TransE) {
      for (uint32_t e = 0; e < table.entity_count(); ++e) {
        auto v = table.entity(e);
        double norm2 = 0.0;
        for (double x : v) norm2 += x * x;
        if (norm2 > 1.0) {
          double inv = 1.0 / std::sqrt(norm2);
          for (auto& x : v) x *= inv;
        }
      }
    }

    if (!table.finite())
      fail("train: non-finite parameter detected at epoch " + std::to_string(epoch) +
           "; reduce the learning rate");

    result.report.epochs_run = epoch;

    if (!metric) continue;
    bool is_baseline = epoch == cfg.burn_in;
    bool is_validation = epoch > cfg.burn_in && (epoch - cfg.burn_in) % cfg.frequency == 0;
    if (cfg.burn_in == 0 && !have_best && epoch == 1) {
      // Degenerate burn-in: first epoch doubles as the baseline.
      is_baseline = true;
      is_validation = false;
    }
    if (!is_baseline && !is_validation) continue;

    double m = metric(table, epoch);
    result.report.history.emplace_back(epoch, m);
    if (is_baseline) {
      best = table;
      have_best = true;
      best_metric = m;
      best_epoch = epoch;
      result.report.baseline_metric = m;
      continue;
    }
    ++result.report.validations;
    if (!have_best || m > best_metric) {
      best = table;
      have_best = true;
      best_metric = m;
      best_epoch = epoch;
      bad_validations = 0;
    } else {
      ++bad_validations;
      if (bad_validations >= cfg.patience) {
        result.report.stopped_early = true;
        break;
      }
    }
  }

  if (have_best) {
    result.table = std::move(best);
    result.report.best_metric = best_metric;
    result.report.best_epoch = best_epoch;
  }
  return result;
}

// ---------------------------------------------------------------------------
// Checkpoint format: magic, format version, scorer tag, k, config JSON,
// entity/relation id tables, little-endian 64-bit float vectors.
// ---------------------------------------------------------------------------

inline constexpr char kCheckpointMagic[8] = {'R', 'O', 'A', 'D', 'K', 'G', 'C', 'K'};
inline constexpr uint32_t kCheckpointVersion = 1;

inline void save_checkpoint(const EmbeddingTable& table, const TrainConfig& cfg,
                            const std::string& path) {
  std::string buf;
  buf.append(kCheckpointMagic, sizeof(kCheckpointMagic));
  detail::write_le_u32(buf, kCheckpointVersion);
  detail::write_le_u32(buf, table.scorer == ScorerKind::ComplEx ? 1 : 0);
  detail::write_le_u32(buf, static_cast<uint32_t>(table.dim));
  std::string cfg_json = cfg.to_json().dump();
  detail::write_le_u64(buf, cfg_json.size());
  buf += cfg_json;
  auto write_names = [&](const std::vector<std::string>& names) {
    detail::write_le_u64(buf, names.size());
    for (const auto& n : names) {
      detail::write_le_u32(buf, static_cast<uint32_t>(n.size()));
      buf += n;
    }
  };
  write_names(table.entity_names);
  write_names(table.relation_names);
  for (double v : table.entities) detail::write_le_f64(buf, v);
  for (double v : table.relations) detail::write_le_f64(buf, v);

  std::ofstream out(path, std::ios::binary);
  if (!out) fail("cannot open checkpoint '" + path + "' for writing");
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) fail("write failure on checkpoint '" + path + "'");
}

struct Checkpoint {
  EmbeddingTable table;
  TrainConfig config;
};

inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open checkpoint '" + path + "'");
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  detail::ByteReader r(data, path);
  if (r.bytes(sizeof(kCheckpointMagic)) != std::string(kCheckpointMagic, sizeof(kCheckpointMagic)))
    fail(path + ": not a roadkg checkpoint (bad magic bytes)");
  uint32_t version = r.u32();
  if (version != kCheckpointVersion)
    fail(path + ": unsupported checkpoint version " + std::to_string(version));
  Checkpoint ck;
  ck.table.scorer = r.u32() == 1 ? ScorerKind::ComplEx : ScorerKind::TransE;
  ck.table.dim = static_cast<int>(r.u32());
  uint64_t cfg_len = r.u64();
  try {
    ck.config = TrainConfig::from_json(nlohmann::json::parse(r.bytes(cfg_len)));
  } catch (const nlohmann::json::exception& e) {
    fail(path + ": corrupt config block: " + e.what());
  }
  auto read_names = [&](std::vector<std::string>& names,
                        std::unordered_map<std::string, uint32_t>& index) {
    uint64_t n = r.u64();
    names.reserve(n);
    for (uint64_t i = 0; i < n; ++i) {
      uint32_t len = r.u32();
      names.push_back(r.bytes(len));
      index[names.back()] = static_cast<uint32_t>(i);
    }
  };
  read_names(ck.table.entity_names, ck.table.entity_index);
  read_names(ck.table.relation_names, ck.table.relation_index);
  size_t sdim = static_cast<size_t>(ck.table.storage_dim());
  ck.table.entities.resize(ck.table.entity_count() * sdim);
  ck.table.relations.resize(ck.table.relation_count() * sdim);
  for (auto& v : ck.table.entities) v = r.f64();
  for (auto& v : ck.table.relations) v = r.f64();
  if (!r.exhausted()) fail(path + ": trailing bytes after checkpoint payload");
  return ck;
}

}  // namespace roadkg
