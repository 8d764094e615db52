// Acceptance suite: runs every acceptance criterion and prints one line per
// criterion. Exits nonzero if any non-skipped criterion fails.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "roadkg/bayes.hpp"
#include "roadkg/discretize.hpp"
#include "roadkg/explain.hpp"
#include "roadkg/fuzzy_rules.hpp"
#include "roadkg/graph_builder.hpp"
#include "roadkg/ingest.hpp"
#include "roadkg/metrics.hpp"
#include "roadkg/ontology.hpp"
#include "roadkg/pipeline.hpp"
#include "roadkg/ranking.hpp"
#include "roadkg/train.hpp"
#include "roadkg/triple_store.hpp"

using namespace roadkg;

namespace {

std::string data_file(const std::string& rel) {
  return std::string(ROADKG_SOURCE_DIR) + "/data/" + rel;
}

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::runtime_error(msg);
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// --------------------------------------------------------------------------
// Shared small helpers
// --------------------------------------------------------------------------

double sigmoid_direct(double x) { return 1.0 / (1.0 + std::exp(-x)); }

std::vector<double> random_vec(Rng& rng, int n, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

std::vector<double> finite_difference(const std::function<double(const std::vector<double>&)>& f,
                                      std::vector<double> x, double step = 1e-4) {
  std::vector<double> g(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    double orig = x[i];
    x[i] = orig + step;
    double fp = f(x);
    x[i] = orig - step;
    double fm = f(x);
    x[i] = orig;
    g[i] = (fp - fm) / (2.0 * step);
  }
  return g;
}

double max_rel_err(const std::vector<double>& a, const std::vector<double>& b) {
  double worst = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    double scale = std::max({std::fabs(a[i]), std::fabs(b[i]), 1e-5});
    worst = std::max(worst, std::fabs(a[i] - b[i]) / scale);
  }
  return worst;
}

PipelineConfig synthetic_pipeline_config(uint64_t seed) {
  PipelineConfig cfg;
  cfg.ontology = load_ontology(data_file("ontology/vehicle.json"));
  cfg.thresholds = load_thresholds(data_file("config/vehicle_thresholds.json"));
  cfg.mode = GraphMode::Vehicle;
  cfg.train.scorer = ScorerKind::TransE;
  cfg.train.dim = 32;
  cfg.train.negatives = 5;
  cfg.train.learning_rate = 0.02;
  cfg.train.batch_size = 2048;
  cfg.train.max_epochs = 200;
  cfg.train.burn_in = 10;
  cfg.train.frequency = 10;
  cfg.train.patience = 4;
  cfg.train.validation_batch = 100;
  cfg.train.margin = 5.0;
  cfg.train.adversarial_alpha = 1.0;
  cfg.train.seed = seed;
  cfg.split.train_fraction = 0.8;
  cfg.split.validation_triples = 400;
  cfg.split.seed = seed;
  cfg.inject_inference = true;
  return cfg;
}

// --------------------------------------------------------------------------
// Criteria
// --------------------------------------------------------------------------

// 1. predict() equals an independent direct implementation of the Bayes rule
//    over reified triples on a hand-built 5-entity table, to 1e-12, in < 1 s.
void criterion_bayes_oracle() {
  auto start = std::chrono::steady_clock::now();
  Ontology onto = parse_ontology(R"({
    "name": "mini",
    "classes": [
      {"name": "intention", "instances": ["LK", "LLC"], "relation": "INTENTION_IS", "target": true},
      {"name": "ttcPreceding", "instances": ["mediumRiskPreceding"], "relation": "TTC_P"},
      {"name": "ttcLeftFollowing", "instances": ["highRiskLeftFollowing"], "relation": "TTC_LF"},
      {"name": "vehicleID", "open": true, "relation": "HAS_CHILD"},
      {"name": "vehicle", "generic": true}
    ]})");

  EmbeddingTable table;
  table.scorer = ScorerKind::TransE;
  table.dim = 3;
  auto add_e = [&](const std::string& n, std::vector<double> v) {
    table.entity_index[n] = static_cast<uint32_t>(table.entity_names.size());
    table.entity_names.push_back(n);
    table.entities.insert(table.entities.end(), v.begin(), v.end());
  };
  auto add_r = [&](const std::string& n, std::vector<double> v) {
    table.relation_index[n] = static_cast<uint32_t>(table.relation_names.size());
    table.relation_names.push_back(n);
    table.relations.insert(table.relations.end(), v.begin(), v.end());
  };
  add_e("vehicle", {0.10, -0.20, 0.30});
  add_e("mediumRiskPreceding", {-0.40, 0.25, 0.10});
  add_e("highRiskLeftFollowing", {0.35, 0.15, -0.25});
  add_e("LK", {0.05, 0.40, -0.10});
  add_e("LLC", {-0.30, -0.10, 0.45});
  add_r("INTENTION_IS", {0.20, 0.10, -0.30});
  add_r("TTC_P", {-0.15, 0.35, 0.05});
  add_r("TTC_LF", {0.25, -0.05, 0.15});
  require(table.entity_names.size() == 5, "table must have exactly 5 entities");

  LinguisticFrame frame;
  frame.user_id = "741";
  frame.frame = 150;
  frame.assignments["TTC_P"] = "mediumRiskPreceding";
  frame.assignments["TTC_LF"] = "highRiskLeftFollowing";

  auto pred = predict(frame, onto, table);

  // Independent route: plain products of sigmoids of hand-rolled TransE
  // scores.
  auto transe = [&](const std::string& h, const std::string& r, const std::string& t) {
    auto hv = table.entity(table.entity_id(h));
    auto rv = table.relation(table.relation_id(r));
    auto tv = table.entity(table.entity_id(t));
    double s = 0.0;
    for (size_t i = 0; i < hv.size(); ++i) s += std::fabs(hv[i] + rv[i] - tv[i]);
    return -s;
  };
  std::vector<std::pair<std::string, std::string>> evidence = {
      {"TTC_LF", "highRiskLeftFollowing"}, {"TTC_P", "mediumRiskPreceding"}};
  for (size_t i = 0; i < pred.labels.size(); ++i) {
    const auto& label = pred.labels[i];
    double prior_v = sigmoid_direct(transe("vehicle", "INTENTION_IS", label));
    double marginal = 1.0, lik = 1.0;
    for (const auto& [rel, inst] : evidence) {
      marginal *= sigmoid_direct(transe("vehicle", rel, inst));
      lik *= sigmoid_direct(transe(inst, "INTENTION_IS", label));
    }
    double expected = prior_v * lik / marginal;
    require(std::fabs(pred.posterior[i] - expected) < 1e-12,
            "posterior for " + label + " deviates from the direct Bayes value");
  }
  require(seconds_since(start) < 1.0, "criterion must finish within 1 s");
}

// 2. Analytic gradients of both scorers and the loss match central finite
//    differences, relative error < 1e-5, 100 random instances, k <= 8, <10 s.
void criterion_gradients() {
  auto start = std::chrono::steady_clock::now();
  Rng rng(2024);
  auto near_kink = [](const std::vector<double>& h, const std::vector<double>& r,
                      const std::vector<double>& t) {
    for (size_t i = 0; i < h.size(); ++i)
      if (std::fabs(h[i] + r[i] - t[i]) < 1e-3) return true;
    return false;
  };

  for (int trial = 0; trial < 100; ++trial) {
    int k = 2 + static_cast<int>(rng() % 7);
    for (ScorerKind kind : {ScorerKind::TransE, ScorerKind::ComplEx}) {
      int sdim = kind == ScorerKind::ComplEx ? 2 * k : k;
      std::vector<double> h, r, t;
      do {
        h = random_vec(rng, sdim);
        r = random_vec(rng, sdim);
        t = random_vec(rng, sdim);
      } while (kind == ScorerKind::TransE && near_kink(h, r, t));
      std::vector<double> gh(sdim), gr(sdim), gt(sdim);
      scoring::score_grad(kind, h, r, t, gh, gr, gt);
      std::vector<double> packed;
      for (const auto* v : {&h, &r, &t}) packed.insert(packed.end(), v->begin(), v->end());
      auto fd = finite_difference(
          [&](const std::vector<double>& x) {
            std::vector<double> xh(x.begin(), x.begin() + sdim);
            std::vector<double> xr(x.begin() + sdim, x.begin() + 2 * sdim);
            std::vector<double> xt(x.begin() + 2 * sdim, x.end());
            return scoring::score(kind, xh, xr, xt);
          },
          packed);
      std::vector<double> analytic;
      for (const auto* v : {&gh, &gr, &gt}) analytic.insert(analytic.end(), v->begin(), v->end());
      require(max_rel_err(analytic, fd) < 1e-5, "scorer gradient deviates from finite differences");
    }

    // Loss gradient in score space, negative weights held constant.
    int n = 1 + static_cast<int>(rng() % 6);
    auto negs = random_vec(rng, n, -4.0, 4.0);
    double pos = random_vec(rng, 1, -4.0, 4.0)[0];
    double margin = 1.0 + static_cast<double>(rng() % 5);
    double alpha = 0.25 * static_cast<double>(rng() % 8);
    auto res = self_adversarial_loss(pos, negs, margin, alpha);
    std::vector<double> packed = negs;
    packed.push_back(pos);
    auto fd = finite_difference(
        [&](const std::vector<double>& x) {
          std::vector<double> xn(x.begin(), x.end() - 1);
          return weighted_loss_value(x.back(), xn, margin, res.weights);
        },
        packed);
    std::vector<double> analytic = res.dneg;
    analytic.push_back(res.dpos);
    require(max_rel_err(analytic, fd) < 1e-5, "loss gradient deviates from finite differences");
  }
  require(seconds_since(start) < 10.0, "criterion must finish within 10 s");
}

// 3. Filtered MRR / hits@k match exhaustive brute-force ranking exactly on
//    graphs with <= 6 entities.
void criterion_rank_oracle() {
  Rng rng(77);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (ScorerKind kind : {ScorerKind::TransE, ScorerKind::ComplEx}) {
    for (int trial = 0; trial < 30; ++trial) {
      const int dim = 3;
      int sdim = kind == ScorerKind::ComplEx ? 2 * dim : dim;
      EmbeddingTable table;
      table.scorer = kind;
      table.dim = dim;
      std::vector<std::string> names;
      for (int i = 0; i < 6; ++i) {
        names.push_back("e" + std::to_string(i));
        table.entity_index[names.back()] = static_cast<uint32_t>(i);
        table.entity_names.push_back(names.back());
        for (int d = 0; d < sdim; ++d) table.entities.push_back(u(rng));
      }
      table.relation_index["r"] = 0;
      table.relation_names.push_back("r");
      for (int d = 0; d < sdim; ++d) table.relations.push_back(u(rng));

      TripleStore filter;
      for (int i = 0; i < 7; ++i)
        filter.add(names[rng() % 6], "r", names[rng() % 6]);
      std::vector<Triple> test = {{"e0", "r", "e1"}, {"e2", "r", "e3"}, {"e4", "r", "e5"}};
      for (const auto& t : test) filter.add(t);

      auto report = evaluate_ranks(table, test, filter, CorruptSide::Both);

      // Exhaustive re-ranking.
      std::vector<double> expected_ranks;
      for (const auto& t : test) {
        double true_score = score(table, t);
        for (bool head_side : {true, false}) {
          size_t greater = 0, equal = 0;
          for (const auto& e : names) {
            if (head_side ? e == t.head : e == t.tail) continue;
            Triple cand = head_side ? Triple{e, t.relation, t.tail} : Triple{t.head, t.relation, e};
            if (filter.contains(cand)) continue;
            double s = score(table, cand);
            if (s > true_score) ++greater;
            else if (s == true_score) ++equal;
          }
          expected_ranks.push_back(1.0 + double(greater) + double(equal) / 2.0);
        }
      }
      require(report.ranks.size() == expected_ranks.size(), "rank count mismatch");
      double mrr = 0.0;
      size_t h1 = 0, h3 = 0, h10 = 0;
      for (size_t i = 0; i < expected_ranks.size(); ++i) {
        require(report.ranks[i] == expected_ranks[i], "rank deviates from brute force");
        mrr += 1.0 / expected_ranks[i];
        if (expected_ranks[i] <= 1.0) ++h1;
        if (expected_ranks[i] <= 3.0) ++h3;
        if (expected_ranks[i] <= 10.0) ++h10;
      }
      mrr /= double(expected_ranks.size());
      require(report.mrr == mrr, "MRR deviates from brute force");
      require(report.hits1 == double(h1) / double(expected_ranks.size()), "hits@1 mismatch");
      require(report.hits3 == double(h3) / double(expected_ranks.size()), "hits@3 mismatch");
      require(report.hits10 == double(h10) / double(expected_ranks.size()), "hits@10 mismatch");
    }
  }
}

// 4. Full synthetic pipeline: macro F1 = 1.00 at noise 0 and >= 0.90 at
//    noise 0.1, 300 frames per label, <= 200 epochs, < 5 min total.
void criterion_synthetic_end_to_end() {
  auto start = std::chrono::steady_clock::now();

  ScenarioSpec spec;
  spec.seed = 4242;
  spec.counts = {{"LLC", 300}, {"LK", 300}, {"RLC", 300}};
  spec.noise = 0.0;
  auto clean = generate_synthetic_vehicles(spec);
  auto result_clean = run_vehicle_pipeline(clean, synthetic_pipeline_config(4242));
  require(result_clean.overall.macro_f1 == 1.0,
          "noise-0 macro F1 is " + std::to_string(result_clean.overall.macro_f1) +
              ", expected 1.00");

  spec.noise = 0.1;
  spec.seed = 4243;
  auto noisy = generate_synthetic_vehicles(spec);
  auto result_noisy = run_vehicle_pipeline(noisy, synthetic_pipeline_config(4243));
  require(result_noisy.overall.macro_f1 >= 0.90,
          "noise-0.1 macro F1 is " + std::to_string(result_noisy.overall.macro_f1) +
              ", expected >= 0.90");

  require(seconds_since(start) < 300.0, "criterion must finish within 5 minutes");
}

// 5. Early stopping halts after exactly `patience` = 5 post-burn-in
//    validations under a monotonically degrading metric and restores the
//    best checkpoint.
void criterion_early_stopping() {
  TripleStore store;
  store.add("a", "likes", "b");
  store.add("b", "likes", "c");
  store.add("c", "likes", "a");
  store.add("a", "near", "c");
  store.add("b", "near", "a");

  TrainConfig cfg;
  cfg.scorer = ScorerKind::TransE;
  cfg.dim = 8;
  cfg.negatives = 1;
  cfg.learning_rate = 0.01;
  cfg.batch_size = 8;
  cfg.max_epochs = 1000;
  cfg.burn_in = 5;
  cfg.frequency = 5;
  cfg.patience = 5;
  cfg.seed = 1;

  int calls = 0;
  EmbeddingTable best_snapshot;
  auto rigged = [&](const EmbeddingTable& table, int) {
    ++calls;
    if (calls == 1) best_snapshot = table;
    return 1.0 / static_cast<double>(calls);
  };
  auto result = train(store, {}, cfg, rigged);
  require(result.report.validations == 5,
          "expected exactly 5 post-burn-in validations, got " +
              std::to_string(result.report.validations));
  require(result.report.stopped_early, "training must stop early");
  require(result.table.entities == best_snapshot.entities &&
              result.table.relations == best_snapshot.relations,
          "restored table must equal the best checkpoint bit for bit");
}

// 6. split_no_unseen carves 2000 validation triples from the synthetic store
//    with zero unseen entities/relations, checked exhaustively.
void criterion_split_no_unseen() {
  ScenarioSpec spec;
  spec.seed = 99;
  spec.counts = {{"LLC", 300}, {"LK", 300}, {"RLC", 300}};
  spec.noise = 0.0;
  auto records = generate_synthetic_vehicles(spec);

  auto thresholds = load_thresholds(data_file("config/vehicle_thresholds.json"));
  auto onto = load_ontology(data_file("ontology/vehicle.json"));
  std::vector<LinguisticFrame> frames;
  for (const auto& r : records) frames.push_back(discretize_vehicle(r, thresholds));
  TripleStore store = build_graph(frames, onto, GraphMode::Vehicle);
  inject_inference_triples(store, onto, frames);
  require(store.size() > 2000, "synthetic store must exceed 2000 triples");

  auto [train_store, valid] = split_no_unseen(store, 2000, 99);
  require(valid.size() == 2000, "validation split must have exactly 2000 triples");

  std::set<std::string> entities, relations;
  for (const auto& t : train_store.triples()) {
    entities.insert(t.head);
    entities.insert(t.tail);
    relations.insert(t.relation);
  }
  for (const auto& t : valid) {
    require(entities.count(t.head) == 1, "unseen head entity " + t.head);
    require(entities.count(t.tail) == 1, "unseen tail entity " + t.tail);
    require(relations.count(t.relation) == 1, "unseen relation " + t.relation);
  }
}

// 7. Attaching a non-empty matching rule set strictly increases the triple
//    count; the JAAD-shaped fixture reproduces PedFeatRulesKG > PedFeatKG.
void criterion_fuzzy_enrichment() {
  auto onto = load_ontology(data_file("ontology/pedestrian_rules.json"));
  auto thresholds = load_thresholds(data_file("config/pedestrian_thresholds.json"));
  auto rules = parse_rules(data_file("rules/jaad_rules.txt"), onto);
  require(rules.size() == 51, "JAAD fixture must contain 51 rules");

  ScenarioSpec spec;
  spec.seed = 7;
  spec.counts = {{"crossRoad", 60}, {"noCrossRoad", 60}};
  spec.noise = 0.05;
  auto records = generate_synthetic_pedestrians(spec);
  std::vector<LinguisticFrame> frames;
  for (const auto& r : records) frames.push_back(discretize_pedestrian(r, thresholds));

  TripleStore ped_feat = build_graph(frames, onto, GraphMode::Pedestrian);
  TripleStore ped_feat_rules = attach_rules(ped_feat, rules, frames, onto);

  size_t matches = 0;
  for (const auto& f : frames) matches += matching_rule_ids(rules, f, onto).size();
  require(matches > 0, "fixture scenario must activate at least one rule");
  require(ped_feat_rules.size() > ped_feat.size(),
          "PedFeatRulesKG must have strictly more triples than PedFeatKG");
}

// 8. Top-k retrieval equals brute-force cosine ranking on 1000 random 64-dim
//    vectors for k in {1, 5, 10}.
void criterion_retrieval_exactness() {
  Rng rng(321);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const int dim = 64;
  VectorStore store(dim);
  std::vector<std::pair<std::string, std::vector<double>>> raw;
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> v(dim);
    for (auto& x : v) x = u(rng);
    char id[16];
    std::snprintf(id, sizeof(id), "c%04d", i);
    raw.push_back({id, v});
    store.add(id, v);
  }
  std::vector<double> query(dim);
  for (auto& x : query) x = u(rng);

  auto norm = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
  };
  struct Hit {
    std::string id;
    double sim;
  };
  std::vector<Hit> brute;
  for (const auto& [id, v] : raw) {
    double dot = 0.0;
    for (int i = 0; i < dim; ++i) dot += v[i] * query[i];
    brute.push_back({id, dot / (norm(v) * norm(query))});
  }
  std::sort(brute.begin(), brute.end(), [](const Hit& a, const Hit& b) {
    if (a.sim != b.sim) return a.sim > b.sim;
    return a.id < b.id;
  });

  for (size_t k : {1u, 5u, 10u}) {
    auto hits = store.retrieve(query, k);
    require(hits.size() == k, "retrieval must return k hits");
    for (size_t i = 0; i < k; ++i) {
      require(hits[i].chunk_id == brute[i].id, "top-k order deviates from brute force");
      require(std::fabs(hits[i].similarity - brute[i].sim) < 1e-9,
              "similarity deviates from brute force");
    }
  }
}

// 9. Conditional: horizon sweep on user-supplied HighD-shaped data reaches
//    macro F1 >= 0.88 at 3 s before the lane change. Skipped without data.
bool criterion_highd_reproduction(std::string& detail) {
  const char* path = std::getenv("ROADKG_HIGHD_CSV");
  if (!path || std::string(path).empty()) {
    detail = "set ROADKG_HIGHD_CSV to a prepared HighD-shaped track table to run";
    return false;
  }
  auto records = read_vehicle_tracks(path, {1.0, 2.0, 3.0, 4.0});
  PipelineConfig cfg = synthetic_pipeline_config(7);
  cfg.train.dim = 100;
  cfg.train.learning_rate = 5e-4;
  cfg.train.batch_size = 10000;
  cfg.train.negatives = 5;
  cfg.train.burn_in = 5;
  cfg.train.frequency = 5;
  cfg.train.patience = 5;
  cfg.split.validation_triples = 2000;
  auto result = horizon_sweep(records, {1.0, 2.0, 3.0, 4.0}, cfg);
  for (const auto& hr : result.horizons) {
    if (hr.horizon_s == 3.0) {
      detail = "macro F1 at 3 s = " + std::to_string(hr.report.macro_f1);
      require(hr.report.macro_f1 >= 0.88, detail + ", expected >= 0.88");
      return true;
    }
  }
  throw std::runtime_error("no 3 s horizon in the sweep output");
}

// 10. Fixed-seed train and predict produce bit-identical checkpoints and
//     traces across two consecutive runs.
void criterion_determinism() {
  ScenarioSpec spec;
  spec.seed = 8;
  spec.counts = {{"LLC", 40}, {"LK", 40}, {"RLC", 40}};
  spec.noise = 0.0;
  auto records = generate_synthetic_vehicles(spec);

  PipelineConfig cfg = synthetic_pipeline_config(8);
  cfg.train.max_epochs = 20;
  cfg.split.validation_triples = 50;

  auto a = run_vehicle_pipeline(records, cfg);
  auto b = run_vehicle_pipeline(records, cfg);
  require(a.table.entities == b.table.entities && a.table.relations == b.table.relations,
          "trained tables must be bit-identical across runs");

  auto thresholds = load_thresholds(data_file("config/vehicle_thresholds.json"));
  auto onto = load_ontology(data_file("ontology/vehicle.json"));
  std::string trace_a, trace_b;
  for (const auto& r : records) {
    auto frame = discretize_vehicle(r, thresholds);
    trace_a += predict(frame, onto, a.table).to_json().dump() + "\n";
    trace_b += predict(frame, onto, b.table).to_json().dump() + "\n";
  }
  require(trace_a == trace_b, "prediction traces must be bit-identical across runs");
}

struct Criterion {
  int id;
  std::string name;
  std::function<void()> fn;
};

}  // namespace

int main() {
  std::vector<Criterion> criteria = {
      {1, "Bayes-oracle equivalence (1e-12, < 1 s)", criterion_bayes_oracle},
      {2, "gradient checks vs central finite differences (< 1e-5, < 10 s)", criterion_gradients},
      {3, "filtered rank evaluation matches brute force exactly", criterion_rank_oracle},
      {4, "synthetic end-to-end macro F1 (1.00 at noise 0, >= 0.90 at noise 0.1)",
       criterion_synthetic_end_to_end},
      {5, "early stopping after exactly patience=5 validations, best restored",
       criterion_early_stopping},
      {6, "split_no_unseen: 2000 validation triples, zero unseen ids", criterion_split_no_unseen},
      {7, "fuzzy enrichment strictly grows the graph (rules KG > plain KG)",
       criterion_fuzzy_enrichment},
      {8, "retrieval equals brute-force cosine top-k (1000 x 64-dim)",
       criterion_retrieval_exactness},
  };

  int failures = 0;
  auto report = [&](int id, const std::string& name, const char* status,
                    const std::string& extra = "") {
    std::cout << "[" << status << "] criterion " << id << ": " << name;
    if (!extra.empty()) std::cout << " (" << extra << ")";
    std::cout << std::endl;
  };

  for (const auto& c : criteria) {
    try {
      c.fn();
      report(c.id, c.name, "PASS");
    } catch (const std::exception& e) {
      ++failures;
      report(c.id, c.name, "FAIL", e.what());
    }
  }

  // Criterion 9 is conditional on user-supplied HighD data.
  {
    std::string detail;
    try {
      if (criterion_highd_reproduction(detail))
        report(9, "HighD horizon sweep, macro F1 >= 0.88 at 3 s", "PASS", detail);
      else
        report(9, "HighD horizon sweep, macro F1 >= 0.88 at 3 s", "SKIP", detail);
    } catch (const std::exception& e) {
      ++failures;
      report(9, "HighD horizon sweep, macro F1 >= 0.88 at 3 s", "FAIL", e.what());
    }
  }

  try {
    criterion_determinism();
    report(10, "fixed-seed determinism of train and predict", "PASS");
  } catch (const std::exception& e) {
    ++failures;
    report(10, "fixed-seed determinism of train and predict", "FAIL", e.what());
  }

  if (failures > 0) {
    std::cout << failures << " criterion(s) failed" << std::endl;
    return 1;
  }
  std::cout << "all acceptance criteria passed" << std::endl;
  return 0;
}
