#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "roadkg/bayes.hpp"
#include "roadkg/common.hpp"
#include "roadkg/discretize.hpp"
#include "roadkg/fuzzy_rules.hpp"
#include "roadkg/graph_builder.hpp"
#include "roadkg/ingest.hpp"
#include "roadkg/metrics.hpp"
#include "roadkg/ontology.hpp"
#include "roadkg/train.hpp"

namespace roadkg {

struct PipelineConfig {
  Ontology ontology;
  ThresholdConfig thresholds;
  GraphMode mode = GraphMode::Vehicle;
  TrainConfig train;
  SplitSpec split;
  bool inject_inference = true;  // generic/reified support triples in the training store
  bool platt_calibration = false;
  int pedestrian_stride = 2;     // training-frame subsampling stride
  std::vector<FuzzyRule> rules;  // pedestrian enrichment; empty = plain graph
};

struct HorizonReport {
  double horizon_s = 0.0;
  ClassReport report;
};

struct PipelineResult {
  EmbeddingTable table;
  Calibration calibration;
  TrainReport train_report;
  ClassReport overall;
  std::vector<HorizonReport> horizons;
  size_t train_records = 0;
  size_t test_records = 0;
  size_t train_triples = 0;
  size_t validation_triples = 0;
  std::vector<std::string> warnings;
};

namespace detail {

// Track-level split: unique user ids in first-appearance order, shuffled
// under the split seed; the first ceil(fraction * n) go to training.
template <typename Record>
inline std::pair<std::vector<Record>, std::vector<Record>> split_by_user(
    const std::vector<Record>& records, const std::string& (*user_of)(const Record&),
    const SplitSpec& spec) {
  std::vector<std::string> users;
  std::set<std::string> seen;
  for (const auto& r : records)
    if (seen.insert(user_of(r)).second) users.push_back(user_of(r));
  Rng rng(spec.seed);
  shuffle_deterministic(users, rng);
  size_t n_train = static_cast<size_t>(
      std::ceil(spec.train_fraction * static_cast<double>(users.size())));
  n_train = std::min(n_train, users.size());
  std::set<std::string> train_users(users.begin(), users.begin() + n_train);
  std::pair<std::vector<Record>, std::vector<Record>> out;
  for (const auto& r : records)
    (train_users.count(user_of(r)) ? out.first : out.second).push_back(r);
  return out;
}

inline const std::string& vehicle_user(const VehicleFrameRecord& r) { return r.track_id; }
inline const std::string& pedestrian_user(const PedestrianFrameRecord& r) { return r.ped_id; }

}  // namespace detail

// Builds the knowledge graph of a set of training frames: per-frame triples,
// optional fuzzy-rule enrichment (pedestrian mode), optional inference
// support triples.
inline TripleStore build_training_graph(const std::vector<LinguisticFrame>& frames,
                                        const PipelineConfig& cfg) {
  TripleStore store = build_graph(frames, cfg.ontology, cfg.mode);
  if (cfg.mode == GraphMode::Pedestrian && !cfg.rules.empty())
    store = attach_rules(std::move(store), cfg.rules, frames, cfg.ontology);
  if (cfg.inject_inference) inject_inference_triples(store, cfg.ontology, frames);
  return store;
}

// Platt calibration set: validation triples as positives, one corruption each
// as negatives.
inline Calibration calibrate_on_validation(const EmbeddingTable& table,
                                           const TripleStore& train_store,
                                           const std::vector<Triple>& valid, uint64_t seed) {
  if (valid.empty()) fail("calibrate_on_validation: no validation triples");
  Rng rng(seed);
  std::vector<double> scores;
  std::vector<int> labels;
  for (const auto& t : valid) {
    scores.push_back(score(table, t));
    labels.push_back(1);
    auto negs = corrupt(t, train_store, 1, rng);
    scores.push_back(score(table, negs.front()));
    labels.push_back(0);
  }
  return fit_calibration(scores, labels);
}

struct VehiclePipelineData {
  std::vector<VehicleFrameRecord> train_records, test_records;
  std::vector<LinguisticFrame> train_frames;
  TripleStore store;
};

// End-to-end vehicle run: track split -> linguistic transformation -> KG ->
// no-unseen validation split -> KGE training -> Bayesian prediction of the
// held-out tracks, reported overall and per horizon.
inline PipelineResult run_vehicle_pipeline(const std::vector<VehicleFrameRecord>& records,
                                           const PipelineConfig& cfg) {
  if (cfg.mode != GraphMode::Vehicle) fail("run_vehicle_pipeline: config mode must be vehicle");
  cfg.split.validate();
  validate_thresholds(cfg.thresholds, &cfg.ontology);
  if (records.empty()) fail("run_vehicle_pipeline: no records");

  auto [train_recs, test_recs] =
      detail::split_by_user<VehicleFrameRecord>(records, detail::vehicle_user, cfg.split);
  if (train_recs.empty() || test_recs.empty())
    fail("run_vehicle_pipeline: track split produced an empty train or test set");

  std::vector<LinguisticFrame> train_frames;
  train_frames.reserve(train_recs.size());
  for (const auto& r : train_recs) train_frames.push_back(discretize_vehicle(r, cfg.thresholds));

  TripleStore store = build_training_graph(train_frames, cfg);
  auto [train_store, valid] = split_no_unseen(store, cfg.split.validation_triples, cfg.split.seed);

  PipelineResult result;
  result.train_records = train_recs.size();
  result.test_records = test_recs.size();
  result.train_triples = train_store.size();
  result.validation_triples = valid.size();

  auto trained = train(train_store, valid, cfg.train);
  result.table = std::move(trained.table);
  result.train_report = trained.report;
  if (cfg.platt_calibration)
    result.calibration = calibrate_on_validation(result.table, train_store, valid, cfg.split.seed);

  std::vector<std::string> y_true, y_pred;
  std::map<double, std::pair<std::vector<std::string>, std::vector<std::string>>> by_horizon;
  for (const auto& r : test_recs) {
    LinguisticFrame frame = discretize_vehicle(r, cfg.thresholds);
    Prediction pred = predict(frame, cfg.ontology, result.table, result.calibration);
    y_true.push_back(r.label);
    y_pred.push_back(pred.chosen);
    by_horizon[r.horizon_s].first.push_back(r.label);
    by_horizon[r.horizon_s].second.push_back(pred.chosen);
  }
  result.overall = classification_report(y_true, y_pred, cfg.ontology.labels());
  for (const auto& [h, ys] : by_horizon)
    result.horizons.push_back({h, classification_report(ys.first, ys.second, cfg.ontology.labels())});
  return result;
}

inline PipelineResult run_pedestrian_pipeline(const std::vector<PedestrianFrameRecord>& records,
                                              const PipelineConfig& cfg) {
  if (cfg.mode != GraphMode::Pedestrian)
    fail("run_pedestrian_pipeline: config mode must be pedestrian");
  cfg.split.validate();
  validate_thresholds(cfg.thresholds, &cfg.ontology);
  if (records.empty()) fail("run_pedestrian_pipeline: no records");

  auto [train_recs, test_recs] =
      detail::split_by_user<PedestrianFrameRecord>(records, detail::pedestrian_user, cfg.split);
  if (train_recs.empty() || test_recs.empty())
    fail("run_pedestrian_pipeline: video split produced an empty train or test set");

  std::vector<LinguisticFrame> train_frames;
  for (const auto& r : train_recs) {
    if (cfg.pedestrian_stride > 1 && r.frame % cfg.pedestrian_stride != 0) continue;
    if (!r.cross_label) fail("run_pedestrian_pipeline: training record without crossLabel");
    train_frames.push_back(discretize_pedestrian(r, cfg.thresholds));
  }
  if (train_frames.empty()) fail("run_pedestrian_pipeline: stride removed every training frame");

  TripleStore store = build_training_graph(train_frames, cfg);
  auto [train_store, valid] = split_no_unseen(store, cfg.split.validation_triples, cfg.split.seed);

  PipelineResult result;
  result.train_records = train_recs.size();
  result.test_records = test_recs.size();
  result.train_triples = train_store.size();
  result.validation_triples = valid.size();

  auto trained = train(train_store, valid, cfg.train);
  result.table = std::move(trained.table);
  result.train_report = trained.report;
  if (cfg.platt_calibration)
    result.calibration = calibrate_on_validation(result.table, train_store, valid, cfg.split.seed);

  std::vector<std::string> y_true, y_pred;
  for (const auto& r : test_recs) {
    if (!r.cross_label) fail("run_pedestrian_pipeline: test record without crossLabel");
    LinguisticFrame frame = discretize_pedestrian(r, cfg.thresholds);
    Prediction pred = predict(frame, cfg.ontology, result.table, result.calibration);
    y_true.push_back(*r.cross_label ? "crossRoad" : "noCrossRoad");
    y_pred.push_back(pred.chosen);
  }
  result.overall = classification_report(y_true, y_pred, cfg.ontology.labels());
  return result;
}

// Horizon sweep over a labeled track table: one shared model trained on the
// union of all horizons' training samples, evaluated per horizon. Horizons
// that end up with no test records are skipped with a warning.
inline PipelineResult horizon_sweep(const std::vector<VehicleFrameRecord>& records,
                                    const std::vector<double>& horizons,
                                    const PipelineConfig& cfg) {
  std::vector<VehicleFrameRecord> filtered;
  for (const auto& r : records)
    if (std::find(horizons.begin(), horizons.end(), r.horizon_s) != horizons.end())
      filtered.push_back(r);
  if (filtered.empty()) {
    PipelineResult empty;
    empty.warnings.push_back("horizon sweep: no records matched the requested horizons");
    return empty;
  }
  PipelineResult result = run_vehicle_pipeline(filtered, cfg);
  for (double h : horizons) {
    bool found = false;
    for (const auto& hr : result.horizons)
      if (hr.horizon_s == h) found = true;
    if (!found)
      result.warnings.push_back("horizon " + std::to_string(h) +
                                " s: no test records; row skipped");
  }
  return result;
}

// Formats the sweep in the per-horizon layout: one block per horizon with
// per-label precision/recall/F1 rows and the macro average.
inline std::string format_horizon_table(const PipelineResult& result) {
  std::ostringstream os;
  for (const auto& hr : result.horizons) {
    os << hr.horizon_s << " second" << (hr.horizon_s == 1.0 ? "" : "s") << " before the event\n";
    os << format_class_report(hr.report);
    os << "\n";
  }
  return os.str();
}

}  // namespace roadkg
