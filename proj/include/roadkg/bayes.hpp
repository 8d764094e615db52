#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "roadkg/common.hpp"
#include "roadkg/embedding.hpp"
#include "roadkg/graph_builder.hpp"
#include "roadkg/ontology.hpp"
#include "roadkg/triple_store.hpp"
#include "json.hpp"

namespace roadkg {

// Score -> probability map sigma(scale * score + offset). The default is the
// raw sigmoid; fit_calibration produces Platt-scaled parameters.
struct Calibration {
  double scale = 1.0;
  double offset = 0.0;
};

inline double triple_probability(const EmbeddingTable& table, const Triple& t,
                                 const Calibration& cal = {}) {
  return sigmoid(cal.scale * score(table, t) + cal.offset);
}

inline double log_triple_probability(const EmbeddingTable& table, const Triple& t,
                                     const Calibration& cal = {}) {
  return log_sigmoid(cal.scale * score(table, t) + cal.offset);
}

// A hypothesis is the reified target triple of a class-level subject, e.g.
// <vehicle, INTENTION_IS, LK>.
struct Hypothesis {
  std::string subject;   // generic entity
  std::string relation;  // target relation
  std::string label;

  Triple triple() const { return {subject, relation, label}; }
};

// One observed linguistic value: the reified evidence triple is
// <subject, relation, instance> for the marginal and
// <instance, target relation, label> for the likelihood.
struct EvidenceItem {
  std::string relation;  // feature relation
  std::string instance;  // linguistic category
  int frame = 0;
};

inline double prior(const EmbeddingTable& table, const Hypothesis& h,
                    const Calibration& cal = {}) {
  return triple_probability(table, h.triple(), cal);
}

// P(e) under evidence independence: product over items of the probability of
// <generic subject, feature relation, instance>, accumulated in log space.
inline double log_evidence_marginal(const EmbeddingTable& table, const std::string& subject,
                                    const std::vector<EvidenceItem>& evidence,
                                    const Calibration& cal = {}) {
  if (evidence.empty()) fail("evidence_marginal: at least one evidence item required");
  double lp = 0.0;
  for (const auto& e : evidence)
    lp += log_triple_probability(table, {subject, e.relation, e.instance}, cal);
  return lp;
}

inline double evidence_marginal(const EmbeddingTable& table, const std::string& subject,
                                const std::vector<EvidenceItem>& evidence,
                                const Calibration& cal = {}) {
  return std::exp(log_evidence_marginal(table, subject, evidence, cal));
}

// P(e|h): product over items of the probability of the conditioned reified
// triple <instance, target relation, label>, accumulated in log space.
inline double log_likelihood(const EmbeddingTable& table,
                             const std::vector<EvidenceItem>& evidence, const Hypothesis& h,
                             const Calibration& cal = {}) {
  if (evidence.empty()) fail("likelihood: at least one evidence item required");
  double lp = 0.0;
  for (const auto& e : evidence)
    lp += log_triple_probability(table, {e.instance, h.relation, h.label}, cal);
  return lp;
}

inline double likelihood(const EmbeddingTable& table, const std::vector<EvidenceItem>& evidence,
                         const Hypothesis& h, const Calibration& cal = {}) {
  return std::exp(log_likelihood(table, evidence, h, cal));
}

struct TraceEntry {
  Triple triple;
  double score = 0.0;
  double probability = 0.0;
  std::string factor;  // "prior" | "likelihood" | "marginal"
  std::string label;   // hypothesis label for prior/likelihood entries
};

// Posteriors follow P(h|e) = P(h) P(e|h) / P(e) per label. The factors come
// from independently scored triples, so raw posteriors need not sum to one
// (and may exceed one); a normalized view is reported alongside.
struct Prediction {
  std::string user_id;
  int frame = 0;
  std::vector<std::string> labels;
  std::vector<double> log_posterior;
  std::vector<double> posterior;   // raw exp(log_posterior)
  std::vector<double> normalized;  // posterior / sum(posterior)
  std::string chosen;
  std::vector<EvidenceItem> evidence;
  std::vector<TraceEntry> trace;

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["user_id"] = user_id;
    j["frame"] = frame;
    j["chosen"] = chosen;
    j["labels"] = nlohmann::json::array();
    for (size_t i = 0; i < labels.size(); ++i) {
      j["labels"].push_back({{"label", labels[i]},
                             {"log_posterior", log_posterior[i]},
                             {"posterior", posterior[i]},
                             {"normalized", normalized[i]}});
    }
    j["evidence"] = nlohmann::json::array();
    for (const auto& e : evidence)
      j["evidence"].push_back(
          {{"relation", e.relation}, {"instance", e.instance}, {"frame", e.frame}});
    j["trace"] = nlohmann::json::array();
    for (const auto& t : trace)
      j["trace"].push_back({{"head", t.triple.head},
                            {"relation", t.triple.relation},
                            {"tail", t.triple.tail},
                            {"score", t.score},
                            {"probability", t.probability},
                            {"factor", t.factor},
                            {"label", t.label}});
    return j;
  }

  static Prediction from_json(const nlohmann::json& j) {
    Prediction p;
    p.user_id = j.at("user_id").get<std::string>();
    p.frame = j.at("frame").get<int>();
    p.chosen = j.at("chosen").get<std::string>();
    for (const auto& jl : j.at("labels")) {
      p.labels.push_back(jl.at("label").get<std::string>());
      p.log_posterior.push_back(jl.at("log_posterior").get<double>());
      p.posterior.push_back(jl.at("posterior").get<double>());
      p.normalized.push_back(jl.at("normalized").get<double>());
    }
    for (const auto& je : j.at("evidence"))
      p.evidence.push_back({je.at("relation").get<std::string>(),
                            je.at("instance").get<std::string>(), je.at("frame").get<int>()});
    for (const auto& jt : j.at("trace")) {
      TraceEntry t;
      t.triple = {jt.at("head").get<std::string>(), jt.at("relation").get<std::string>(),
                  jt.at("tail").get<std::string>()};
      t.score = jt.at("score").get<double>();
      t.probability = jt.at("probability").get<double>();
      t.factor = jt.at("factor").get<std::string>();
      t.label = jt.at("label").get<std::string>();
      p.trace.push_back(std::move(t));
    }
    return p;
  }
};

// Evidence of a frame: its feature assignments in relation order.
inline std::vector<EvidenceItem> frame_evidence(const LinguisticFrame& frame) {
  std::vector<EvidenceItem> out;
  for (const auto& [rel, inst] : frame.assignments) out.push_back({rel, inst, frame.frame});
  return out;
}

// Computes the posterior of every label of the ontology's target class for
// one discretized frame, entirely in log space, and records every scored
// triple in the trace. Ties at the maximum break toward the earlier label in
// ontology declaration order.
inline Prediction predict(const LinguisticFrame& frame, const Ontology& onto,
                          const EmbeddingTable& table, const Calibration& cal = {}) {
  validate_frame(frame, onto);
  Prediction pred;
  pred.user_id = frame.user_id;
  pred.frame = frame.frame;
  pred.labels = onto.labels();
  pred.evidence = frame_evidence(frame);
  if (pred.evidence.empty()) fail("predict: frame carries no evidence");

  const std::string& subject = onto.generic_entity();
  const std::string& target_rel = onto.target_relation();

  auto traced_log_prob = [&](const Triple& t, const std::string& factor,
                             const std::string& label) {
    double s = score(table, t);
    double lp = log_sigmoid(cal.scale * s + cal.offset);
    pred.trace.push_back({t, s, std::exp(lp), factor, label});
    return lp;
  };

  double log_marginal = 0.0;
  for (const auto& e : pred.evidence)
    log_marginal += traced_log_prob({subject, e.relation, e.instance}, "marginal", "");

  for (const auto& label : pred.labels) {
    double lp = traced_log_prob({subject, target_rel, label}, "prior", label);
    for (const auto& e : pred.evidence)
      lp += traced_log_prob({e.instance, target_rel, label}, "likelihood", label);
    pred.log_posterior.push_back(lp - log_marginal);
  }

  double total = 0.0;
  for (double lp : pred.log_posterior) {
    pred.posterior.push_back(std::exp(lp));
    total += pred.posterior.back();
  }
  for (double p : pred.posterior) pred.normalized.push_back(p / total);

  size_t best = 0;
  for (size_t i = 1; i < pred.log_posterior.size(); ++i)
    if (pred.log_posterior[i] > pred.log_posterior[best]) best = i;
  pred.chosen = pred.labels[best];
  return pred;
}

// ---------------------------------------------------------------------------
// Inference-support triples
//
// Hypothesis and marginal triples reference the generic entity and the
// class-level reifications <instance, target relation, label>. Injecting
// them into the training store (the default in the pipeline) ensures those
// entities receive meaningful embeddings: one generic feature triple per
// declared instance, one generic target triple per label, and one reified
// co-occurrence triple per (assignment instance, label) of each labeled
// frame.
// ---------------------------------------------------------------------------

inline size_t inject_inference_triples(TripleStore& store, const Ontology& onto,
                                       const std::vector<LinguisticFrame>& frames) {
  const std::string& generic = onto.generic_entity();
  const std::string& target_rel = onto.target_relation();
  size_t added = 0;
  for (const auto* c : onto.feature_classes())
    for (const auto& inst : c->instances)
      added += store.add({generic, c->relation(), inst}) ? 1 : 0;
  for (const auto& label : onto.labels())
    added += store.add({generic, target_rel, label}) ? 1 : 0;
  for (const auto& f : frames) {
    if (!f.label) continue;
    for (const auto& [rel, inst] : f.assignments)
      added += store.add({inst, target_rel, *f.label}) ? 1 : 0;
  }
  return added;
}

// ---------------------------------------------------------------------------
// Platt scaling
// ---------------------------------------------------------------------------

// Fits (scale, offset) by logistic regression of binary labels on raw triple
// scores: Newton steps from the identity calibration with backtracking, so
// the fitted log-loss never exceeds the starting point even on separable
// data where the unregularized optimum diverges.
inline Calibration fit_calibration(const std::vector<double>& scores,
                                   const std::vector<int>& labels, int iterations = 100) {
  if (scores.size() != labels.size() || scores.empty())
    fail("fit_calibration: scores and labels must be non-empty and equal length");
  double n = static_cast<double>(scores.size());
  auto loss_at = [&](double a, double b) {
    double loss = 0.0;
    for (size_t i = 0; i < scores.size(); ++i) {
      double z = a * scores[i] + b;
      loss -= labels[i] ? log_sigmoid(z) : log_sigmoid(-z);
    }
    return loss / n;
  };

  double a = 1.0, b = 0.0;
  double current = loss_at(a, b);
  for (int it = 0; it < iterations; ++it) {
    double g_a = 0.0, g_b = 0.0, h_aa = 0.0, h_ab = 0.0, h_bb = 0.0;
    for (size_t i = 0; i < scores.size(); ++i) {
      double s = scores[i];
      double p = sigmoid(a * s + b);
      double d = p - static_cast<double>(labels[i]);
      double w = std::max(p * (1.0 - p), 1e-12);
      g_a += d * s;
      g_b += d;
      h_aa += w * s * s;
      h_ab += w * s;
      h_bb += w;
    }
    double det = h_aa * h_bb - h_ab * h_ab;
    if (std::fabs(det) < 1e-12) break;
    double da = (h_bb * g_a - h_ab * g_b) / det;
    double db = (h_aa * g_b - h_ab * g_a) / det;

    double step = 1.0;
    bool accepted = false;
    for (int half = 0; half < 30; ++half, step *= 0.5) {
      double next = loss_at(a - step * da, b - step * db);
      if (next < current) {
        a -= step * da;
        b -= step * db;
        current = next;
        accepted = true;
        break;
      }
    }
    if (!accepted || (std::fabs(step * da) < 1e-10 && std::fabs(step * db) < 1e-10)) break;
  }
  return {a, b};
}

inline double calibration_log_loss(const std::vector<double>& scores,
                                   const std::vector<int>& labels, const Calibration& cal) {
  if (scores.size() != labels.size() || scores.empty())
    fail("calibration_log_loss: scores and labels must be non-empty and equal length");
  double loss = 0.0;
  for (size_t i = 0; i < scores.size(); ++i) {
    double z = cal.scale * scores[i] + cal.offset;
    loss -= labels[i] ? log_sigmoid(z) : log_sigmoid(-z);
  }
  return loss / static_cast<double>(scores.size());
}

}  // namespace roadkg
