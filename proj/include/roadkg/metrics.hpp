#pragma once

#include <algorithm>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "roadkg/common.hpp"
#include "roadkg/triple_store.hpp"

namespace roadkg {

struct SplitSpec {
  double train_fraction = 0.8;  // track/video-level split
  int validation_triples = 2000;
  uint64_t seed = 0;

  void validate() const {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
      fail("split spec: train fraction must be in (0,1)");
    if (validation_triples < 1) fail("split spec: validation count must be >= 1");
  }
};

// Removes n_valid triples from the store such that every entity and relation
// of the removed set still occurs in the remaining training triples.
// Deterministic under seed; throws when the split is infeasible.
inline std::pair<TripleStore, std::vector<Triple>> split_no_unseen(const TripleStore& store,
                                                                   int n_valid, uint64_t seed) {
  if (n_valid < 1) fail("split_no_unseen: n_valid must be >= 1");
  if (static_cast<size_t>(n_valid) >= store.size())
    fail("split_no_unseen: n_valid must be smaller than the triple count");

  const auto& triples = store.indexed();
  std::vector<size_t> entity_count(store.entity_names().size(), 0);
  std::vector<size_t> relation_count(store.relation_names().size(), 0);
  for (const auto& t : triples) {
    ++entity_count[t.head];
    ++entity_count[t.tail];
    ++relation_count[t.relation];
  }

  std::vector<size_t> order(triples.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  shuffle_deterministic(order, rng);

  std::vector<bool> moved(triples.size(), false);
  size_t taken = 0;
  bool progress = true;
  while (taken < static_cast<size_t>(n_valid) && progress) {
    progress = false;
    for (size_t idx : order) {
      if (taken == static_cast<size_t>(n_valid)) break;
      if (moved[idx]) continue;
      const auto& t = triples[idx];
      size_t head_needed = t.head == t.tail ? 3 : 2;
      if (entity_count[t.head] < head_needed) continue;
      if (t.head != t.tail && entity_count[t.tail] < 2) continue;
      if (relation_count[t.relation] < 2) continue;
      moved[idx] = true;
      --entity_count[t.head];
      --entity_count[t.tail];
      --relation_count[t.relation];
      ++taken;
      progress = true;
    }
  }
  if (taken < static_cast<size_t>(n_valid))
    fail("split_no_unseen: cannot carve " + std::to_string(n_valid) +
         " validation triples without unseen ids (got " + std::to_string(taken) + ")");

  TripleStore train;
  std::vector<Triple> valid;
  for (size_t i = 0; i < triples.size(); ++i) {
    Triple t = store.resolve(triples[i]);
    if (moved[i])
      valid.push_back(std::move(t));
    else
      train.add(t);
  }
  return {std::move(train), std::move(valid)};
}

struct ClassMetrics {
  std::string label;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  size_t support = 0;
};

struct ClassReport {
  std::vector<ClassMetrics> per_class;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
  double accuracy = 0.0;
  size_t total = 0;
  std::vector<std::string> warnings;

  const ClassMetrics& for_label(const std::string& label) const {
    for (const auto& m : per_class)
      if (m.label == label) return m;
    fail("report has no label '" + label + "'");
  }
};

// Standard confusion-matrix metrics; macro averages are unweighted means.
// A label absent from both vectors yields zero metrics and a warning.
inline ClassReport classification_report(const std::vector<std::string>& y_true,
                                         const std::vector<std::string>& y_pred,
                                         const std::vector<std::string>& labels) {
  if (y_true.size() != y_pred.size())
    fail("classification_report: y_true and y_pred length mismatch");
  if (y_true.empty()) fail("classification_report: empty input");
  if (labels.empty()) fail("classification_report: no labels");

  ClassReport report;
  report.total = y_true.size();
  size_t correct = 0;
  for (size_t i = 0; i < y_true.size(); ++i)
    if (y_true[i] == y_pred[i]) ++correct;
  report.accuracy = static_cast<double>(correct) / static_cast<double>(report.total);

  for (const auto& label : labels) {
    size_t tp = 0, fp = 0, fn = 0;
    for (size_t i = 0; i < y_true.size(); ++i) {
      bool is_true = y_true[i] == label;
      bool is_pred = y_pred[i] == label;
      if (is_true && is_pred) ++tp;
      if (!is_true && is_pred) ++fp;
      if (is_true && !is_pred) ++fn;
    }
    ClassMetrics m;
    m.label = label;
    m.support = tp + fn;
    if (m.support == 0 && tp + fp == 0)
      report.warnings.push_back("label '" + label + "' absent from y_true and y_pred");
    m.precision = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
    m.recall = tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
    m.f1 = m.precision + m.recall == 0.0
               ? 0.0
               : 2.0 * m.precision * m.recall / (m.precision + m.recall);
    report.per_class.push_back(std::move(m));
  }

  double n = static_cast<double>(labels.size());
  for (const auto& m : report.per_class) {
    report.macro_precision += m.precision / n;
    report.macro_recall += m.recall / n;
    report.macro_f1 += m.f1 / n;
  }
  return report;
}

inline std::string format_class_report(const ClassReport& report) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(2);
  os << "Label\tPrecision (%)\tRecall (%)\tF1-score (%)\tSupport\n";
  for (const auto& m : report.per_class)
    os << m.label << "\t" << m.precision * 100 << "\t" << m.recall * 100 << "\t" << m.f1 * 100
       << "\t" << m.support << "\n";
  os << "Macro avg\t" << report.macro_precision * 100 << "\t" << report.macro_recall * 100
     << "\t" << report.macro_f1 * 100 << "\t" << report.total << "\n";
  return os.str();
}

}  // namespace roadkg
