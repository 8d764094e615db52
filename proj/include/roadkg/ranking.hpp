#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_set>
#include <vector>

#include "roadkg/common.hpp"
#include "roadkg/embedding.hpp"
#include "roadkg/triple_store.hpp"

namespace roadkg {

enum class CorruptSide { Head, Tail, Both };

struct RankReport {
  double mrr = 0.0;              // mean reciprocal rank, average-tie ranks
  double mrr_optimistic = 0.0;   // ties resolved in favor of the test triple
  double mrr_pessimistic = 0.0;  // ties resolved against it
  double hits1 = 0.0;
  double hits3 = 0.0;
  double hits10 = 0.0;
  double mean_rank = 0.0;
  std::vector<double> ranks;     // one average-tie rank per (triple, side)
};

namespace detail {

// Known-true filter in table index space. 21 bits per id; plenty for any
// graph this artifact trains.
class TripleKeySet {
 public:
  TripleKeySet(const TripleStore& filter, const EmbeddingTable& table) {
    if (table.entity_count() >= (1ull << 21) || table.relation_count() >= (1ull << 21))
      fail("filter set: id space exceeds 2^21");
    for (const auto& t : filter.triples()) {
      auto h = lookup(table.entity_index, t.head);
      auto r = lookup(table.relation_index, t.relation);
      auto tl = lookup(table.entity_index, t.tail);
      if (h && r && tl) keys_.insert(pack(*h, *r, *tl));
    }
  }

  void insert(uint32_t h, uint32_t r, uint32_t t) { keys_.insert(pack(h, r, t)); }

  bool contains(uint32_t h, uint32_t r, uint32_t t) const {
    return keys_.count(pack(h, r, t)) > 0;
  }

 private:
  static std::optional<uint32_t> lookup(const std::unordered_map<std::string, uint32_t>& index,
                                        const std::string& name) {
    auto it = index.find(name);
    if (it == index.end()) return std::nullopt;
    return it->second;
  }
  static uint64_t pack(uint64_t h, uint64_t r, uint64_t t) {
    return (h << 42) | (r << 21) | t;
  }
  std::unordered_set<uint64_t> keys_;
};

}  // namespace detail

// Filtered ranking of test triples against all entity corruptions of the
// requested side(s). Corruptions that are known true according to `filter`
// are excluded from the candidate list (the test triple itself always
// competes). Ties contribute their average rank; optimistic and pessimistic
// variants are reported alongside.
inline RankReport evaluate_ranks(const EmbeddingTable& table, const std::vector<Triple>& test,
                                 const TripleStore& filter, CorruptSide side) {
  detail::TripleKeySet known(filter, table);
  RankReport report;
  double sum_rr = 0.0, sum_rr_opt = 0.0, sum_rr_pess = 0.0, sum_rank = 0.0;
  size_t h1 = 0, h3 = 0, h10 = 0;

  for (const auto& t : test) {
    uint32_t h = table.entity_id(t.head);
    uint32_t r = table.relation_id(t.relation);
    uint32_t tl = table.entity_id(t.tail);
    double true_score =
        scoring::score(table.scorer, table.entity(h), table.relation(r), table.entity(tl));

    auto rank_side = [&](bool head_side) {
      size_t greater = 0, equal = 0;
      for (uint32_t e = 0; e < table.entity_count(); ++e) {
        if (head_side ? e == h : e == tl) continue;
        if (head_side ? known.contains(e, r, tl) : known.contains(h, r, e)) continue;
        double s = head_side ? scoring::score(table.scorer, table.entity(e), table.relation(r),
                                              table.entity(tl))
                             : scoring::score(table.scorer, table.entity(h), table.relation(r),
                                              table.entity(e));
        if (s > true_score)
          ++greater;
        else if (s == true_score)
          ++equal;
      }
      double opt = 1.0 + static_cast<double>(greater);
      double pess = opt + static_cast<double>(equal);
      double avg = opt + static_cast<double>(equal) / 2.0;
      report.ranks.push_back(avg);
      sum_rr += 1.0 / avg;
      sum_rr_opt += 1.0 / opt;
      sum_rr_pess += 1.0 / pess;
      sum_rank += avg;
      if (avg <= 1.0) ++h1;
      if (avg <= 3.0) ++h3;
      if (avg <= 10.0) ++h10;
    };

    if (side == CorruptSide::Head || side == CorruptSide::Both) rank_side(true);
    if (side == CorruptSide::Tail || side == CorruptSide::Both) rank_side(false);
  }

  if (report.ranks.empty()) fail("evaluate_ranks: no test triples");
  double n = static_cast<double>(report.ranks.size());
  report.mrr = sum_rr / n;
  report.mrr_optimistic = sum_rr_opt / n;
  report.mrr_pessimistic = sum_rr_pess / n;
  report.mean_rank = sum_rank / n;
  report.hits1 = static_cast<double>(h1) / n;
  report.hits3 = static_cast<double>(h3) / n;
  report.hits10 = static_cast<double>(h10) / n;
  return report;
}

}  // namespace roadkg
