#pragma once

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "roadkg/common.hpp"
#include "roadkg/graph_builder.hpp"
#include "roadkg/ontology.hpp"
#include "roadkg/triple_store.hpp"

namespace roadkg {

// One mined rule: IF feat=val AND ... THEN class=val WITH w. Antecedents are
// keyed by feature class name; the consequent is a prediction-target
// instance; the weight is the rule confidence in (0, 1].
struct FuzzyRule {
  std::string id;
  std::map<std::string, std::string> antecedents;  // feature class -> instance
  std::string consequent;
  double weight = 0.0;

  std::string antecedent_entity() const { return id + "-ante"; }
  std::string consequent_entity() const { return id + "-cons"; }
};

// Rule weights live in the symbolic graph as banded instances.
inline const std::string& weight_band(double weight) {
  static const std::string low = "lowRW", mid = "midRW", high = "highRW";
  if (weight < 0.33) return low;
  if (weight < 0.66) return mid;
  return high;
}

// Rule file grammar, one rule per line:
//   id: IF <class>=<instance> AND <class>=<instance> ... THEN <class>=<instance> WITH <weight>
// '#' starts a comment line; class names may contain spaces.
inline std::vector<FuzzyRule> parse_rules(const std::string& path, const Ontology& onto) {
  std::ifstream in(path);
  if (!in) fail("cannot open rule file '" + path + "'");
  std::vector<FuzzyRule> rules;
  std::set<std::string> ids;
  std::string line;
  size_t lineno = 0;
  auto ctx = [&] { return path + ":" + std::to_string(lineno); };
  while (std::getline(in, line)) {
    ++lineno;
    std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;

    FuzzyRule rule;
    size_t colon = s.find(':');
    if (colon == std::string::npos) fail(ctx() + ": missing ':' after rule id");
    rule.id = trim(s.substr(0, colon));
    if (rule.id.empty()) fail(ctx() + ": empty rule id");
    if (!ids.insert(rule.id).second) fail(ctx() + ": duplicate rule id '" + rule.id + "'");

    std::string body = trim(s.substr(colon + 1));
    if (!starts_with(body, "IF ")) fail(ctx() + ": expected 'IF'");
    body = body.substr(3);
    size_t then_pos = body.find(" THEN ");
    if (then_pos == std::string::npos) fail(ctx() + ": expected 'THEN'");
    std::string ante_part = body.substr(0, then_pos);
    std::string cons_part = body.substr(then_pos + 6);
    size_t with_pos = cons_part.find(" WITH ");
    if (with_pos == std::string::npos) fail(ctx() + ": expected 'WITH'");
    std::string weight_part = trim(cons_part.substr(with_pos + 6));
    cons_part = trim(cons_part.substr(0, with_pos));

    auto parse_pair = [&](const std::string& token) -> std::pair<std::string, std::string> {
      size_t eq = token.find('=');
      if (eq == std::string::npos) fail(ctx() + ": expected '<class>=<instance>' in '" + token + "'");
      std::string cls = trim(token.substr(0, eq));
      std::string inst = trim(token.substr(eq + 1));
      if (cls.empty() || inst.empty()) fail(ctx() + ": empty class or instance in '" + token + "'");
      return {cls, inst};
    };

    size_t start = 0;
    while (true) {
      size_t and_pos = ante_part.find(" AND ", start);
      std::string token = trim(and_pos == std::string::npos
                                   ? ante_part.substr(start)
                                   : ante_part.substr(start, and_pos - start));
      if (token.empty()) fail(ctx() + ": empty antecedent");
      auto [cls, inst] = parse_pair(token);
      if (!onto.has_class(cls)) fail(ctx() + ": unknown feature class '" + cls + "'");
      if (!onto.instance_in_class(inst, cls))
        fail(ctx() + ": unknown instance name '" + inst + "' for class '" + cls + "'");
      if (!rule.antecedents.emplace(cls, inst).second)
        fail(ctx() + ": duplicate antecedent class '" + cls + "'");
      if (and_pos == std::string::npos) break;
      start = and_pos + 5;
    }
    if (rule.antecedents.empty()) fail(ctx() + ": rule has no antecedents");

    auto [ccls, cinst] = parse_pair(cons_part);
    if (!onto.has_class(ccls) || !onto.cls(ccls).target)
      fail(ctx() + ": consequent class '" + ccls + "' is not the prediction target");
    if (!onto.instance_in_class(cinst, ccls))
      fail(ctx() + ": unknown instance name '" + cinst + "'");
    rule.consequent = cinst;

    rule.weight = parse_double(weight_part, ctx() + ": rule weight");
    if (!(rule.weight > 0.0 && rule.weight <= 1.0))
      fail(ctx() + ": weight must be in (0,1]");

    rules.push_back(std::move(rule));
  }
  return rules;
}

// A rule converts to exactly two new entities: one combining the antecedent
// feature values, one integrating the consequent action and the rule weight.
struct RuleTripleBundle {
  std::string antecedent_entity;
  std::string consequent_entity;
  std::vector<Triple> triples;
};

inline RuleTripleBundle rule_to_triples(const FuzzyRule& rule) {
  if (rule.antecedents.empty()) fail("rule '" + rule.id + "' has no antecedents");
  RuleTripleBundle bundle;
  bundle.antecedent_entity = rule.antecedent_entity();
  bundle.consequent_entity = rule.consequent_entity();
  for (const auto& [cls, inst] : rule.antecedents)
    bundle.triples.push_back({inst, "ANTECEDENT_OF", bundle.antecedent_entity});
  bundle.triples.push_back({bundle.antecedent_entity, "IMPLIES", bundle.consequent_entity});
  bundle.triples.push_back({bundle.consequent_entity, "CONSEQUENT_IS", rule.consequent});
  bundle.triples.push_back({bundle.consequent_entity, "RULE_WEIGHT_IS", weight_band(rule.weight)});
  return bundle;
}

// True when every antecedent of the rule matches the frame's assignment for
// that feature class (crisp equality on linguistic categories).
inline bool rule_matches(const FuzzyRule& rule, const LinguisticFrame& frame,
                         const Ontology& onto) {
  for (const auto& [cls, inst] : rule.antecedents) {
    const auto& rel = onto.cls(cls).relation();
    auto it = frame.assignments.find(rel);
    if (it == frame.assignments.end() || it->second != inst) return false;
  }
  return true;
}

inline std::vector<std::string> matching_rule_ids(const std::vector<FuzzyRule>& rules,
                                                  const LinguisticFrame& frame,
                                                  const Ontology& onto) {
  std::vector<std::string> out;
  for (const auto& r : rules)
    if (rule_matches(r, frame, onto)) out.push_back(r.id);
  return out;
}

// Adds, for every rule matched by at least one frame, its triple bundle plus
// one ACTIVATES link per (frame, matching rule) pair. Rules matching no frame
// leave the store unchanged. Monotone: never removes triples.
inline TripleStore attach_rules(TripleStore store, const std::vector<FuzzyRule>& rules,
                                const std::vector<LinguisticFrame>& frames,
                                const Ontology& onto) {
  std::set<std::string> bundled;
  for (const auto& frame : frames) {
    for (const auto& rule : rules) {
      if (!rule_matches(rule, frame, onto)) continue;
      if (bundled.insert(rule.id).second)
        for (const auto& t : rule_to_triples(rule).triples) store.add(t);
      store.add({frame.instance_id(), "ACTIVATES", rule.antecedent_entity()});
    }
  }
  return store;
}

}  // namespace roadkg
