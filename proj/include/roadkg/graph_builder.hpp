#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "roadkg/common.hpp"
#include "roadkg/ontology.hpp"
#include "roadkg/triple_store.hpp"

namespace roadkg {

enum class GraphMode { Vehicle, Pedestrian };

// One road user at one frame, every feature already in linguistic form.
// Assignments are keyed by feature relation and hold exactly one instance
// each; the label is the optional prediction-target instance.
struct LinguisticFrame {
  std::string user_id;
  int frame = 0;
  std::map<std::string, std::string> assignments;  // feature relation -> instance
  std::optional<std::string> label;

  std::string instance_id() const { return user_id + "-" + std::to_string(frame); }
};

// Range-checks every present assignment; with require_all also demands one
// assignment per feature class of the ontology.
inline void validate_frame(const LinguisticFrame& frame, const Ontology& onto,
                           bool require_all = false) {
  if (frame.user_id.empty()) fail("frame has empty user id");
  if (frame.frame < 0) fail("frame number must be >= 0");
  for (const auto& [rel, inst] : frame.assignments) {
    if (!onto.has_relation(rel))
      fail("frame '" + frame.user_id + "': undeclared feature relation '" + rel + "'");
    if (!onto.instance_in_range(rel, inst))
      fail("frame '" + frame.user_id + "': instance '" + inst + "' outside range of '" + rel +
           "'");
  }
  if (frame.label && !onto.instance_in_range(onto.target_relation(), *frame.label))
    fail("frame '" + frame.user_id + "': label '" + *frame.label + "' is not a target instance");
  if (require_all) {
    for (const auto* c : onto.feature_classes())
      if (!frame.assignments.count(c->relation()))
        fail("frame '" + frame.user_id + "': missing mandatory feature '" + c->name + "'");
  }
}

// Emits the triples of one frame. Vehicle mode reifies the frame as a fresh
// child vehicle `{trackId}-{frame}`; pedestrian mode keys everything to the
// pedestrian instance id and additionally links instance -> pedestrian ->
// generic entity. Temporal PREVIOUS/NEXT links span frames and are added by
// build_graph.
inline std::vector<Triple> frame_to_triples(const LinguisticFrame& frame, const Ontology& onto,
                                            GraphMode mode) {
  validate_frame(frame, onto);
  const std::string& generic = onto.generic_entity();
  std::vector<Triple> out;
  if (mode == GraphMode::Vehicle) {
    std::string child = frame.instance_id();
    out.push_back({generic, "HAS_CHILD", child});
    for (const auto& [rel, inst] : frame.assignments) out.push_back({child, rel, inst});
    if (frame.label) out.push_back({child, onto.target_relation(), *frame.label});
  } else {
    std::string instance = frame.instance_id();
    out.push_back({generic, "HAS_CHILD", frame.user_id});
    out.push_back({instance, "INSTANCE_OF", frame.user_id});
    for (const auto& [rel, inst] : frame.assignments) out.push_back({instance, rel, inst});
    if (frame.label) out.push_back({instance, onto.target_relation(), *frame.label});
  }
  return out;
}

// Builds the deduplicated union of per-frame triples. In pedestrian mode the
// instances of each pedestrian are chained with NEXT/PREVIOUS in frame order.
inline TripleStore build_graph(const std::vector<LinguisticFrame>& frames, const Ontology& onto,
                               GraphMode mode) {
  if (frames.empty()) fail("build_graph: no frames");
  TripleStore store;
  for (const auto& f : frames)
    for (const auto& t : frame_to_triples(f, onto, mode)) store.add(t);
  if (mode == GraphMode::Pedestrian) {
    std::map<std::string, std::vector<int>> frames_by_user;
    for (const auto& f : frames) frames_by_user[f.user_id].push_back(f.frame);
    for (auto& [user, numbers] : frames_by_user) {
      std::sort(numbers.begin(), numbers.end());
      numbers.erase(std::unique(numbers.begin(), numbers.end()), numbers.end());
      for (size_t i = 1; i < numbers.size(); ++i) {
        std::string prev = user + "-" + std::to_string(numbers[i - 1]);
        std::string next = user + "-" + std::to_string(numbers[i]);
        store.add({prev, "NEXT", next});
        store.add({next, "PREVIOUS", prev});
      }
    }
  }
  return store;
}

// Validates every triple of a store against the ontology's relation
// signatures. Used by tests and the CLI stats path.
inline void validate_store(const TripleStore& store, const Ontology& onto) {
  for (const auto& t : store.triples()) {
    const auto& sig = onto.relation(t.relation);
    bool head_ok = false, tail_ok = false;
    for (const auto& cn : sig.domain)
      if (onto.instance_in_class(t.head, cn)) {
        head_ok = true;
        break;
      }
    for (const auto& cn : sig.range)
      if (onto.instance_in_class(t.tail, cn)) {
        tail_ok = true;
        break;
      }
    if (!head_ok)
      fail("triple <" + t.head + ", " + t.relation + ", " + t.tail + ">: head outside domain");
    if (!tail_ok)
      fail("triple <" + t.head + ", " + t.relation + ", " + t.tail + ">: tail outside range");
  }
}

}  // namespace roadkg
