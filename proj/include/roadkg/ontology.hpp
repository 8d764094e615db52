#pragma once

#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "roadkg/common.hpp"
#include "json.hpp"

namespace roadkg {

// One class row of an ontology table. Closed classes enumerate their
// instances; open classes (track/pedestrian ids, rule entities) accept any
// identifier. A generic class contributes a single class-level entity.
struct OntologyClass {
  std::string name;
  std::string description;
  std::vector<std::string> instances;   // closed classes only
  std::vector<std::string> relations;   // relations pointing at this class
  bool open = false;                    // instances are dynamic ids
  bool generic = false;                 // class-level entity (vehicle / Pedestrian)
  bool target = false;                  // prediction-target class
  bool auxiliary = false;               // enrichment class, not a per-frame feature

  // Feature and target classes carry exactly one relation.
  const std::string& relation() const {
    if (relations.size() != 1)
      fail("class '" + name + "' does not have a unique relation");
    return relations.front();
  }
};

class Ontology {
 public:
  std::string name;

  struct RelationSig {
    std::set<std::string> domain;  // class names allowed as head
    std::set<std::string> range;   // class names allowed as tail
  };

  const std::vector<OntologyClass>& classes() const { return classes_; }

  const OntologyClass& cls(const std::string& class_name) const {
    for (const auto& c : classes_)
      if (c.name == class_name) return c;
    fail("ontology '" + name + "': unknown class '" + class_name + "'");
  }

  bool has_class(const std::string& class_name) const {
    for (const auto& c : classes_)
      if (c.name == class_name) return true;
    return false;
  }

  // The single generic entity (first generic class). The shipped ontologies
  // declare exactly one per table.
  const std::string& generic_entity() const {
    for (const auto& c : classes_)
      if (c.generic) return c.name;
    fail("ontology '" + name + "' has no generic class");
  }

  const OntologyClass& target_class() const {
    for (const auto& c : classes_)
      if (c.target) return c;
    fail("ontology '" + name + "' has no prediction-target class");
  }

  const std::string& target_relation() const { return target_class().relation(); }

  // Labels in declaration order; prediction tie-breaks rely on this order.
  const std::vector<std::string>& labels() const { return target_class().instances; }

  bool has_relation(const std::string& rel) const { return relations_.count(rel) > 0; }

  const RelationSig& relation(const std::string& rel) const {
    auto it = relations_.find(rel);
    if (it == relations_.end())
      fail("ontology '" + name + "': undeclared relation '" + rel + "'");
    return it->second;
  }

  const std::map<std::string, RelationSig>& relations() const { return relations_; }

  // Feature classes: closed, non-target classes carrying one linguistic value
  // per frame, in declaration order.
  std::vector<const OntologyClass*> feature_classes() const {
    std::vector<const OntologyClass*> out;
    for (const auto& c : classes_)
      if (!c.open && !c.generic && !c.target && !c.auxiliary && !c.relations.empty())
        out.push_back(&c);
    return out;
  }

  std::optional<std::string> class_of_instance(const std::string& instance) const {
    auto it = instance_class_.find(instance);
    if (it == instance_class_.end()) return std::nullopt;
    return it->second;
  }

  bool instance_in_class(const std::string& instance, const std::string& class_name) const {
    const auto& c = cls(class_name);
    if (c.open) return true;
    if (c.generic) return instance == c.name;
    for (const auto& i : c.instances)
      if (i == instance) return true;
    return false;
  }

  // True when `instance` may appear as tail of `rel`.
  bool instance_in_range(const std::string& rel, const std::string& instance) const {
    for (const auto& cname : relation(rel).range)
      if (instance_in_class(instance, cname)) return true;
    return false;
  }

  bool instance_in_domain(const std::string& rel, const std::string& instance) const {
    for (const auto& cname : relation(rel).domain)
      if (instance_in_class(instance, cname)) return true;
    return false;
  }

  void add_class(OntologyClass c) {
    classes_.push_back(std::move(c));
    rebuild();
  }

  void declare_relation(const std::string& rel, RelationSig sig) {
    explicit_relations_[rel] = std::move(sig);
    rebuild();
  }

  // Structural invariants; throws on violation.
  void validate() const {
    if (classes_.empty()) fail("ontology must declare at least one class");
    std::set<std::string> seen_names;
    std::map<std::string, std::string> owner;
    int generics = 0, targets = 0;
    for (const auto& c : classes_) {
      if (c.name.empty()) fail("ontology '" + name + "': class with empty name");
      if (!seen_names.insert(c.name).second)
        fail("ontology '" + name + "': duplicate class '" + c.name + "'");
      if (c.generic) ++generics;
      if (c.target) {
        ++targets;
        if (c.instances.empty())
          fail("ontology '" + name + "': target class '" + c.name + "' has no instances");
      }
      if (!c.open && !c.generic && c.instances.empty())
        fail("ontology '" + name + "': closed class '" + c.name + "' declares no instances");
      if (!c.generic && c.relations.empty())
        fail("ontology '" + name + "': class '" + c.name + "' declares no relation");
      for (const auto& inst : c.instances) {
        auto [it, inserted] = owner.emplace(inst, c.name);
        if (!inserted)
          fail("ontology '" + name + "': instance '" + inst + "' declared in both '" +
               it->second + "' and '" + c.name + "'");
      }
    }
    if (generics == 0) fail("ontology '" + name + "' must declare a generic class");
    if (targets == 0) fail("ontology '" + name + "' must declare a prediction-target class");
    for (const auto& [rel, sig] : relations_) {
      if (sig.domain.empty()) fail("relation '" + rel + "' has empty domain");
      if (sig.range.empty()) fail("relation '" + rel + "' has empty range");
      for (const auto& cn : sig.domain)
        if (!has_class(cn))
          fail("relation '" + rel + "' names undeclared domain class '" + cn + "'");
      for (const auto& cn : sig.range)
        if (!has_class(cn))
          fail("relation '" + rel + "' names undeclared range class '" + cn + "'");
    }
  }

 private:
  friend Ontology parse_ontology_json(const nlohmann::json& j, const std::string& origin);

  // Derived relation signatures. A class's relation points at that class, so
  // its range is the class itself. Default domains: HAS_CHILD attaches to the
  // generic entity; the target relation additionally accepts every feature
  // class as head so reified inference triples type-check; everything else
  // attaches to id classes and the generic entity. Explicit declarations in
  // the file replace the derived signature.
  void rebuild() {
    relations_.clear();
    instance_class_.clear();
    std::vector<std::string> id_classes, feature_names;
    std::string generic_name;
    for (const auto& c : classes_) {
      if (c.generic) generic_name = c.name;
      if (c.open) id_classes.push_back(c.name);
      if (!c.open && !c.generic && !c.target && !c.auxiliary && !c.relations.empty())
        feature_names.push_back(c.name);
      for (const auto& inst : c.instances) instance_class_[inst] = c.name;
      if (c.generic) instance_class_[c.name] = c.name;
    }
    for (const auto& c : classes_) {
      for (const auto& rel : c.relations) {
        if (explicit_relations_.count(rel)) continue;
        auto& sig = relations_[rel];
        sig.range.insert(c.name);
        if (rel == "HAS_CHILD") {
          sig.domain.insert(generic_name);
        } else if (c.target) {
          for (const auto& idc : id_classes) sig.domain.insert(idc);
          sig.domain.insert(generic_name);
          for (const auto& f : feature_names) sig.domain.insert(f);
        } else {
          for (const auto& idc : id_classes) sig.domain.insert(idc);
          sig.domain.insert(generic_name);
        }
      }
    }
    for (const auto& [rel, sig] : explicit_relations_) relations_[rel] = sig;
  }

  std::vector<OntologyClass> classes_;
  std::map<std::string, RelationSig> explicit_relations_;
  std::map<std::string, RelationSig> relations_;
  std::map<std::string, std::string> instance_class_;
};

inline Ontology parse_ontology_json(const nlohmann::json& j, const std::string& origin) {
  Ontology o;
  try {
    o.name = j.at("name").get<std::string>();
    if (!j.contains("classes") || !j.at("classes").is_array() || j.at("classes").empty())
      fail("ontology must declare at least one class");
    for (const auto& jc : j.at("classes")) {
      OntologyClass c;
      c.name = jc.at("name").get<std::string>();
      c.description = jc.value("description", "");
      c.open = jc.value("open", false);
      c.generic = jc.value("generic", false);
      c.target = jc.value("target", false);
      c.auxiliary = jc.value("auxiliary", false);
      if (jc.contains("relation")) c.relations.push_back(jc.at("relation").get<std::string>());
      if (jc.contains("relations"))
        for (const auto& r : jc.at("relations")) c.relations.push_back(r.get<std::string>());
      if (jc.contains("instances"))
        for (const auto& i : jc.at("instances")) c.instances.push_back(i.get<std::string>());
      o.classes_.push_back(std::move(c));
    }
    if (j.contains("relations")) {
      for (const auto& jr : j.at("relations")) {
        Ontology::RelationSig sig;
        for (const auto& d : jr.at("domain")) sig.domain.insert(d.get<std::string>());
        for (const auto& r : jr.at("range")) sig.range.insert(r.get<std::string>());
        o.explicit_relations_[jr.at("name").get<std::string>()] = std::move(sig);
      }
    }
  } catch (const nlohmann::json::exception& e) {
    fail(origin + ": malformed ontology: " + e.what());
  }
  o.rebuild();
  o.validate();
  return o;
}

inline Ontology load_ontology(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open ontology file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(path + ": ontology parse error: " + e.what());
  }
  return parse_ontology_json(j, path);
}

inline Ontology parse_ontology(const std::string& text, const std::string& origin = "<memory>") {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(origin + ": ontology parse error: " + e.what());
  }
  return parse_ontology_json(j, origin);
}

}  // namespace roadkg
