#pragma once

#include <algorithm>
#include <fstream>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "roadkg/common.hpp"

namespace roadkg {

struct Triple {
  std::string head;
  std::string relation;
  std::string tail;

  bool operator==(const Triple&) const = default;
  auto operator<=>(const Triple&) const = default;
};

// Dense, interned form used by the embedding and ranking code.
struct IndexedTriple {
  uint32_t head;
  uint32_t relation;
  uint32_t tail;

  bool operator==(const IndexedTriple&) const = default;
};

// Append-only set of triples with intern tables and lookup indexes.
// Construction is single-writer; once built the store is immutable and can be
// shared across readers.
class TripleStore {
 public:
  // Inserts a triple; returns false if it was already present. Ids must be
  // non-empty and free of whitespace.
  bool add(const Triple& t) {
    check_symbol(t.head, "head");
    check_symbol(t.relation, "relation");
    check_symbol(t.tail, "tail");
    uint32_t h = intern_entity(t.head);
    uint32_t r = intern_relation(t.relation);
    uint32_t tl = intern_entity(t.tail);
    IndexedTriple it{h, r, tl};
    if (!seen_.insert(key(it)).second) return false;
    size_t idx = triples_.size();
    triples_.push_back(it);
    by_head_[h].push_back(idx);
    by_relation_[r].push_back(idx);
    by_head_relation_[pair_key(h, r)].push_back(idx);
    return true;
  }

  bool add(const std::string& head, const std::string& rel, const std::string& tail) {
    return add(Triple{head, rel, tail});
  }

  size_t size() const { return triples_.size(); }
  size_t entity_count() const { return entity_names_.size(); }
  size_t relation_count() const { return relation_names_.size(); }

  bool contains(const Triple& t) const {
    auto h = find_entity(t.head);
    auto r = find_relation(t.relation);
    auto tl = find_entity(t.tail);
    if (!h || !r || !tl) return false;
    return seen_.count(key(IndexedTriple{*h, *r, *tl})) > 0;
  }

  bool contains(const IndexedTriple& t) const { return seen_.count(key(t)) > 0; }

  const std::vector<IndexedTriple>& indexed() const { return triples_; }

  Triple resolve(const IndexedTriple& t) const {
    return Triple{entity_names_[t.head], relation_names_[t.relation], entity_names_[t.tail]};
  }

  std::vector<Triple> triples() const {
    std::vector<Triple> out;
    out.reserve(triples_.size());
    for (const auto& it : triples_) out.push_back(resolve(it));
    return out;
  }

  const std::vector<std::string>& entity_names() const { return entity_names_; }
  const std::vector<std::string>& relation_names() const { return relation_names_; }

  std::optional<uint32_t> find_entity(const std::string& name) const {
    auto it = entity_index_.find(name);
    if (it == entity_index_.end()) return std::nullopt;
    return it->second;
  }

  std::optional<uint32_t> find_relation(const std::string& name) const {
    auto it = relation_index_.find(name);
    if (it == relation_index_.end()) return std::nullopt;
    return it->second;
  }

  std::vector<Triple> with_head(const std::string& head) const {
    return gather(by_head_, find_entity(head));
  }

  std::vector<Triple> with_relation(const std::string& rel) const {
    return gather(by_relation_, find_relation(rel));
  }

  std::vector<Triple> with_head_relation(const std::string& head, const std::string& rel) const {
    auto h = find_entity(head);
    auto r = find_relation(rel);
    if (!h || !r) return {};
    auto it = by_head_relation_.find(pair_key(*h, *r));
    if (it == by_head_relation_.end()) return {};
    std::vector<Triple> out;
    for (size_t idx : it->second) out.push_back(resolve(triples_[idx]));
    return out;
  }

  // Writes one `head<TAB>relation<TAB>tail` line per triple, LF endings, no
  // header, sorted lexicographically for golden-file stability.
  void export_triples(const std::string& path) const {
    std::vector<std::string> lines;
    lines.reserve(triples_.size());
    for (const auto& it : triples_) {
      Triple t = resolve(it);
      lines.push_back(t.head + "\t" + t.relation + "\t" + t.tail);
    }
    std::sort(lines.begin(), lines.end());
    std::ofstream out(path, std::ios::binary);
    if (!out) fail("cannot open '" + path + "' for writing");
    for (const auto& l : lines) out << l << "\n";
    if (!out) fail("write failure on '" + path + "'");
  }

  static TripleStore import_triples(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("cannot open triple file '" + path + "'");
    TripleStore store;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      auto fields = split(line, '\t');
      if (fields.size() != 3)
        fail(path + ":" + std::to_string(lineno) + ": expected 3 tab-separated fields, got " +
             std::to_string(fields.size()));
      store.add(Triple{fields[0], fields[1], fields[2]});
    }
    return store;
  }

 private:
  static void check_symbol(const std::string& s, const char* what) {
    if (s.empty()) fail(std::string("triple ") + what + " must be non-empty");
    for (char c : s)
      if (std::isspace(static_cast<unsigned char>(c)))
        fail(std::string("triple ") + what + " '" + s + "' contains whitespace");
  }

  static uint64_t pair_key(uint32_t a, uint32_t b) {
    return (static_cast<uint64_t>(a) << 32) | b;
  }

  // 96-bit triple packed into a string key; entity/relation counts stay well
  // under 2^32.
  static std::string key(const IndexedTriple& t) {
    std::string k(12, '\0');
    std::memcpy(k.data(), &t.head, 4);
    std::memcpy(k.data() + 4, &t.relation, 4);
    std::memcpy(k.data() + 8, &t.tail, 4);
    return k;
  }

  uint32_t intern_entity(const std::string& name) {
    auto [it, inserted] = entity_index_.emplace(name, static_cast<uint32_t>(entity_names_.size()));
    if (inserted) entity_names_.push_back(name);
    return it->second;
  }

  uint32_t intern_relation(const std::string& name) {
    auto [it, inserted] =
        relation_index_.emplace(name, static_cast<uint32_t>(relation_names_.size()));
    if (inserted) relation_names_.push_back(name);
    return it->second;
  }

  std::vector<Triple> gather(const std::unordered_map<uint32_t, std::vector<size_t>>& index,
                             std::optional<uint32_t> id) const {
    if (!id) return {};
    auto it = index.find(*id);
    if (it == index.end()) return {};
    std::vector<Triple> out;
    for (size_t idx : it->second) out.push_back(resolve(triples_[idx]));
    return out;
  }

  std::vector<IndexedTriple> triples_;
  std::unordered_set<std::string> seen_;
  std::vector<std::string> entity_names_;
  std::vector<std::string> relation_names_;
  std::unordered_map<std::string, uint32_t> entity_index_;
  std::unordered_map<std::string, uint32_t> relation_index_;
  std::unordered_map<uint32_t, std::vector<size_t>> by_head_;
  std::unordered_map<uint32_t, std::vector<size_t>> by_relation_;
  std::unordered_map<uint64_t, std::vector<size_t>> by_head_relation_;
};

}  // namespace roadkg
