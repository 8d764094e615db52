#pragma once

#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "roadkg/common.hpp"
#include "roadkg/graph_builder.hpp"
#include "roadkg/ingest.hpp"
#include "roadkg/ontology.hpp"
#include "json.hpp"

namespace roadkg {

// Breakpoints split the real line into half-open intervals [low, high); the
// last interval is closed above by +inf. categories[i] names interval i, in
// increasing value order.
struct NumericBand {
  std::string feature;   // ontology feature class
  std::string relation;  // feature relation the category is emitted under
  std::string unit;
  std::vector<double> breakpoints;
  std::vector<std::string> categories;

  const std::string& categorize(double value) const {
    if (!std::isfinite(value)) fail("categorize: non-finite value for '" + feature + "'");
    size_t i = 0;
    while (i < breakpoints.size() && value >= breakpoints[i]) ++i;
    return categories[i];
  }
};

struct CategoricalMap {
  std::string feature;
  std::string relation;
  std::map<std::string, std::string> map;  // raw value -> instance

  const std::string& lookup(const std::string& raw) const {
    auto it = map.find(raw);
    if (it == map.end()) fail("feature '" + feature + "': unmapped raw value '" + raw + "'");
    return it->second;
  }
};

// Body orientation in degrees mapped to the quadrant of the nearest center;
// quadrant i covers [center_i - w/2, center_i + w/2) with w = 360/n,
// wrapping at 360.
struct OrientationQuadrants {
  std::string feature;
  std::string relation;
  std::vector<double> centers;
  std::vector<std::string> categories;

  const std::string& categorize(double degrees) const {
    if (!(degrees >= 0.0 && degrees < 360.0)) fail("orientation out of range: " + std::to_string(degrees));
    double width = 360.0 / static_cast<double>(centers.size());
    for (size_t i = 0; i < centers.size(); ++i) {
      double delta = std::fmod(degrees - centers[i] + 540.0, 360.0) - 180.0;
      if (delta >= -width / 2 && delta < width / 2) return categories[i];
    }
    // Exactly on the wrap seam of the last quadrant.
    return categories.back();
  }
};

struct ThresholdConfig {
  std::string mode;  // "vehicle" or "pedestrian"
  std::vector<NumericBand> numeric;
  std::vector<CategoricalMap> categorical;
  std::optional<OrientationQuadrants> orientation;

  const NumericBand& band(const std::string& feature) const {
    for (const auto& b : numeric)
      if (b.feature == feature) return b;
    fail("threshold config does not cover feature '" + feature + "'");
  }

  const CategoricalMap& category_map(const std::string& feature) const {
    for (const auto& c : categorical)
      if (c.feature == feature) return c;
    fail("threshold config does not cover feature '" + feature + "'");
  }
};

// Structural validation of the config itself plus, when an ontology is
// given, membership of every category in the relation's range. Validation is
// pure: calling it twice yields identical outcomes.
inline void validate_thresholds(const ThresholdConfig& cfg, const Ontology* onto = nullptr) {
  auto check_category = [&](const std::string& rel, const std::string& cat) {
    if (onto && !onto->instance_in_range(rel, cat))
      fail("category '" + cat + "' missing from ontology range of '" + rel + "'");
  };
  for (const auto& b : cfg.numeric) {
    if (b.categories.size() != b.breakpoints.size() + 1)
      fail("feature '" + b.feature + "': category count must be breakpoint count + 1");
    for (size_t i = 1; i < b.breakpoints.size(); ++i)
      if (!(b.breakpoints[i - 1] < b.breakpoints[i]))
        fail("feature '" + b.feature + "': breakpoints must be strictly increasing");
    for (const auto& c : b.categories) check_category(b.relation, c);
  }
  for (const auto& c : cfg.categorical)
    for (const auto& [raw, inst] : c.map) check_category(c.relation, inst);
  if (cfg.orientation) {
    const auto& q = *cfg.orientation;
    if (q.centers.size() != q.categories.size())
      fail("orientation: centers and categories must have equal length");
    if (q.centers.empty()) fail("orientation: at least one quadrant center required");
    for (const auto& c : q.categories) check_category(q.relation, c);
  }
}

inline ThresholdConfig parse_thresholds_json(const nlohmann::json& j, const std::string& origin) {
  ThresholdConfig cfg;
  try {
    cfg.mode = j.value("mode", "");
    if (j.contains("numeric")) {
      for (const auto& jb : j.at("numeric")) {
        NumericBand b;
        b.feature = jb.at("feature").get<std::string>();
        b.relation = jb.at("relation").get<std::string>();
        b.unit = jb.value("unit", "");
        for (const auto& x : jb.at("breakpoints")) b.breakpoints.push_back(x.get<double>());
        for (const auto& c : jb.at("categories")) b.categories.push_back(c.get<std::string>());
        cfg.numeric.push_back(std::move(b));
      }
    }
    if (j.contains("categorical")) {
      for (const auto& jc : j.at("categorical")) {
        CategoricalMap c;
        c.feature = jc.at("feature").get<std::string>();
        c.relation = jc.at("relation").get<std::string>();
        for (auto it = jc.at("map").begin(); it != jc.at("map").end(); ++it)
          c.map[it.key()] = it.value().get<std::string>();
        cfg.categorical.push_back(std::move(c));
      }
    }
    if (j.contains("orientation")) {
      OrientationQuadrants q;
      const auto& jq = j.at("orientation");
      q.feature = jq.at("feature").get<std::string>();
      q.relation = jq.at("relation").get<std::string>();
      for (const auto& x : jq.at("centers")) q.centers.push_back(x.get<double>());
      for (const auto& c : jq.at("categories")) q.categories.push_back(c.get<std::string>());
      cfg.orientation = std::move(q);
    }
  } catch (const nlohmann::json::exception& e) {
    fail(origin + ": malformed threshold config: " + e.what());
  }
  validate_thresholds(cfg);
  return cfg;
}

inline ThresholdConfig load_thresholds(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open threshold config '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(path + ": threshold config parse error: " + e.what());
  }
  return parse_thresholds_json(j, path);
}

// Maps one numeric vehicle record to a linguistic frame. A non-finite TTC
// means no interacting vehicle and maps to the last (lowest-risk) category.
inline LinguisticFrame discretize_vehicle(const VehicleFrameRecord& rec,
                                          const ThresholdConfig& cfg) {
  LinguisticFrame f;
  f.user_id = rec.track_id;
  f.frame = static_cast<int>(rec.frame);
  auto assign = [&](const std::string& feature, double value) {
    const auto& band = cfg.band(feature);
    f.assignments[band.relation] =
        std::isfinite(value) ? band.categorize(value) : band.categories.back();
  };
  assign("latVelocity", rec.lat_velocity);
  assign("latAcceleration", rec.lat_acceleration);
  assign("ttcPreceding", rec.ttc_preceding);
  assign("ttcLeftPreceding", rec.ttc_left_preceding);
  assign("ttcRightPreceding", rec.ttc_right_preceding);
  assign("ttcLeftFollowing", rec.ttc_left_following);
  assign("ttcRightFollowing", rec.ttc_right_following);
  if (!rec.label.empty()) f.label = rec.label;
  return f;
}

inline LinguisticFrame discretize_pedestrian(const PedestrianFrameRecord& rec,
                                             const ThresholdConfig& cfg) {
  LinguisticFrame f;
  f.user_id = rec.ped_id;
  f.frame = static_cast<int>(rec.frame);
  const auto& motion = cfg.category_map("Motion Activity");
  f.assignments[motion.relation] = motion.lookup(rec.activity);
  const auto& dist = cfg.band("Distance");
  f.assignments[dist.relation] = dist.categorize(rec.dist_ego);
  const auto& prox = cfg.band("Proximity");
  f.assignments[prox.relation] = prox.categorize(rec.dist_curb);
  if (!cfg.orientation) fail("pedestrian threshold config must define orientation quadrants");
  f.assignments[cfg.orientation->relation] = cfg.orientation->categorize(rec.orientation_deg);
  const auto& gaze = cfg.category_map("Gaze");
  f.assignments[gaze.relation] = gaze.lookup(rec.gaze ? "1" : "0");
  if (rec.cross_label.has_value())
    f.label = *rec.cross_label ? "crossRoad" : "noCrossRoad";
  return f;
}

}  // namespace roadkg
