#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "roadkg/common.hpp"

namespace roadkg {

// Frames per second used for second <-> frame conversion of HighD-shaped
// track tables.
inline constexpr double kVehicleFrameRate = 25.0;

// TTC of +inf encodes "no interacting vehicle".
inline constexpr double kNoVehicleTtc = std::numeric_limits<double>::infinity();

// TTC = longitudinal gap / closing speed; no risk when the gap is not
// closing. Positive-homogeneous: ttc(k*g, k*v) == ttc(g, v) for k > 0.
inline double time_to_collision(double gap_m, double closing_speed_mps) {
  if (closing_speed_mps <= 0.0) return kNoVehicleTtc;
  return gap_m / closing_speed_mps;
}

struct VehicleFrameRecord {
  std::string track_id;
  long frame = 0;
  double lat_velocity = 0.0;      // m/s, left-positive
  double lat_acceleration = 0.0;  // m/s^2, left-positive
  double ttc_preceding = kNoVehicleTtc;
  double ttc_left_preceding = kNoVehicleTtc;
  double ttc_right_preceding = kNoVehicleTtc;
  double ttc_left_following = kNoVehicleTtc;
  double ttc_right_following = kNoVehicleTtc;
  std::string label;       // LLC / LK / RLC; empty for unlabeled input
  double horizon_s = 0.0;  // seconds before the lane-marking crossing
};

struct PedestrianFrameRecord {
  std::string ped_id;
  long frame = 0;
  std::string activity;          // raw motion class, e.g. "walk"
  double dist_ego = 0.0;         // meters
  double dist_curb = 0.0;        // meters
  double orientation_deg = 0.0;  // [0, 360)
  bool gaze = false;             // looking at the ego vehicle
  std::optional<bool> cross_label;  // crosses within the next 30 frames
};

namespace detail {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name, const std::string& path) const {
    for (size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    fail(path + ": missing column '" + name + "'");
  }

  bool has_column(const std::string& name) const {
    return std::find(header.begin(), header.end(), name) != header.end();
  }
};

inline CsvTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open '" + path + "'");
  CsvTable table;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split(line, ',');
    for (auto& c : cells) c = trim(c);
    if (table.header.empty()) {
      table.header = std::move(cells);
      continue;
    }
    if (cells.size() != table.header.size())
      fail(path + ": row " + std::to_string(lineno) + " has " + std::to_string(cells.size()) +
           " cells, expected " + std::to_string(table.header.size()));
    table.rows.push_back(std::move(cells));
  }
  if (table.header.empty()) fail(path + ": empty file");
  return table;
}

inline double numeric_cell(const std::vector<std::string>& row, int col, size_t rowno,
                           const std::string& path) {
  return parse_double(row[col], path + ": row " + std::to_string(rowno) + ", column " +
                                     std::to_string(col + 1));
}

// Empty cell is the no-vehicle sentinel.
inline double ttc_cell(const std::vector<std::string>& row, int col, size_t rowno,
                       const std::string& path) {
  if (row[col].empty()) return kNoVehicleTtc;
  double v = numeric_cell(row, col, rowno, path);
  if (v <= 0.0) fail(path + ": row " + std::to_string(rowno) + ": TTC must be positive");
  return v;
}

}  // namespace detail

// Reads a HighD-shaped track table and samples one record per
// (track, horizon) pair. Two header layouts are accepted: TTC columns
// `ttcP,ttcLP,ttcRP,ttcLF,ttcRF` given directly (empty cell = no vehicle),
// or raw `gapX,closingX` pairs from which TTC is derived as gap / closing
// speed (no risk when the closing speed is <= 0).
//
// Each track carries exactly one labeled anchor row: the lane-marking
// crossing frame for LLC/RLC tracks, or the reference frame of an LK track.
// For each horizon t the row at frame `anchor - round(25 * t)` is sampled
// and tagged; tracks without a row at that frame are skipped for that
// horizon.
inline std::vector<VehicleFrameRecord> read_vehicle_tracks(const std::string& path,
                                                           const std::vector<double>& horizons) {
  auto table = detail::read_csv(path);
  bool derived_ttc = table.has_column("ttcP");
  const std::vector<std::string> base = {"trackId", "frame", "latVelocity", "latAcceleration"};
  for (const auto& c : base) table.column(c, path);
  std::vector<std::string> ttc_names = {"ttcP", "ttcLP", "ttcRP", "ttcLF", "ttcRF"};
  std::vector<std::string> gap_names = {"gapP", "gapLP", "gapRP", "gapLF", "gapRF"};
  std::vector<std::string> closing_names = {"closingP", "closingLP", "closingRP", "closingLF",
                                            "closingRF"};
  int label_col = table.column("label", path);
  int track_col = table.column("trackId", path);
  int frame_col = table.column("frame", path);
  int vel_col = table.column("latVelocity", path);
  int acc_col = table.column("latAcceleration", path);
  int ttc_cols[5] = {0}, gap_cols[5] = {0}, closing_cols[5] = {0};
  for (int i = 0; i < 5; ++i) {
    if (derived_ttc) {
      ttc_cols[i] = table.column(ttc_names[i], path);
    } else {
      gap_cols[i] = table.column(gap_names[i], path);
      closing_cols[i] = table.column(closing_names[i], path);
    }
  }

  struct Row {
    VehicleFrameRecord rec;
    std::string row_label;
  };
  std::map<std::string, std::map<long, Row>> tracks;  // trackId -> frame -> row
  std::vector<std::string> track_order;
  size_t rowno = 1;
  for (const auto& row : table.rows) {
    ++rowno;
    Row r;
    r.rec.track_id = row[track_col];
    if (r.rec.track_id.empty()) fail(path + ": row " + std::to_string(rowno) + ": empty trackId");
    r.rec.frame = parse_long(row[frame_col], path + ": row " + std::to_string(rowno) + ", frame");
    if (r.rec.frame < 0) fail(path + ": row " + std::to_string(rowno) + ": frame must be >= 0");
    r.rec.lat_velocity = detail::numeric_cell(row, vel_col, rowno, path);
    r.rec.lat_acceleration = detail::numeric_cell(row, acc_col, rowno, path);
    double* slots[5] = {&r.rec.ttc_preceding, &r.rec.ttc_left_preceding,
                        &r.rec.ttc_right_preceding, &r.rec.ttc_left_following,
                        &r.rec.ttc_right_following};
    for (int i = 0; i < 5; ++i) {
      if (derived_ttc) {
        *slots[i] = detail::ttc_cell(row, ttc_cols[i], rowno, path);
      } else {
        double gap = detail::numeric_cell(row, gap_cols[i], rowno, path);
        double closing = detail::numeric_cell(row, closing_cols[i], rowno, path);
        *slots[i] = time_to_collision(gap, closing);
        if (*slots[i] <= 0.0)
          fail(path + ": row " + std::to_string(rowno) +
               ": non-positive gap with closing speed > 0");
      }
    }
    r.row_label = row[label_col];
    if (!tracks.count(r.rec.track_id)) track_order.push_back(r.rec.track_id);
    auto [it, inserted] = tracks[r.rec.track_id].emplace(r.rec.frame, std::move(r));
    if (!inserted)
      fail(path + ": row " + std::to_string(rowno) + ": duplicate frame " +
           std::to_string(it->first) + " in track '" + it->second.rec.track_id + "'");
  }

  std::vector<VehicleFrameRecord> out;
  for (const auto& tid : track_order) {
    const auto& frames = tracks[tid];
    long anchor = -1;
    std::string label;
    for (const auto& [frame, row] : frames) {
      if (row.row_label.empty()) continue;
      if (anchor >= 0)
        fail(path + ": track '" + tid + "' has more than one labeled anchor row");
      anchor = frame;
      label = row.row_label;
    }
    if (anchor < 0) fail(path + ": track '" + tid + "' has no labeled anchor row");
    for (double h : horizons) {
      long target = anchor - std::lround(kVehicleFrameRate * h);
      auto it = frames.find(target);
      if (it == frames.end()) continue;  // horizon beyond recorded track length
      VehicleFrameRecord rec = it->second.rec;
      rec.label = label;
      rec.horizon_s = h;
      out.push_back(std::move(rec));
    }
  }
  return out;
}

inline std::vector<PedestrianFrameRecord> read_pedestrian_features(const std::string& path) {
  auto table = detail::read_csv(path);
  int ped_col = table.column("pedId", path);
  int frame_col = table.column("frame", path);
  int act_col = table.column("activity", path);
  int ego_col = table.column("distEgo", path);
  int curb_col = table.column("distCurb", path);
  int ori_col = table.column("orientationDeg", path);
  int gaze_col = table.column("gaze", path);
  int label_col = table.column("crossLabel", path);

  std::vector<PedestrianFrameRecord> out;
  size_t rowno = 1;
  for (const auto& row : table.rows) {
    ++rowno;
    PedestrianFrameRecord r;
    r.ped_id = row[ped_col];
    if (r.ped_id.empty()) fail(path + ": row " + std::to_string(rowno) + ": empty pedId");
    r.frame = parse_long(row[frame_col], path + ": row " + std::to_string(rowno) + ", frame");
    if (r.frame < 0) fail(path + ": row " + std::to_string(rowno) + ": frame must be >= 0");
    r.activity = row[act_col];
    r.dist_ego = detail::numeric_cell(row, ego_col, rowno, path);
    r.dist_curb = detail::numeric_cell(row, curb_col, rowno, path);
    if (r.dist_ego < 0 || r.dist_curb < 0)
      fail(path + ": row " + std::to_string(rowno) + ": distances must be >= 0");
    r.orientation_deg = detail::numeric_cell(row, ori_col, rowno, path);
    if (!(r.orientation_deg >= 0.0 && r.orientation_deg < 360.0))
      fail(path + ": row " + std::to_string(rowno) + ": orientation out of range");
    long gaze = parse_long(row[gaze_col], path + ": row " + std::to_string(rowno) + ", gaze");
    if (gaze != 0 && gaze != 1)
      fail(path + ": row " + std::to_string(rowno) + ": gaze must be 0 or 1");
    r.gaze = gaze == 1;
    if (!row[label_col].empty()) {
      long cl =
          parse_long(row[label_col], path + ": row " + std::to_string(rowno) + ", crossLabel");
      if (cl != 0 && cl != 1)
        fail(path + ": row " + std::to_string(rowno) + ": crossLabel must be 0 or 1");
      r.cross_label = cl == 1;
    }
    out.push_back(std::move(r));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Synthetic scenarios
//
// Desk-scale labeled data with planted generative rules, so the Bayes-optimal
// classifier is known by construction. Vehicle rules (applied with
// probability 1 - noise, otherwise a uniformly random *other* band):
//   LLC: lateral velocity/acceleration in the leftward band, high-risk TTC
//        with the preceding vehicle, low-risk TTC with the left preceding and
//        left following vehicles.
//   RLC: mirror image of LLC on the right side.
//   LK:  straight lateral velocity, zero lateral acceleration, low-risk TTC
//        with the preceding vehicle.
// Unplanted TTC slots are drawn uniformly over {high, medium, low, absent}
// independent of the label. Pedestrian rules:
//   crossRoad:   looking at the vehicle, near the curb, oriented left,
//                walking or running, near-ish to the ego vehicle.
//   noCrossRoad: not looking, far from the curb, oriented with traffic,
//                standing or walking, far from the ego vehicle.
// ---------------------------------------------------------------------------

struct ScenarioSpec {
  uint64_t seed = 0;
  std::map<std::string, int> counts;  // label -> record count
  double noise = 0.0;

  void validate() const {
    if (counts.empty()) fail("scenario spec: at least one label required");
    bool any = false;
    for (const auto& [label, n] : counts) {
      if (n < 0) fail("scenario spec: negative count for '" + label + "'");
      if (n > 0) any = true;
    }
    if (!any) fail("scenario spec: at least one label must have a positive count");
    if (noise < 0.0 || noise > 1.0) fail("scenario spec: noise must be in [0,1]");
  }
};

namespace detail {

// Band draws stay clear of the shipped threshold breakpoints so noise-free
// data is perfectly separable under the default config.
struct VehicleBands {
  static double lat_vel(Rng& rng, int band) {  // 0 right, 1 straight, 2 left
    static constexpr double lo[3] = {-1.0, -0.15, 0.35};
    static constexpr double hi[3] = {-0.35, 0.15, 1.0};
    return uniform_real(rng, lo[band], hi[band]);
  }
  static double lat_acc(Rng& rng, int band) {
    static constexpr double lo[3] = {-0.6, -0.08, 0.2};
    static constexpr double hi[3] = {-0.2, 0.08, 0.6};
    return uniform_real(rng, lo[band], hi[band]);
  }
  static double ttc(Rng& rng, int band) {  // 0 high risk, 1 medium, 2 low, 3 absent
    if (band == 3) return kNoVehicleTtc;
    static constexpr double lo[3] = {0.8, 3.2, 6.5};
    static constexpr double hi[3] = {2.8, 5.8, 15.0};
    return uniform_real(rng, lo[band], hi[band]);
  }
};

inline int perturb_band(Rng& rng, int planted, int n_bands, double noise) {
  if (noise <= 0.0) return planted;
  if (uniform_unit(rng) >= noise) return planted;
  int other = static_cast<int>(uniform_index(rng, n_bands - 1));
  return other >= planted ? other + 1 : other;
}

}  // namespace detail

inline std::vector<VehicleFrameRecord> generate_synthetic_vehicles(const ScenarioSpec& spec) {
  spec.validate();
  for (const auto& [label, n] : spec.counts)
    if (label != "LLC" && label != "LK" && label != "RLC")
      fail("vehicle scenario spec: unknown label '" + label + "'");
  Rng rng(spec.seed);
  std::vector<VehicleFrameRecord> out;
  const double horizons[4] = {1.0, 2.0, 3.0, 4.0};
  int serial = 0;
  const std::vector<std::string> order = {"LLC", "LK", "RLC"};
  for (const auto& label : order) {
    auto it = spec.counts.find(label);
    if (it == spec.counts.end()) continue;
    for (int i = 0; i < it->second; ++i, ++serial) {
      VehicleFrameRecord r;
      r.track_id = "synth-" + std::to_string(serial + 1);
      r.horizon_s = horizons[serial % 4];
      r.frame = 200 - std::lround(kVehicleFrameRate * r.horizon_s);
      r.label = label;
      auto pick = [&](int planted, int n_bands) {
        return detail::perturb_band(rng, planted, n_bands, spec.noise);
      };
      auto random_ttc = [&] {
        return detail::VehicleBands::ttc(rng, static_cast<int>(uniform_index(rng, 4)));
      };
      if (label == "LLC") {
        r.lat_velocity = detail::VehicleBands::lat_vel(rng, pick(2, 3));
        r.lat_acceleration = detail::VehicleBands::lat_acc(rng, pick(2, 3));
        r.ttc_preceding = detail::VehicleBands::ttc(rng, pick(0, 3));
        r.ttc_left_preceding = detail::VehicleBands::ttc(rng, pick(2, 3));
        r.ttc_left_following = detail::VehicleBands::ttc(rng, pick(2, 3));
        r.ttc_right_preceding = random_ttc();
        r.ttc_right_following = random_ttc();
      } else if (label == "RLC") {
        r.lat_velocity = detail::VehicleBands::lat_vel(rng, pick(0, 3));
        r.lat_acceleration = detail::VehicleBands::lat_acc(rng, pick(0, 3));
        r.ttc_preceding = detail::VehicleBands::ttc(rng, pick(0, 3));
        r.ttc_right_preceding = detail::VehicleBands::ttc(rng, pick(2, 3));
        r.ttc_right_following = detail::VehicleBands::ttc(rng, pick(2, 3));
        r.ttc_left_preceding = random_ttc();
        r.ttc_left_following = random_ttc();
      } else {
        r.lat_velocity = detail::VehicleBands::lat_vel(rng, pick(1, 3));
        r.lat_acceleration = detail::VehicleBands::lat_acc(rng, pick(1, 3));
        r.ttc_preceding = detail::VehicleBands::ttc(rng, pick(2, 3));
        r.ttc_left_preceding = random_ttc();
        r.ttc_left_following = random_ttc();
        r.ttc_right_preceding = random_ttc();
        r.ttc_right_following = random_ttc();
      }
      out.push_back(std::move(r));
    }
  }
  return out;
}

inline std::vector<PedestrianFrameRecord> generate_synthetic_pedestrians(
    const ScenarioSpec& spec) {
  spec.validate();
  for (const auto& [label, n] : spec.counts)
    if (label != "crossRoad" && label != "noCrossRoad")
      fail("pedestrian scenario spec: unknown label '" + label + "'");
  Rng rng(spec.seed);
  auto uniform = [&](double lo, double hi) { return uniform_real(rng, lo, hi); };
  auto flip = [&](double p) { return uniform_unit(rng) < p; };
  std::vector<PedestrianFrameRecord> out;
  int serial = 0;
  const std::vector<std::string> order = {"crossRoad", "noCrossRoad"};
  for (const auto& label : order) {
    auto it = spec.counts.find(label);
    if (it == spec.counts.end()) continue;
    bool cross = label == "crossRoad";
    for (int i = 0; i < it->second; ++i, ++serial) {
      PedestrianFrameRecord r;
      r.ped_id = "sped-" + std::to_string(serial + 1);
      r.frame = 40;
      bool planted = !flip(spec.noise);
      bool as_cross = planted ? cross : !cross;
      if (as_cross) {
        r.gaze = true;
        r.dist_curb = uniform(0.2, 1.2);
        r.orientation_deg = uniform(60.0, 120.0);
        r.activity = flip(0.5) ? "run" : "walk";
        r.dist_ego = uniform(6.0, 9.0);
      } else {
        r.gaze = false;
        r.dist_curb = uniform(5.0, 12.0);
        r.orientation_deg = uniform(320.0, 360.0);
        r.activity = flip(0.5) ? "stand" : "walk";
        r.dist_ego = uniform(40.0, 80.0);
      }
      r.cross_label = cross;
      out.push_back(std::move(r));
    }
  }
  return out;
}

// Writes records as a track table in the anchor-row convention used by
// read_vehicle_tracks: per record one context row at the sampled frame plus a
// labeled anchor row at frame 200.
inline void write_vehicle_csv(const std::vector<VehicleFrameRecord>& records,
                              const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail("cannot open '" + path + "' for writing");
  out << "trackId,frame,latVelocity,latAcceleration,ttcP,ttcLP,ttcRP,ttcLF,ttcRF,label\n";
  auto ttc_str = [](double v) { return std::isfinite(v) ? std::to_string(v) : std::string(); };
  for (const auto& r : records) {
    std::string features = std::to_string(r.lat_velocity) + "," +
                           std::to_string(r.lat_acceleration) + "," + ttc_str(r.ttc_preceding) +
                           "," + ttc_str(r.ttc_left_preceding) + "," +
                           ttc_str(r.ttc_right_preceding) + "," + ttc_str(r.ttc_left_following) +
                           "," + ttc_str(r.ttc_right_following);
    out << r.track_id << "," << r.frame << "," << features << ",\n";
    out << r.track_id << ",200," << features << "," << r.label << "\n";
  }
  if (!out) fail("write failure on '" + path + "'");
}

inline void write_pedestrian_csv(const std::vector<PedestrianFrameRecord>& records,
                                 const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail("cannot open '" + path + "' for writing");
  out << "pedId,frame,activity,distEgo,distCurb,orientationDeg,gaze,crossLabel\n";
  for (const auto& r : records) {
    out << r.ped_id << "," << r.frame << "," << r.activity << "," << r.dist_ego << ","
        << r.dist_curb << "," << r.orientation_deg << "," << (r.gaze ? 1 : 0) << ",";
    if (r.cross_label) out << (*r.cross_label ? 1 : 0);
    out << "\n";
  }
  if (!out) fail("write failure on '" + path + "'");
}

}  // namespace roadkg
