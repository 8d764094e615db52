#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <fstream>

#include "roadkg/ingest.hpp"
#include "support/paths.hpp"

using namespace roadkg;

TEST_CASE("time to collision") {
  CHECK(time_to_collision(30.0, 10.0) == 3.0);
  CHECK(std::isinf(time_to_collision(30.0, 0.0)));
  CHECK(std::isinf(time_to_collision(30.0, -2.0)));

  SECTION("positive homogeneity") {
    Rng rng(5);
    std::uniform_real_distribution<double> g(0.5, 80.0), v(0.1, 30.0);
    for (int i = 0; i < 200; ++i) {
      double gap = g(rng), speed = v(rng);
      // Powers of two scale exactly in binary floating point.
      CHECK(time_to_collision(4.0 * gap, 4.0 * speed) == time_to_collision(gap, speed));
      double k = std::uniform_real_distribution<double>(0.1, 10.0)(rng);
      CHECK(time_to_collision(k * gap, k * speed) ==
            Catch::Approx(time_to_collision(gap, speed)).epsilon(1e-12));
    }
  }
}

TEST_CASE("vehicle track reader samples one record per track and horizon") {
  auto records = read_vehicle_tracks(testsupport::data_file("fixtures/vehicle_demo.csv"),
                                     {1.0, 2.0, 3.0, 4.0});
  // Counting oracle: 2 tracks x 4 horizons.
  REQUIRE(records.size() == 8);
  int llc = 0, lk = 0;
  for (const auto& r : records) {
    if (r.label == "LLC") ++llc;
    if (r.label == "LK") ++lk;
  }
  CHECK(llc == 4);
  CHECK(lk == 4);

  SECTION("sampled rows carry the features at anchor - 25*t") {
    for (const auto& r : records) {
      if (r.track_id == "101" && r.horizon_s == 2.0) {
        CHECK(r.frame == 150);
        CHECK(r.lat_velocity == 0.45);
        CHECK(r.ttc_preceding == 1.6);
        CHECK(std::isinf(r.ttc_right_following));  // empty cell = sentinel
      }
    }
  }
}

TEST_CASE("vehicle reader derives TTC from gap and closing speed") {
  testsupport::TempDir tmp;
  auto path = tmp.file("gaps.csv");
  std::ofstream(path) << "trackId,frame,latVelocity,latAcceleration,"
                         "gapP,closingP,gapLP,closingLP,gapRP,closingRP,"
                         "gapLF,closingLF,gapRF,closingRF,label\n"
                         "7,175,0.5,0.2,30,10,40,2,50,5,60,-3,20,0,\n"
                         "7,200,0.6,0.1,30,10,40,2,50,5,60,-3,20,0,LLC\n";
  auto records = read_vehicle_tracks(path, {1.0});
  REQUIRE(records.size() == 1);
  CHECK(records[0].ttc_preceding == 3.0);
  CHECK(records[0].ttc_left_preceding == 20.0);
  CHECK(std::isinf(records[0].ttc_left_following));   // closing <= 0
  CHECK(std::isinf(records[0].ttc_right_following));  // closing == 0
}

TEST_CASE("vehicle reader error paths") {
  testsupport::TempDir tmp;
  SECTION("missing column") {
    auto path = tmp.file("m.csv");
    std::ofstream(path) << "trackId,frame,latVelocity\n1,1,0.1\n";
    REQUIRE_THROWS_WITH(read_vehicle_tracks(path, {1.0}),
                        Catch::Matchers::ContainsSubstring("missing column"));
  }
  SECTION("non-numeric cell reported with row index") {
    auto path = tmp.file("n.csv");
    std::ofstream(path)
        << "trackId,frame,latVelocity,latAcceleration,ttcP,ttcLP,ttcRP,ttcLF,ttcRF,label\n"
           "1,175,abc,0.0,3,3,3,3,3,\n"
           "1,200,0.0,0.0,3,3,3,3,3,LK\n";
    REQUIRE_THROWS_WITH(read_vehicle_tracks(path, {1.0}),
                        Catch::Matchers::ContainsSubstring("row 2"));
  }
  SECTION("track without an anchor row") {
    auto path = tmp.file("a.csv");
    std::ofstream(path)
        << "trackId,frame,latVelocity,latAcceleration,ttcP,ttcLP,ttcRP,ttcLF,ttcRF,label\n"
           "1,175,0.1,0.0,3,3,3,3,3,\n";
    REQUIRE_THROWS_WITH(read_vehicle_tracks(path, {1.0}),
                        Catch::Matchers::ContainsSubstring("no labeled anchor"));
  }
  SECTION("duplicate frame within a track") {
    auto path = tmp.file("dup.csv");
    std::ofstream(path)
        << "trackId,frame,latVelocity,latAcceleration,ttcP,ttcLP,ttcRP,ttcLF,ttcRF,label\n"
           "1,175,0.1,0.0,3,3,3,3,3,\n"
           "1,175,0.2,0.0,3,3,3,3,3,\n"
           "1,200,0.1,0.0,3,3,3,3,3,LK\n";
    REQUIRE_THROWS_WITH(read_vehicle_tracks(path, {1.0}),
                        Catch::Matchers::ContainsSubstring("duplicate frame"));
  }
  SECTION("non-positive gap with positive closing speed") {
    auto path = tmp.file("negg.csv");
    std::ofstream(path) << "trackId,frame,latVelocity,latAcceleration,"
                           "gapP,closingP,gapLP,closingLP,gapRP,closingRP,"
                           "gapLF,closingLF,gapRF,closingRF,label\n"
                           "7,200,0.5,0.2,-4,10,40,2,50,5,60,-3,20,0,LLC\n";
    REQUIRE_THROWS_WITH(read_vehicle_tracks(path, {1.0}),
                        Catch::Matchers::ContainsSubstring("non-positive gap"));
  }
  SECTION("horizon beyond track length is skipped") {
    auto path = tmp.file("s.csv");
    std::ofstream(path)
        << "trackId,frame,latVelocity,latAcceleration,ttcP,ttcLP,ttcRP,ttcLF,ttcRF,label\n"
           "1,175,0.1,0.0,3,3,3,3,3,\n"
           "1,200,0.1,0.0,3,3,3,3,3,LK\n";
    CHECK(read_vehicle_tracks(path, {1.0, 4.0}).size() == 1);
  }
}

TEST_CASE("pedestrian reader") {
  auto records = read_pedestrian_features(testsupport::data_file("fixtures/pedestrian_demo.csv"));
  // Counting oracle: one record per source row.
  REQUIRE(records.size() == 7);
  CHECK(records[0].ped_id == "0_12_57b");
  CHECK(records[0].gaze);
  CHECK(records[0].cross_label == std::optional<bool>(true));
  CHECK(records[3].activity == "stand");
  CHECK_FALSE(records[3].gaze);

  SECTION("orientation out of range") {
    testsupport::TempDir tmp;
    auto path = tmp.file("o.csv");
    std::ofstream(path) << "pedId,frame,activity,distEgo,distCurb,orientationDeg,gaze,crossLabel\n"
                           "p1,10,walk,5,1,365,1,0\n";
    REQUIRE_THROWS_WITH(read_pedestrian_features(path),
                        Catch::Matchers::ContainsSubstring("orientation out of range"));
  }
  SECTION("negative distance") {
    testsupport::TempDir tmp;
    auto path = tmp.file("d.csv");
    std::ofstream(path) << "pedId,frame,activity,distEgo,distCurb,orientationDeg,gaze,crossLabel\n"
                           "p1,10,walk,-5,1,90,1,0\n";
    REQUIRE_THROWS_AS(read_pedestrian_features(path), Error);
  }
}

TEST_CASE("synthetic vehicle scenarios") {
  ScenarioSpec spec;
  spec.seed = 7;
  spec.counts = {{"LLC", 100}, {"LK", 50}, {"RLC", 25}};
  spec.noise = 0.0;

  SECTION("deterministic under the seed") {
    auto a = generate_synthetic_vehicles(spec);
    auto b = generate_synthetic_vehicles(spec);
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].track_id == b[i].track_id);
      CHECK(a[i].lat_velocity == b[i].lat_velocity);
      CHECK(a[i].ttc_preceding == b[i].ttc_preceding);
    }
  }

  SECTION("label proportions match the spec exactly") {
    auto records = generate_synthetic_vehicles(spec);
    std::map<std::string, int> got;
    for (const auto& r : records) ++got[r.label];
    CHECK(got == spec.counts);
  }

  SECTION("noise 0 obeys the planted rules") {
    auto records = generate_synthetic_vehicles(spec);
    for (const auto& r : records) {
      if (r.label == "LLC") {
        CHECK(r.lat_velocity > 0.2);  // leftward, above the left threshold
        CHECK(r.ttc_preceding < 3.0);
        CHECK(r.ttc_left_following > 6.0);
      }
      if (r.label == "LK") CHECK(std::fabs(r.lat_velocity) < 0.2);
      if (r.label == "RLC") CHECK(r.lat_velocity < -0.2);
    }
  }

  SECTION("all-zero counts rejected") {
    spec.counts = {{"LLC", 0}, {"LK", 0}, {"RLC", 0}};
    REQUIRE_THROWS_WITH(generate_synthetic_vehicles(spec),
                        Catch::Matchers::ContainsSubstring("at least one label"));
  }
  SECTION("unknown label rejected") {
    spec.counts = {{"UTURN", 5}};
    REQUIRE_THROWS_AS(generate_synthetic_vehicles(spec), Error);
  }
}

TEST_CASE("synthetic pedestrians") {
  ScenarioSpec spec;
  spec.seed = 3;
  spec.counts = {{"crossRoad", 40}, {"noCrossRoad", 60}};
  auto records = generate_synthetic_pedestrians(spec);
  REQUIRE(records.size() == 100);
  int cross = 0;
  for (const auto& r : records)
    if (r.cross_label == std::optional<bool>(true)) ++cross;
  CHECK(cross == 40);
  for (const auto& r : records) {
    if (*r.cross_label) {
      CHECK(r.gaze);
      CHECK(r.dist_curb < 1.5);
    }
  }
}

TEST_CASE("synthetic vehicle CSV round trips through the reader") {
  testsupport::TempDir tmp;
  ScenarioSpec spec;
  spec.seed = 21;
  spec.counts = {{"LLC", 6}, {"LK", 6}, {"RLC", 6}};
  auto records = generate_synthetic_vehicles(spec);
  auto path = tmp.file("synth.csv");
  write_vehicle_csv(records, path);
  auto back = read_vehicle_tracks(path, {1.0, 2.0, 3.0, 4.0});
  REQUIRE(back.size() == records.size());
  std::map<std::string, const VehicleFrameRecord*> by_track;
  for (const auto& r : records) by_track[r.track_id] = &r;
  for (const auto& r : back) {
    const auto* orig = by_track.at(r.track_id);
    CHECK(r.label == orig->label);
    CHECK(r.horizon_s == orig->horizon_s);
    CHECK(r.lat_velocity == Catch::Approx(orig->lat_velocity).margin(1e-5));
  }
}
