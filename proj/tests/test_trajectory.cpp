#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "support.hpp"
#include "trajsynth/dataset_io.hpp"
#include "trajsynth/synthetic.hpp"
#include "trajsynth/tasks.hpp"

using namespace trajsynth;

namespace {

std::string tmp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("trajsynth_test_" + name)).string();
}

Dataset random_dataset(std::uint64_t seed, std::size_t count) {
  std::mt19937_64 rng(seed);
  Dataset d;
  d.object_count = 2;
  d.frame_rate = 2;
  for (std::size_t k = 0; k < count; ++k) {
    auto z = support::random_traj(rng, k % 7, 0.1, "t" + std::to_string(k));
    d.trajectories.push_back(z);
    if (k % 3 != 2) d.labels[z.id] = static_cast<int>(k % 2);
  }
  return d;
}

}  // namespace

TEST(LoadDataset, MinimalJsonFile) {
  const std::string text = R"({"object_count": 1, "frame_rate": 2.0, "trajectories": [
    {"id": "a", "label": 1, "frames": [[{"x": 0, "y": 0}], [{"x": 1, "y": 0}]]}]})";
  const auto path = tmp_path("minimal.json");
  write_file(path, text);
  const Dataset d = load_dataset(path, DataFormat::Json);
  ASSERT_EQ(d.trajectories.size(), 1u);
  EXPECT_EQ(d.trajectories[0].size(), 2u);
  EXPECT_EQ(d.object_count, 1u);
  EXPECT_EQ(d.label_of("a"), 1);
  std::filesystem::remove(path);
}

TEST(LoadDataset, MissingCoordinateIsSchemaError) {
  const std::string text = R"({"object_count": 1, "frame_rate": 1, "trajectories": [
    {"id": "a", "frames": [[{"x": 0}]]}]})";
  EXPECT_THROW(parse_dataset_json(text), SchemaError);
  EXPECT_THROW(parse_dataset_csv("a,0,0,1.0\n"), SchemaError);
}

TEST(LoadDataset, InconsistentObjectCountIsSchemaError) {
  const std::string text = R"({"object_count": 2, "frame_rate": 1, "trajectories": [
    {"id": "a", "frames": [[{"x": 0, "y": 0}]]}]})";
  EXPECT_THROW(parse_dataset_json(text), SchemaError);
}

TEST(LoadDataset, MalformedJsonIsParseError) { EXPECT_THROW(parse_dataset_json("{\"object_count\": "), ParseError); }

TEST(LoadDataset, MissingFileIsIoError) {
  EXPECT_THROW(load_dataset(tmp_path("does_not_exist.json"), DataFormat::Json), IoError);
}

TEST(LoadDataset, VelocitiesReadPerFrame) {
  const std::string text = R"({"object_count": 1, "frame_rate": 1, "trajectories": [
    {"id": "z0", "frames": [[{"x": 0, "y": 0, "vx": 0.9, "vy": 0}], [{"x": 0.9, "y": 0, "vx": 0.6, "vy": 0}]]}]})";
  const Dataset d = parse_dataset_json(text);
  const auto& z = d.trajectories[0];
  EXPECT_DOUBLE_EQ(speed_of(z.states[0][0]), 0.9);
  EXPECT_DOUBLE_EQ(speed_of(z.states[1][0]), 0.6);
}

TEST(LoadDataset, DerivesVelocityWhenAbsent) {
  const std::string text = R"({"object_count": 1, "frame_rate": 2, "trajectories": [
    {"id": "a", "frames": [[{"x": 0, "y": 0}], [{"x": 1, "y": 0}], [{"x": 3, "y": 0}]]}]})";
  const Dataset d = parse_dataset_json(text);
  const auto& z = d.trajectories[0];
  EXPECT_DOUBLE_EQ(z.states[0][0].vx, 2.0);
  EXPECT_DOUBLE_EQ(z.states[1][0].vx, 4.0);
  EXPECT_DOUBLE_EQ(z.states[2][0].vx, 4.0);
  EXPECT_DOUBLE_EQ(z.states[0][0].ax, 4.0);
}

TEST(LoadDataset, KeepsFileOrder) {
  const Dataset d = random_dataset(3, 6);
  const Dataset back = parse_dataset_json(dataset_to_json(d));
  for (std::size_t k = 0; k < d.trajectories.size(); ++k) EXPECT_EQ(back.trajectories[k].id, d.trajectories[k].id);
}

TEST(LoadDataset, RoundTripsBothFormats) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Dataset d = random_dataset(seed, 8);
    const std::string json = dataset_to_json(d);
    const Dataset dj = parse_dataset_json(json);
    EXPECT_EQ(dj, d);
    EXPECT_EQ(dataset_to_json(dj), json);
    const std::string csv = dataset_to_csv(d);
    const Dataset dc = parse_dataset_csv(csv);
    EXPECT_EQ(dc, d);
    EXPECT_EQ(dataset_to_csv(dc), csv);
  }
}

TEST(LoadDataset, RoundTripsThroughFiles) {
  const Dataset d = random_dataset(9, 5);
  for (auto fmt : {DataFormat::Json, DataFormat::Csv}) {
    const auto path = tmp_path(fmt == DataFormat::Json ? "rt.json" : "rt.csv");
    save_dataset(d, path, fmt);
    EXPECT_EQ(load_dataset(path, fmt), d);
    std::filesystem::remove(path);
  }
}

TEST(Subtrajectory, WholeAndEmpty) {
  const auto z = support::golden_z1();
  auto all = subtrajectory(z, 0, z.size());
  EXPECT_EQ(materialize(all), z);
  auto e = subtrajectory(z, 1, 1);
  EXPECT_TRUE(e.empty());
  EXPECT_EQ(e.size(), 0u);
}

TEST(Subtrajectory, SingleFrameOfZ1) {
  const auto z1 = support::golden_z1();
  auto v = subtrajectory(z1, 1, 2);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_DOUBLE_EQ(speed_of(v[0][0]), 0.8);
}

TEST(Subtrajectory, OutOfRangeThrows) {
  const auto z = support::golden_z1();
  EXPECT_THROW(subtrajectory(z, 0, 3), std::out_of_range);
  EXPECT_THROW(subtrajectory(z, 2, 1), std::out_of_range);
}

TEST(Subtrajectory, CompositionProperty) {
  std::mt19937_64 rng(11);
  for (int iter = 0; iter < 50; ++iter) {
    const auto z = support::random_traj(rng, 9);
    for (std::size_t i = 0; i <= z.size(); ++i)
      for (std::size_t j = i; j <= z.size(); ++j) {
        auto outer = subtrajectory(z, i, j);
        for (std::size_t a = 0; a <= outer.size(); ++a)
          for (std::size_t b = a; b <= outer.size(); ++b) {
            auto x = subtrajectory(outer, a, b);
            auto y = subtrajectory(z, i + a, i + b);
            ASSERT_EQ(x.begin, y.begin);
            ASSERT_EQ(x.end, y.end);
          }
      }
  }
}

namespace {

Track track(const std::string& id, std::size_t start, std::size_t len) {
  Track t;
  t.id = id;
  t.start_frame = start;
  t.traj = support::velocity_traj(id, std::vector<double>(len, 1.0));
  return t;
}

}  // namespace

TEST(FormPairs, DisjointSpansGiveNothing) {
  EXPECT_TRUE(form_pairs({track("a", 0, 3), track("b", 5, 3)}, 1).empty());
}

TEST(FormPairs, FullOverlapGivesBothOrders) {
  auto pairs = form_pairs({track("a", 0, 4), track("b", 0, 4)}, 1);
  ASSERT_EQ(pairs.size(), 2u);
  EXPECT_EQ(pairs[0].object_count(), 2u);
}

TEST(FormPairs, ThreeOverlappingTracksGiveSix) {
  EXPECT_EQ(form_pairs({track("a", 0, 5), track("b", 1, 5), track("c", 2, 5)}, 1).size(), 6u);
}

TEST(FormPairs, PresenceMaskCoversUnionSpan) {
  auto pairs = form_pairs({track("a", 0, 3), track("b", 2, 3)}, 1);
  ASSERT_FALSE(pairs.empty());
  const auto& p = pairs[0];
  EXPECT_EQ(p.size(), 5u);
  std::size_t present_a = 0, present_b = 0;
  for (const auto& s : p.states) {
    present_a += s[0].present;
    present_b += s[1].present;
  }
  EXPECT_EQ(present_a, 3u);
  EXPECT_EQ(present_b, 3u);
}

TEST(FormPairs, CountMatchesBruteForce) {
  std::mt19937_64 rng(5);
  for (int iter = 0; iter < 40; ++iter) {
    std::vector<Track> tracks;
    const int n = std::uniform_int_distribution<int>(0, 6)(rng);
    for (int k = 0; k < n; ++k)
      tracks.push_back(track("t" + std::to_string(k), std::uniform_int_distribution<std::size_t>(0, 10)(rng),
                             std::uniform_int_distribution<std::size_t>(1, 6)(rng)));
    const std::size_t min_overlap = std::uniform_int_distribution<std::size_t>(1, 3)(rng);
    std::size_t expect = 0;
    for (std::size_t a = 0; a < tracks.size(); ++a)
      for (std::size_t b = 0; b < tracks.size(); ++b) {
        if (a == b) continue;
        std::size_t overlap = 0;
        for (std::size_t f = 0; f < 20; ++f) {
          auto in = [&](const Track& t) { return f >= t.start_frame && f < t.start_frame + t.traj.size(); };
          overlap += in(tracks[a]) && in(tracks[b]);
        }
        expect += overlap >= min_overlap;
      }
    EXPECT_EQ(form_pairs(tracks, min_overlap).size(), expect);
  }
}

TEST(Synthetic, SameSeedSameBytes) {
  SyntheticSpec s;
  s.positives = 4;
  s.negatives = 6;
  s.seed = 42;
  EXPECT_EQ(dataset_to_json(generate_synthetic(s)), dataset_to_json(generate_synthetic(s)));
}

TEST(Synthetic, OnlyNegatives) {
  SyntheticSpec s;
  s.positives = 0;
  s.negatives = 5;
  const Dataset d = generate_synthetic(s);
  ASSERT_EQ(d.trajectories.size(), 5u);
  for (const auto& z : d.trajectories) EXPECT_EQ(d.label_of(z.id), 0);
}

TEST(Synthetic, UnknownScenarioThrows) {
  SyntheticSpec s;
  s.scenario = "bogus";
  EXPECT_THROW(generate_synthetic(s), UnknownScenario);
}

TEST(Synthetic, ShortTrajectoriesInEveryScenario) {
  for (const auto& name : scenario_names()) {
    SyntheticSpec spec;
    spec.scenario = name;
    spec.positives = 3;
    spec.negatives = 3;
    spec.min_length = 8;
    spec.max_length = 12;
    const Dataset d = generate_synthetic(spec);
    ASSERT_EQ(d.trajectories.size(), 6u) << name;
    for (const auto& z : d.trajectories) {
      EXPECT_GE(z.size(), 8u) << name;
      EXPECT_LE(z.size(), 12u) << name;
    }
  }
}

TEST(Synthetic, LaneTurnPositivesMatchReferenceQuery) {
  SyntheticSpec s;
  s.positives = 2;
  s.negatives = 0;
  const Dataset d = generate_synthetic(s);
  const Registry reg = task_registry(d);
  const Query q = parse_query("InRegion_1(A) ; Any ; InRegion_2(A)");
  for (const auto& z : d.trajectories) EXPECT_TRUE(eval_sat_sub(q, reg, z));
}

TEST(Synthetic, LabelsAgreeWithReferenceQuery) {
  for (const auto& name : scenario_names()) {
    SyntheticSpec s;
    s.scenario = name;
    s.positives = 8;
    s.negatives = 12;
    s.seed = 3;
    const Dataset d = generate_synthetic(s);
    const TaskDef& t = task_def(name);
    const Registry reg = task_registry(d);
    const Query truth = task_truth(t);
    for (const auto& z : d.trajectories) {
      const bool got = t.convention == LabelConvention::SatSub ? eval_sat_sub(truth, reg, z) : eval_sat(truth, reg, z);
      EXPECT_EQ(got, d.label_of(z.id) == 1) << name << " " << z.id;
    }
    EXPECT_EQ(d.object_count, t.object_count);
    for (const auto& z : d.trajectories) {
      EXPECT_GE(z.size(), s.min_length);
      EXPECT_LE(z.size(), s.max_length);
    }
  }
}

TEST(Synthetic, PositivesMatchSubintervalScan) {
  // Brute-force subinterval scan for the stream convention.
  SyntheticSpec s;
  s.positives = 3;
  s.negatives = 3;
  s.min_length = 16;
  s.max_length = 20;
  s.seed = 8;
  const Dataset d = generate_synthetic(s);
  const Registry reg = task_registry(d);
  const Query q = task_truth(task_def("lane-turn"));
  for (const auto& z : d.trajectories) {
    bool found = false;
    for (std::size_t i = 0; i <= z.size() && !found; ++i)
      for (std::size_t j = i; j <= z.size() && !found; ++j)
        found = support::SatOracle(reg, materialize(subtrajectory(z, i, j))).sat(q);
    EXPECT_EQ(found, d.label_of(z.id) == 1) << z.id;
  }
}

TEST(Dataset, ValidateRejectsDanglingLabel) {
  Dataset d = random_dataset(1, 2);
  d.labels["nope"] = 1;
  EXPECT_THROW(d.validate(), std::invalid_argument);
}
