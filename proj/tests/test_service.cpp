#include <gtest/gtest.h>

#include <filesystem>

#include "httplib.h"
#include "trajsynth/service.hpp"
#include "trajsynth/synthetic.hpp"
#include "trajsynth/tasks.hpp"

using namespace trajsynth;
using ojson = nlohmann::ordered_json;

namespace {

struct Session {
  Dataset data;
  Registry reg;
  LearnerSetup setup;

  Session() {
    SyntheticSpec spec;
    spec.scenario = "lane-follow";
    spec.positives = 15;
    spec.negatives = 30;
    spec.min_length = 16;
    spec.max_length = 24;
    spec.seed = 5;
    data = generate_synthetic(spec);
    reg = task_registry(data);
    const TaskDef& t = task_def(spec.scenario);
    setup.data = &data;
    setup.registry = &reg;
    setup.sketches = enumerate_sketches(task_enum_config(t, reg));
    setup.synth.convention = t.convention;
    setup.loop.initial_positives = 2;
    setup.loop.initial_negatives = 3;
    setup.loop.steps = 4;
    setup.loop.seed = 1;
  }

  Transcript headless() const {
    ActiveLearner l(setup);
    FixedLabelsOracle o(data.labels);
    return run_loop(l, o);
  }
};

struct Running {
  LabelService service;
  httplib::Client client;

  Running(const LearnerSetup& setup, ServiceOptions opt = {})
      : service(setup, std::move(opt)), client("127.0.0.1", (bind(service), service.port())) {
    service.start_background();
  }
  ~Running() { service.stop(); }

  static int bind(LabelService& s) {
    if (!s.bind("127.0.0.1", 0)) throw std::runtime_error("cannot bind");
    return 0;
  }

  ojson get(const std::string& path, int want = 200) {
    auto r = client.Get(path.c_str());
    if (!r) throw std::runtime_error("no response for " + path);
    EXPECT_EQ(r->status, want) << path << " " << r->body;
    return ojson::parse(r->body);
  }

  int post_label(const std::string& body) {
    auto r = client.Post("/api/label", body, "application/json");
    if (!r) throw std::runtime_error("no response for label");
    return r->status;
  }

  int label(const std::string& id, int l) { return post_label(ojson{{"trajectory_id", id}, {"label", l}}.dump()); }

  // Answers every question with the dataset labels until the loop is done.
  void finish(const Dataset& data) {
    for (;;) {
      const ojson q = get("/api/next");
      if (q["done"].get<bool>()) return;
      const std::string id = q["trajectory_id"].get<std::string>();
      ASSERT_EQ(label(id, *data.label_of(id)), 200);
      service.wait_idle();
    }
  }
};

}  // namespace

TEST(Service, StatusBeforeAnyLabel) {
  const Session s;
  Running r(s.setup);
  const ojson st = r.get("/api/status");
  EXPECT_EQ(st["round"], 0);
  EXPECT_TRUE(st["pending_id"].is_null());
  EXPECT_TRUE(st["num_consistent"].is_number_integer());
  EXPECT_FALSE(st["busy"].get<bool>());
}

TEST(Service, NextLabelAndDoubleLabelConflict) {
  const Session s;
  Running r(s.setup);
  const ojson q = r.get("/api/next");
  ASSERT_FALSE(q["done"].get<bool>());
  const std::string id = q["trajectory_id"].get<std::string>();
  EXPECT_TRUE(q["frames"].is_array());
  ASSERT_TRUE(q["J"].is_number());
  EXPECT_GE(q["J"].get<double>(), 0.0);
  EXPECT_LE(q["J"].get<double>(), 1.0);
  EXPECT_EQ(r.get("/api/status")["pending_id"], id);

  EXPECT_EQ(r.label(id, *s.data.label_of(id)), 200);
  EXPECT_EQ(r.label(id, *s.data.label_of(id)), 409);
  r.service.wait_idle();
  const ojson st = r.get("/api/status");
  EXPECT_EQ(st["round"], 1);
  EXPECT_TRUE(st["pending_id"].is_null());
  EXPECT_EQ(r.get("/api/transcript").size(), 2u);
}

TEST(Service, RejectsMalformedLabels) {
  const Session s;
  Running r(s.setup);
  const std::string id = r.get("/api/next")["trajectory_id"].get<std::string>();
  EXPECT_EQ(r.post_label("not json"), 400);
  EXPECT_EQ(r.post_label(R"({"trajectory_id": 3, "label": 1})"), 400);
  EXPECT_EQ(r.post_label(ojson{{"trajectory_id", id}}.dump()), 400);
  EXPECT_EQ(r.label(id, 2), 400);
  const std::string other = id == s.data.trajectories[0].id ? s.data.trajectories[1].id : s.data.trajectories[0].id;
  EXPECT_EQ(r.label(other, 1), 409);
  EXPECT_EQ(r.get("/api/status")["pending_id"], id);
}

TEST(Service, TrajectoryQueriesAndPredictions) {
  const Session s;
  Running r(s.setup);
  const std::string id = s.data.trajectories[3].id;
  const ojson slice = r.get("/api/trajectory/" + id);
  ASSERT_EQ(slice["trajectories"].size(), 1u);
  EXPECT_EQ(slice["trajectories"][0]["id"], id);
  r.get("/api/trajectory/nope", 404);

  const ojson qs = r.get("/api/queries");
  ASSERT_TRUE(qs.is_array());
  EXPECT_EQ(qs.size(), r.get("/api/status")["num_consistent"].get<std::size_t>());
  for (const auto& q : qs) {
    EXPECT_NO_THROW(parse_query(q["query"].get<std::string>()));
    EXPECT_DOUBLE_EQ(q["train_accuracy"].get<double>(), 1.0);
  }

  const ojson all = r.get("/api/predictions?query=Any");
  EXPECT_EQ(all["matched"].size(), s.data.trajectories.size());
  EXPECT_EQ(r.get("/api/predictions?query=None")["matched"].size(), 0u);
  r.get("/api/predictions", 400);
  r.get("/api/predictions?query=MinLength%5B%3F%5D", 400);
  r.get("/api/predictions?query=Nope", 400);
  r.get("/api/predictions?query=%28Any", 400);
}

TEST(Service, ReplayMatchesHeadlessRun) {
  const Session s;
  Running r(s.setup);
  r.finish(s.data);
  EXPECT_EQ(r.service.transcript(), s.headless());
  EXPECT_EQ(transcript_from_ojson(r.get("/api/transcript")), s.headless());
}

TEST(Service, ResumesFromCheckpoint) {
  const Session s;
  const auto path = std::filesystem::temp_directory_path() / "trajsynth_service_checkpoint.json";
  std::filesystem::remove(path);
  ServiceOptions opt;
  opt.checkpoint_path = path.string();
  {
    Running r(s.setup, opt);
    for (int k = 0; k < 2; ++k) {
      const std::string id = r.get("/api/next")["trajectory_id"].get<std::string>();
      ASSERT_EQ(r.label(id, *s.data.label_of(id)), 200);
      r.service.wait_idle();
    }
  }
  ASSERT_TRUE(std::filesystem::exists(path));
  Running r(s.setup, opt);
  EXPECT_EQ(r.get("/api/status")["round"], 2);
  r.finish(s.data);
  EXPECT_EQ(r.service.transcript(), s.headless());
  std::filesystem::remove(path);
}

TEST(Service, BusyPortCannotBeBound) {
  const Session s;
  Running r(s.setup);
  LabelService second(s.setup, {});
  EXPECT_FALSE(second.bind("127.0.0.1", r.service.port()));
}
