#include "trajsynth/service.hpp"

#include <filesystem>

#include "httplib.h"
#include "trajsynth/dataset_io.hpp"
#include "trajsynth/serialize.hpp"

namespace trajsynth {

namespace {

void reply(httplib::Response& res, int status, const ojson& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

ojson error_body(const std::string& msg) { return ojson{{"error", msg}}; }

ojson trajectory_slice(const Dataset& d, const Trajectory& z) {
  Dataset one;
  one.object_count = d.object_count;
  one.frame_rate = d.frame_rate;
  one.trajectories.push_back(z);
  if (auto l = d.label_of(z.id)) one.labels[z.id] = *l;
  return ojson::parse(dataset_to_json(one));
}

}  // namespace

LabelService::LabelService(LearnerSetup setup, ServiceOptions opt)
    : setup_(std::move(setup)), opt_(std::move(opt)), server_(std::make_unique<httplib::Server>()) {
  // Reuse the address after a restart but never share a port with a live server.
  server_->set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
  });
  learner_ = std::make_unique<ActiveLearner>(setup_);
  if (!opt_.checkpoint_path.empty() && std::filesystem::exists(opt_.checkpoint_path)) {
    const ojson j = ojson::parse(read_file(opt_.checkpoint_path));
    learner_->restore(j.at("learner"));
  } else {
    FixedLabelsOracle seed_labels(setup_.data->labels);
    learner_->start(seed_labels);
    save_checkpoint();
  }
  routes();
}

LabelService::~LabelService() { stop(); }

void LabelService::save_checkpoint() const {
  if (opt_.checkpoint_path.empty()) return;
  ojson j;
  j["learner"] = learner_->checkpoint();
  write_file(opt_.checkpoint_path, j.dump() + "\n");
}

Transcript LabelService::transcript() const {
  std::lock_guard<std::mutex> lock(mu_);
  return learner_->transcript();
}

void LabelService::wait_idle() {
  std::unique_lock<std::mutex> lock(mu_);
  idle_cv_.wait(lock, [&] { return !busy_; });
}

bool LabelService::bind(const std::string& host, int port) {
  if (port == 0) {
    port_ = server_->bind_to_any_port(host);
    return port_ > 0;
  }
  if (!server_->bind_to_port(host, port)) return false;
  port_ = port;
  return true;
}

void LabelService::run() { server_->listen_after_bind(); }

void LabelService::start_background() {
  listener_ = std::thread([this] { run(); });
  server_->wait_until_ready();
}

void LabelService::stop() {
  if (server_) server_->stop();
  if (listener_.joinable()) listener_.join();
  if (worker_.joinable()) worker_.join();
}

void LabelService::routes() {
  auto& s = *server_;
  const Dataset& data = *setup_.data;

  s.Get("/api/status", [this](const httplib::Request&, httplib::Response& res) {
    std::lock_guard<std::mutex> lock(mu_);
    ojson j;
    if (busy_) {
      j["round"] = busy_round_;
      j["pending_id"] = nullptr;
      j["num_consistent"] = nullptr;
      j["median_f1"] = nullptr;
    } else {
      const auto& last = learner_->transcript().back();
      j["round"] = last.round;
      j["pending_id"] = pending_ ? ojson(setup_.data->trajectories[*pending_].id) : ojson(nullptr);
      j["num_consistent"] = last.num_consistent;
      j["median_f1"] = last.median_f1 ? ojson(*last.median_f1) : ojson(nullptr);
    }
    j["busy"] = busy_;
    if (!last_error_.empty()) j["error"] = last_error_;
    reply(res, 200, j);
  });

  s.Get("/api/next", [this, &data](const httplib::Request&, httplib::Response& res) {
    std::lock_guard<std::mutex> lock(mu_);
    if (busy_) return reply(res, 503, error_body("resynthesis in progress"));
    auto q = learner_->next();
    if (!q) {
      pending_.reset();
      return reply(res, 200, ojson{{"trajectory_id", nullptr}, {"frames", nullptr}, {"J", nullptr}, {"done", true}});
    }
    pending_ = q->index;
    const Trajectory& z = data.trajectories[q->index];
    ojson j;
    j["trajectory_id"] = z.id;
    j["frames"] = trajectory_slice(data, z)["trajectories"][0]["frames"];
    j["J"] = q->j ? ojson(*q->j) : ojson(nullptr);
    j["done"] = false;
    reply(res, 200, j);
  });

  s.Post("/api/label", [this, &data](const httplib::Request& req, httplib::Response& res) {
    ojson body;
    try {
      body = ojson::parse(req.body);
    } catch (const nlohmann::json::exception&) {
      return reply(res, 400, error_body("body is not JSON"));
    }
    if (!body.is_object() || !body.contains("trajectory_id") || !body["trajectory_id"].is_string() ||
        !body.contains("label") || !body["label"].is_number_integer())
      return reply(res, 400, error_body("expected {trajectory_id: string, label: 0|1}"));
    const int label = body["label"].get<int>();
    if (label != 0 && label != 1) return reply(res, 400, error_body("label must be 0 or 1"));
    std::lock_guard<std::mutex> lock(mu_);
    if (busy_ || !pending_ || data.trajectories[*pending_].id != body["trajectory_id"].get<std::string>())
      return reply(res, 409, error_body("no pending question for this trajectory"));
    const std::size_t index = *pending_;
    pending_.reset();
    busy_ = true;
    busy_round_ = learner_->round() + 1;
    last_error_.clear();
    if (worker_.joinable()) worker_.join();
    worker_ = std::thread([this, index, label] {
      std::string err;
      try {
        learner_->answer(index, label);
        save_checkpoint();
      } catch (const std::exception& e) {
        err = e.what();
      }
      std::lock_guard<std::mutex> l(mu_);
      busy_ = false;
      last_error_ = err;
      idle_cv_.notify_all();
    });
    reply(res, 200, ojson{{"accepted", true}});
  });

  s.Get(R"(/api/trajectory/([^/]+))", [&data](const httplib::Request& req, httplib::Response& res) {
    const Trajectory* z = data.find(req.matches[1]);
    if (!z) return reply(res, 404, error_body("unknown trajectory"));
    reply(res, 200, trajectory_slice(data, *z));
  });

  s.Get("/api/queries", [this](const httplib::Request&, httplib::Response& res) {
    std::lock_guard<std::mutex> lock(mu_);
    if (busy_) return reply(res, 503, error_body("resynthesis in progress"));
    const auto c = learner_->consistent();
    const Classifier cls(c, *setup_.registry, setup_.synth.convention);
    const LabeledSet w = learner_->labeled_set();
    ojson a = ojson::array();
    for (std::size_t q = 0; q < c.size(); ++q) {
      std::size_t right = 0;
      for (const auto& e : w) right += cls.predict(q, *e.z, &learner_->cache()) == (e.label == 1) ? 1 : 0;
      a.push_back(ojson{{"query", print_query(c[q])},
                        {"train_accuracy", w.empty() ? 1.0 : static_cast<double>(right) / static_cast<double>(w.size())}});
    }
    reply(res, 200, a);
  });

  s.Get("/api/predictions", [this, &data](const httplib::Request& req, httplib::Response& res) {
    if (!req.has_param("query")) return reply(res, 400, error_body("missing query parameter"));
    Query q;
    try {
      q = parse_query(req.get_param_value("query"));
      if (!is_complete(q)) throw QueryError("query has holes");
      const Classifier cls({q}, *setup_.registry, setup_.synth.convention);
      ojson ids = ojson::array();
      for (const auto& z : data.trajectories)
        if (cls.predict(0, z, &learner_->cache())) ids.push_back(z.id);
      reply(res, 200, ojson{{"query", print_query(q)}, {"matched", ids}});
    } catch (const std::invalid_argument& e) {
      reply(res, 400, error_body(e.what()));
    }
  });

  s.Get("/api/transcript", [this](const httplib::Request&, httplib::Response& res) {
    std::lock_guard<std::mutex> lock(mu_);
    if (busy_) return reply(res, 503, error_body("resynthesis in progress"));
    reply(res, 200, transcript_to_ojson(learner_->transcript()));
  });

  if (!opt_.static_dir.empty()) s.set_mount_point("/", opt_.static_dir);
}

}  // namespace trajsynth
