#pragma once

#include <condition_variable>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include "trajsynth/active_learning.hpp"

namespace httplib {
class Server;
}

namespace trajsynth {

struct ServiceOptions {
  // Session state is written here after every label; an existing file is
  // resumed on startup. Empty disables checkpointing.
  std::string checkpoint_path;
  // Served at / when nonempty.
  std::string static_dir;
};

// One labeling session behind the JSON API under /api. Initial examples are
// drawn with the dataset's own labels; every later label comes over HTTP.
// Resynthesis after a label runs on a worker thread while /api/status keeps
// answering.
class LabelService {
 public:
  LabelService(LearnerSetup setup, ServiceOptions opt);
  ~LabelService();
  LabelService(const LabelService&) = delete;
  LabelService& operator=(const LabelService&) = delete;

  // False when the address cannot be bound. Port 0 picks a free port.
  bool bind(const std::string& host, int port);
  int port() const { return port_; }
  // Blocks until stop().
  void run();
  void start_background();
  void stop();
  // Waits for a running resynthesis to finish.
  void wait_idle();

  const ActiveLearner& learner() const { return *learner_; }
  Transcript transcript() const;

 private:
  void routes();
  void save_checkpoint() const;

  LearnerSetup setup_;
  ServiceOptions opt_;
  std::unique_ptr<ActiveLearner> learner_;
  std::unique_ptr<httplib::Server> server_;
  std::thread listener_, worker_;
  int port_ = -1;

  mutable std::mutex mu_;
  std::condition_variable idle_cv_;
  bool busy_ = false;
  int busy_round_ = 0;
  std::optional<std::size_t> pending_;
  std::string last_error_;
};

}  // namespace trajsynth
