#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace trajsynth {

struct ObjectState {
  double x = 0, y = 0;
  double vx = 0, vy = 0;
  double ax = 0, ay = 0;
  bool present = true;

  bool operator==(const ObjectState&) const = default;
};

// One frame: the state of every tracked object.
using State = std::vector<ObjectState>;

struct Trajectory {
  std::string id;
  std::vector<State> states;
  double frame_rate = 1.0;

  std::size_t size() const { return states.size(); }
  std::size_t object_count() const { return states.empty() ? 0 : states.front().size(); }

  bool operator==(const Trajectory&) const = default;
};

// Non-owning window z_{begin:end} into a trajectory.
struct TrajView {
  const Trajectory* traj = nullptr;
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  bool empty() const { return begin == end; }
  const State& operator[](std::size_t k) const { return traj->states[begin + k]; }
  double frame_rate() const { return traj->frame_rate; }
};

TrajView full_view(const Trajectory& z);

// z_{i:j}; throws std::out_of_range unless 0 <= i <= j <= n.
TrajView subtrajectory(const Trajectory& z, std::size_t i, std::size_t j);
TrajView subtrajectory(const TrajView& z, std::size_t i, std::size_t j);

// Copies a view into a standalone trajectory with the same id and frame rate.
Trajectory materialize(const TrajView& v);

struct Dataset {
  std::size_t object_count = 1;
  double frame_rate = 1.0;
  std::vector<Trajectory> trajectories;
  std::map<std::string, int> labels;

  const Trajectory* find(const std::string& id) const;
  std::optional<int> label_of(const std::string& id) const;
  // Throws std::invalid_argument when an invariant is broken.
  void validate() const;

  bool operator==(const Dataset&) const = default;
};

// Fills vx/vy from positions and ax/ay from velocities by forward differences
// scaled by the frame rate. The last frame repeats the previous difference.
void derive_velocity(Trajectory& z, std::size_t object);
void derive_acceleration(Trajectory& z, std::size_t object);

// All ordered pairs of tracks whose frame spans overlap by at least
// min_overlap frames. Each output spans the union of both tracks, with
// present=false wherever a track has no state.
struct Track {
  std::string id;
  std::size_t start_frame = 0;
  Trajectory traj;  // single object
};
std::vector<Trajectory> form_pairs(const std::vector<Track>& tracks, std::size_t min_overlap);

}  // namespace trajsynth
