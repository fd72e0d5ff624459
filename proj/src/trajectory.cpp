#include "trajsynth/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace trajsynth {

TrajView full_view(const Trajectory& z) { return TrajView{&z, 0, z.size()}; }

TrajView subtrajectory(const Trajectory& z, std::size_t i, std::size_t j) {
  return subtrajectory(full_view(z), i, j);
}

TrajView subtrajectory(const TrajView& z, std::size_t i, std::size_t j) {
  if (i > j || j > z.size()) {
    throw std::out_of_range("subtrajectory: need 0 <= i <= j <= n, got i=" + std::to_string(i) +
                            " j=" + std::to_string(j) + " n=" + std::to_string(z.size()));
  }
  return TrajView{z.traj, z.begin + i, z.begin + j};
}

Trajectory materialize(const TrajView& v) {
  Trajectory out;
  out.id = v.traj->id;
  out.frame_rate = v.traj->frame_rate;
  out.states.assign(v.traj->states.begin() + static_cast<std::ptrdiff_t>(v.begin),
                    v.traj->states.begin() + static_cast<std::ptrdiff_t>(v.end));
  return out;
}

const Trajectory* Dataset::find(const std::string& id) const {
  for (const auto& t : trajectories)
    if (t.id == id) return &t;
  return nullptr;
}

std::optional<int> Dataset::label_of(const std::string& id) const {
  auto it = labels.find(id);
  if (it == labels.end()) return std::nullopt;
  return it->second;
}

void Dataset::validate() const {
  if (object_count < 1) throw std::invalid_argument("object_count must be >= 1");
  if (!(frame_rate > 0) || !std::isfinite(frame_rate))
    throw std::invalid_argument("frame_rate must be positive");
  std::set<std::string> ids;
  for (const auto& t : trajectories) {
    if (!ids.insert(t.id).second) throw std::invalid_argument("duplicate trajectory id: " + t.id);
    if (!(t.frame_rate > 0)) throw std::invalid_argument("trajectory " + t.id + ": bad frame_rate");
    for (const auto& s : t.states) {
      if (s.size() != object_count)
        throw std::invalid_argument("trajectory " + t.id + ": frame has " + std::to_string(s.size()) +
                                    " objects, expected " + std::to_string(object_count));
      for (const auto& o : s) {
        if (!o.present) continue;
        for (double v : {o.x, o.y, o.vx, o.vy, o.ax, o.ay})
          if (!std::isfinite(v)) throw std::invalid_argument("trajectory " + t.id + ": non-finite state");
      }
    }
  }
  for (const auto& [id, lab] : labels) {
    if (!ids.count(id)) throw std::invalid_argument("label for unknown trajectory id: " + id);
    if (lab != 0 && lab != 1) throw std::invalid_argument("label must be 0 or 1 for " + id);
  }
}

void derive_velocity(Trajectory& z, std::size_t object) {
  const std::size_t n = z.size();
  for (std::size_t k = 0; k + 1 < n; ++k) {
    auto& a = z.states[k][object];
    const auto& b = z.states[k + 1][object];
    a.vx = (b.x - a.x) * z.frame_rate;
    a.vy = (b.y - a.y) * z.frame_rate;
  }
  if (n >= 2) {
    z.states[n - 1][object].vx = z.states[n - 2][object].vx;
    z.states[n - 1][object].vy = z.states[n - 2][object].vy;
  } else if (n == 1) {
    z.states[0][object].vx = 0;
    z.states[0][object].vy = 0;
  }
}

void derive_acceleration(Trajectory& z, std::size_t object) {
  const std::size_t n = z.size();
  for (std::size_t k = 0; k + 1 < n; ++k) {
    auto& a = z.states[k][object];
    const auto& b = z.states[k + 1][object];
    a.ax = (b.vx - a.vx) * z.frame_rate;
    a.ay = (b.vy - a.vy) * z.frame_rate;
  }
  if (n >= 2) {
    z.states[n - 1][object].ax = z.states[n - 2][object].ax;
    z.states[n - 1][object].ay = z.states[n - 2][object].ay;
  } else if (n == 1) {
    z.states[0][object].ax = 0;
    z.states[0][object].ay = 0;
  }
}

std::vector<Trajectory> form_pairs(const std::vector<Track>& tracks, std::size_t min_overlap) {
  std::vector<Trajectory> out;
  for (std::size_t p = 0; p < tracks.size(); ++p) {
    for (std::size_t q = 0; q < tracks.size(); ++q) {
      if (p == q) continue;
      const Track& a = tracks[p];
      const Track& b = tracks[q];
      const std::size_t a0 = a.start_frame, a1 = a.start_frame + a.traj.size();
      const std::size_t b0 = b.start_frame, b1 = b.start_frame + b.traj.size();
      const std::size_t lo = std::max(a0, b0), hi = std::min(a1, b1);
      const std::size_t overlap = hi > lo ? hi - lo : 0;
      if (overlap < std::max<std::size_t>(min_overlap, 1)) continue;
      const std::size_t u0 = std::min(a0, b0), u1 = std::max(a1, b1);
      Trajectory z;
      z.id = a.id + "+" + b.id;
      z.frame_rate = a.traj.frame_rate;
      for (std::size_t f = u0; f < u1; ++f) {
        State s(2);
        s[0].present = s[1].present = false;
        if (f >= a0 && f < a1) s[0] = a.traj.states[f - a0].at(0);
        if (f >= b0 && f < b1) s[1] = b.traj.states[f - b0].at(0);
        z.states.push_back(std::move(s));
      }
      out.push_back(std::move(z));
    }
  }
  return out;
}

}  // namespace trajsynth
