#include "trajsynth/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "trajsynth/semantics.hpp"
#include "trajsynth/tasks.hpp"

namespace trajsynth {

namespace {

using P = std::pair<double, double>;
using Rng = std::mt19937_64;

double uni(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
int uni_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

class Path {
 public:
  Path& to(P p) {
    if (!pts_.empty()) cum_.push_back(cum_.back() + std::hypot(p.first - pts_.back().first, p.second - pts_.back().second));
    else cum_.push_back(0);
    pts_.push_back(p);
    return *this;
  }
  Path& arc(P c, double r, double a0_deg, double a1_deg) {
    const int segs = 16;
    for (int k = 1; k <= segs; ++k) {
      const double a = (a0_deg + (a1_deg - a0_deg) * k / segs) * M_PI / 180.0;
      to({c.first + r * std::cos(a), c.second + r * std::sin(a)});
    }
    return *this;
  }
  double length() const { return cum_.back(); }
  P at(double s) const {
    s = std::clamp(s, 0.0, length());
    std::size_t k = static_cast<std::size_t>(std::upper_bound(cum_.begin(), cum_.end(), s) - cum_.begin());
    if (k >= pts_.size()) return pts_.back();
    if (k == 0) return pts_.front();
    const double w = cum_[k] - cum_[k - 1];
    const double t = w > 0 ? (s - cum_[k - 1]) / w : 0;
    return {pts_[k - 1].first + t * (pts_[k].first - pts_[k - 1].first),
            pts_[k - 1].second + t * (pts_[k].second - pts_[k - 1].second)};
  }
  // n positions evenly spaced between arclengths s0 and s1.
  std::vector<P> sample(std::size_t n, double s0, double s1) const {
    std::vector<P> out(n);
    for (std::size_t k = 0; k < n; ++k) out[k] = at(n == 1 ? s0 : s0 + (s1 - s0) * k / (n - 1));
    return out;
  }

 private:
  std::vector<P> pts_;
  std::vector<double> cum_;
};

// Velocity and acceleration come from the noise-free motion; jitter is positional only.
Trajectory build(double fps, const std::vector<std::vector<P>>& objects, double noise, Rng& rng) {
  Trajectory z;
  z.frame_rate = fps;
  const std::size_t n = objects.front().size();
  z.states.assign(n, State(objects.size()));
  for (std::size_t o = 0; o < objects.size(); ++o) {
    for (std::size_t k = 0; k < n; ++k) {
      auto& s = z.states[k][o];
      s.x = objects[o][k].first;
      s.y = objects[o][k].second;
      s.present = true;
    }
    derive_velocity(z, o);
    derive_acceleration(z, o);
  }
  if (noise > 0) {
    std::normal_distribution<double> jitter(0.0, noise);
    for (auto& st : z.states)
      for (auto& s : st) {
        s.x += jitter(rng);
        s.y += jitter(rng);
      }
  }
  return z;
}

std::vector<P> line(P a, P b, std::size_t n) { return Path().to(a).to(b).sample(n, 0, std::hypot(b.first - a.first, b.second - a.second)); }

// Objects' positions for one trajectory of the given scenario and intended label.
std::vector<std::vector<P>> lane_turn(bool pos, std::size_t n, Rng& rng) {
  const double x0 = -uni(rng, 0, 15);
  if (pos) {
    Path p;
    p.to({x0, 0}).to({40, 0}).arc({40, 10}, 10, -90, 0).to({50, 70});
    return {p.sample(n, 0, p.length() - uni(rng, 0, 10))};
  }
  Path p;
  switch (uni_int(rng, 0, 4)) {
    case 0: p.to({x0, 0}).to({120, 0}); break;
    case 1: p.to({50, -30 - uni(rng, 0, 10)}).to({50, 70}); break;
    case 2: p.to({115 + uni(rng, 0, 10), 8}).to({-10, 8}); break;
    case 3: p.to({x0, 0}).to({40, 0}).arc({40, -10}, 10, 90, 0).to({50, -70}); break;
    default: p.to({50, 70}).to({50, 10}).arc({40, 10}, 10, 0, -90).to({x0 - 10, 0}); break;
  }
  return {p.sample(n, 0, p.length() - uni(rng, 0, 10))};
}

// Two objects on parallel eastbound tracks; A passes B at frame kp.
std::vector<std::vector<P>> passing(std::size_t n, double fps, double va, double vb, double lateral, Rng& rng) {
  const std::size_t kp = static_cast<std::size_t>(uni_int(rng, static_cast<int>(n / 4), static_cast<int>(3 * n / 4)));
  std::vector<P> a(n), b(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = (static_cast<double>(k) - static_cast<double>(kp)) / fps;
    b[k] = {50 + vb * t, 0};
    a[k] = {50 + va * t, lateral};
  }
  return {a, b};
}

double pick(Rng& rng, std::initializer_list<double> xs) {
  return *(xs.begin() + uni_int(rng, 0, static_cast<int>(xs.size()) - 1));
}

// Every positive passes at the same speed ratio, so the positives share one
// ratio boundary and no split of the data sees a lower one.
std::vector<std::vector<P>> speed_contrast(bool pos, std::size_t n, double fps, Rng& rng) {
  const double v = uni(rng, 4, 6);
  const double near = uni(rng, 3.5, 4.5);
  if (pos) return passing(n, fps, 4 * v, v, near, rng);
  const int kind = uni_int(rng, 0, 19);
  if (kind < 9) return passing(n, fps, v * pick(rng, {3.0, 4.0, 5.0}), v, uni(rng, 18, 30), rng);
  if (kind < 18) return passing(n, fps, v * pick(rng, {1.1, 1.25, 1.4}), v, near, rng);
  return passing(n, fps, v, 4 * v, near, rng);
}

std::vector<std::vector<P>> lane_follow(bool pos, std::size_t n, double fps, Rng& rng) {
  const double v = uni(rng, 4, 6), x0 = -uni(rng, 5, 15);
  const double travel = v * static_cast<double>(n - 1) / fps;
  auto east = [&](double start, double y) { return line({start, y}, {start + travel, y}, n); };
  auto west = [&](double start, double y) { return line({start, y}, {start - travel, y}, n); };
  if (pos) {
    const double gap = uni(rng, 5, 10);
    return {east(x0, 0), east(x0 - gap, 0)};
  }
  switch (uni_int(rng, 0, 2)) {
    case 0: return {east(x0, 0), east(x0 - uni(rng, 25, 35), 0)};
    case 1: return {east(x0, 0), west(x0 + travel, 8)};
    default: {
      const double s = 40 + uni(rng, 0, 20);
      return {west(s, 8), west(s + uni(rng, 5, 10), 8)};
    }
  }
}

// Frames spent loitering: at least `lo` when the trajectory is long enough,
// never more than half of it.
std::size_t stay_len(Rng& rng, int lo, std::size_t n) {
  const int hi = static_cast<int>(n / 2);
  return static_cast<std::size_t>(uni_int(rng, std::min(lo, hi), hi));
}

// Travel in a straight line for `travel` frames, then random-walk in a box.
std::vector<P> travel_then_loiter(std::size_t n, std::size_t travel, P start, P stop, P xrange, Rng& rng) {
  std::vector<P> out = line(start, stop, travel);
  P cur = stop;
  while (out.size() < n) {
    cur.first = std::clamp(cur.first + uni(rng, -0.7, 0.7), xrange.first, xrange.second);
    cur.second += uni(rng, -0.7, 0.7);
    out.push_back(cur);
  }
  return out;
}

std::vector<std::vector<P>> maritime(bool pos, std::size_t n, Rng& rng) {
  const P start{uni(rng, 0, 10), uni(rng, 10, 30)};
  const double y = start.second + uni(rng, -5, 5);
  if (pos) {
    const auto stay = stay_len(rng, 8, n);
    const double xe = uni(rng, 52, 60);
    return {travel_then_loiter(n, n - stay, start, {xe, y}, {50, 75}, rng)};
  }
  switch (uni_int(rng, 0, 3)) {
    case 0: {
      const auto stay = stay_len(rng, 4, n);
      return {travel_then_loiter(n, n - stay, start, {uni(rng, 15, 25), y}, {0, 30}, rng)};
    }
    case 1: {
      const std::size_t half = n / 2;
      auto out = line(start, {uni(rng, 55, 65), y}, half);
      auto back = line(out.back(), {uni(rng, 5, 20), y}, n - half + 1);
      out.insert(out.end(), back.begin() + 1, back.end());
      return {out};
    }
    case 2: {
      const auto stay = stay_len(rng, 8, n);
      return {travel_then_loiter(n, n - stay, start, {uni(rng, 28, 32), y}, {27, 33}, rng)};
    }
    default: {
      // Reach the zone boundary only on the final one or two frames.
      const double step_frac = uni(rng, 0.3, 1.5);
      const double step = (40 - start.first) / (static_cast<double>(n - 1) - step_frac);
      return {line(start, {start.first + step * static_cast<double>(n - 1), y}, n)};
    }
  }
}

}  // namespace

Dataset generate_synthetic(const SyntheticSpec& spec) {
  const TaskDef& task = task_def(spec.scenario);
  if (spec.positives < 0 || spec.negatives < 0) throw std::invalid_argument("counts must be >= 0");
  if (!(spec.noise >= 0)) throw std::invalid_argument("noise must be >= 0");
  if (spec.min_length < 2 || spec.min_length > spec.max_length)
    throw std::invalid_argument("length range must satisfy 2 <= min <= max");

  Rng rng(spec.seed);
  Dataset probe;
  probe.object_count = task.object_count;
  probe.frame_rate = task.frame_rate;
  const Registry reg = task_registry(probe);
  const Query truth = task_truth(task);
  const CompiledQuery checked(task.convention == LabelConvention::SatSub ? wrap_sub(truth) : truth, reg);

  std::vector<std::pair<Trajectory, int>> made;
  auto make = [&](bool pos) {
    for (int attempt = 0; attempt < 200; ++attempt) {
      const auto n = static_cast<std::size_t>(
          uni_int(rng, static_cast<int>(spec.min_length), static_cast<int>(spec.max_length)));
      std::vector<std::vector<P>> objs;
      if (task.name == "lane-turn") objs = lane_turn(pos, n, rng);
      else if (task.name == "lane-follow") objs = lane_follow(pos, n, task.frame_rate, rng);
      else if (task.name == "speed-contrast") objs = speed_contrast(pos, n, task.frame_rate, rng);
      else objs = maritime(pos, n, rng);
      Trajectory z = build(task.frame_rate, objs, spec.noise, rng);
      if (eval_sat(checked, z) == pos) {
        made.emplace_back(std::move(z), pos ? 1 : 0);
        return;
      }
    }
    throw std::runtime_error("generator could not produce a " + std::string(pos ? "positive" : "negative") +
                             " trajectory for " + task.name + "; try less noise");
  };
  for (int i = 0; i < spec.positives; ++i) make(true);
  for (int i = 0; i < spec.negatives; ++i) make(false);
  std::shuffle(made.begin(), made.end(), rng);

  Dataset d;
  d.object_count = task.object_count;
  d.frame_rate = task.frame_rate;
  for (std::size_t i = 0; i < made.size(); ++i) {
    char id[32];
    std::snprintf(id, sizeof id, "t%04zu", i);
    made[i].first.id = id;
    d.labels[id] = made[i].second;
    d.trajectories.push_back(std::move(made[i].first));
  }
  return d;
}

}  // namespace trajsynth
