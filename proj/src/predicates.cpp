#include "trajsynth/predicates.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"

namespace trajsynth {

namespace {

using FrameFn = std::function<double(const State&, const Binding&)>;

bool bound_present(const State& s, const Binding& b) {
  for (auto o : b)
    if (o >= s.size() || !s[o].present) return false;
  return true;
}

bool window_present(const TrajView& z, const Binding& b) {
  for (std::size_t k = 0; k < z.size(); ++k)
    if (!bound_present(z[k], b)) return false;
  return true;
}

// Score = min over frames of a per-frame value.
PredicateDef min_over_frames(std::string name, int arity, double lo, double hi, FrameFn f) {
  PredicateDef d;
  d.name = std::move(name);
  d.arity = arity;
  d.parameterized = true;
  d.lo = lo;
  d.hi = hi;
  d.score = [f](const TrajView& z, const Binding& b) {
    double m = kInf;
    for (std::size_t k = 0; k < z.size(); ++k) m = std::min(m, f(z[k], b));
    return m;
  };
  d.table = [f, empty = d.empty_value](const Trajectory& z, const Binding& b) {
    const std::size_t n = z.size();
    std::vector<double> per(n);
    for (std::size_t k = 0; k < n; ++k) per[k] = f(z.states[k], b);
    ScoreTable t(n);
    for (std::size_t i = 0; i <= n; ++i) {
      t(i, i) = empty;
      double m = kInf;
      for (std::size_t j = i + 1; j <= n; ++j) {
        m = std::min(m, per[j - 1]);
        t(i, j) = m;
      }
    }
    return t;
  };
  return d;
}

// Score depends only on the window length.
PredicateDef length_based(std::string name, bool parameterized, double lo, double hi,
                          std::function<double(double seconds)> f) {
  PredicateDef d;
  d.name = std::move(name);
  d.arity = 0;
  d.parameterized = parameterized;
  d.lo = lo;
  d.hi = hi;
  d.score = [f](const TrajView& z, const Binding&) {
    return f(static_cast<double>(z.size()) / z.frame_rate());
  };
  d.table = [f, empty = d.empty_value](const Trajectory& z, const Binding&) {
    const std::size_t n = z.size();
    ScoreTable t(n);
    for (std::size_t i = 0; i <= n; ++i) {
      t(i, i) = empty;
      for (std::size_t j = i + 1; j <= n; ++j) t(i, j) = f(static_cast<double>(j - i) / z.frame_rate);
    }
    return t;
  };
  return d;
}

std::pair<double, double> proper(double lo, double hi) {
  if (!(hi > lo)) hi = lo + 1.0;
  return {lo, hi};
}

double diag(const SceneBounds& b) { return std::hypot(b.xmax - b.xmin, b.ymax - b.ymin); }

double seg_distance(double px, double py, double ax, double ay, double bx, double by, double* dirx,
                    double* diry) {
  const double dx = bx - ax, dy = by - ay;
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0 ? ((px - ax) * dx + (py - ay) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  *dirx = dx;
  *diry = dy;
  return std::hypot(px - (ax + t * dx), py - (ay + t * dy));
}

}  // namespace

double speed_of(const ObjectState& s) { return std::hypot(s.vx, s.vy); }

double signed_accel(const ObjectState& s) {
  const double mag = std::hypot(s.ax, s.ay);
  return (s.ax * s.vx + s.ay * s.vy) < 0 ? -mag : mag;
}

std::string negated_name(const std::string& name) {
  const std::string suf = kNegSuffix;
  if (name.size() > suf.size() && name.compare(name.size() - suf.size(), suf.size(), suf) == 0)
    return name.substr(0, name.size() - suf.size());
  return name + suf;
}

PredicateDef negated(const PredicateDef& def) {
  PredicateDef d = def;
  d.name = negated_name(def.name);
  d.lo = -def.hi;
  d.hi = -def.lo;
  d.empty_value = -def.empty_value;
  auto f = def.score;
  d.score = [f](const TrajView& z, const Binding& b) { return -f(z, b); };
  if (def.table) {
    auto t = def.table;
    d.table = [t](const Trajectory& z, const Binding& b) {
      ScoreTable out = t(z, b);
      for (auto& x : out.v) x = -x;
      return out;
    };
  }
  return d;
}

double score(const PredicateDef& def, const Binding& binding, const TrajView& z) {
  if (static_cast<int>(binding.size()) != def.arity)
    throw ArityError(def.name + ": expects " + std::to_string(def.arity) + " objects, got " +
                     std::to_string(binding.size()));
  if (z.empty()) return def.empty_value;
  double v = def.score(z, binding);
  if (std::isnan(v)) throw NanScoreError(def.name + ": NaN score");
  return v;
}

ScoreTable score_table(const PredicateDef& def, const Binding& binding, const Trajectory& z) {
  if (static_cast<int>(binding.size()) != def.arity)
    throw ArityError(def.name + ": expects " + std::to_string(def.arity) + " objects, got " +
                     std::to_string(binding.size()));
  ScoreTable t;
  if (def.table) {
    t = def.table(z, binding);
  } else {
    const std::size_t n = z.size();
    t = ScoreTable(n);
    for (std::size_t i = 0; i <= n; ++i)
      for (std::size_t j = i; j <= n; ++j) t(i, j) = score(def, binding, subtrajectory(z, i, j));
  }
  for (double x : t.v)
    if (std::isnan(x)) throw NanScoreError(def.name + ": NaN score");
  return t;
}

bool sat(const PredicateDef& def, const Binding& binding, std::optional<double> theta, const TrajView& z) {
  const double s = score(def, binding, z);
  if (def.parameterized) {
    if (!theta) throw std::invalid_argument(def.name + ": parameter required");
    return s >= *theta;
  }
  if (theta) throw std::invalid_argument(def.name + ": takes no parameter");
  return s == kInf;
}

Registry::Registry() {
  add(pred_any());
  add(pred_none());
}

void Registry::add(PredicateDef def) {
  if (def.name.empty()) throw std::invalid_argument("predicate needs a name");
  if (!(def.lo < def.hi)) throw std::invalid_argument(def.name + ": score range needs lo < hi");
  if (!defs_.count(def.name)) order_.push_back(def.name);
  auto neg = std::make_shared<const PredicateDef>(negated(def));
  defs_[neg->name] = neg;
  const std::string name = def.name;
  defs_[name] = std::make_shared<const PredicateDef>(std::move(def));
}

PredicatePtr Registry::get(const std::string& name) const {
  std::string base = name;
  int flips = 0;
  const std::string suf = kNegSuffix;
  while (base.size() > suf.size() && base.compare(base.size() - suf.size(), suf.size(), suf) == 0) {
    base.resize(base.size() - suf.size());
    ++flips;
  }
  auto it = defs_.find(flips % 2 ? base + suf : base);
  if (it == defs_.end()) throw UnknownPredicate("unknown predicate: " + name);
  return it->second;
}

bool Registry::contains(const std::string& name) const {
  try {
    get(name);
    return true;
  } catch (const UnknownPredicate&) {
    return false;
  }
}

PredicateDef pred_any() {
  PredicateDef d;
  d.name = "Any";
  d.empty_value = kInf;
  d.score = [](const TrajView&, const Binding&) { return kInf; };
  d.table = [](const Trajectory& z, const Binding&) { return ScoreTable(z.size(), kInf); };
  return d;
}

PredicateDef pred_none() {
  PredicateDef d;
  d.name = "None";
  d.score = [](const TrajView&, const Binding&) { return -kInf; };
  d.table = [](const Trajectory& z, const Binding&) { return ScoreTable(z.size(), -kInf); };
  return d;
}

PredicateDef pred_min_length(const SceneBounds& b) {
  auto [lo, hi] = proper(0, b.max_duration);
  return length_based("MinLength", true, lo, hi, [](double s) { return s; });
}

PredicateDef pred_max_length(const SceneBounds& b) {
  auto [lo, hi] = proper(-b.max_duration, 0);
  return length_based("MaxLength", true, lo, hi, [](double s) { return -s; });
}

PredicateDef pred_duration_not_short() {
  return length_based("DurationNotShort", false, 0, 1,
                      [](double s) { return s >= kShortDurationSeconds ? kInf : -kInf; });
}

PredicateDef pred_duration_short() {
  return length_based("DurationShort", false, 0, 1,
                      [](double s) { return s < kShortDurationSeconds ? kInf : -kInf; });
}

PredicateDef pred_xpos_gt(const SceneBounds& b) {
  auto [lo, hi] = proper(b.xmin, b.xmax);
  return min_over_frames("XPosGt", 1, lo, hi, [](const State& s, const Binding& bd) {
    return bound_present(s, bd) ? s[bd[0]].x : -kInf;
  });
}

PredicateDef pred_xpos_lt(const SceneBounds& b) {
  auto [lo, hi] = proper(-b.xmax, -b.xmin);
  return min_over_frames("XPosLt", 1, lo, hi, [](const State& s, const Binding& bd) {
    return bound_present(s, bd) ? -s[bd[0]].x : -kInf;
  });
}

PredicateDef pred_ypos_gt(const SceneBounds& b) {
  auto [lo, hi] = proper(b.ymin, b.ymax);
  return min_over_frames("YPosGt", 1, lo, hi, [](const State& s, const Binding& bd) {
    return bound_present(s, bd) ? s[bd[0]].y : -kInf;
  });
}

PredicateDef pred_ypos_lt(const SceneBounds& b) {
  auto [lo, hi] = proper(-b.ymax, -b.ymin);
  return min_over_frames("YPosLt", 1, lo, hi, [](const State& s, const Binding& bd) {
    return bound_present(s, bd) ? -s[bd[0]].y : -kInf;
  });
}

PredicateDef pred_disp_lt(const SceneBounds& b) {
  PredicateDef d;
  d.name = "DispLt";
  d.arity = 1;
  d.parameterized = true;
  std::tie(d.lo, d.hi) = proper(-diag(b), 0);
  auto disp = [](const ObjectState& p, const ObjectState& q) { return -std::hypot(p.x - q.x, p.y - q.y); };
  d.score = [disp](const TrajView& z, const Binding& bd) {
    if (!window_present(z, bd)) return -kInf;
    return disp(z[0][bd[0]], z[z.size() - 1][bd[0]]);
  };
  d.table = [disp, empty = d.empty_value](const Trajectory& z, const Binding& bd) {
    const std::size_t n = z.size();
    ScoreTable t(n);
    for (std::size_t i = 0; i <= n; ++i) {
      t(i, i) = empty;
      bool ok = true;
      for (std::size_t j = i + 1; j <= n; ++j) {
        ok = ok && bound_present(z.states[j - 1], bd);
        t(i, j) = ok ? disp(z.states[i][bd[0]], z.states[j - 1][bd[0]]) : -kInf;
      }
    }
    return t;
  };
  return d;
}

PredicateDef pred_avg_accel_gt(const SceneBounds& b) {
  PredicateDef d;
  d.name = "AvgAccelGt";
  d.arity = 1;
  d.parameterized = true;
  std::tie(d.lo, d.hi) = proper(-b.max_accel, b.max_accel);
  d.score = [](const TrajView& z, const Binding& bd) {
    if (!window_present(z, bd)) return -kInf;
    double sum = 0;
    for (std::size_t k = 0; k < z.size(); ++k) sum += signed_accel(z[k][bd[0]]);
    return sum / static_cast<double>(z.size());
  };
  d.table = [empty = d.empty_value](const Trajectory& z, const Binding& bd) {
    const std::size_t n = z.size();
    ScoreTable t(n);
    for (std::size_t i = 0; i <= n; ++i) {
      t(i, i) = empty;
      bool ok = true;
      double sum = 0;
      for (std::size_t j = i + 1; j <= n; ++j) {
        ok = ok && bound_present(z.states[j - 1], bd);
        if (ok) sum += signed_accel(z.states[j - 1][bd[0]]);
        t(i, j) = ok ? sum / static_cast<double>(j - i) : -kInf;
      }
    }
    return t;
  };
  return d;
}

PredicateDef pred_distance_lt(const SceneBounds& b) {
  auto [lo, hi] = proper(-diag(b), 0);
  auto d = min_over_frames("DistanceLt", 2, lo, hi, [](const State& s, const Binding& bd) {
    if (!bound_present(s, bd)) return -kInf;
    return -std::hypot(s[bd[0]].x - s[bd[1]].x, s[bd[0]].y - s[bd[1]].y);
  });
  d.symmetric = true;
  return d;
}

PredicateDef pred_distance_gt(const SceneBounds& b) {
  auto [lo, hi] = proper(0, diag(b));
  auto d = min_over_frames("DistanceGt", 2, lo, hi, [](const State& s, const Binding& bd) {
    if (!bound_present(s, bd)) return -kInf;
    return std::hypot(s[bd[0]].x - s[bd[1]].x, s[bd[0]].y - s[bd[1]].y);
  });
  d.symmetric = true;
  return d;
}

PredicateDef pred_speed_ratio_gt() {
  return min_over_frames("SpeedRatioGt", 2, 0, kSpeedRatioMax, [](const State& s, const Binding& bd) {
    if (!bound_present(s, bd)) return -kInf;
    const double r = speed_of(s[bd[0]]) / std::max(speed_of(s[bd[1]]), kSpeedFloor);
    return std::clamp(r, 0.0, kSpeedRatioMax);
  });
}

PredicateDef pred_vel_gt(const SceneBounds& b) {
  PredicateDef d;
  d.name = "VelGt";
  d.arity = 1;
  d.parameterized = true;
  std::tie(d.lo, d.hi) = proper(0, b.max_speed);
  d.score = [](const TrajView& z, const Binding& bd) {
    if (z.size() != 1 || !bound_present(z[0], bd)) return -kInf;
    return speed_of(z[0][bd[0]]);
  };
  d.table = [empty = d.empty_value](const Trajectory& z, const Binding& bd) {
    const std::size_t n = z.size();
    ScoreTable t(n);
    for (std::size_t i = 0; i <= n; ++i) t(i, i) = empty;
    for (std::size_t i = 0; i < n; ++i)
      t(i, i + 1) = bound_present(z.states[i], bd) ? speed_of(z.states[i][bd[0]]) : -kInf;
    return t;
  };
  return d;
}

PredicateDef pred_in_region(const Region& r) {
  const double cos_max = std::cos(r.max_angle_deg * M_PI / 180.0);
  auto d = min_over_frames(
      "InRegion_" + std::to_string(r.id), 1, 0, 1, [r, cos_max](const State& s, const Binding& bd) {
        if (!bound_present(s, bd)) return -kInf;
        const ObjectState& o = s[bd[0]];
        double best = kInf, dirx = 0, diry = 0;
        for (std::size_t k = 0; k + 1 < r.polyline.size(); ++k) {
          double dx, dy;
          double dist = seg_distance(o.x, o.y, r.polyline[k].first, r.polyline[k].second,
                                     r.polyline[k + 1].first, r.polyline[k + 1].second, &dx, &dy);
          if (dist < best) {
            best = dist;
            dirx = dx;
            diry = dy;
          }
        }
        if (r.polyline.size() == 1) best = std::hypot(o.x - r.polyline[0].first, o.y - r.polyline[0].second);
        if (!(best <= r.max_dist)) return -kInf;
        const double sp = speed_of(o), dl = std::hypot(dirx, diry);
        // Heading is undefined for a stationary object or a point region.
        if (sp < 1e-9 || dl == 0) return kInf;
        const double c = (o.vx * dirx + o.vy * diry) / (sp * dl);
        return c >= cos_max ? kInf : -kInf;
      });
  d.parameterized = false;
  return d;
}

RegionConfig parse_region_config(const std::string& json_text) {
  RegionConfig cfg;
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("region config: ") + e.what());
  }
  if (!root.is_object() || !root.contains("regions") || !root["regions"].is_array())
    throw std::invalid_argument("region config: missing regions array");
  for (const auto& jr : root["regions"]) {
    Region r;
    try {
      r.id = jr.at("id").get<int>();
      for (const auto& p : jr.at("polyline")) r.polyline.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
      r.max_dist = jr.at("max_dist").get<double>();
      r.max_angle_deg = jr.at("max_angle_deg").get<double>();
    } catch (const nlohmann::json::exception& e) {
      throw std::invalid_argument(std::string("region config: ") + e.what());
    }
    if (r.polyline.empty()) throw std::invalid_argument("region config: empty polyline");
    cfg.regions.push_back(std::move(r));
  }
  return cfg;
}

std::string region_config_to_json(const RegionConfig& cfg) {
  nlohmann::ordered_json root;
  root["regions"] = nlohmann::ordered_json::array();
  for (const auto& r : cfg.regions) {
    nlohmann::ordered_json jr;
    jr["id"] = r.id;
    jr["polyline"] = nlohmann::ordered_json::array();
    for (auto [x, y] : r.polyline) jr["polyline"].push_back({x, y});
    jr["max_dist"] = r.max_dist;
    jr["max_angle_deg"] = r.max_angle_deg;
    root["regions"].push_back(std::move(jr));
  }
  return root.dump(2) + "\n";
}

SceneBounds scene_bounds(const Dataset& d) {
  SceneBounds b;
  bool any = false;
  b.max_speed = b.max_accel = b.max_duration = 0;
  for (const auto& z : d.trajectories) {
    b.max_duration = std::max(b.max_duration, static_cast<double>(z.size()) / z.frame_rate);
    for (const auto& s : z.states)
      for (const auto& o : s) {
        if (!o.present) continue;
        if (!any) {
          b.xmin = b.xmax = o.x;
          b.ymin = b.ymax = o.y;
          any = true;
        }
        b.xmin = std::min(b.xmin, o.x);
        b.xmax = std::max(b.xmax, o.x);
        b.ymin = std::min(b.ymin, o.y);
        b.ymax = std::max(b.ymax, o.y);
        b.max_speed = std::max(b.max_speed, speed_of(o));
        b.max_accel = std::max(b.max_accel, std::hypot(o.ax, o.ay));
      }
  }
  if (b.max_speed <= 0) b.max_speed = 1;
  if (b.max_accel <= 0) b.max_accel = 1;
  if (b.max_duration <= 0) b.max_duration = 1;
  return b;
}

Registry builtin_registry(const Dataset& d, const RegionConfig* regions) {
  const SceneBounds b = scene_bounds(d);
  Registry reg;
  reg.add(pred_min_length(b));
  reg.add(pred_max_length(b));
  reg.add(pred_duration_not_short());
  reg.add(pred_duration_short());
  reg.add(pred_xpos_gt(b));
  reg.add(pred_xpos_lt(b));
  reg.add(pred_ypos_gt(b));
  reg.add(pred_ypos_lt(b));
  reg.add(pred_disp_lt(b));
  reg.add(pred_avg_accel_gt(b));
  reg.add(pred_vel_gt(b));
  if (d.object_count >= 2) {
    reg.add(pred_distance_lt(b));
    reg.add(pred_distance_gt(b));
    reg.add(pred_speed_ratio_gt());
  }
  if (regions)
    for (const auto& r : regions->regions) reg.add(pred_in_region(r));
  return reg;
}

}  // namespace trajsynth
