#pragma once

// Fixtures, random generators and brute-force oracles shared by the tests.
// The oracles here recompute results from predicate scores alone and never
// call into the semantics engines.

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "trajsynth/param_search.hpp"
#include "trajsynth/predicates.hpp"
#include "trajsynth/query.hpp"
#include "trajsynth/semantics.hpp"

namespace support {

using namespace trajsynth;

// Single-object trajectory with the given per-frame x velocities.
inline Trajectory velocity_traj(const std::string& id, const std::vector<double>& vx, double frame_rate = 1.0) {
  Trajectory z;
  z.id = id;
  z.frame_rate = frame_rate;
  double x = 0;
  for (double v : vx) {
    ObjectState s;
    s.x = x;
    s.vx = v;
    z.states.push_back({s});
    x += v / frame_rate;
  }
  return z;
}

// The two trajectories of the worked VelGt example: z0 moves at 0.9 then 0.6,
// z1 at 0.5 then 0.8.
inline Trajectory golden_z0() { return velocity_traj("z0", {0.9, 0.6}); }
inline Trajectory golden_z1() { return velocity_traj("z1", {0.5, 0.8}); }

// Registry with VelGt over speeds [0, 1].
inline Registry golden_registry() {
  SceneBounds b;
  b.max_speed = 1;
  Registry reg;
  reg.add(pred_vel_gt(b));
  return reg;
}

inline Query golden_sketch() { return parse_query("VelGt[?](A) ; VelGt[?](A)"); }

// Random two-object trajectory; presence drops out with probability p_absent.
inline Trajectory random_traj(std::mt19937_64& rng, std::size_t n, double p_absent = 0.0,
                              const std::string& id = "r") {
  std::uniform_real_distribution<double> pos(-20, 20), vel(-4, 4), acc(-2, 2), coin(0, 1);
  Trajectory z;
  z.id = id;
  z.frame_rate = 2;
  double x[2] = {pos(rng), pos(rng)}, y[2] = {pos(rng), pos(rng)};
  for (std::size_t k = 0; k < n; ++k) {
    State st(2);
    for (int o = 0; o < 2; ++o) {
      ObjectState& s = st[static_cast<std::size_t>(o)];
      s.vx = vel(rng);
      s.vy = vel(rng);
      s.ax = acc(rng);
      s.ay = acc(rng);
      x[o] += s.vx / 2;
      y[o] += s.vy / 2;
      s.x = x[o];
      s.y = y[o];
      s.present = coin(rng) >= p_absent;
    }
    z.states.push_back(std::move(st));
  }
  return z;
}

// Registry whose ranges cover every random_traj.
inline Registry random_registry() {
  Dataset d;
  d.object_count = 2;
  d.frame_rate = 2;
  Trajectory corner;
  corner.id = "bounds";
  corner.frame_rate = 2;
  for (double c : {-80.0, 80.0}) {
    State st(2);
    for (auto& s : st) {
      s.x = s.y = c;
      s.vx = s.vy = 6;
      s.ax = s.ay = 3;
    }
    corner.states.push_back(st);
  }
  for (int k = 0; k < 30; ++k) corner.states.push_back(corner.states.back());
  d.trajectories.push_back(corner);
  return builtin_registry(d);
}

struct LeafSpec {
  std::string name;
  std::vector<char> vars;
};

// Parameterized leaves used by the random sketch generator.
inline std::vector<LeafSpec> random_leaves() {
  return {{"VelGt", {'A'}},           {"XPosGt", {'A'}},      {"XPosLt", {'B'}},     {"YPosGt", {'B'}},
          {"MinLength", {}},          {"MaxLength", {}},      {"DispLt", {'A'}},     {"AvgAccelGt", {'A'}},
          {"DistanceLt", {'A', 'B'}}, {"DistanceGt", {'A', 'B'}}, {"SpeedRatioGt", {'A', 'B'}}};
}

struct SketchOptions {
  int max_depth = 3;
  bool allow_or = true;
  bool allow_star = false;
  bool allow_neg = false;
  bool allow_iterate = true;
  bool allow_dashv = false;
  // Probability that a leaf is a hole rather than a fixed or unparameterized leaf.
  double p_hole = 0.7;
};

// Random query; parameterized leaves become holes with probability p_hole,
// otherwise they get a fixed threshold near typical scores.
inline Query random_query(std::mt19937_64& rng, const SketchOptions& opt, int depth = 0) {
  std::uniform_real_distribution<double> coin(0, 1);
  const auto leaves = random_leaves();
  if (depth >= opt.max_depth || coin(rng) < 0.35) {
    if (coin(rng) < 0.08) return pred("Any");
    const auto& l = leaves[std::uniform_int_distribution<std::size_t>(0, leaves.size() - 1)(rng)];
    if (coin(rng) < opt.p_hole) return pred_hole(l.name, 0, l.vars);
    return pred_fixed(l.name, std::uniform_real_distribution<double>(-3, 3)(rng), l.vars);
  }
  std::vector<int> ops = {0, 1};  // seq, and
  if (opt.allow_or) ops.push_back(2);
  if (opt.allow_star) ops.push_back(3);
  if (opt.allow_neg) ops.push_back(4);
  if (opt.allow_iterate) ops.push_back(5);
  if (opt.allow_dashv) ops.push_back(6);
  const int op = ops[std::uniform_int_distribution<std::size_t>(0, ops.size() - 1)(rng)];
  switch (op) {
    case 0: return seq(random_query(rng, opt, depth + 1), random_query(rng, opt, depth + 1));
    case 1: return conj(random_query(rng, opt, depth + 1), random_query(rng, opt, depth + 1));
    case 2: return disj(random_query(rng, opt, depth + 1), random_query(rng, opt, depth + 1));
    case 3: return star(random_query(rng, opt, depth + 1));
    case 4: return neg(random_query(rng, opt, depth + 1));
    case 5: return iterate(random_query(rng, opt, depth + 1), 2);
    default: {
      const int a = std::uniform_int_distribution<int>(0, 2)(rng);
      return dashv(random_query(rng, opt, depth + 1), a, a + std::uniform_int_distribution<int>(0, 4)(rng));
    }
  }
}

// Random sketch with 1..max_holes distinct holes, renumbered in AST order.
inline Query random_sketch(std::mt19937_64& rng, const SketchOptions& opt, int min_holes, int max_holes) {
  for (;;) {
    Query q = renumber_holes(random_query(rng, opt));
    // renumber_holes keeps shared ids shared; give every occurrence its own id.
    int next = 1;
    std::function<Query(const Query&)> number = [&](const Query& x) -> Query {
      switch (x->kind) {
        case Kind::Pred: return x->param == ParamKind::Hole ? pred_hole(x->name, next++, x->vars) : x;
        case Kind::Seq: { auto l = number(x->left); return seq(l, number(x->right)); }
        case Kind::And: { auto l = number(x->left); return conj(l, number(x->right)); }
        case Kind::Or: { auto l = number(x->left); return disj(l, number(x->right)); }
        case Kind::Star: return star(number(x->left));
        case Kind::Neg: return neg(number(x->left));
        case Kind::Iterate: return iterate(number(x->left), x->k);
        case Kind::Dashv: return dashv(number(x->left), x->a, x->b);
        default: return x;
      }
    };
    q = number(q);
    const int d = static_cast<int>(holes(q).parameter.size());
    if (d >= min_holes && d <= max_holes) return q;
  }
}

// ------------------------------------------------------------- oracles

// Satisfaction by direct recursion over every split, scoring each leaf
// window with the predicate's own scoring function. Holes under an odd number
// of negations hold the negated predicate's threshold.
class SatOracle {
 public:
  SatOracle(const Registry& reg, const Trajectory& z) : reg_(reg), z_(z) {}

  bool sat(const Query& q, const std::vector<double>& theta = {}) {
    const auto order = hole_order(q);
    std::map<int, double> val;
    for (std::size_t i = 0; i < order.size(); ++i) val[order[i]] = theta.at(i);
    return eval(q, val, false, 0, z_.size());
  }

 private:
  bool eval(const Query& q, const std::map<int, double>& val, bool odd, std::size_t i, std::size_t j) {
    switch (q->kind) {
      case Kind::Pred: {
        auto def = reg_.get(q->name);
        Binding b;
        for (char c : q->vars) b.push_back(static_cast<std::size_t>(c - 'A'));
        const double s = score(*def, b, subtrajectory(z_, i, j));
        if (q->param == ParamKind::Unparameterized) return s == kInf;
        if (q->param == ParamKind::Fixed) return s >= q->theta;
        const double th = val.at(q->hole);
        return s >= (odd ? -th : th);
      }
      case Kind::Seq:
        for (std::size_t k = i; k <= j; ++k)
          if (eval(q->left, val, odd, i, k) && eval(q->right, val, odd, k, j)) return true;
        return false;
      case Kind::And: return eval(q->left, val, odd, i, j) && eval(q->right, val, odd, i, j);
      case Kind::Or: return eval(q->left, val, odd, i, j) || eval(q->right, val, odd, i, j);
      case Kind::Neg: return !eval(q->left, val, !odd, i, j);
      case Kind::Iterate: return reps(q->left, val, odd, q->k, i, j);
      case Kind::Star:
        // Any number of pieces, empty pieces included: a split into r pieces
        // with r <= j - i + 1 covers every nonredundant factorization.
        for (std::size_t r = 0; r <= j - i + 1; ++r)
          if (reps(q->left, val, odd, static_cast<int>(r), i, j)) return true;
        return false;
      case Kind::Dashv: {
        const std::size_t len = j - i;
        if (len < static_cast<std::size_t>(q->a) || len > static_cast<std::size_t>(q->b)) return false;
        for (std::size_t k = i; k <= j; ++k)
          if (!eval(q->left, val, odd, k, z_.size())) return false;
        return true;
      }
      default: throw std::invalid_argument("oracle: predicate hole");
    }
  }

  bool reps(const Query& q, const std::map<int, double>& val, bool odd, int r, std::size_t i, std::size_t j) {
    if (r == 0) return i == j;
    for (std::size_t k = i; k <= j; ++k)
      if (reps(q, val, odd, r - 1, i, k) && eval(q, val, odd, k, j)) return true;
    return false;
  }

  const Registry& reg_;
  const Trajectory& z_;
};

inline bool contains_kind(const Query& q, Kind k) {
  if (!q) return false;
  if (q->kind == k) return true;
  return contains_kind(q->left, k) || contains_kind(q->right, k);
}

// theta = t * u + v.
inline std::vector<double> along(const DirectionFrame& f, double t) {
  std::vector<double> th(f.dim());
  for (std::size_t i = 0; i < f.dim(); ++i) th[i] = t * f.u[i] + f.v[i];
  return th;
}

}  // namespace support
