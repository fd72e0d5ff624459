#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "trajsynth/trajectory.hpp"

namespace trajsynth {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Object indices for the predicate's variables, in variable order (A, B, ...).
using Binding = std::vector<std::size_t>;

// Scores for every window of a trajectory: entry (i, j) with i <= j holds the
// score of z_{i:j}; entries below the diagonal are unused.
struct ScoreTable {
  std::size_t n = 0;
  std::vector<double> v;

  ScoreTable() = default;
  explicit ScoreTable(std::size_t len, double fill = -kInf) : n(len), v((len + 1) * (len + 1), fill) {}
  double operator()(std::size_t i, std::size_t j) const { return v[i * (n + 1) + j]; }
  double& operator()(std::size_t i, std::size_t j) { return v[i * (n + 1) + j]; }
};

struct PredicateDef {
  std::string name;
  int arity = 0;
  bool parameterized = false;
  // Arity-2 predicates whose score does not depend on variable order.
  bool symmetric = false;
  double lo = 0, hi = 1;
  double empty_value = -kInf;
  // Score of a nonempty window. Must be pure.
  std::function<double(const TrajView&, const Binding&)> score;
  // Optional fast path producing the full window table. Must agree bit-for-bit
  // with `score` on every window.
  std::function<ScoreTable(const Trajectory&, const Binding&)> table;
};

using PredicatePtr = std::shared_ptr<const PredicateDef>;

struct ArityError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct NanScoreError : std::domain_error {
  using std::domain_error::domain_error;
};
struct UnknownPredicate : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

inline constexpr const char* kNegSuffix = "_neg";

// Negated scoring function: score and empty value flip sign, the range
// becomes [-hi, -lo], and the name gains a "_neg" suffix (or loses one).
PredicateDef negated(const PredicateDef& def);
std::string negated_name(const std::string& name);

// Score of z under def. Returns empty_value on the empty window.
double score(const PredicateDef& def, const Binding& binding, const TrajView& z);
// Full window table via the fast path when present, else by direct scoring.
ScoreTable score_table(const PredicateDef& def, const Binding& binding, const Trajectory& z);
// Parameterized: score >= theta. Unparameterized: score == +inf.
bool sat(const PredicateDef& def, const Binding& binding, std::optional<double> theta, const TrajView& z);

class Registry {
 public:
  Registry();  // contains Any and None
  // Registers def and its negation. Replaces an existing entry of the same name.
  void add(PredicateDef def);
  // Resolves "_neg" suffixes. Throws UnknownPredicate.
  PredicatePtr get(const std::string& name) const;
  bool contains(const std::string& name) const;
  // Base (non-negated) names in registration order.
  const std::vector<std::string>& names() const { return order_; }

 private:
  std::map<std::string, PredicatePtr> defs_;
  std::vector<std::string> order_;
};

struct Region {
  int id = 0;
  std::vector<std::pair<double, double>> polyline;
  double max_dist = 1.0;
  double max_angle_deg = 30.0;
};

struct RegionConfig {
  std::vector<Region> regions;
};

RegionConfig parse_region_config(const std::string& json_text);
std::string region_config_to_json(const RegionConfig& cfg);

// Numeric bounds used for declared score ranges.
struct SceneBounds {
  double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  double max_speed = 1, max_accel = 1;
  double max_duration = 1;
};
SceneBounds scene_bounds(const Dataset& d);

// Individual builtins.
PredicateDef pred_any();
PredicateDef pred_none();
PredicateDef pred_min_length(const SceneBounds& b);
PredicateDef pred_max_length(const SceneBounds& b);
PredicateDef pred_duration_not_short();
PredicateDef pred_duration_short();
PredicateDef pred_xpos_gt(const SceneBounds& b);
PredicateDef pred_xpos_lt(const SceneBounds& b);
PredicateDef pred_ypos_gt(const SceneBounds& b);
PredicateDef pred_ypos_lt(const SceneBounds& b);
PredicateDef pred_disp_lt(const SceneBounds& b);
PredicateDef pred_avg_accel_gt(const SceneBounds& b);
PredicateDef pred_distance_lt(const SceneBounds& b);
PredicateDef pred_distance_gt(const SceneBounds& b);
PredicateDef pred_speed_ratio_gt();
PredicateDef pred_vel_gt(const SceneBounds& b);
PredicateDef pred_in_region(const Region& r);

// Registry with every builtin, ranges taken from the dataset, and one
// InRegion_K per configured region.
Registry builtin_registry(const Dataset& d, const RegionConfig* regions = nullptr);

// Per-frame helpers shared by scoring code and tests.
double speed_of(const ObjectState& s);
double signed_accel(const ObjectState& s);

inline constexpr double kSpeedFloor = 1e-6;
inline constexpr double kSpeedRatioMax = 10.0;
inline constexpr double kShortDurationSeconds = 5.0;

}  // namespace trajsynth
