#pragma once

#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "trajsynth/predicates.hpp"
#include "trajsynth/query.hpp"
#include "trajsynth/semantics.hpp"

namespace trajsynth {

// Half-open box: theta is inside iff lo_i < theta_i <= hi_i for every i.
struct Box {
  std::vector<double> lo, hi;

  std::size_t dim() const { return lo.size(); }
  // True when some dimension has zero or negative width.
  bool empty() const;
  // Product of widths; 1 for a zero-dimensional box.
  double volume() const;
  bool contains(const std::vector<double>& theta) const;
  bool operator==(const Box&) const = default;
};

std::vector<double> midpoint(const Box& b);

struct BoundaryParam {
  enum class Tag { Point, Bottom, Top } tag = Tag::Point;
  std::vector<double> theta;  // Point only
};

struct PruningPair {
  BoundaryParam minus, plus;
  // Diagonal coordinates clamped to [0, 1]; Bottom maps to 0 and Top to 1.
  double t_minus = 0, t_plus = 1;
  // True when the minus corner lies below the plus corner.
  bool consistent = false;
};

// Bottom is the box's low corner and Top its high corner.
std::vector<double> corner_of(const BoundaryParam& bp, const Box& b);

enum class LabelConvention { Sat, SatSub };

struct Example {
  const Trajectory* z = nullptr;
  int label = 0;
};
using LabeledSet = std::vector<Example>;

// A sketch, the labeled examples, and the query actually checked against the
// labels (the sketch itself, or Any ; sketch ; Any under SatSub).
class SearchProblem {
 public:
  SearchProblem(const Query& sketch, const Registry& reg, LabeledSet examples,
                LabelConvention conv = LabelConvention::Sat, ScoreCache* cache = nullptr);

  const Query& sketch() const { return sketch_; }
  const CompiledQuery& checked() const { return checked_; }
  const LabeledSet& examples() const { return examples_; }
  std::size_t dim() const { return checked_.dim(); }
  const Box& initial() const { return initial_; }
  ScoreCache* cache() const { return cache_; }
  // True when Q_theta labels every example correctly.
  bool consistent_at(const std::vector<double>& theta) const;

 private:
  Query sketch_;
  CompiledQuery checked_;
  LabeledSet examples_;
  Box initial_;
  ScoreCache* cache_;
};

// Per-hole predicate score range, widened one representable step below lo.
Box initial_box(const Query& sketch, const Registry& reg);

// Pair from the quantitative semantics along the box diagonal. Each corner is
// then moved to the exact float boundary: the positives all hold at the plus
// point and some positive fails at every point strictly above it; some
// negative holds at the minus point and none holds strictly above it.
PruningPair compute_pruning_pair(const SearchProblem& p, const Box& b);
// Pair from bisection on the satisfaction semantics, bracket width <= eps.
PruningPair binary_search_pair(const SearchProblem& p, const Box& b, double eps);

// Point on the diagonal of b at coordinate t; t = 0 and t = 1 give the corners exactly.
std::vector<double> diagonal_point(const Box& b, double t);

struct SplitResult {
  std::optional<Box> center, lower, upper;
  std::vector<Box> incomp;  // corner boxes
  std::vector<Box> extra;   // remaining mixed boxes
  // Mixed boxes using both the low and the high band; only exist for d >= 3.
  std::vector<Box> straddle;
};
// Splits b along the two diagonal points into up to 3^d boxes and drops the empty ones.
SplitResult split_box(const Box& b, double t_minus, double t_plus);
// Same split at explicit corners a <= c.
SplitResult split_box_at(const Box& b, const std::vector<double>& a, const std::vector<double>& c);

struct SearchState {
  std::string sketch;
  std::vector<Box> b_con, b_inc;
  std::deque<Box> b_unk;
  long steps = 0;
  // Number of examples seen by the last run; a larger set on resume re-opens B_con.
  std::size_t examples = 0;

  bool operator==(const SearchState&) const = default;
};

enum class PairMethod { Quantitative, Bisection };

struct SearchOptions {
  PairMethod method = PairMethod::Quantitative;
  double eps = 1e-3;
  // Pause as soon as a consistent box is found.
  bool stop_at_consistent = true;
};

inline constexpr int kDefaultBudget = 25;

SearchState fresh_state(const SearchProblem& p);
// Runs at most `budget` pruning steps. A resumed state is continued in place;
// when the example set grew, known-consistent boxes go back to the front of
// the unknown queue first.
SearchState synthesize_parameters(const SearchProblem& p, int budget, const SearchState* resume = nullptr,
                                  const SearchOptions& opt = {});

double total_volume(const std::vector<Box>& boxes);
double total_volume(const std::deque<Box>& boxes);

std::string search_state_to_json(const SearchState& s);
SearchState search_state_from_json(const std::string& text);

}  // namespace trajsynth
