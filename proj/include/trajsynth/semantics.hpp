#pragma once

#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "trajsynth/predicates.hpp"
#include "trajsynth/query.hpp"
#include "trajsynth/trajectory.hpp"

namespace trajsynth {

// Offset v and strictly positive scale u, one entry per parameter hole.
struct DirectionFrame {
  std::vector<double> v, u;
  std::size_t dim() const { return v.size(); }
};

// (n+1) x (n+1) matrix over the extended reals. Entry (i, j) describes z_{i:j}.
struct QuantMatrix {
  std::size_t n = 0;
  std::vector<double> a;

  QuantMatrix() = default;
  explicit QuantMatrix(std::size_t len, double fill = -kInf) : n(len), a((len + 1) * (len + 1), fill) {}
  double operator()(std::size_t i, std::size_t j) const { return a[i * (n + 1) + j]; }
  double& operator()(std::size_t i, std::size_t j) { return a[i * (n + 1) + j]; }
  bool upper_triangular() const;
};

// Memoizes window tables per (trajectory, predicate, binding). Safe for
// concurrent use. Keys hold trajectory addresses, so the trajectories must
// outlive the cache.
class ScoreCache {
 public:
  std::shared_ptr<const ScoreTable> get(const PredicateDef& def, const Binding& b, const Trajectory& z);
  void clear();
  std::size_t size() const;

 private:
  mutable std::mutex mu_;
  std::unordered_map<std::string, std::shared_ptr<const ScoreTable>> tables_;
};

// A query resolved against a registry: predicate lookups, bindings and the
// coordinate of every parameter hole are fixed once.
class CompiledQuery {
 public:
  CompiledQuery(const Query& q, const Registry& reg);

  std::size_t dim() const { return dim_; }
  const Query& query() const { return query_; }

  struct CNode {
    Kind kind = Kind::Pred;
    PredicatePtr def[2];  // [0] as written, [1] negated
    Binding binding;
    ParamKind param = ParamKind::Unparameterized;
    double theta = 0;
    int coord = -1;
    int left = -1, right = -1;
    int k = 0, a = 0, b = 0;
  };
  const std::vector<CNode>& nodes() const { return nodes_; }
  int root() const { return root_; }

 private:
  int build(const Query& q, const Registry& reg, const std::vector<int>& order);

  Query query_;
  std::vector<CNode> nodes_;
  int root_ = -1;
  std::size_t dim_ = 0;
};

struct SemanticsError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Satisfaction of the sketch with every parameter hole set from theta, in
// hole order. Same result as eval_sat on substitute(sketch, theta).
bool eval_sat_at(const CompiledQuery& sketch, const std::vector<double>& theta, const Trajectory& z,
                 ScoreCache* cache = nullptr);

// Boolean satisfaction of a complete query.
bool eval_sat(const CompiledQuery& q, const Trajectory& z, ScoreCache* cache = nullptr);
bool eval_sat(const Query& q, const Registry& reg, const Trajectory& z, ScoreCache* cache = nullptr);
// Satisfaction of Any ; q ; Any.
bool eval_sat_sub(const Query& q, const Registry& reg, const Trajectory& z, ScoreCache* cache = nullptr);
Query wrap_sub(const Query& q);

// Reference quantitative semantics: direct recursion over splits with every
// leaf scored on its window.
double eval_quant(const CompiledQuery& q, const DirectionFrame& f, const Trajectory& z);
double eval_quant(const Query& q, const Registry& reg, const DirectionFrame& f, const Trajectory& z);
// Same recursion evaluated on the window z_{i:j} of a longer trajectory.
// Differs from eval_quant on the materialized window only under the window
// operator, whose inner query always reads suffixes of the whole trajectory.
double eval_quant_window(const CompiledQuery& q, const DirectionFrame& f, const Trajectory& z, std::size_t i,
                         std::size_t j);

// Matrix semantics over the max-min semiring.
QuantMatrix eval_matrix(const CompiledQuery& q, const DirectionFrame& f, const Trajectory& z,
                        ScoreCache* cache = nullptr);
QuantMatrix eval_matrix(const Query& q, const Registry& reg, const DirectionFrame& f, const Trajectory& z,
                        ScoreCache* cache = nullptr);

// Entry (0, n) of the matrix semantics via left-to-right row-vector
// propagation; operators without a vector form fall back to full matrices.
double eval_quant_fast(const CompiledQuery& q, const DirectionFrame& f, const Trajectory& z,
                       ScoreCache* cache = nullptr);
double eval_quant_fast(const Query& q, const Registry& reg, const DirectionFrame& f, const Trajectory& z,
                       ScoreCache* cache = nullptr);

// Max-min product helpers, exposed for tests.
QuantMatrix maxmin_product(const QuantMatrix& x, const QuantMatrix& y);
std::vector<double> maxmin_vecmat(const std::vector<double>& v, const QuantMatrix& m);

}  // namespace trajsynth
