#include "trajsynth/semantics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <unordered_map>

namespace trajsynth {

bool QuantMatrix::upper_triangular() const {
  for (std::size_t i = 0; i <= n; ++i)
    for (std::size_t j = 0; j < i; ++j)
      if ((*this)(i, j) != -kInf) return false;
  return true;
}

// ------------------------------------------------------------------ cache

std::shared_ptr<const ScoreTable> ScoreCache::get(const PredicateDef& def, const Binding& b,
                                                  const Trajectory& z) {
  std::string key = std::to_string(reinterpret_cast<std::uintptr_t>(&z)) + "|" + def.name;
  for (auto o : b) key += "|" + std::to_string(o);
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = tables_.find(key);
    if (it != tables_.end()) return it->second;
  }
  auto t = std::make_shared<const ScoreTable>(score_table(def, b, z));
  std::lock_guard<std::mutex> lock(mu_);
  return tables_.emplace(key, t).first->second;
}

void ScoreCache::clear() {
  std::lock_guard<std::mutex> lock(mu_);
  tables_.clear();
}

std::size_t ScoreCache::size() const {
  std::lock_guard<std::mutex> lock(mu_);
  return tables_.size();
}

// --------------------------------------------------------------- compiled

CompiledQuery::CompiledQuery(const Query& q, const Registry& reg) : query_(q) {
  if (!q) throw SemanticsError("null query");
  validate(q, reg);
  auto h = holes(q);
  if (!h.predicate.empty()) throw SemanticsError("query has predicate holes: " + print_query(q));
  dim_ = h.parameter.size();
  root_ = build(q, reg, h.parameter);
}

int CompiledQuery::build(const Query& q, const Registry& reg, const std::vector<int>& order) {
  CNode n;
  n.kind = q->kind;
  if (q->kind == Kind::Pred) {
    n.def[0] = reg.get(q->name);
    n.def[1] = reg.get(negated_name(n.def[0]->name));
    for (char c : q->vars) n.binding.push_back(static_cast<std::size_t>(c - 'A'));
    n.param = q->param;
    n.theta = q->theta;
    if (q->param == ParamKind::Hole)
      n.coord = static_cast<int>(std::find(order.begin(), order.end(), q->hole) - order.begin());
  } else {
    n.k = q->k;
    n.a = q->a;
    n.b = q->b;
    n.left = build(q->left, reg, order);
    if (q->right) n.right = build(q->right, reg, order);
  }
  nodes_.push_back(std::move(n));
  return static_cast<int>(nodes_.size()) - 1;
}

namespace {

using CNode = CompiledQuery::CNode;
using Vec = std::vector<double>;

void check_frame(const CompiledQuery& q, const DirectionFrame& f) {
  if (f.v.size() != q.dim() || f.u.size() != q.dim())
    throw SemanticsError("frame has dimension " + std::to_string(f.v.size()) + ", query has " +
                         std::to_string(q.dim()) + " parameter holes");
  for (double u : f.u)
    if (!(u > 0) || !std::isfinite(u)) throw SemanticsError("frame scale must be positive and finite");
  for (double v : f.v)
    if (!std::isfinite(v)) throw SemanticsError("frame offset must be finite");
}

// Quantitative value of a leaf with score s at negation parity pol. Fixed and
// unparameterized leaves are plain satisfaction, so Neg is an exact complement
// of them. A parameter hole under odd parity holds the threshold of the
// negated predicate: the leaf tests s >= -theta, which is read along the
// reflected frame (-v, u). With theta set, holes behave like fixed parameters.
inline double leaf_value(const CNode& n, int pol, double s, const DirectionFrame& f,
                         const std::vector<double>* theta = nullptr) {
  switch (n.param) {
    case ParamKind::Hole: {
      if (theta) {
        const double th = pol ? -(*theta)[n.coord] : (*theta)[n.coord];
        return s >= th ? kInf : -kInf;
      }
      const double v = pol ? -f.v[n.coord] : f.v[n.coord];
      return (s - v) / f.u[n.coord];
    }
    case ParamKind::Fixed:
      return s >= n.theta ? kInf : -kInf;
    default:
      return s == kInf ? kInf : -kInf;
  }
}

QuantMatrix identity(std::size_t n) {
  QuantMatrix m(n);
  for (std::size_t i = 0; i <= n; ++i) m(i, i) = kInf;
  return m;
}

void max_into(QuantMatrix& acc, const QuantMatrix& x) {
  for (std::size_t k = 0; k < acc.a.size(); ++k) acc.a[k] = std::max(acc.a[k], x.a[k]);
}

// -------------------------------------------------------- matrix engine

class MatrixEngine {
 public:
  MatrixEngine(const CompiledQuery& q, const DirectionFrame& f, const Trajectory& z, ScoreCache* cache,
               const std::vector<double>* theta = nullptr)
      : q_(q), f_(f), z_(z), cache_(cache), n_(z.size()), theta_(theta) {}

  QuantMatrix matrix(int id, int pol) {
    const CNode& nd = q_.nodes()[id];
    switch (nd.kind) {
      case Kind::Pred:
        return leaf(nd, pol);
      case Kind::Seq:
        return maxmin_product(matrix(nd.left, pol), matrix(nd.right, pol));
      case Kind::And:
      case Kind::Or: {
        QuantMatrix x = matrix(nd.left, pol);
        QuantMatrix y = matrix(nd.right, pol);
        for (std::size_t k = 0; k < x.a.size(); ++k)
          x.a[k] = nd.kind == Kind::And ? std::min(x.a[k], y.a[k]) : std::max(x.a[k], y.a[k]);
        return x;
      }
      case Kind::Star: {
        QuantMatrix m = matrix(nd.left, pol);
        QuantMatrix acc = identity(n_);
        QuantMatrix p = acc;
        for (std::size_t k = 1; k <= n_; ++k) {
          p = maxmin_product(p, m);
          max_into(acc, p);
        }
        return acc;
      }
      case Kind::Neg: {
        QuantMatrix m = matrix(nd.left, 1 - pol);
        for (std::size_t i = 0; i <= n_; ++i)
          for (std::size_t j = 0; j <= n_; ++j) m(i, j) = i <= j ? -m(i, j) : -kInf;
        return m;
      }
      case Kind::Iterate: {
        QuantMatrix m = matrix(nd.left, pol);
        QuantMatrix p = m;
        for (int k = 1; k < nd.k; ++k) p = maxmin_product(p, m);
        return p;
      }
      case Kind::Dashv: {
        QuantMatrix m = matrix(nd.left, pol);
        Vec w(n_ + 1);
        for (std::size_t k = 0; k <= n_; ++k) w[k] = m(k, n_);
        QuantMatrix out(n_);
        for (std::size_t i = 0; i <= n_; ++i) {
          double run = kInf;
          for (std::size_t j = i; j <= n_; ++j) {
            run = std::min(run, w[j]);
            const std::size_t len = j - i;
            if (len >= static_cast<std::size_t>(nd.a) && len <= static_cast<std::size_t>(nd.b)) out(i, j) = run;
          }
        }
        return out;
      }
      case Kind::PredHole:
        break;
    }
    throw SemanticsError("cannot evaluate predicate hole");
  }

  // v (x) matrix(id); `sel0` marks v as the selector row for index 0.
  Vec row(int id, int pol, const Vec& v, bool sel0) {
    const CNode& nd = q_.nodes()[id];
    switch (nd.kind) {
      case Kind::Seq:
        return row(nd.right, pol, row(nd.left, pol, v, sel0), false);
      case Kind::Iterate: {
        Vec cur = row(nd.left, pol, v, sel0);
        for (int k = 1; k < nd.k; ++k) cur = row(nd.left, pol, cur, false);
        return cur;
      }
      case Kind::And:
      case Kind::Or:
        if (sel0) {
          Vec x = row(nd.left, pol, v, true);
          Vec y = row(nd.right, pol, v, true);
          for (std::size_t k = 0; k < x.size(); ++k)
            x[k] = nd.kind == Kind::And ? std::min(x[k], y[k]) : std::max(x[k], y[k]);
          return x;
        }
        break;
      case Kind::Neg:
        if (sel0) {
          Vec x = row(nd.left, 1 - pol, v, true);
          for (auto& e : x) e = -e;
          return x;
        }
        break;
      default:
        break;
    }
    return maxmin_vecmat(v, matrix(id, pol));
  }

  Vec selector() const {
    Vec e(n_ + 1, -kInf);
    e[0] = kInf;
    return e;
  }

 private:
  QuantMatrix leaf(const CNode& nd, int pol) {
    const PredicateDef& def = *nd.def[0];
    std::shared_ptr<const ScoreTable> t;
    if (cache_) t = cache_->get(def, nd.binding, z_);
    else t = std::make_shared<const ScoreTable>(score_table(def, nd.binding, z_));
    QuantMatrix m(n_);
    for (std::size_t i = 0; i <= n_; ++i)
      for (std::size_t j = i; j <= n_; ++j) m(i, j) = leaf_value(nd, pol, (*t)(i, j), f_, theta_);
    return m;
  }

  const CompiledQuery& q_;
  const DirectionFrame& f_;
  const Trajectory& z_;
  ScoreCache* cache_;
  std::size_t n_;
  const std::vector<double>* theta_;
};

// ----------------------------------------------------- reference recursion

class Recursion {
 public:
  Recursion(const CompiledQuery& q, const DirectionFrame& f, const Trajectory& z)
      : q_(q), f_(f), z_(z), r_slots_(z.size() + 2) {
    for (const auto& nd : q.nodes())
      if (nd.kind == Kind::Iterate) r_slots_ = std::max(r_slots_, static_cast<std::uint64_t>(nd.k) + 1);
  }

  // Memoized per (node, parity, window); nested repetition is exponential without it.
  double eval(int id, int pol, std::size_t i, std::size_t j) {
    const std::uint64_t k = key(id, pol, 0, i, j);
    if (const auto it = memo_.find(k); it != memo_.end()) return it->second;
    const double v = compute(id, pol, i, j);
    memo_.emplace(k, v);
    return v;
  }

 private:
  std::uint64_t key(int id, int pol, std::size_t r, std::size_t i, std::size_t j) const {
    const std::uint64_t w = z_.size() + 1;
    return (((static_cast<std::uint64_t>(id) * 2 + static_cast<std::uint64_t>(pol)) * r_slots_ + r) * w + i) * w + j;
  }

  double compute(int id, int pol, std::size_t i, std::size_t j) {
    const CNode& nd = q_.nodes()[id];
    switch (nd.kind) {
      case Kind::Pred: {
        const double s = score(*nd.def[0], nd.binding, subtrajectory(z_, i, j));
        return leaf_value(nd, pol, s, f_);
      }
      case Kind::Seq: {
        double best = -kInf;
        for (std::size_t k = i; k <= j; ++k)
          best = std::max(best, std::min(eval(nd.left, pol, i, k), eval(nd.right, pol, k, j)));
        return best;
      }
      case Kind::And:
        return std::min(eval(nd.left, pol, i, j), eval(nd.right, pol, i, j));
      case Kind::Or:
        return std::max(eval(nd.left, pol, i, j), eval(nd.right, pol, i, j));
      case Kind::Neg:
        return -eval(nd.left, 1 - pol, i, j);
      case Kind::Star: {
        double best = -kInf;
        for (std::size_t r = 0; r <= j - i; ++r) best = std::max(best, reps(nd.left, pol, r, i, j));
        return best;
      }
      case Kind::Iterate:
        return reps(nd.left, pol, static_cast<std::size_t>(nd.k), i, j);
      case Kind::Dashv: {
        const std::size_t len = j - i;
        if (len < static_cast<std::size_t>(nd.a) || len > static_cast<std::size_t>(nd.b)) return -kInf;
        double m = kInf;
        for (std::size_t k = i; k <= j; ++k) m = std::min(m, eval(nd.left, pol, k, z_.size()));
        return m;
      }
      case Kind::PredHole:
        break;
    }
    throw SemanticsError("cannot evaluate predicate hole");
  }

  // r-fold sequencing of node id over z_{i:j}; zero repetitions match only the empty window.
  double reps(int id, int pol, std::size_t r, std::size_t i, std::size_t j) {
    if (r == 0) return i == j ? kInf : -kInf;
    if (r == 1) return eval(id, pol, i, j);
    const std::uint64_t key_r = key(id, pol, r, i, j);
    if (const auto it = memo_.find(key_r); it != memo_.end()) return it->second;
    double best = -kInf;
    for (std::size_t k = i; k <= j; ++k)
      best = std::max(best, std::min(reps(id, pol, r - 1, i, k), eval(id, pol, k, j)));
    memo_.emplace(key_r, best);
    return best;
  }

  const CompiledQuery& q_;
  const DirectionFrame& f_;
  const Trajectory& z_;
  std::uint64_t r_slots_;
  std::unordered_map<std::uint64_t, double> memo_;
};

const DirectionFrame& empty_frame() {
  static const DirectionFrame f;
  return f;
}

}  // namespace

QuantMatrix maxmin_product(const QuantMatrix& x, const QuantMatrix& y) {
  const std::size_t n = x.n;
  QuantMatrix out(n);
  for (std::size_t i = 0; i <= n; ++i)
    for (std::size_t j = i; j <= n; ++j) {
      double best = -kInf;
      for (std::size_t k = i; k <= j; ++k) best = std::max(best, std::min(x(i, k), y(k, j)));
      out(i, j) = best;
    }
  return out;
}

std::vector<double> maxmin_vecmat(const std::vector<double>& v, const QuantMatrix& m) {
  const std::size_t n = m.n;
  std::vector<double> out(n + 1, -kInf);
  for (std::size_t i = 0; i <= n; ++i) {
    if (v[i] == -kInf) continue;
    for (std::size_t j = i; j <= n; ++j) out[j] = std::max(out[j], std::min(v[i], m(i, j)));
  }
  return out;
}

bool eval_sat_at(const CompiledQuery& sketch, const std::vector<double>& theta, const Trajectory& z,
                 ScoreCache* cache) {
  if (theta.size() != sketch.dim())
    throw SemanticsError("parameter vector has " + std::to_string(theta.size()) + " entries, sketch has " +
                         std::to_string(sketch.dim()) + " holes");
  MatrixEngine eng(sketch, empty_frame(), z, cache, &theta);
  return eng.row(sketch.root(), 0, eng.selector(), true)[z.size()] == kInf;
}

bool eval_sat(const CompiledQuery& q, const Trajectory& z, ScoreCache* cache) {
  if (q.dim() != 0) throw SemanticsError("satisfaction needs a complete query: " + print_query(q.query()));
  return eval_quant_fast(q, empty_frame(), z, cache) == kInf;
}

bool eval_sat(const Query& q, const Registry& reg, const Trajectory& z, ScoreCache* cache) {
  return eval_sat(CompiledQuery(q, reg), z, cache);
}

Query wrap_sub(const Query& q) { return seq(seq(pred("Any"), q), pred("Any")); }

bool eval_sat_sub(const Query& q, const Registry& reg, const Trajectory& z, ScoreCache* cache) {
  return eval_sat(wrap_sub(q), reg, z, cache);
}

double eval_quant(const CompiledQuery& q, const DirectionFrame& f, const Trajectory& z) {
  return eval_quant_window(q, f, z, 0, z.size());
}

double eval_quant(const Query& q, const Registry& reg, const DirectionFrame& f, const Trajectory& z) {
  return eval_quant(CompiledQuery(q, reg), f, z);
}

double eval_quant_window(const CompiledQuery& q, const DirectionFrame& f, const Trajectory& z, std::size_t i,
                         std::size_t j) {
  check_frame(q, f);
  if (i > j || j > z.size()) throw std::out_of_range("eval_quant_window: bad window");
  return Recursion(q, f, z).eval(q.root(), 0, i, j);
}

QuantMatrix eval_matrix(const CompiledQuery& q, const DirectionFrame& f, const Trajectory& z, ScoreCache* cache) {
  check_frame(q, f);
  return MatrixEngine(q, f, z, cache).matrix(q.root(), 0);
}

QuantMatrix eval_matrix(const Query& q, const Registry& reg, const DirectionFrame& f, const Trajectory& z,
                        ScoreCache* cache) {
  return eval_matrix(CompiledQuery(q, reg), f, z, cache);
}

double eval_quant_fast(const CompiledQuery& q, const DirectionFrame& f, const Trajectory& z, ScoreCache* cache) {
  check_frame(q, f);
  MatrixEngine eng(q, f, z, cache);
  return eng.row(q.root(), 0, eng.selector(), true)[z.size()];
}

double eval_quant_fast(const Query& q, const Registry& reg, const DirectionFrame& f, const Trajectory& z,
                       ScoreCache* cache) {
  return eval_quant_fast(CompiledQuery(q, reg), f, z, cache);
}

}  // namespace trajsynth
