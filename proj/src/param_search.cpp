#include "trajsynth/param_search.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <functional>

#include "trajsynth/parallel.hpp"
#include "trajsynth/serialize.hpp"

namespace trajsynth {

bool Box::empty() const {
  for (std::size_t i = 0; i < lo.size(); ++i)
    if (!(hi[i] - lo[i] > 0)) return true;
  return false;
}

double Box::volume() const {
  double v = 1;
  for (std::size_t i = 0; i < lo.size(); ++i) v *= std::max(0.0, hi[i] - lo[i]);
  return v;
}

bool Box::contains(const std::vector<double>& theta) const {
  if (theta.size() != lo.size()) return false;
  for (std::size_t i = 0; i < lo.size(); ++i)
    if (!(lo[i] < theta[i] && theta[i] <= hi[i])) return false;
  return true;
}

std::vector<double> midpoint(const Box& b) {
  std::vector<double> m(b.dim());
  for (std::size_t i = 0; i < b.dim(); ++i) {
    if (!std::isfinite(b.lo[i]) || !std::isfinite(b.hi[i])) throw std::domain_error("midpoint of unbounded box");
    m[i] = (b.lo[i] + b.hi[i]) / 2;
  }
  return m;
}

double total_volume(const std::vector<Box>& boxes) {
  double v = 0;
  for (const auto& b : boxes) v += b.volume();
  return v;
}

double total_volume(const std::deque<Box>& boxes) {
  double v = 0;
  for (const auto& b : boxes) v += b.volume();
  return v;
}

Box initial_box(const Query& sketch, const Registry& reg) {
  auto order = hole_order(sketch);
  Box b;
  b.lo.resize(order.size());
  b.hi.resize(order.size());
  std::vector<int> parity(order.size(), -1);
  // Holes under an odd number of Neg nodes range over the negated predicate's scores.
  std::function<void(const Query&, bool)> walk = [&](const Query& q, bool odd) {
    if (q->kind == Kind::Pred) {
      if (q->param != ParamKind::Hole) return;
      auto pos = static_cast<std::size_t>(std::find(order.begin(), order.end(), q->hole) - order.begin());
      if (parity[pos] >= 0) {
        if (parity[pos] != static_cast<int>(odd))
          throw std::invalid_argument("hole ??" + std::to_string(q->hole) + " occurs both negated and not");
        return;
      }
      auto def = reg.get(odd ? negated_name(q->name) : q->name);
      if (!std::isfinite(def->lo) || !std::isfinite(def->hi) || !(def->lo < def->hi))
        throw std::invalid_argument(def->name + ": needs a finite score range");
      b.lo[pos] = std::nextafter(def->lo, -kInf);
      b.hi[pos] = def->hi;
      parity[pos] = odd;
      return;
    }
    const bool inner = q->kind == Kind::Neg ? !odd : odd;
    if (q->left) walk(q->left, inner);
    if (q->right) walk(q->right, inner);
  };
  walk(sketch, false);
  return b;
}

SearchProblem::SearchProblem(const Query& sketch, const Registry& reg, LabeledSet examples, LabelConvention conv,
                             ScoreCache* cache)
    : sketch_(sketch),
      checked_(conv == LabelConvention::SatSub ? wrap_sub(sketch) : sketch, reg),
      examples_(std::move(examples)),
      initial_(initial_box(sketch, reg)),
      cache_(cache) {
  for (const auto& e : examples_)
    if (!e.z || (e.label != 0 && e.label != 1)) throw std::invalid_argument("malformed labeled example");
}

bool SearchProblem::consistent_at(const std::vector<double>& theta) const {
  for (const auto& e : examples_)
    if (eval_sat_at(checked_, theta, *e.z, cache_) != (e.label == 1)) return false;
  return true;
}

std::vector<double> diagonal_point(const Box& b, double t) {
  std::vector<double> p(b.dim());
  for (std::size_t i = 0; i < b.dim(); ++i) {
    if (t <= 0) p[i] = b.lo[i];
    else if (t >= 1) p[i] = b.hi[i];
    else p[i] = std::clamp(b.lo[i] + t * (b.hi[i] - b.lo[i]), b.lo[i], b.hi[i]);
  }
  return p;
}

namespace {

BoundaryParam boundary_from(double t, const Box& b) {
  BoundaryParam p;
  if (t == kInf) p.tag = BoundaryParam::Tag::Top;
  else if (t == -kInf) p.tag = BoundaryParam::Tag::Bottom;
  else p.theta = diagonal_point(b, t);
  return p;
}

double clamp01(double t) { return std::clamp(t, 0.0, 1.0); }

PruningPair make_pair(double t_minus, double t_plus, const Box& b) {
  PruningPair pp;
  pp.minus = boundary_from(t_minus, b);
  pp.plus = boundary_from(t_plus, b);
  pp.t_minus = clamp01(t_minus);
  pp.t_plus = clamp01(t_plus);
  pp.consistent = pp.t_minus < pp.t_plus;
  return pp;
}

}  // namespace

namespace {

std::vector<double> just_above(std::vector<double> theta) {
  for (auto& x : theta) x = std::nextafter(x, kInf);
  return theta;
}

// Integer image of a finite double in which neighbouring doubles differ by one.
std::int64_t ordered_key(double x) {
  std::int64_t i;
  std::memcpy(&i, &x, sizeof i);
  return i < 0 ? -(i & INT64_MAX) : i;
}

double from_key(std::int64_t k) {
  const std::int64_t i = k < 0 ? (-k) | INT64_MIN : k;
  double x;
  std::memcpy(&x, &i, sizeof x);
  return x;
}

using Holds = std::function<bool(const std::vector<double>&)>;

// Step that doubles on every retry, starting at one ulp of t.
double widen(double t, int attempt) { return std::ldexp(std::max(std::abs(t), 1.0) * 0x1p-52, attempt); }

struct Bracket {
  double lo, hi;
};

// Diagonal coordinates around t0 with `holds` true at lo and false just above
// hi. Coordinate 0 and 1 count as true and false respectively, since the boxes
// they would bound are empty.
Bracket bracket(const Box& b, double t0, const Holds& holds) {
  Bracket br{t0, t0};
  for (int attempt = 0; br.lo > 0 && !holds(diagonal_point(b, br.lo)); ++attempt)
    br.lo = std::max(0.0, br.lo - widen(br.lo, attempt));
  for (int attempt = 0; br.hi < 1 && holds(just_above(diagonal_point(b, br.hi))); ++attempt)
    br.hi = std::min(1.0, br.hi + widen(br.hi, attempt));
  return br;
}

// Last point where `holds` is true on the monotone chain that walks every
// coordinate one ulp at a time from diag(lo) to diag(hi). Just above that point
// `holds` is false, because it dominates the next chain point.
std::vector<double> resolve(const Box& b, Bracket br, const Holds& holds) {
  const auto p = diagonal_point(b, br.lo);
  if (br.lo == br.hi) return p;
  const auto q = diagonal_point(b, br.hi);
  if (holds(q)) return q;
  const std::size_t d = b.dim();
  std::vector<std::uint64_t> gap(d);
  std::uint64_t steps = 0;
  for (std::size_t i = 0; i < d; ++i) {
    gap[i] = static_cast<std::uint64_t>(ordered_key(q[i])) - static_cast<std::uint64_t>(ordered_key(p[i]));
    steps = std::max(steps, gap[i]);
  }
  auto at = [&](std::uint64_t s) {
    std::vector<double> x(d);
    for (std::size_t i = 0; i < d; ++i)
      x[i] = s >= gap[i] ? q[i]
                         : from_key(static_cast<std::int64_t>(static_cast<std::uint64_t>(ordered_key(p[i])) + s));
    return x;
  };
  std::uint64_t lo = 0, hi = steps;
  while (hi - lo > 1) {
    const std::uint64_t mid = lo + (hi - lo) / 2;
    (holds(at(mid)) ? lo : hi) = mid;
  }
  return at(lo);
}

bool leq(const std::vector<double>& x, const std::vector<double>& y) {
  for (std::size_t i = 0; i < x.size(); ++i)
    if (!(x[i] <= y[i])) return false;
  return true;
}

}  // namespace

std::vector<double> corner_of(const BoundaryParam& bp, const Box& b) {
  switch (bp.tag) {
    case BoundaryParam::Tag::Bottom:
      return b.lo;
    case BoundaryParam::Tag::Top:
      return b.hi;
    default:
      return bp.theta;
  }
}

PruningPair compute_pruning_pair(const SearchProblem& p, const Box& b) {
  DirectionFrame f;
  f.v = b.lo;
  f.u.resize(b.dim());
  for (std::size_t i = 0; i < b.dim(); ++i) f.u[i] = b.hi[i] - b.lo[i];
  const auto& ex = p.examples();
  std::vector<double> t(ex.size());
  parallel_for(ex.size(), [&](std::size_t k) { t[k] = eval_quant_fast(p.checked(), f, *ex[k].z, p.cache()); });
  double t_plus = kInf, t_minus = -kInf;
  std::vector<std::size_t> pos, neg;
  for (std::size_t k = 0; k < ex.size(); ++k) {
    if (ex[k].label == 1) {
      t_plus = std::min(t_plus, t[k]);
      pos.push_back(k);
    } else {
      t_minus = std::max(t_minus, t[k]);
      neg.push_back(k);
    }
  }
  PruningPair pp = make_pair(t_minus, t_plus, b);
  if (b.dim() == 0) return pp;

  auto flags = [&](const std::vector<std::size_t>& idx, const std::vector<double>& theta) {
    std::vector<char> s(idx.size());
    parallel_for(idx.size(), [&](std::size_t j) { s[j] = eval_sat_at(p.checked(), theta, *ex[idx[j]].z, p.cache()); });
    return s;
  };
  std::vector<std::size_t> pos_check, neg_check;
  const Holds all_pos = [&](const std::vector<double>& theta) {
    const auto s = flags(pos_check, theta);
    return std::all_of(s.begin(), s.end(), [](char c) { return c != 0; });
  };
  const Holds any_neg = [&](const std::vector<double>& theta) {
    const auto s = flags(neg_check, theta);
    return std::any_of(s.begin(), s.end(), [](char c) { return c != 0; });
  };

  // Rounding in diagonal_point can put a corner a few ulps on the wrong side
  // of the exact boundary, so both corners are moved onto it at float level.
  // An example whose diagonal coordinate is far from the unclamped extreme
  // cannot flip within rounding distance, so only the near ones are checked
  // unless the box is thin or a bracket had to move.
  constexpr double kNear = 1e-7;
  bool thin = false;
  for (std::size_t i = 0; i < b.dim(); ++i)
    thin = thin || b.hi[i] - b.lo[i] <= 1e-6 * std::max({1.0, std::abs(b.lo[i]), std::abs(b.hi[i])});
  const bool fin_plus = std::isfinite(t_plus), fin_minus = std::isfinite(t_minus);
  Bracket bp{pp.t_plus, pp.t_plus}, bm{pp.t_minus, pp.t_minus};
  for (const bool every : {thin, true}) {
    pos_check.clear();
    neg_check.clear();
    for (auto k : pos)
      if (every || std::abs(t[k] - t_plus) <= kNear) pos_check.push_back(k);
    for (auto k : neg)
      if (every || std::abs(t[k] - t_minus) <= kNear) neg_check.push_back(k);
    if (fin_plus) bp = bracket(b, pp.t_plus, all_pos);
    if (fin_minus) bm = bracket(b, pp.t_minus, any_neg);
    const bool moved = std::max({pp.t_plus - bp.lo, bp.hi - pp.t_plus, pp.t_minus - bm.lo, bm.hi - pp.t_minus}) > kNear / 4;
    if (every || !moved) break;
  }
  if (fin_plus && fin_minus && std::max(bp.lo, bm.lo) <= std::min(bp.hi, bm.hi)) {
    // Overlapping or touching brackets share one chain so that the corners stay comparable.
    bp = bm = Bracket{std::min(bp.lo, bm.lo), std::max(bp.hi, bm.hi)};
  }
  if (fin_plus) pp.plus.theta = resolve(b, bp, all_pos);
  if (fin_minus) pp.minus.theta = resolve(b, bm, any_neg);

  const auto a = corner_of(pp.minus, b), c = corner_of(pp.plus, b);
  pp.consistent = leq(a, c) && a != c;
  if (!pp.consistent && !leq(c, a)) throw std::logic_error("pruning corners are not comparable");
  return pp;
}

PruningPair binary_search_pair(const SearchProblem& p, const Box& b, double eps) {
  if (!(eps > 0)) throw std::invalid_argument("bisection tolerance must be positive");
  const auto& ex = p.examples();
  auto sat_flags = [&](double t) {
    const auto theta = diagonal_point(b, t);
    std::vector<char> s(ex.size());
    parallel_for(ex.size(), [&](std::size_t k) { s[k] = eval_sat_at(p.checked(), theta, *ex[k].z, p.cache()); });
    return s;
  };
  auto all_pos = [&](double t) {
    auto s = sat_flags(t);
    for (std::size_t k = 0; k < ex.size(); ++k)
      if (ex[k].label == 1 && !s[k]) return false;
    return true;
  };
  auto any_neg = [&](double t) {
    auto s = sat_flags(t);
    for (std::size_t k = 0; k < ex.size(); ++k)
      if (ex[k].label == 0 && s[k]) return true;
    return false;
  };
  bool has_pos = false, has_neg = false;
  for (const auto& e : ex) (e.label == 1 ? has_pos : has_neg) = true;

  // Both predicates are antitone in t; keep the satisfied end of the bracket for
  // the positives and the unsatisfied end for the negatives.
  double t_plus = kInf;
  if (has_pos) {
    if (all_pos(1)) t_plus = 1;
    else if (!all_pos(0)) t_plus = 0;
    else {
      double lo = 0, hi = 1;
      while (hi - lo > eps) {
        const double mid = lo + (hi - lo) / 2;
        (all_pos(mid) ? lo : hi) = mid;
      }
      t_plus = lo;
    }
  }
  double t_minus = -kInf;
  if (has_neg) {
    if (!any_neg(0)) t_minus = 0;
    else if (any_neg(1)) t_minus = 1;
    else {
      double lo = 0, hi = 1;
      while (hi - lo > eps) {
        const double mid = lo + (hi - lo) / 2;
        (any_neg(mid) ? lo : hi) = mid;
      }
      t_minus = hi;
    }
  }
  return make_pair(t_minus, t_plus, b);
}

SplitResult split_box(const Box& b, double t_minus, double t_plus) {
  return split_box_at(b, diagonal_point(b, std::min(t_minus, t_plus)), diagonal_point(b, std::max(t_minus, t_plus)));
}

SplitResult split_box_at(const Box& b, const std::vector<double>& a, const std::vector<double>& c) {
  const std::size_t d = b.dim();
  SplitResult out;
  std::size_t total = 1;
  for (std::size_t i = 0; i < d; ++i) total *= 3;
  std::vector<int> s(d, 0);
  for (std::size_t idx = 0; idx < total; ++idx) {
    // Most significant digit first, so boxes come out ordered by lower corner.
    std::size_t rem = idx;
    for (std::size_t i = d; i-- > 0;) {
      s[i] = static_cast<int>(rem % 3);
      rem /= 3;
    }
    Box x;
    x.lo.resize(d);
    x.hi.resize(d);
    bool has0 = false, has1 = false, has2 = false;
    for (std::size_t i = 0; i < d; ++i) {
      switch (s[i]) {
        case 0:
          x.lo[i] = b.lo[i];
          x.hi[i] = a[i];
          has0 = true;
          break;
        case 1:
          x.lo[i] = a[i];
          x.hi[i] = c[i];
          has1 = true;
          break;
        default:
          x.lo[i] = c[i];
          x.hi[i] = b.hi[i];
          has2 = true;
          break;
      }
    }
    if (x.empty()) continue;
    if (!has0 && !has2) out.center = x;
    else if (!has1 && !has2) out.lower = x;
    else if (!has0 && !has1) out.upper = x;
    else if (!has1) out.incomp.push_back(x);
    else if (has0 && has2) out.straddle.push_back(x);
    else out.extra.push_back(x);
  }
  return out;
}

SearchState fresh_state(const SearchProblem& p) {
  SearchState s;
  s.sketch = print_query(p.sketch());
  s.b_unk.push_back(p.initial());
  return s;
}

namespace {

bool lex_less(const Box& x, const Box& y) {
  if (x.lo != y.lo) return x.lo < y.lo;
  return x.hi < y.hi;
}

}  // namespace

SearchState synthesize_parameters(const SearchProblem& p, int budget, const SearchState* resume,
                                  const SearchOptions& opt) {
  if (budget < 1) throw std::invalid_argument("budget must be >= 1");
  SearchState st = resume ? *resume : fresh_state(p);
  if (resume && st.examples != p.examples().size()) {
    for (auto it = st.b_con.rbegin(); it != st.b_con.rend(); ++it) st.b_unk.push_front(*it);
    st.b_con.clear();
  }
  st.examples = p.examples().size();
  bool found = false;
  for (int step = 0; step < budget && !st.b_unk.empty(); ++step) {
    if (found && opt.stop_at_consistent) break;
    Box b = st.b_unk.front();
    st.b_unk.pop_front();
    const PruningPair pp =
        opt.method == PairMethod::Quantitative ? compute_pruning_pair(p, b) : binary_search_pair(p, b, opt.eps);
    const auto a = corner_of(pp.minus, b), c = corner_of(pp.plus, b);
    SplitResult sr = pp.consistent ? split_box_at(b, a, c) : split_box_at(b, c, a);
    std::vector<Box> unk;
    if (pp.consistent) {
      if (sr.center) {
        st.b_con.push_back(*sr.center);
        found = true;
      }
      if (sr.lower) st.b_inc.push_back(*sr.lower);
      if (sr.upper) st.b_inc.push_back(*sr.upper);
      unk.insert(unk.end(), sr.incomp.begin(), sr.incomp.end());
      unk.insert(unk.end(), sr.extra.begin(), sr.extra.end());
    } else {
      for (auto* x : {&sr.center, &sr.lower, &sr.upper})
        if (*x) st.b_inc.push_back(**x);
      st.b_inc.insert(st.b_inc.end(), sr.extra.begin(), sr.extra.end());
      unk.insert(unk.end(), sr.incomp.begin(), sr.incomp.end());
    }
    unk.insert(unk.end(), sr.straddle.begin(), sr.straddle.end());
    std::sort(unk.begin(), unk.end(), lex_less);
    for (auto& x : unk) st.b_unk.push_back(std::move(x));
    ++st.steps;
  }
  return st;
}

std::string search_state_to_json(const SearchState& s) { return to_ojson(s).dump() + "\n"; }

SearchState search_state_from_json(const std::string& text) {
  try {
    return search_state_from_ojson(nlohmann::ordered_json::parse(text));
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("search state JSON: ") + e.what());
  }
}

}  // namespace trajsynth
