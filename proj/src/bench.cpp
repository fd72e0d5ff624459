#include "trajsynth/bench.hpp"

#include <chrono>
#include <cmath>
#include <random>

#include "trajsynth/serialize.hpp"

namespace trajsynth {

namespace {

bool close_box(const Box& x, const Box& y, const std::vector<double>& tol) {
  if (x.dim() != y.dim()) return false;
  for (std::size_t i = 0; i < x.dim(); ++i)
    if (std::abs(x.lo[i] - y.lo[i]) > tol[i] || std::abs(x.hi[i] - y.hi[i]) > tol[i]) return false;
  return true;
}

template <class C>
bool close_list(const C& x, const C& y, const std::vector<double>& tol) {
  if (x.size() != y.size()) return false;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (!close_box(x[i], y[i], tol)) return false;
  return true;
}

enum class Decision { Con, Inc, Unk, None };

// Class of theta and whether it sits clear of the margin inside its box.
std::pair<Decision, bool> locate(const SearchState& s, const std::vector<double>& theta,
                               const std::vector<double>& margin) {
  auto clear = [&](const Box& x) {
    for (std::size_t i = 0; i < x.dim(); ++i)
      if (theta[i] - x.lo[i] <= margin[i] || x.hi[i] - theta[i] <= margin[i]) return false;
    return true;
  };
  for (const auto& x : s.b_con)
    if (x.contains(theta)) return {Decision::Con, clear(x)};
  for (const auto& x : s.b_inc)
    if (x.contains(theta)) return {Decision::Inc, clear(x)};
  for (const auto& x : s.b_unk)
    if (x.contains(theta)) return {Decision::Unk, clear(x)};
  return {Decision::None, false};
}

}  // namespace

bool same_decisions(const SearchState& a, const SearchState& b, const Box& initial, double eps, int samples) {
  const std::size_t d = initial.dim();
  if (d == 0) return a.b_con.size() == b.b_con.size();
  std::vector<double> margin(d);
  const double steps = static_cast<double>(std::max(a.steps, b.steps));
  for (std::size_t i = 0; i < d; ++i) margin[i] = steps * eps * (initial.hi[i] - initial.lo[i]);

  std::vector<std::vector<double>> points;
  for (const auto* s : {&a, &b}) {
    for (const auto& x : s->b_con) points.push_back(midpoint(x));
    for (const auto& x : s->b_inc) points.push_back(midpoint(x));
    for (const auto& x : s->b_unk) points.push_back(midpoint(x));
  }
  std::mt19937_64 rng(0x5eed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < samples; ++k) {
    std::vector<double> p(d);
    for (std::size_t i = 0; i < d; ++i) p[i] = initial.lo[i] + u(rng) * (initial.hi[i] - initial.lo[i]);
    points.push_back(std::move(p));
  }
  for (const auto& p : points) {
    const auto [ra, ca] = locate(a, p, margin);
    const auto [rb, cb] = locate(b, p, margin);
    if (!ca || !cb) continue;
    if ((ra == Decision::Con && rb == Decision::Inc) || (ra == Decision::Inc && rb == Decision::Con)) return false;
  }
  return true;
}

bool same_classification(const SearchState& a, const SearchState& b, const Box& initial, double eps) {
  std::vector<double> tol(initial.dim());
  for (std::size_t i = 0; i < initial.dim(); ++i) tol[i] = eps * (initial.hi[i] - initial.lo[i]);
  return a.steps == b.steps && close_list(a.b_con, b.b_con, tol) && close_list(a.b_inc, b.b_inc, tol) &&
         close_list(a.b_unk, b.b_unk, tol);
}

BenchReport run_bench(const std::vector<BenchInput>& inputs, int budget, double eps) {
  using clock = std::chrono::steady_clock;
  BenchReport rep;
  for (const auto& in : inputs) {
    BenchRow rq{in.task, "quant"}, rb{in.task, "bsearch"};
    ScoreCache cache_q, cache_b;
    for (const auto& sk : in.sketches) {
      SearchProblem pq(sk, *in.registry, in.examples, in.convention, &cache_q);
      SearchProblem pb(sk, *in.registry, in.examples, in.convention, &cache_b);
      SearchOptions oq, ob;
      oq.stop_at_consistent = ob.stop_at_consistent = false;
      oq.method = PairMethod::Quantitative;
      ob.method = PairMethod::Bisection;
      ob.eps = eps;

      auto t0 = clock::now();
      const SearchState sq = synthesize_parameters(pq, budget, nullptr, oq);
      auto t1 = clock::now();
      const SearchState sb = synthesize_parameters(pb, budget, nullptr, ob);
      auto t2 = clock::now();

      const double dq = std::chrono::duration<double>(t1 - t0).count();
      const double db = std::chrono::duration<double>(t2 - t1).count();
      const std::string text = print_query(sk);
      rep.sketch_rows.push_back({in.task, text, "quant", dq, sq.steps, sq.b_con.size(), sq.b_inc.size(), sq.b_unk.size()});
      rep.sketch_rows.push_back({in.task, text, "bsearch", db, sb.steps, sb.b_con.size(), sb.b_inc.size(), sb.b_unk.size()});
      rq.seconds += dq;
      rb.seconds += db;
      rq.steps += sq.steps;
      rb.steps += sb.steps;
      rq.boxes_found += sq.b_con.size();
      rb.boxes_found += sb.b_con.size();
      if (!same_decisions(sq, sb, pq.initial(), eps)) rep.mismatches.push_back(in.task + ": " + text);
      if (!same_classification(sq, sb, pq.initial(), eps)) rep.structural_mismatches.push_back(in.task + ": " + text);
    }
    rep.quant_seconds += rq.seconds;
    rep.bsearch_seconds += rb.seconds;
    rep.rows.push_back(rq);
    rep.rows.push_back(rb);
  }
  return rep;
}

std::string bench_report_to_json(const BenchReport& r) {
  ojson j;
  ojson rows = ojson::array();
  for (const auto& x : r.rows)
    rows.push_back(ojson{{"task", x.task},
                         {"method", x.method},
                         {"wall_seconds", x.seconds},
                         {"steps", x.steps},
                         {"boxes_found", x.boxes_found}});
  j["rows"] = std::move(rows);
  ojson sk = ojson::array();
  for (const auto& x : r.sketch_rows)
    sk.push_back(ojson{{"task", x.task},
                       {"sketch", x.sketch},
                       {"method", x.method},
                       {"wall_seconds", x.seconds},
                       {"steps", x.steps},
                       {"b_con", x.con},
                       {"b_inc", x.inc},
                       {"b_unk", x.unk}});
  j["sketch_rows"] = std::move(sk);
  j["quant_seconds"] = r.quant_seconds;
  j["bsearch_seconds"] = r.bsearch_seconds;
  j["speedup"] = r.speedup();
  j["identical_classifications"] = r.identical();
  j["mismatches"] = r.mismatches;
  j["structural_mismatches"] = r.structural_mismatches;
  return j.dump(2) + "\n";
}

}  // namespace trajsynth
