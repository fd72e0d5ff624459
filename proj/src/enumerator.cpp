#include "trajsynth/enumerator.hpp"

#include <algorithm>
#include <map>
#include <unordered_set>

#include "trajsynth/serialize.hpp"

namespace trajsynth {

namespace {

void assignments(std::size_t arity, const std::vector<char>& vars, bool sorted_only, std::vector<char>& cur,
                 std::vector<std::vector<char>>& out) {
  if (cur.size() == arity) {
    out.push_back(cur);
    return;
  }
  for (char v : vars) {
    if (std::find(cur.begin(), cur.end(), v) != cur.end()) continue;
    if (sorted_only && !cur.empty() && v < cur.back()) continue;
    cur.push_back(v);
    assignments(arity, vars, sorted_only, cur, out);
    cur.pop_back();
  }
}

// Parameter holes counted the way parameter_count would count them after
// renumbering; during enumeration every leaf hole still carries id 0.
int hole_leaves(const Query& q) {
  switch (q->kind) {
    case Kind::Pred: return q->param == ParamKind::Hole ? 1 : 0;
    case Kind::PredHole: return 0;
    case Kind::Seq:
    case Kind::And:
    case Kind::Or: return hole_leaves(q->left) + hole_leaves(q->right);
    default: return hole_leaves(q->left);
  }
}

void flatten(const Query& q, Kind k, std::vector<Query>& out) {
  if (q->kind == k) {
    flatten(q->left, k, out);
    flatten(q->right, k, out);
  } else {
    out.push_back(q);
  }
}

Query rebuild(Kind k, const std::vector<Query>& parts) {
  Query q = parts.front();
  for (std::size_t i = 1; i < parts.size(); ++i) {
    switch (k) {
      case Kind::Seq: q = seq(q, parts[i]); break;
      case Kind::And: q = conj(q, parts[i]); break;
      default: q = disj(q, parts[i]); break;
    }
  }
  return q;
}

// Gives every parameter-hole occurrence its own id, 1..d left to right. A hole
// under Iterate occurs once in the tree and so stays shared across copies.
Query number_holes(const Query& q, int& next) {
  switch (q->kind) {
    case Kind::Pred: return q->param == ParamKind::Hole ? pred_hole(q->name, next++, q->vars) : q;
    case Kind::PredHole: return q;
    case Kind::Seq: {
      auto l = number_holes(q->left, next);
      return seq(l, number_holes(q->right, next));
    }
    case Kind::And: {
      auto l = number_holes(q->left, next);
      return conj(l, number_holes(q->right, next));
    }
    case Kind::Or: {
      auto l = number_holes(q->left, next);
      return disj(l, number_holes(q->right, next));
    }
    case Kind::Star: return star(number_holes(q->left, next));
    case Kind::Neg: return neg(number_holes(q->left, next));
    case Kind::Iterate: return iterate(number_holes(q->left, next), q->k);
    case Kind::Dashv: return dashv(number_holes(q->left, next), q->a, q->b);
  }
  return q;
}

bool is_unary(Kind k) { return k == Kind::Star || k == Kind::Neg || k == Kind::Iterate || k == Kind::Dashv; }

}  // namespace

std::vector<Query> enumeration_leaves(const EnumConfig& cfg) {
  if (!cfg.registry) throw std::invalid_argument("enumeration needs a registry");
  const Registry& reg = *cfg.registry;
  std::vector<std::string> names = cfg.predicates.empty() ? reg.names() : cfg.predicates;
  if (std::find(names.begin(), names.end(), "Any") == names.end()) names.insert(names.begin(), "Any");
  std::vector<Query> out;
  for (const auto& name : names) {
    if (name == "None") continue;
    auto def = reg.get(name);
    std::vector<std::vector<char>> vs;
    std::vector<char> cur;
    assignments(static_cast<std::size_t>(def->arity), cfg.variables, def->symmetric, cur, vs);
    for (auto& v : vs) out.push_back(def->parameterized ? pred_hole(name, 0, v) : pred(name, v));
  }
  return out;
}

Query canonicalize(const Query& q) {
  switch (q->kind) {
    case Kind::Pred:
    case Kind::PredHole: return q;
    case Kind::Seq: {
      std::vector<Query> parts;
      flatten(q, Kind::Seq, parts);
      for (auto& p : parts) p = canonicalize(p);
      return rebuild(Kind::Seq, parts);
    }
    case Kind::And:
    case Kind::Or: {
      std::vector<Query> raw, parts;
      flatten(q, q->kind, raw);
      for (auto& p : raw) flatten(canonicalize(p), q->kind, parts);
      std::vector<std::pair<std::string, Query>> keyed;
      for (auto& p : parts) keyed.emplace_back(print_query(p), p);
      std::stable_sort(keyed.begin(), keyed.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
      parts.clear();
      for (auto& [_, p] : keyed) parts.push_back(p);
      return rebuild(q->kind, parts);
    }
    case Kind::Star: return star(canonicalize(q->left));
    case Kind::Neg: return neg(canonicalize(q->left));
    case Kind::Iterate: return iterate(canonicalize(q->left), q->k);
    case Kind::Dashv: return dashv(canonicalize(q->left), q->a, q->b);
  }
  return q;
}

std::vector<Query> enumerate_sketches(const EnumConfig& cfg) {
  if (cfg.max_predicates < 1) throw std::invalid_argument("max_predicates must be >= 1");
  if (cfg.max_parameterized > cfg.max_predicates) throw std::invalid_argument("max_parameterized exceeds max_predicates");
  for (Kind k : cfg.operators)
    if (k != Kind::Seq && k != Kind::And && k != Kind::Or && k != Kind::Iterate)
      throw std::invalid_argument("unsupported enumeration operator");

  const auto n = static_cast<std::size_t>(cfg.max_predicates);
  std::vector<std::vector<Query>> by_size(n + 1);
  std::unordered_set<std::string> seen;

  auto admit = [&](std::vector<Query>& level, const Query& q) {
    if (hole_leaves(q) > cfg.max_parameterized) return;
    auto c = canonicalize(q);
    if (seen.insert(print_query(c)).second) level.push_back(c);
  };
  auto add_unary = [&](std::vector<Query>& level) {
    const std::size_t base = level.size();
    for (std::size_t i = 0; i < base; ++i) {
      const Query q = level[i];
      if (is_unary(q->kind)) continue;
      if (cfg.allow_star) admit(level, star(q));
      if (cfg.allow_neg) admit(level, neg(q));
    }
  };

  for (const auto& leaf : enumeration_leaves(cfg)) admit(by_size[1], leaf);
  add_unary(by_size[1]);

  for (std::size_t s = 2; s <= n; ++s) {
    auto& level = by_size[s];
    for (Kind op : {Kind::Seq, Kind::And, Kind::Or}) {
      if (!cfg.operators.count(op)) continue;
      for (std::size_t s1 = 1; s1 < s; ++s1) {
        for (const auto& l : by_size[s1]) {
          for (const auto& r : by_size[s - s1]) {
            Query q = op == Kind::Seq ? seq(l, r) : op == Kind::And ? conj(l, r) : disj(l, r);
            admit(level, q);
          }
        }
      }
    }
    if (cfg.operators.count(Kind::Iterate)) {
      for (int k : cfg.iterate_ks) {
        if (k < 2 || s % static_cast<std::size_t>(k) != 0) continue;
        for (const auto& q : by_size[s / static_cast<std::size_t>(k)])
          if (!is_unary(q->kind)) admit(level, iterate(q, k));
      }
    }
    add_unary(level);
  }

  std::vector<std::pair<std::string, Query>> all;
  for (std::size_t s = 1; s <= n; ++s)
    for (const auto& q : by_size[s]) all.emplace_back(print_query(q), q);
  std::sort(all.begin(), all.end(), [](const auto& x, const auto& y) {
    const int px = predicate_count(x.second), py = predicate_count(y.second);
    if (px != py) return px < py;
    return x.first < y.first;
  });
  std::vector<Query> out;
  out.reserve(all.size());
  for (auto& [_, q] : all) {
    int next = 1;
    out.push_back(number_holes(q, next));
  }
  return out;
}

std::vector<Query> SynthesisResult::consistent_queries() const {
  std::vector<Query> out;
  for (const auto& e : entries)
    if (e.representative) out.push_back(*e.representative);
  return out;
}

namespace {

std::optional<Query> representative_of(const SearchProblem& p, const SearchState& st) {
  for (const auto& b : st.b_con) {
    auto m = midpoint(b);
    if (p.consistent_at(m)) return substitute(p.sketch(), m);
  }
  return std::nullopt;
}

}  // namespace

SynthesisResult synthesize_query(const LabeledSet& w, const std::vector<Query>& sketches, const Registry& reg,
                                 const SynthesisOptions& opt, const SynthesisResult* resume, ScoreCache* cache) {
  std::map<std::string, const SearchState*> prior;
  if (resume)
    for (const auto& e : resume->entries) prior.emplace(e.state.sketch, &e.state);
  SynthesisResult out;
  out.entries.reserve(sketches.size());
  for (const auto& sk : sketches) {
    SearchProblem problem(sk, reg, w, opt.convention, cache);
    SynthesisEntry e;
    e.sketch = sk;
    auto it = prior.find(print_query(sk));
    const SearchState* prev = it == prior.end() ? nullptr : it->second;
    if (prev && prev->b_unk.empty() && prev->b_con.empty()) {
      e.state = *prev;  // fully pruned; more examples cannot revive it
      e.state.examples = w.size();
    } else {
      e.state = synthesize_parameters(problem, opt.per_sketch_budget, prev, opt.search);
    }
    e.representative = representative_of(problem, e.state);
    out.entries.push_back(std::move(e));
  }
  return out;
}

SynthesisResult synthesize_query(const LabeledSet& w, const EnumConfig& cfg, const SynthesisOptions& opt,
                                 const SynthesisResult* resume, ScoreCache* cache) {
  return synthesize_query(w, enumerate_sketches(cfg), *cfg.registry, opt, resume, cache);
}

std::string synthesis_result_to_json(const SynthesisResult& r) {
  ojson a = ojson::array();
  for (const auto& e : r.entries) {
    ojson j;
    j["sketch"] = print_query(e.sketch);
    j["state"] = to_ojson(e.state);
    j["representative"] = e.representative ? ojson(print_query(*e.representative)) : ojson(nullptr);
    a.push_back(std::move(j));
  }
  return a.dump() + "\n";
}

SynthesisResult synthesis_result_from_json(const std::string& text) {
  SynthesisResult r;
  try {
    for (const auto& j : ojson::parse(text)) {
      SynthesisEntry e;
      e.sketch = parse_query(j.at("sketch").get<std::string>());
      e.state = search_state_from_ojson(j.at("state"));
      if (!j.at("representative").is_null()) e.representative = parse_query(j.at("representative").get<std::string>());
      r.entries.push_back(std::move(e));
    }
  } catch (const nlohmann::json::exception& ex) {
    throw std::invalid_argument(std::string("synthesis result JSON: ") + ex.what());
  }
  return r;
}

}  // namespace trajsynth
