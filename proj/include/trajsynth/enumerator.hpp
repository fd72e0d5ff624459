#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "trajsynth/param_search.hpp"
#include "trajsynth/predicates.hpp"
#include "trajsynth/query.hpp"

namespace trajsynth {

struct EnumConfig {
  int max_predicates = 3;
  int max_parameterized = 2;
  // Binary operators and Iterate; Star and Neg are switched on separately.
  std::set<Kind> operators = {Kind::Seq, Kind::And};
  std::vector<int> iterate_ks = {2, 3};
  bool allow_star = false;
  bool allow_neg = false;
  std::vector<char> variables = {'A'};
  // Predicates offered as leaves; empty means every registered predicate.
  // Any is always offered and None never is.
  std::vector<std::string> predicates;
  const Registry* registry = nullptr;
};

// Leaf queries: every offered predicate under every variable assignment,
// with a parameter hole for parameterized predicates.
std::vector<Query> enumeration_leaves(const EnumConfig& cfg);

// Canonical form: sequences and same-operator conjunction/disjunction chains
// are left-associated, and conjunction/disjunction operands are sorted by
// their printed form.
Query canonicalize(const Query& q);

// Every sketch within the limits, deduplicated up to the canonical form,
// ordered by predicate count and then by printed form. Holes are numbered
// 1..d left to right.
std::vector<Query> enumerate_sketches(const EnumConfig& cfg);

struct SynthesisEntry {
  Query sketch;
  SearchState state;
  std::optional<Query> representative;
};

struct SynthesisResult {
  std::vector<SynthesisEntry> entries;

  // Representatives in enumeration order.
  std::vector<Query> consistent_queries() const;
};

struct SynthesisOptions {
  int per_sketch_budget = kDefaultBudget;
  LabelConvention convention = LabelConvention::SatSub;
  SearchOptions search;
};

// Runs the parameter search on every sketch, continuing the states in
// `resume` (matched by sketch text). Sketches with nothing left to search
// are not revisited.
SynthesisResult synthesize_query(const LabeledSet& w, const std::vector<Query>& sketches, const Registry& reg,
                                 const SynthesisOptions& opt, const SynthesisResult* resume = nullptr,
                                 ScoreCache* cache = nullptr);
SynthesisResult synthesize_query(const LabeledSet& w, const EnumConfig& cfg, const SynthesisOptions& opt,
                                 const SynthesisResult* resume = nullptr, ScoreCache* cache = nullptr);

std::string synthesis_result_to_json(const SynthesisResult& r);
SynthesisResult synthesis_result_from_json(const std::string& text);

}  // namespace trajsynth
