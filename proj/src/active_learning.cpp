#include "trajsynth/active_learning.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "trajsynth/parallel.hpp"
#include "trajsynth/serialize.hpp"

namespace trajsynth {

GroundTruthOracle::GroundTruthOracle(const Query& q, const Registry& reg, LabelConvention conv)
    : checked_(conv == LabelConvention::SatSub ? wrap_sub(q) : q, reg) {
  if (!is_complete(q)) throw std::invalid_argument("ground-truth query must be complete");
}

std::optional<int> GroundTruthOracle::label(const Trajectory& z) { return eval_sat(checked_, z) ? 1 : 0; }

FixedLabelsOracle::FixedLabelsOracle(std::map<std::string, int> labels) : labels_(std::move(labels)) {}

std::optional<int> FixedLabelsOracle::label(const Trajectory& z) {
  auto it = labels_.find(z.id);
  if (it == labels_.end()) throw OracleError("no label for trajectory " + z.id);
  return it->second;
}

Classifier::Classifier(const std::vector<Query>& queries, const Registry& reg, LabelConvention conv) {
  checked_.reserve(queries.size());
  for (const auto& q : queries) {
    if (!is_complete(q)) throw std::invalid_argument("classifier queries must be complete");
    checked_.emplace_back(conv == LabelConvention::SatSub ? wrap_sub(q) : q, reg);
  }
}

bool Classifier::predict(std::size_t q, const Trajectory& z, ScoreCache* cache) const {
  return eval_sat(checked_.at(q), z, cache);
}

double disagreement(const Trajectory& z, const Classifier& c, ScoreCache* cache) {
  if (c.empty()) throw std::invalid_argument("disagreement of an empty query set");
  std::size_t pos = 0;
  for (std::size_t q = 0; q < c.size(); ++q) pos += c.predict(q, z, cache) ? 1 : 0;
  return static_cast<double>(pos) / static_cast<double>(c.size());
}

double disagreement(const Trajectory& z, const std::vector<Query>& c, const Registry& reg, LabelConvention conv) {
  return disagreement(z, Classifier(c, reg, conv));
}

namespace {

std::vector<double> all_j(const std::vector<const Trajectory*>& zs, const Classifier& c, ScoreCache* cache) {
  std::vector<double> j(zs.size());
  parallel_for(zs.size(), [&](std::size_t i) { j[i] = disagreement(*zs[i], c, cache); });
  return j;
}

std::size_t argmin_half(const std::vector<double>& j) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < j.size(); ++i)
    if (std::abs(j[i] - 0.5) < std::abs(j[best] - 0.5)) best = i;
  return best;
}

}  // namespace

std::size_t select_next(const std::vector<const Trajectory*>& unlabeled, const Classifier& c, ScoreCache* cache) {
  if (unlabeled.empty()) throw std::invalid_argument("no unlabeled trajectories");
  if (c.empty()) throw std::invalid_argument("empty query set");
  return argmin_half(all_j(unlabeled, c, cache));
}

std::size_t select_next(const std::vector<const Trajectory*>& unlabeled, const std::vector<Query>& c,
                        const Registry& reg, LabelConvention conv) {
  return select_next(unlabeled, Classifier(c, reg, conv));
}

double f1_score(const std::vector<bool>& predicted, const std::vector<int>& truth) {
  if (predicted.size() != truth.size()) throw std::invalid_argument("prediction and label counts differ");
  double tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (predicted[i] && truth[i] == 1) ++tp;
    else if (predicted[i]) ++fp;
    else if (truth[i] == 1) ++fn;
  }
  const double precision = tp + fp > 0 ? tp / (tp + fp) : 0;
  const double recall = tp + fn > 0 ? tp / (tp + fn) : 0;
  if (precision + recall == 0) return 0;
  return 2 * precision * recall / (precision + recall);
}

F1Report evaluate_f1(const Classifier& c, const LabeledSet& test, ScoreCache* cache) {
  F1Report r;
  std::vector<int> truth;
  for (const auto& e : test) truth.push_back(e.label);
  r.per_query.resize(c.size());
  for (std::size_t q = 0; q < c.size(); ++q) {
    std::vector<char> p(test.size());
    parallel_for(test.size(), [&](std::size_t i) { p[i] = c.predict(q, *test[i].z, cache); });
    r.per_query[q] = f1_score(std::vector<bool>(p.begin(), p.end()), truth);
  }
  if (!r.per_query.empty()) {
    auto s = r.per_query;
    std::sort(s.begin(), s.end());
    r.median = s[(s.size() - 1) / 2];
  }
  return r;
}

F1Report evaluate_f1(const std::vector<Query>& c, const LabeledSet& test, const Registry& reg, LabelConvention conv) {
  return evaluate_f1(Classifier(c, reg, conv), test);
}

nlohmann::ordered_json transcript_to_ojson(const Transcript& t) {
  ojson a = ojson::array();
  for (const auto& r : t) {
    ojson j;
    j["round"] = r.round;
    j["labeled_id"] = r.labeled_id ? ojson(*r.labeled_id) : ojson(nullptr);
    j["label"] = r.label ? ojson(*r.label) : ojson(nullptr);
    j["num_consistent"] = r.num_consistent;
    j["median_f1"] = r.median_f1 ? ojson(*r.median_f1) : ojson(nullptr);
    a.push_back(std::move(j));
  }
  return a;
}

Transcript transcript_from_ojson(const nlohmann::ordered_json& a) {
  Transcript t;
  for (const auto& j : a) {
    TranscriptRecord r;
    r.round = j.at("round").get<int>();
    if (!j.at("labeled_id").is_null()) r.labeled_id = j.at("labeled_id").get<std::string>();
    if (!j.at("label").is_null()) r.label = j.at("label").get<int>();
    r.num_consistent = j.at("num_consistent").get<std::size_t>();
    if (!j.at("median_f1").is_null()) r.median_f1 = j.at("median_f1").get<double>();
    t.push_back(std::move(r));
  }
  return t;
}

std::string transcript_to_json(const Transcript& t) { return transcript_to_ojson(t).dump(2) + "\n"; }

ActiveLearner::ActiveLearner(LearnerSetup setup) : setup_(std::move(setup)) {
  if (!setup_.data || !setup_.registry) throw std::invalid_argument("learner needs a dataset and a registry");
  const auto& lc = setup_.loop;
  if (lc.initial_positives < 0 || lc.initial_negatives < 0 || lc.steps < 0)
    throw std::invalid_argument("loop counts must be >= 0");
  const std::size_t n = setup_.data->trajectories.size();
  const std::size_t half = (n + 1) / 2;
  for (std::size_t i = 0; i < n; ++i) (i < half ? train_ : test_).push_back(i);
}

bool ActiveLearner::is_labeled(std::size_t index) const {
  return std::any_of(w_.begin(), w_.end(), [&](const auto& p) { return p.first == index; });
}

LabeledSet ActiveLearner::labeled_set() const {
  LabeledSet w;
  for (const auto& [i, l] : w_) w.push_back({&setup_.data->trajectories[i], l});
  return w;
}

void ActiveLearner::start(Oracle& oracle) {
  if (started()) throw std::logic_error("learner already started");
  const auto& trajs = setup_.data->trajectories;
  test_labels_.clear();
  for (auto i : test_) {
    auto l = setup_.data->label_of(trajs[i].id);
    if (!l) l = oracle.label(trajs[i]);
    if (!l) throw OracleRefused("oracle refused a test label");
    test_labels_.push_back(*l);
  }

  std::vector<std::size_t> order = train_;
  std::mt19937_64 rng(setup_.loop.seed);
  std::shuffle(order.begin(), order.end(), rng);
  int need_pos = setup_.loop.initial_positives, need_neg = setup_.loop.initial_negatives;
  for (auto i : order) {
    if (need_pos == 0 && need_neg == 0) break;
    auto l = oracle.label(trajs[i]);
    if (!l) throw OracleRefused("oracle refused during initial sampling");
    if (*l == 1 && need_pos > 0) {
      w_.emplace_back(i, 1);
      --need_pos;
    } else if (*l == 0 && need_neg > 0) {
      w_.emplace_back(i, 0);
      --need_neg;
    }
  }
  if (need_pos > 0 || need_neg > 0) {
    w_.clear();
    throw InsufficientExamples("training split has too few " + std::string(need_pos > 0 ? "positive" : "negative") +
                               " examples for the initial sample");
  }
  synthesize(std::nullopt, std::nullopt);
}

void ActiveLearner::synthesize(std::optional<std::string> id, std::optional<int> label) {
  const LabeledSet w = labeled_set();
  result_ = synthesize_query(w, setup_.sketches, *setup_.registry, setup_.synth, transcript_.empty() ? nullptr : &result_,
                             &cache_);
  TranscriptRecord r;
  r.round = round_;
  r.labeled_id = std::move(id);
  r.label = label;
  const auto c = result_.consistent_queries();
  r.num_consistent = c.size();
  LabeledSet test;
  for (std::size_t k = 0; k < test_.size(); ++k) test.push_back({&setup_.data->trajectories[test_[k]], test_labels_[k]});
  r.median_f1 = evaluate_f1(Classifier(c, *setup_.registry, setup_.synth.convention), test, &cache_).median;
  transcript_.push_back(std::move(r));
}

std::optional<ActiveLearner::Question> ActiveLearner::next() const {
  if (!started() || round_ >= setup_.loop.steps) return std::nullopt;
  std::vector<std::size_t> idx;
  std::vector<const Trajectory*> zs;
  for (auto i : train_) {
    if (is_labeled(i)) continue;
    idx.push_back(i);
    zs.push_back(&setup_.data->trajectories[i]);
  }
  if (zs.empty()) return std::nullopt;
  if (setup_.loop.selector == Selector::Random) {
    std::mt19937_64 rng(setup_.loop.seed ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(round_ + 1)));
    std::uniform_int_distribution<std::size_t> pick(0, zs.size() - 1);
    return Question{idx[pick(rng)], std::nullopt};
  }
  const Classifier c(consistent(), *setup_.registry, setup_.synth.convention);
  if (c.empty()) return Question{idx.front(), std::nullopt};
  const auto j = all_j(zs, c, &cache_);
  if (std::all_of(j.begin(), j.end(), [](double x) { return x == 0 || x == 1; })) return std::nullopt;
  const std::size_t best = argmin_half(j);
  return Question{idx[best], j[best]};
}

void ActiveLearner::answer(std::size_t index, int label) {
  if (!started()) throw std::logic_error("learner not started");
  if (label != 0 && label != 1) throw std::invalid_argument("label must be 0 or 1");
  if (std::find(train_.begin(), train_.end(), index) == train_.end())
    throw std::invalid_argument("trajectory is not in the training split");
  if (is_labeled(index)) throw std::invalid_argument("trajectory already labeled");
  w_.emplace_back(index, label);
  ++round_;
  synthesize(setup_.data->trajectories[index].id, label);
}

nlohmann::ordered_json ActiveLearner::checkpoint() const {
  ojson j;
  j["round"] = round_;
  ojson w = ojson::array();
  for (const auto& [i, l] : w_) w.push_back(ojson{{"id", setup_.data->trajectories[i].id}, {"label", l}});
  j["labeled"] = std::move(w);
  j["test_labels"] = test_labels_;
  j["result"] = ojson::parse(synthesis_result_to_json(result_));
  j["transcript"] = transcript_to_ojson(transcript_);
  return j;
}

void ActiveLearner::restore(const nlohmann::ordered_json& j) {
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < setup_.data->trajectories.size(); ++i) index[setup_.data->trajectories[i].id] = i;
  round_ = j.at("round").get<int>();
  w_.clear();
  for (const auto& e : j.at("labeled")) {
    auto it = index.find(e.at("id").get<std::string>());
    if (it == index.end()) throw std::invalid_argument("checkpoint names an unknown trajectory");
    w_.emplace_back(it->second, e.at("label").get<int>());
  }
  test_labels_ = j.at("test_labels").get<std::vector<int>>();
  if (test_labels_.size() != test_.size()) throw std::invalid_argument("checkpoint test split does not match dataset");
  result_ = synthesis_result_from_json(j.at("result").dump());
  transcript_ = transcript_from_ojson(j.at("transcript"));
}

Transcript run_loop(ActiveLearner& learner, Oracle& oracle) {
  if (!learner.started()) learner.start(oracle);
  while (auto q = learner.next()) {
    auto l = oracle.label(learner.data().trajectories[q->index]);
    if (!l) throw OracleRefused("oracle refused at round " + std::to_string(learner.round() + 1));
    learner.answer(q->index, *l);
  }
  return learner.transcript();
}

}  // namespace trajsynth
