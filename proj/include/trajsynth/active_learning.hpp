#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "trajsynth/enumerator.hpp"

namespace trajsynth {

// Labeling oracle. An empty answer means the oracle refused (for example a
// closed interactive channel).
class Oracle {
 public:
  virtual ~Oracle() = default;
  virtual std::optional<int> label(const Trajectory& z) = 0;
};

class GroundTruthOracle : public Oracle {
 public:
  GroundTruthOracle(const Query& q, const Registry& reg, LabelConvention conv);
  std::optional<int> label(const Trajectory& z) override;

 private:
  CompiledQuery checked_;
};

class FixedLabelsOracle : public Oracle {
 public:
  explicit FixedLabelsOracle(std::map<std::string, int> labels);
  // Throws OracleError for an id it does not cover.
  std::optional<int> label(const Trajectory& z) override;

 private:
  std::map<std::string, int> labels_;
};

struct OracleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct OracleRefused : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InsufficientExamples : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Selector { Disagreement, Random };

struct LoopConfig {
  int initial_positives = 2;
  int initial_negatives = 10;
  int steps = 25;
  std::uint64_t seed = 0;
  Selector selector = Selector::Disagreement;
};

// Complete queries compiled under a label convention, ready to classify.
class Classifier {
 public:
  Classifier(const std::vector<Query>& queries, const Registry& reg, LabelConvention conv);
  std::size_t size() const { return checked_.size(); }
  bool empty() const { return checked_.empty(); }
  bool predict(std::size_t q, const Trajectory& z, ScoreCache* cache = nullptr) const;

 private:
  std::vector<CompiledQuery> checked_;
};

// Fraction of C labeling z positive. Throws std::invalid_argument on empty C.
double disagreement(const Trajectory& z, const Classifier& c, ScoreCache* cache = nullptr);
double disagreement(const Trajectory& z, const std::vector<Query>& c, const Registry& reg, LabelConvention conv);

// Index into `unlabeled` minimizing |J - 1/2|, first index on ties.
std::size_t select_next(const std::vector<const Trajectory*>& unlabeled, const Classifier& c,
                        ScoreCache* cache = nullptr);
std::size_t select_next(const std::vector<const Trajectory*>& unlabeled, const std::vector<Query>& c,
                        const Registry& reg, LabelConvention conv);

struct F1Report {
  std::optional<double> median;  // empty for an empty C
  std::vector<double> per_query;
};
double f1_score(const std::vector<bool>& predicted, const std::vector<int>& truth);
F1Report evaluate_f1(const Classifier& c, const LabeledSet& test, ScoreCache* cache = nullptr);
F1Report evaluate_f1(const std::vector<Query>& c, const LabeledSet& test, const Registry& reg, LabelConvention conv);

struct TranscriptRecord {
  int round = 0;
  std::optional<std::string> labeled_id;
  std::optional<int> label;
  std::size_t num_consistent = 0;
  std::optional<double> median_f1;

  bool operator==(const TranscriptRecord&) const = default;
};
using Transcript = std::vector<TranscriptRecord>;

nlohmann::ordered_json transcript_to_ojson(const Transcript& t);
Transcript transcript_from_ojson(const nlohmann::ordered_json& j);
std::string transcript_to_json(const Transcript& t);

struct LearnerSetup {
  const Dataset* data = nullptr;
  const Registry* registry = nullptr;
  std::vector<Query> sketches;
  SynthesisOptions synth;
  LoopConfig loop;
};

// The label / resynthesize loop as a state machine, so that a headless run
// and the HTTP service drive exactly the same transitions.
//
//   start(oracle)   initial sample, round-0 synthesis
//   next()          question to ask, or none when the loop is finished
//   answer(i, l)    extends W and resynthesizes
class ActiveLearner {
 public:
  explicit ActiveLearner(LearnerSetup setup);

  // Training indices are the first half of the dataset, test the rest.
  const std::vector<std::size_t>& train() const { return train_; }
  const std::vector<std::size_t>& test() const { return test_; }

  void start(Oracle& oracle);
  bool started() const { return !transcript_.empty(); }

  struct Question {
    std::size_t index;        // into the dataset
    std::optional<double> j;  // empty when C is empty
  };
  std::optional<Question> next() const;
  void answer(std::size_t index, int label);

  int round() const { return round_; }
  const std::vector<std::pair<std::size_t, int>>& labeled() const { return w_; }
  LabeledSet labeled_set() const;
  const SynthesisResult& result() const { return result_; }
  const Transcript& transcript() const { return transcript_; }
  std::vector<Query> consistent() const { return result_.consistent_queries(); }
  const Dataset& data() const { return *setup_.data; }
  const Registry& registry() const { return *setup_.registry; }
  const LearnerSetup& setup() const { return setup_; }
  ScoreCache& cache() const { return cache_; }
  bool is_labeled(std::size_t index) const;

  nlohmann::ordered_json checkpoint() const;
  void restore(const nlohmann::ordered_json& j);

 private:
  void synthesize(std::optional<std::string> id, std::optional<int> label);

  LearnerSetup setup_;
  std::vector<std::size_t> train_, test_;
  std::vector<int> test_labels_;
  std::vector<std::pair<std::size_t, int>> w_;
  SynthesisResult result_;
  Transcript transcript_;
  int round_ = 0;
  mutable ScoreCache cache_;
};

// Headless loop: start, then ask and answer until next() is empty.
Transcript run_loop(ActiveLearner& learner, Oracle& oracle);

}  // namespace trajsynth
