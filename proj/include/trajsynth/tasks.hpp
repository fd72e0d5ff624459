#pragma once

#include <string>
#include <vector>

#include "trajsynth/enumerator.hpp"

namespace trajsynth {

struct UnknownScenario : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// A synthetic scenario: how its data looks and what the learner searches over.
struct TaskDef {
  std::string name;
  std::size_t object_count = 1;
  double frame_rate = 1;
  LabelConvention convention = LabelConvention::SatSub;
  // Reference query the generator labels with.
  std::string truth;
  // Leaves offered to the enumerator (Any is always added).
  std::vector<std::string> predicates;
};

const std::vector<std::string>& scenario_names();
// Throws UnknownScenario.
const TaskDef& task_def(const std::string& scenario);

// Lanes shared by every scenario.
const RegionConfig& scenario_regions();

Registry task_registry(const Dataset& d);
EnumConfig task_enum_config(const TaskDef& t, const Registry& reg);
Query task_truth(const TaskDef& t);

}  // namespace trajsynth
