#include "trajsynth/tasks.hpp"

namespace trajsynth {

namespace {

std::vector<TaskDef> make_tasks() {
  std::vector<TaskDef> t(4);
  t[0].name = "lane-turn";
  t[0].object_count = 1;
  t[0].frame_rate = 2;
  t[0].convention = LabelConvention::SatSub;
  t[0].truth = "InRegion_1(A) ; Any ; InRegion_2(A)";
  t[0].predicates = {"Any", "InRegion_1", "InRegion_2", "InRegion_3", "MinLength"};

  t[1].name = "lane-follow";
  t[1].object_count = 2;
  t[1].frame_rate = 2;
  t[1].convention = LabelConvention::SatSub;
  t[1].truth = "DistanceLt[-15](A,B) & InRegion_1(A) & InRegion_1(B)";
  t[1].predicates = {"Any", "InRegion_1", "InRegion_3", "DistanceLt"};

  t[2].name = "speed-contrast";
  t[2].object_count = 2;
  t[2].frame_rate = 2;
  t[2].convention = LabelConvention::SatSub;
  t[2].truth = "DistanceLt[-8](A,B) & SpeedRatioGt[2](A,B)";
  t[2].predicates = {"Any", "DistanceLt", "SpeedRatioGt", "MinLength"};

  t[3].name = "maritime-loiter";
  t[3].object_count = 1;
  t[3].frame_rate = 1;
  t[3].convention = LabelConvention::Sat;
  t[3].truth = "Any ; (XPosGt[40](A) & MinLength[3])";
  t[3].predicates = {"Any", "XPosGt", "XPosLt", "MinLength"};
  return t;
}

const std::vector<TaskDef>& tasks() {
  static const std::vector<TaskDef> t = make_tasks();
  return t;
}

}  // namespace

const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& t : tasks()) n.push_back(t.name);
    return n;
  }();
  return names;
}

const TaskDef& task_def(const std::string& scenario) {
  for (const auto& t : tasks())
    if (t.name == scenario) return t;
  throw UnknownScenario("unknown scenario: " + scenario);
}

const RegionConfig& scenario_regions() {
  static const RegionConfig cfg = [] {
    RegionConfig c;
    c.regions.push_back({1, {{0, 0}, {40, 0}}, 3.0, 30.0});
    c.regions.push_back({2, {{50, 10}, {50, 60}}, 3.0, 30.0});
    c.regions.push_back({3, {{100, 8}, {0, 8}}, 3.0, 30.0});
    return c;
  }();
  return cfg;
}

Registry task_registry(const Dataset& d) { return builtin_registry(d, &scenario_regions()); }

EnumConfig task_enum_config(const TaskDef& t, const Registry& reg) {
  EnumConfig cfg;
  cfg.registry = &reg;
  cfg.predicates = t.predicates;
  cfg.variables.clear();
  for (std::size_t i = 0; i < t.object_count; ++i) cfg.variables.push_back(static_cast<char>('A' + i));
  return cfg;
}

Query task_truth(const TaskDef& t) { return parse_query(t.truth); }

}  // namespace trajsynth
