#include "trajsynth/serialize.hpp"

namespace trajsynth {

ojson to_ojson(const Box& b) {
  ojson j;
  j["lo"] = b.lo;
  j["hi"] = b.hi;
  return j;
}

Box box_from_ojson(const ojson& j) {
  Box b;
  b.lo = j.at("lo").get<std::vector<double>>();
  b.hi = j.at("hi").get<std::vector<double>>();
  if (b.lo.size() != b.hi.size()) throw std::invalid_argument("box bounds differ in dimension");
  return b;
}

namespace {

template <class C>
ojson boxes(const C& c) {
  ojson a = ojson::array();
  for (const auto& b : c) a.push_back(to_ojson(b));
  return a;
}

}  // namespace

ojson to_ojson(const SearchState& s) {
  ojson j;
  j["sketch"] = s.sketch;
  j["b_con"] = boxes(s.b_con);
  j["b_inc"] = boxes(s.b_inc);
  j["b_unk"] = boxes(s.b_unk);
  j["steps"] = s.steps;
  j["examples"] = s.examples;
  return j;
}

SearchState search_state_from_ojson(const ojson& j) {
  SearchState s;
  s.sketch = j.at("sketch").get<std::string>();
  for (const auto& b : j.at("b_con")) s.b_con.push_back(box_from_ojson(b));
  for (const auto& b : j.at("b_inc")) s.b_inc.push_back(box_from_ojson(b));
  for (const auto& b : j.at("b_unk")) s.b_unk.push_back(box_from_ojson(b));
  s.steps = j.at("steps").get<long>();
  if (j.contains("examples")) s.examples = j.at("examples").get<std::size_t>();
  return s;
}

}  // namespace trajsynth
