#pragma once

// JSON conversions shared by the library, CLI and service. Keys keep a fixed
// insertion order so output is stable across runs.

#include "json.hpp"
#include "trajsynth/param_search.hpp"

namespace trajsynth {

using ojson = nlohmann::ordered_json;

ojson to_ojson(const Box& b);
Box box_from_ojson(const ojson& j);
ojson to_ojson(const SearchState& s);
SearchState search_state_from_ojson(const ojson& j);

}  // namespace trajsynth
