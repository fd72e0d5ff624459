#pragma once

#include <string>
#include <vector>

#include "trajsynth/enumerator.hpp"

namespace trajsynth {

struct BenchInput {
  std::string task;
  const Registry* registry = nullptr;
  std::vector<Query> sketches;
  LabeledSet examples;
  LabelConvention convention = LabelConvention::SatSub;
};

struct BenchSketchRow {
  std::string task, sketch, method;
  double seconds = 0;
  long steps = 0;
  std::size_t con = 0, inc = 0, unk = 0;
};

struct BenchRow {
  std::string task, method;
  double seconds = 0;
  long steps = 0;
  std::size_t boxes_found = 0;  // consistent boxes over all sketches
};

struct BenchReport {
  std::vector<BenchRow> rows;
  std::vector<BenchSketchRow> sketch_rows;
  // Sketches where one search decided a parameter consistent and the other
  // inconsistent, away from the drift margin.
  std::vector<std::string> mismatches;
  // Sketches whose box lists differ beyond eps; informational.
  std::vector<std::string> structural_mismatches;
  double quant_seconds = 0, bsearch_seconds = 0;

  bool identical() const { return mismatches.empty(); }
  double speedup() const { return quant_seconds > 0 ? bsearch_seconds / quant_seconds : 0; }
};

// Same boxes in the same lists and order, each corner within eps times the
// initial box width of its dimension.
bool same_classification(const SearchState& a, const SearchState& b, const Box& initial, double eps);

// Runs the parameter search on every sketch once with quantitative pruning
// pairs and once with bisection, each with its own cold score cache and the
// same budget. The search does not pause at the first consistent box.
// Pointwise agreement of decided regions. Each bisection split may move a box
// face by up to eps times the box width, so faces drift by at most
// steps * eps * width; sample points closer than that to a face of their box
// in either state are not compared. Samples are every box midpoint of both
// states plus `samples` seeded uniform points.
bool same_decisions(const SearchState& a, const SearchState& b, const Box& initial, double eps, int samples = 2000);

BenchReport run_bench(const std::vector<BenchInput>& inputs, int budget, double eps);

std::string bench_report_to_json(const BenchReport& r);

}  // namespace trajsynth
