#pragma once

#include <stdexcept>
#include <string>

#include "trajsynth/trajectory.hpp"

namespace trajsynth {

enum class DataFormat { Json, Csv };

// Parse errors carry the offending line (CSV) or JSON path.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SchemaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Dataset parse_dataset_json(const std::string& text);
std::string dataset_to_json(const Dataset& d);

// CSV rows: trajectory_id,frame_index,object_index,x,y[,vx,vy,ax,ay,present].
// Lines starting with '#' carry metadata (frame rate, object count,
// trajectory order and labels) so the writer's output reloads to an equal
// Dataset. A header row starting with "trajectory_id" is skipped.
Dataset parse_dataset_csv(const std::string& text, double default_frame_rate = 1.0);
std::string dataset_to_csv(const Dataset& d);

Dataset load_dataset(const std::string& path, DataFormat format);
void save_dataset(const Dataset& d, const std::string& path, DataFormat format);

// Guesses the format from the file extension (".csv" means CSV).
DataFormat format_for_path(const std::string& path);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

// Shortest decimal text that parses back to exactly the same double.
std::string format_double(double v);

}  // namespace trajsynth
