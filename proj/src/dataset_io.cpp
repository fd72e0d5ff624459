#include "trajsynth/dataset_io.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

namespace trajsynth {

using ojson = nlohmann::ordered_json;

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& contents) {
  // Write then rename so readers never observe a partial file.
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp);
    out << contents;
    out.flush();
    if (!out) throw IoError("write failed for " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp + " to " + path + ": " + ec.message());
}

DataFormat format_for_path(const std::string& path) {
  auto ext = std::filesystem::path(path).extension().string();
  return ext == ".csv" ? DataFormat::Csv : DataFormat::Json;
}

namespace {

void fill_derived(Trajectory& z, std::size_t m, const std::vector<bool>& has_vel,
                  const std::vector<bool>& has_acc) {
  for (std::size_t o = 0; o < m; ++o) {
    if (!has_vel[o]) derive_velocity(z, o);
    if (!has_acc[o]) derive_acceleration(z, o);
  }
}

double num(const ojson& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) throw SchemaError(where + ": missing \"" + key + "\"");
  if (!it->is_number()) throw SchemaError(where + ": \"" + key + "\" is not a number");
  return it->get<double>();
}

}  // namespace

Dataset parse_dataset_json(const std::string& text) {
  ojson root;
  try {
    root = ojson::parse(text);
  } catch (const ojson::parse_error& e) {
    throw ParseError(std::string("dataset JSON: ") + e.what());
  }
  if (!root.is_object()) throw SchemaError("dataset: top level must be an object");
  Dataset d;
  if (!root.contains("object_count") || !root["object_count"].is_number_integer())
    throw SchemaError("dataset: missing integer object_count");
  if (root["object_count"].get<long long>() < 1) throw SchemaError("dataset: object_count must be >= 1");
  d.object_count = root["object_count"].get<std::size_t>();
  d.frame_rate = num(root, "frame_rate", "dataset");
  if (!(d.frame_rate > 0)) throw SchemaError("dataset: frame_rate must be positive");
  if (!root.contains("trajectories") || !root["trajectories"].is_array())
    throw SchemaError("dataset: missing trajectories array");
  std::size_t ti = 0;
  for (const auto& jt : root["trajectories"]) {
    const std::string where = "trajectories[" + std::to_string(ti++) + "]";
    if (!jt.is_object() || !jt.contains("id") || !jt["id"].is_string())
      throw SchemaError(where + ": missing string id");
    Trajectory z;
    z.id = jt["id"].get<std::string>();
    z.frame_rate = d.frame_rate;
    if (jt.contains("label") && !jt["label"].is_null()) {
      if (!jt["label"].is_number_integer()) throw SchemaError(where + ": label must be 0, 1 or null");
      int lab = jt["label"].get<int>();
      if (lab != 0 && lab != 1) throw SchemaError(where + ": label must be 0, 1 or null");
      d.labels[z.id] = lab;
    }
    if (!jt.contains("frames") || !jt["frames"].is_array()) throw SchemaError(where + ": missing frames");
    std::vector<bool> has_vel(d.object_count, true), has_acc(d.object_count, true);
    std::size_t fi = 0;
    for (const auto& jf : jt["frames"]) {
      const std::string fw = where + ".frames[" + std::to_string(fi++) + "]";
      if (!jf.is_array() || jf.size() != d.object_count)
        throw SchemaError(fw + ": expected " + std::to_string(d.object_count) + " objects");
      State s;
      for (std::size_t o = 0; o < d.object_count; ++o) {
        const auto& jo = jf[o];
        const std::string ow = fw + "[" + std::to_string(o) + "]";
        if (!jo.is_object()) throw SchemaError(ow + ": object state must be an object");
        ObjectState st;
        st.x = num(jo, "x", ow);
        st.y = num(jo, "y", ow);
        if (jo.contains("vx") && jo.contains("vy")) {
          st.vx = num(jo, "vx", ow);
          st.vy = num(jo, "vy", ow);
        } else {
          has_vel[o] = false;
        }
        if (jo.contains("ax") && jo.contains("ay")) {
          st.ax = num(jo, "ax", ow);
          st.ay = num(jo, "ay", ow);
        } else {
          has_acc[o] = false;
        }
        if (jo.contains("present")) {
          if (!jo["present"].is_boolean()) throw SchemaError(ow + ": present must be boolean");
          st.present = jo["present"].get<bool>();
        }
        s.push_back(st);
      }
      z.states.push_back(std::move(s));
    }
    fill_derived(z, d.object_count, has_vel, has_acc);
    d.trajectories.push_back(std::move(z));
  }
  try {
    d.validate();
  } catch (const std::invalid_argument& e) {
    throw SchemaError(e.what());
  }
  return d;
}

std::string dataset_to_json(const Dataset& d) {
  ojson root;
  root["object_count"] = d.object_count;
  root["frame_rate"] = d.frame_rate;
  ojson trajs = ojson::array();
  for (const auto& z : d.trajectories) {
    ojson jt;
    jt["id"] = z.id;
    auto lab = d.label_of(z.id);
    jt["label"] = lab ? ojson(*lab) : ojson(nullptr);
    ojson frames = ojson::array();
    for (const auto& s : z.states) {
      ojson jf = ojson::array();
      for (const auto& o : s) {
        ojson jo;
        jo["x"] = o.x;
        jo["y"] = o.y;
        jo["vx"] = o.vx;
        jo["vy"] = o.vy;
        jo["ax"] = o.ax;
        jo["ay"] = o.ay;
        jo["present"] = o.present;
        jf.push_back(std::move(jo));
      }
      frames.push_back(std::move(jf));
    }
    jt["frames"] = std::move(frames);
    trajs.push_back(std::move(jt));
  }
  root["trajectories"] = std::move(trajs);
  return root.dump() + "\n";
}

namespace {

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

double parse_num(const std::string& s, std::size_t line) {
  double v = 0;
  const char* b = s.data();
  const char* e = s.data() + s.size();
  while (b < e && *b == ' ') ++b;
  auto res = std::from_chars(b, e, v);
  if (res.ec != std::errc() || res.ptr != e)
    throw ParseError("csv line " + std::to_string(line) + ": bad number '" + s + "'");
  return v;
}

std::size_t parse_index(const std::string& s, std::size_t line) {
  std::size_t v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ParseError("csv line " + std::to_string(line) + ": bad index '" + s + "'");
  return v;
}

}  // namespace

Dataset parse_dataset_csv(const std::string& text, double default_frame_rate) {
  Dataset d;
  d.frame_rate = default_frame_rate;
  std::size_t declared_m = 0;
  std::vector<std::string> order;
  std::map<std::string, std::map<std::size_t, std::map<std::size_t, ObjectState>>> rows;
  std::map<std::string, bool> has_motion;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  auto note_id = [&](const std::string& id) {
    if (!rows.count(id)) {
      rows[id];
      order.push_back(id);
    }
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream meta(line.substr(1));
      std::string key;
      meta >> key;
      if (key == "frame_rate") {
        std::string v;
        meta >> v;
        d.frame_rate = parse_num(v, lineno);
      } else if (key == "object_count") {
        std::string v;
        meta >> v;
        declared_m = parse_index(v, lineno);
      } else if (key == "trajectory") {
        std::string id;
        meta >> id;
        note_id(id);
      } else if (key == "label") {
        std::string id, v;
        meta >> id >> v;
        if (v != "0" && v != "1") throw ParseError("csv line " + std::to_string(lineno) + ": bad label");
        d.labels[id] = v == "1" ? 1 : 0;
      }
      continue;
    }
    if (line.rfind("trajectory_id", 0) == 0) continue;
    auto f = split_commas(line);
    if (f.size() != 5 && f.size() != 10)
      throw SchemaError("csv line " + std::to_string(lineno) + ": expected 5 or 10 fields, got " +
                        std::to_string(f.size()));
    const std::string& id = f[0];
    note_id(id);
    std::size_t fi = parse_index(f[1], lineno), oi = parse_index(f[2], lineno);
    ObjectState st;
    st.x = parse_num(f[3], lineno);
    st.y = parse_num(f[4], lineno);
    if (f.size() == 10) {
      st.vx = parse_num(f[5], lineno);
      st.vy = parse_num(f[6], lineno);
      st.ax = parse_num(f[7], lineno);
      st.ay = parse_num(f[8], lineno);
      if (f[9] != "0" && f[9] != "1") throw ParseError("csv line " + std::to_string(lineno) + ": bad present flag");
      st.present = f[9] == "1";
    }
    auto it = has_motion.find(id);
    bool full = f.size() == 10;
    if (it == has_motion.end()) has_motion[id] = full;
    else it->second = it->second && full;
    if (!rows[id][fi].emplace(oi, st).second)
      throw SchemaError("csv line " + std::to_string(lineno) + ": duplicate (frame, object)");
  }
  std::size_t m = declared_m;
  if (m == 0) {
    for (auto& [id, frames] : rows)
      for (auto& [fi, objs] : frames)
        if (!objs.empty()) m = std::max(m, objs.rbegin()->first + 1);
  }
  d.object_count = std::max<std::size_t>(m, 1);
  for (const auto& id : order) {
    Trajectory z;
    z.id = id;
    z.frame_rate = d.frame_rate;
    const auto& frames = rows[id];
    std::size_t n = frames.empty() ? 0 : frames.rbegin()->first + 1;
    for (std::size_t fi = 0; fi < n; ++fi) {
      auto fit = frames.find(fi);
      if (fit == frames.end() || fit->second.size() != d.object_count)
        throw SchemaError("trajectory " + id + ": frame " + std::to_string(fi) + " incomplete");
      State s;
      for (std::size_t o = 0; o < d.object_count; ++o) {
        auto oit = fit->second.find(o);
        if (oit == fit->second.end())
          throw SchemaError("trajectory " + id + ": frame " + std::to_string(fi) + " missing object");
        s.push_back(oit->second);
      }
      z.states.push_back(std::move(s));
    }
    if (!has_motion[id]) {
      std::vector<bool> no(d.object_count, false);
      fill_derived(z, d.object_count, no, no);
    }
    d.trajectories.push_back(std::move(z));
  }
  try {
    d.validate();
  } catch (const std::invalid_argument& e) {
    throw SchemaError(e.what());
  }
  return d;
}

std::string dataset_to_csv(const Dataset& d) {
  std::string out;
  out += "# frame_rate " + format_double(d.frame_rate) + "\n";
  out += "# object_count " + std::to_string(d.object_count) + "\n";
  for (const auto& z : d.trajectories) {
    out += "# trajectory " + z.id + "\n";
    if (auto lab = d.label_of(z.id)) out += "# label " + z.id + " " + std::to_string(*lab) + "\n";
  }
  out += "trajectory_id,frame_index,object_index,x,y,vx,vy,ax,ay,present\n";
  for (const auto& z : d.trajectories) {
    for (std::size_t fi = 0; fi < z.size(); ++fi) {
      for (std::size_t o = 0; o < z.states[fi].size(); ++o) {
        const auto& s = z.states[fi][o];
        out += z.id + "," + std::to_string(fi) + "," + std::to_string(o) + "," + format_double(s.x) + "," +
               format_double(s.y) + "," + format_double(s.vx) + "," + format_double(s.vy) + "," +
               format_double(s.ax) + "," + format_double(s.ay) + "," + (s.present ? "1" : "0") + "\n";
      }
    }
  }
  return out;
}

Dataset load_dataset(const std::string& path, DataFormat format) {
  std::string text = read_file(path);
  return format == DataFormat::Json ? parse_dataset_json(text) : parse_dataset_csv(text);
}

void save_dataset(const Dataset& d, const std::string& path, DataFormat format) {
  write_file(path, format == DataFormat::Json ? dataset_to_json(d) : dataset_to_csv(d));
}

}  // namespace trajsynth
