// SPDX-License-Identifier: Apache-2.0
#include "dfd/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "dfd/error.hpp"

namespace dfd {

namespace {

std::string trim(std::string_view s) {
  std::size_t begin = 0, end = s.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
  return std::string(s.substr(begin, end - begin));
}

double parse_double(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("cannot parse '" + text + "' as a number for key '" + key +
                      "'");
  }
}

}  // namespace

KeyValueConfig KeyValueConfig::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_string(buffer.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

KeyValueConfig KeyValueConfig::parse_string(const std::string& text) {
  KeyValueConfig cfg;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos)
      line.resize(hash);
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line_no) +
                        ": expected 'key = value', got '" + stripped + "'");
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty())
      throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    cfg.entries_.emplace_back(key, value);
  }
  return cfg;
}

const std::string* KeyValueConfig::find_last(const std::string& key) const {
  const std::string* found = nullptr;
  for (const auto& [k, v] : entries_)
    if (k == key) found = &v;
  return found;
}

bool KeyValueConfig::has(const std::string& key) const {
  return find_last(key) != nullptr;
}

std::string KeyValueConfig::get_string(const std::string& key) const {
  if (const std::string* v = find_last(key)) return *v;
  throw ConfigError("missing required key '" + key + "'");
}

std::string KeyValueConfig::get_string(const std::string& key,
                                       const std::string& fallback) const {
  if (const std::string* v = find_last(key)) return *v;
  return fallback;
}

double KeyValueConfig::get_double(const std::string& key) const {
  return parse_double(key, get_string(key));
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
  if (const std::string* v = find_last(key)) return parse_double(key, *v);
  return fallback;
}

int KeyValueConfig::get_int(const std::string& key, int fallback) const {
  if (const std::string* v = find_last(key)) {
    const double d = parse_double(key, *v);
    const int i = static_cast<int>(d);
    if (static_cast<double>(i) != d)
      throw ConfigError("key '" + key + "' must be an integer, got '" + *v + "'");
    return i;
  }
  return fallback;
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
  const std::string* v = find_last(key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1" || *v == "on") return true;
  if (*v == "false" || *v == "0" || *v == "off") return false;
  throw ConfigError("key '" + key + "' must be a boolean, got '" + *v + "'");
}

std::vector<double> KeyValueConfig::get_double_list(const std::string& key) const {
  const std::string text = get_string(key);
  std::vector<double> values;
  std::string token;
  for (char ch : text) {
    if (ch == ',' || std::isspace(static_cast<unsigned char>(ch))) {
      if (!token.empty()) values.push_back(parse_double(key, token));
      token.clear();
    } else {
      token.push_back(ch);
    }
  }
  if (!token.empty()) values.push_back(parse_double(key, token));
  if (values.empty())
    throw ConfigError("key '" + key + "' must hold a non-empty list");
  return values;
}

std::vector<std::string> KeyValueConfig::get_all(const std::string& key) const {
  std::vector<std::string> values;
  for (const auto& [k, v] : entries_)
    if (k == key) values.push_back(v);
  return values;
}

void KeyValueConfig::set(const std::string& key, const std::string& value) {
  for (auto& [k, v] : entries_) {
    if (k == key) {
      v = value;
      return;
    }
  }
  entries_.emplace_back(key, value);
}

void KeyValueConfig::set(const std::string& key, double value) {
  set(key, format_double(value));
}

void KeyValueConfig::append(const std::string& key, const std::string& value) {
  entries_.emplace_back(key, value);
}

std::string KeyValueConfig::serialize() const {
  std::ostringstream out;
  for (const auto& [k, v] : entries_) out << k << " = " << v << "\n";
  return out.str();
}

void KeyValueConfig::write_file(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open config file for writing: " + path);
  out << serialize();
  if (!out) throw IoError("failed writing config file: " + path);
}

std::string format_double(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

CameraIntrinsics camera_from_config(const KeyValueConfig& cfg) {
  CameraIntrinsics cam;
  cam.focal_length = cfg.get_double("f");
  cam.f_number = cfg.get_double("N");
  cam.pixel_pitch = cfg.get_double("p", 1e-5);
  cam.focus_distances = cfg.get_double_list("focus_distances");
  cam.depth_min = cfg.get_double("depth_min");
  cam.depth_max = cfg.get_double("depth_max");
  if (auto bad = validate(cam)) throw ConfigError("invalid camera config: " + *bad);
  return cam;
}

KeyValueConfig camera_to_config(const CameraIntrinsics& cam) {
  KeyValueConfig cfg;
  cfg.set("f", cam.focal_length);
  cfg.set("N", cam.f_number);
  cfg.set("p", cam.pixel_pitch);
  std::string distances;
  for (std::size_t k = 0; k < cam.focus_distances.size(); ++k) {
    if (k) distances += ", ";
    distances += format_double(cam.focus_distances[k]);
  }
  cfg.set("focus_distances", distances);
  cfg.set("depth_min", cam.depth_min);
  cfg.set("depth_max", cam.depth_max);
  return cfg;
}

LossWeights weights_from_config(const KeyValueConfig& cfg) {
  LossWeights w;
  w.alpha = cfg.get_double("alpha", w.alpha);
  w.blur_beta = cfg.get_double("blur_beta", w.blur_beta);
  w.edge_beta = cfg.get_double("edge_beta", w.edge_beta);
  w.lambda_smooth = cfg.get_double("lambda_smooth", w.lambda_smooth);
  w.recon_scale = cfg.get_double("recon_scale", w.recon_scale);
  w.coarse_blur_scale = cfg.get_double("coarse_blur_scale", w.coarse_blur_scale);
  if (auto bad = validate(w)) throw ConfigError("invalid loss weights: " + *bad);
  return w;
}

KeyValueConfig weights_to_config(const LossWeights& w) {
  KeyValueConfig cfg;
  cfg.set("alpha", w.alpha);
  cfg.set("blur_beta", w.blur_beta);
  cfg.set("edge_beta", w.edge_beta);
  cfg.set("lambda_smooth", w.lambda_smooth);
  cfg.set("recon_scale", w.recon_scale);
  cfg.set("coarse_blur_scale", w.coarse_blur_scale);
  return cfg;
}

SolverConfig solver_from_config(const KeyValueConfig& cfg) {
  SolverConfig s;
  s.learning_rate = cfg.get_double("learning_rate", s.learning_rate);
  s.iterations = cfg.get_int("iterations", s.iterations);
  s.beta1 = cfg.get_double("beta1", s.beta1);
  s.beta2 = cfg.get_double("beta2", s.beta2);
  s.adam_epsilon = cfg.get_double("adam_epsilon", s.adam_epsilon);
  s.cosine_schedule = cfg.get_bool("cosine_schedule", s.cosine_schedule);
  s.init_strategy = cfg.get_string("init_strategy", s.init_strategy);
  s.convergence_tol = cfg.get_double("convergence_tol", s.convergence_tol);
  s.convergence_window = cfg.get_int("convergence_window", s.convergence_window);
  if (auto bad = validate(s)) throw ConfigError("invalid solver config: " + *bad);
  return s;
}

KeyValueConfig solver_to_config(const SolverConfig& s) {
  KeyValueConfig cfg;
  cfg.set("learning_rate", s.learning_rate);
  cfg.set("iterations", static_cast<double>(s.iterations));
  cfg.set("beta1", s.beta1);
  cfg.set("beta2", s.beta2);
  cfg.set("adam_epsilon", s.adam_epsilon);
  cfg.set("cosine_schedule", s.cosine_schedule ? "true" : "false");
  cfg.set("init_strategy", s.init_strategy);
  cfg.set("convergence_tol", s.convergence_tol);
  cfg.set("convergence_window", static_cast<double>(s.convergence_window));
  return cfg;
}

std::uint64_t fnv1a_hash(std::string_view text) {
  std::uint64_t hash = 0xcbf29ce484222325ull;
  for (unsigned char ch : text) {
    hash ^= ch;
    hash *= 0x100000001b3ull;
  }
  return hash;
}

}  // namespace dfd
