// SPDX-License-Identifier: Apache-2.0

#include "biped_gait/gait_app.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace biped {

using Json = nlohmann::ordered_json;

void RunConfig::validate() const {
  robot.validate();
  problem.validate();
  ga.validate();
  refine.validate();
  penalty.validate();
  if (output_dir.empty()) throw GaitError(ErrorCode::kInvalidArgument, "output directory is empty");
}

namespace {

[[noreturn]] void parse_fail(const std::string& what) {
  throw GaitError(ErrorCode::kParseError, what);
}

// Reads the keys of one config section and rejects the ones nobody asked for.
class Section {
 public:
  Section(const Json& root, const char* name) : name_(name) {
    if (!root.contains(name)) return;
    node_ = &root.at(name);
    if (!node_->is_object()) parse_fail(std::string("section '") + name + "' must be an object");
  }

  template <typename T>
  void read(const char* key, T& out) {
    const Json* v = find(key);
    if (!v) return;
    if constexpr (std::is_same_v<T, bool>) {
      if (!v->is_boolean()) bad(key, "a boolean");
      out = v->get<bool>();
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v->is_string()) bad(key, "a string");
      out = v->get<std::string>();
    } else if constexpr (std::is_same_v<T, std::uint64_t>) {
      if (!v->is_number_unsigned()) bad(key, "a non-negative integer");
      out = v->get<std::uint64_t>();
    } else if constexpr (std::is_integral_v<T>) {
      if (!v->is_number_integer()) bad(key, "an integer");
      out = v->get<T>();
    } else {
      if (!v->is_number()) bad(key, "a number");
      out = v->get<double>();
    }
  }

  void read_array(const char* key, double* out, std::size_t n) {
    const Json* v = find(key);
    if (!v) return;
    if (!v->is_array() || v->size() != n) bad(key, ("an array of " + std::to_string(n) + " numbers").c_str());
    for (std::size_t i = 0; i < n; ++i) {
      if (!(*v)[i].is_number()) bad(key, "numeric");
      out[i] = (*v)[i].get<double>();
    }
  }

  void read_vector(const char* key, std::vector<double>& out) {
    const Json* v = find(key);
    if (!v) return;
    if (!v->is_array() || v->empty()) bad(key, "a non-empty array of numbers");
    out.clear();
    for (const auto& x : *v) {
      if (!x.is_number()) bad(key, "numeric");
      out.push_back(x.get<double>());
    }
  }

  void finish() const {
    if (!node_) return;
    for (const auto& [key, value] : node_->items()) {
      if (!seen_.count(key)) parse_fail("unknown key '" + name_ + "." + key + "'");
    }
  }

 private:
  const Json* find(const char* key) {
    seen_.insert(key);
    if (!node_ || !node_->contains(key)) return nullptr;
    return &node_->at(key);
  }

  [[noreturn]] void bad(const char* key, const char* expected) const {
    parse_fail("'" + name_ + "." + key + "' must be " + expected);
  }

  std::string name_;
  const Json* node_ = nullptr;
  std::set<std::string> seen_;
};

Json array_of(const double* v, std::size_t n) {
  Json a = Json::array();
  for (std::size_t i = 0; i < n; ++i) a.push_back(v[i]);
  return a;
}

}  // namespace

RunConfig parse_run_config(std::string_view text) {
  Json root;
  try {
    root = Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    parse_fail(std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) parse_fail("config must be a JSON object");
  static const std::set<std::string> kSections{"robot", "problem", "ga", "refine", "penalty", "run"};
  for (const auto& [key, value] : root.items()) {
    if (!kSections.count(key)) parse_fail("unknown section '" + key + "'");
  }

  RunConfig cfg;
  {
    Section s(root, "robot");
    s.read_array("mass", cfg.robot.mass.data(), 5);
    s.read_array("inertia", cfg.robot.inertia.data(), 5);
    s.read_array("length", cfg.robot.length.data(), 5);
    s.read_array("com_offset", cfg.robot.com_offset.data(), 5);
    s.read("gravity", cfg.robot.gravity);
    s.finish();
  }
  {
    Section s(root, "problem");
    auto& p = cfg.problem;
    s.read("knee_upper_stance", p.knee_upper_stance);
    s.read("knee_upper_swing", p.knee_upper_swing);
    s.read("torque_max", p.torque_max);
    s.read("rate_max", p.rate_max);
    s.read("friction", p.friction);
    s.read("step_length", p.step_length);
    s.read("velocity", p.velocity);
    s.read_array("q_init", p.q_init.data(), 5);
    s.read_array("q_final", p.q_final.data(), 5);
    s.read("grid_size", p.grid_size);
    s.read("clearance_margin", p.clearance_margin);
    s.read("normal_force_margin", p.normal_force_margin);
    s.finish();
  }
  {
    Section s(root, "ga");
    auto& g = cfg.ga;
    s.read("population", g.population);
    s.read("init_lower", g.init_lower);
    s.read("init_upper", g.init_upper);
    s.read("elite_count", g.elite_count);
    s.read("crossover_fraction", g.crossover_fraction);
    s.read("migration_fraction", g.migration_fraction);
    s.read("migration_interval", g.migration_interval);
    s.read("islands", g.islands);
    s.read("stall_generations", g.stall_generations);
    s.read("stall_tolerance", g.stall_tolerance);
    s.read("max_evaluations", g.max_evaluations);
    s.read("mutation_scale", g.mutation_scale);
    s.read("mutation_shrink", g.mutation_shrink);
    s.read("spread_mutation", g.spread_mutation);
    s.read("blend_alpha", g.blend_alpha);
    s.read("gene_limit", g.gene_limit);
    s.read("threads", g.threads);
    s.finish();
  }
  {
    Section s(root, "refine");
    auto& r = cfg.refine;
    s.read("max_iterations", r.max_iterations);
    s.read("fd_step", r.fd_step);
    s.read("step_tolerance", r.step_tolerance);
    s.read("initial_damping", r.initial_damping);
    s.read("max_damping_trials", r.max_damping_trials);
    s.finish();
  }
  {
    Section s(root, "penalty");
    s.read_vector("equality_weights", cfg.penalty.equality_weights);
    s.read_vector("inequality_weights", cfg.penalty.inequality_weights);
    s.read("violation_threshold", cfg.penalty.violation_threshold);
    s.finish();
  }
  {
    Section s(root, "run");
    s.read("seed", cfg.seed);
    s.read("output_dir", cfg.output_dir);
    s.finish();
  }
  // One threshold governs the report, the refinement success flag and the
  // constraint evaluation.
  cfg.problem.violation_threshold = cfg.penalty.violation_threshold;
  cfg.refine.violation_tolerance = cfg.penalty.violation_threshold;
  cfg.ga.seed = cfg.seed;
  cfg.validate();
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw GaitError(ErrorCode::kIoError, "cannot read config '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str());
}

std::string run_config_to_json(const RunConfig& cfg) {
  Json root;
  const auto& r = cfg.robot;
  root["robot"] = {{"mass", array_of(r.mass.data(), 5)},
                   {"inertia", array_of(r.inertia.data(), 5)},
                   {"length", array_of(r.length.data(), 5)},
                   {"com_offset", array_of(r.com_offset.data(), 5)},
                   {"gravity", r.gravity}};
  const auto& p = cfg.problem;
  root["problem"] = {{"knee_upper_stance", p.knee_upper_stance},
                     {"knee_upper_swing", p.knee_upper_swing},
                     {"torque_max", p.torque_max},
                     {"rate_max", p.rate_max},
                     {"friction", p.friction},
                     {"step_length", p.step_length},
                     {"velocity", p.velocity},
                     {"q_init", array_of(p.q_init.data(), 5)},
                     {"q_final", array_of(p.q_final.data(), 5)},
                     {"grid_size", p.grid_size},
                     {"clearance_margin", p.clearance_margin},
                     {"normal_force_margin", p.normal_force_margin}};
  const auto& g = cfg.ga;
  root["ga"] = {{"population", g.population},
                {"init_lower", g.init_lower},
                {"init_upper", g.init_upper},
                {"elite_count", g.elite_count},
                {"crossover_fraction", g.crossover_fraction},
                {"migration_fraction", g.migration_fraction},
                {"migration_interval", g.migration_interval},
                {"islands", g.islands},
                {"stall_generations", g.stall_generations},
                {"stall_tolerance", g.stall_tolerance},
                {"max_evaluations", g.max_evaluations},
                {"mutation_scale", g.mutation_scale},
                {"mutation_shrink", g.mutation_shrink},
                {"spread_mutation", g.spread_mutation},
                {"blend_alpha", g.blend_alpha},
                {"gene_limit", g.gene_limit},
                {"threads", g.threads}};
  const auto& f = cfg.refine;
  root["refine"] = {{"max_iterations", f.max_iterations},
                    {"fd_step", f.fd_step},
                    {"step_tolerance", f.step_tolerance},
                    {"initial_damping", f.initial_damping},
                    {"max_damping_trials", f.max_damping_trials}};
  root["penalty"] = {{"equality_weights", cfg.penalty.equality_weights},
                     {"inequality_weights", cfg.penalty.inequality_weights},
                     {"violation_threshold", cfg.penalty.violation_threshold}};
  root["run"] = {{"seed", cfg.seed}, {"output_dir", cfg.output_dir}};
  return root.dump(2) + "\n";
}

PolynomialGait parse_gait(std::string_view text) {
  std::vector<double> coeffs;
  double duration = 0.0;
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string_view::npos && text[first] == '{') {
    Json root;
    try {
      root = Json::parse(text.begin(), text.end());
    } catch (const Json::parse_error& e) {
      parse_fail(std::string("gait file is not valid JSON: ") + e.what());
    }
    const Json* g = &root;
    if (root.contains("gait")) g = &root.at("gait");
    if (!g->is_object() || !g->contains("coefficients") || !g->contains("duration")) {
      parse_fail("gait needs 'coefficients' and 'duration'");
    }
    const Json& c = g->at("coefficients");
    if (!c.is_array()) parse_fail("'coefficients' must be an array");
    for (const auto& x : c) {
      if (!x.is_number()) parse_fail("'coefficients' must be numeric");
      coeffs.push_back(x.get<double>());
    }
    if (!g->at("duration").is_number()) parse_fail("'duration' must be a number");
    duration = g->at("duration").get<double>();
  } else {
    std::istringstream in{std::string(text)};
    std::string token;
    std::vector<double> all;
    while (in >> token) {
      try {
        std::size_t used = 0;
        all.push_back(std::stod(token, &used));
        if (used != token.size()) throw std::invalid_argument(token);
      } catch (const std::exception&) {
        parse_fail("gait file holds a non-numeric token '" + token + "'");
      }
    }
    if (all.size() != kJoints * kCoeffsPerJoint + 1) {
      parse_fail("plain gait file needs 25 coefficients and the duration");
    }
    duration = all.back();
    all.pop_back();
    coeffs = std::move(all);
  }
  if (coeffs.size() != static_cast<std::size_t>(kJoints * kCoeffsPerJoint)) {
    parse_fail("gait needs exactly 25 coefficients");
  }
  if (!(duration > 0.0) || !std::isfinite(duration)) parse_fail("gait duration must be positive");
  PolynomialGait gait;
  gait.duration = duration;
  for (int k = 0; k < kJoints; ++k) {
    for (int i = 0; i < kCoeffsPerJoint; ++i) {
      const double v = coeffs[static_cast<std::size_t>(k * kCoeffsPerJoint + i)];
      if (!std::isfinite(v)) parse_fail("gait coefficients must be finite");
      gait.alpha(k, i) = v;
    }
  }
  return gait;
}

PolynomialGait load_gait(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw GaitError(ErrorCode::kIoError, "cannot read gait '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_gait(buf.str());
}

std::string gait_to_json(const PolynomialGait& gait) {
  Json c = Json::array();
  for (int k = 0; k < kJoints; ++k) {
    for (int i = 0; i < kCoeffsPerJoint; ++i) c.push_back(gait.alpha(k, i));
  }
  Json root;
  root["coefficients"] = c;
  root["duration"] = gait.duration;
  return root.dump(2) + "\n";
}

void write_file_atomic(const std::filesystem::path& path, std::string_view text) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw GaitError(ErrorCode::kIoError, "cannot write '" + tmp.string() + "'");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    out.flush();
    if (!out) throw GaitError(ErrorCode::kIoError, "short write to '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw GaitError(ErrorCode::kIoError, "cannot move output into '" + path.string() + "'");
  }
}

}  // namespace biped
