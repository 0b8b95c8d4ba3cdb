#include "relpose/config_io.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>

#include "json.hpp"
#include "relpose/errors.hpp"

namespace relpose {
namespace {

using Json = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& path, const std::string& message) {
  throw ConfigError(path + ": " + message);
}

void reject_unknown_keys(const Json& node, const std::string& path,
                         std::initializer_list<const char*> allowed) {
  for (const auto& item : node.items()) {
    bool known = false;
    for (const char* key : allowed) {
      if (item.key() == key) {
        known = true;
        break;
      }
    }
    if (!known) {
      fail(path.empty() ? item.key() : path + "." + item.key(), "unknown key");
    }
  }
}

void require_object(const Json& node, const std::string& path) {
  if (!node.is_object()) {
    fail(path, "expected an object");
  }
}

double as_number(const Json& node, const std::string& path) {
  if (!node.is_number()) {
    fail(path, "expected a number");
  }
  return node.get<double>();
}

int as_int(const Json& node, const std::string& path) {
  if (!node.is_number_integer()) {
    fail(path, "expected an integer");
  }
  return node.get<int>();
}

std::uint64_t as_seed(const Json& node, const std::string& path) {
  if (!node.is_number_unsigned()) {
    fail(path, "expected a nonnegative integer");
  }
  return node.get<std::uint64_t>();
}

Vec3 as_vec3(const Json& node, const std::string& path) {
  if (!node.is_array() || node.size() != 3) {
    fail(path, "expected a list of 3 numbers");
  }
  Vec3 v;
  for (int i = 0; i < 3; ++i) {
    v[i] = as_number(node[i], path + "[" + std::to_string(i) + "]");
  }
  return v;
}

Mat3 as_mat3(const Json& node, const std::string& path) {
  if (!node.is_array() || node.size() != 9) {
    fail(path, "expected a row-major list of 9 numbers");
  }
  Mat3 m;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      const int k = 3 * r + c;
      m(r, c) = as_number(node[k], path + "[" + std::to_string(k) + "]");
    }
  }
  return m;
}

Eigen::MatrixXd as_square_matrix(const Json& node, const std::string& path) {
  if (!node.is_array() || node.empty()) {
    fail(path, "expected a nonempty row-major list");
  }
  const auto total = static_cast<Eigen::Index>(node.size());
  const auto dim =
      static_cast<Eigen::Index>(std::llround(std::sqrt(double(total))));
  if (dim * dim != total) {
    fail(path, "row-major list of " + std::to_string(total) +
                   " numbers is not a square matrix");
  }
  Eigen::MatrixXd m(dim, dim);
  for (Eigen::Index r = 0; r < dim; ++r) {
    for (Eigen::Index c = 0; c < dim; ++c) {
      const Eigen::Index k = dim * r + c;
      m(r, c) = as_number(node[static_cast<std::size_t>(k)],
                          path + "[" + std::to_string(k) + "]");
    }
  }
  return m;
}

Twist as_twist(const Json& node, const std::string& path) {
  require_object(node, path);
  reject_unknown_keys(node, path, {"omega", "nu"});
  Twist xi;
  if (node.contains("omega")) {
    xi.omega = as_vec3(node["omega"], path + ".omega");
  }
  if (node.contains("nu")) {
    xi.nu = as_vec3(node["nu"], path + ".nu");
  }
  return xi;
}

Pose as_pose(const Json& node, const std::string& path) {
  require_object(node, path);
  reject_unknown_keys(node, path, {"R", "b"});
  Pose g;
  if (node.contains("R")) {
    g.R = as_mat3(node["R"], path + ".R");
  }
  if (node.contains("b")) {
    g.b = as_vec3(node["b"], path + ".b");
  }
  return g;
}

VelocitySource as_velocity_source(const Json& node, const std::string& path) {
  const char* expected =
      "expected \"filtered\", \"direct\", or \"truth\"";
  if (!node.is_string()) {
    fail(path, expected);
  }
  const std::string value = node.get<std::string>();
  if (value == "filtered") {
    return VelocitySource::filtered;
  }
  if (value == "direct") {
    return VelocitySource::direct;
  }
  if (value == "truth") {
    return VelocitySource::truth;
  }
  fail(path, "unknown value \"" + value + "\"; " + expected);
}

StepperMode as_mode(const Json& node, const std::string& path) {
  const char* expected = "expected \"lgvi\" or \"rk4\"";
  if (!node.is_string()) {
    fail(path, expected);
  }
  const std::string value = node.get<std::string>();
  if (value == "lgvi") {
    return StepperMode::lgvi;
  }
  if (value == "rk4") {
    return StepperMode::rk4;
  }
  fail(path, "unknown value \"" + value + "\"; " + expected);
}

ScenarioConfig from_json(const Json& root) {
  require_object(root, "config");
  reject_unknown_keys(root, "",
                      {"duration", "dt", "features", "g0", "truth_twist",
                       "noise", "gains", "g_hat0", "xi_hat0",
                       "velocity_source", "filter_cutoff_hz", "mode", "newton",
                       "record_stride"});

  ScenarioConfig config;
  if (root.contains("duration")) {
    config.duration = as_number(root["duration"], "duration");
  }
  if (root.contains("dt")) {
    config.dt = as_number(root["dt"], "dt");
  }
  if (root.contains("features")) {
    const Json& node = root["features"];
    if (!node.is_array()) {
      fail("features", "expected a list of 3-vectors");
    }
    config.features.points.clear();
    for (std::size_t i = 0; i < node.size(); ++i) {
      config.features.points.push_back(
          as_vec3(node[i], "features[" + std::to_string(i) + "]"));
    }
  }
  if (root.contains("g0")) {
    config.g0 = as_pose(root["g0"], "g0");
  }
  if (root.contains("truth_twist")) {
    const Json& node = root["truth_twist"];
    require_object(node, "truth_twist");
    reject_unknown_keys(node, "truth_twist",
                        {"base", "amplitude", "frequency_hz"});
    if (node.contains("base")) {
      config.truth_twist.base = as_twist(node["base"], "truth_twist.base");
    }
    if (node.contains("amplitude")) {
      config.truth_twist.amplitude =
          as_twist(node["amplitude"], "truth_twist.amplitude");
    }
    if (node.contains("frequency_hz")) {
      config.truth_twist.frequency_hz =
          as_number(node["frequency_hz"], "truth_twist.frequency_hz");
    }
  }
  if (root.contains("noise")) {
    const Json& node = root["noise"];
    require_object(node, "noise");
    reject_unknown_keys(node, "noise",
                        {"position_width", "velocity_width", "seed"});
    if (node.contains("position_width")) {
      config.noise.position_width =
          as_number(node["position_width"], "noise.position_width");
    }
    if (node.contains("velocity_width")) {
      config.noise.velocity_width =
          as_number(node["velocity_width"], "noise.velocity_width");
    }
    if (node.contains("seed")) {
      config.noise.seed = as_seed(node["seed"], "noise.seed");
    }
  }
  if (root.contains("gains")) {
    const Json& node = root["gains"];
    require_object(node, "gains");
    reject_unknown_keys(node, "gains",
                        {"J", "M", "Dr", "Dt", "kappa", "W", "phi"});
    if (node.contains("J")) {
      config.gains.J = as_mat3(node["J"], "gains.J");
    }
    if (node.contains("M")) {
      config.gains.M = as_mat3(node["M"], "gains.M");
    }
    if (node.contains("Dr")) {
      config.gains.Dr = as_mat3(node["Dr"], "gains.Dr");
    }
    if (node.contains("Dt")) {
      config.gains.Dt = as_mat3(node["Dt"], "gains.Dt");
    }
    if (node.contains("kappa")) {
      config.gains.kappa = as_number(node["kappa"], "gains.kappa");
    }
    if (node.contains("W")) {
      config.gains.W = as_square_matrix(node["W"], "gains.W");
    }
    if (node.contains("phi")) {
      const Json& phi = node["phi"];
      require_object(phi, "gains.phi");
      reject_unknown_keys(phi, "gains.phi", {"quadratic"});
      if (phi.contains("quadratic")) {
        config.gains.phi.quadratic =
            as_number(phi["quadratic"], "gains.phi.quadratic");
      }
    }
  }
  if (root.contains("g_hat0")) {
    config.g_hat0 = as_pose(root["g_hat0"], "g_hat0");
  }
  if (root.contains("xi_hat0")) {
    config.xi_hat0 = as_twist(root["xi_hat0"], "xi_hat0");
  }
  if (root.contains("velocity_source")) {
    config.velocity_source =
        as_velocity_source(root["velocity_source"], "velocity_source");
  }
  if (root.contains("filter_cutoff_hz")) {
    config.filter_cutoff_hz =
        as_number(root["filter_cutoff_hz"], "filter_cutoff_hz");
  }
  if (root.contains("mode")) {
    config.mode = as_mode(root["mode"], "mode");
  }
  if (root.contains("newton")) {
    const Json& node = root["newton"];
    require_object(node, "newton");
    reject_unknown_keys(node, "newton", {"tolerance", "max_iterations"});
    if (node.contains("tolerance")) {
      config.newton.tolerance = as_number(node["tolerance"], "newton.tolerance");
    }
    if (node.contains("max_iterations")) {
      config.newton.max_iterations =
          as_int(node["max_iterations"], "newton.max_iterations");
    }
  }
  if (root.contains("record_stride")) {
    config.record_stride = as_int(root["record_stride"], "record_stride");
  }

  if (config.gains.W.size() == 0) {
    const auto n = static_cast<Eigen::Index>(config.features.size());
    const Eigen::Index pairs = n * (n - 1) / 2;
    config.gains.W = Eigen::MatrixXd::Identity(pairs, pairs);
  }
  config.validate();
  return config;
}

Json vec3_json(const Vec3& v) {
  return Json::array({v.x(), v.y(), v.z()});
}

Json mat3_json(const Mat3& m) {
  Json a = Json::array();
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      a.push_back(m(r, c));
    }
  }
  return a;
}

Json matrix_json(const Eigen::MatrixXd& m) {
  Json a = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      a.push_back(m(r, c));
    }
  }
  return a;
}

Json twist_json(const Twist& xi) {
  Json node = Json::object();
  node["omega"] = vec3_json(xi.omega);
  node["nu"] = vec3_json(xi.nu);
  return node;
}

Json pose_json(const Pose& g) {
  Json node = Json::object();
  node["R"] = mat3_json(g.R);
  node["b"] = vec3_json(g.b);
  return node;
}

const char* velocity_source_name(VelocitySource source) {
  switch (source) {
    case VelocitySource::filtered:
      return "filtered";
    case VelocitySource::direct:
      return "direct";
    case VelocitySource::truth:
      return "truth";
  }
  return "filtered";
}

}  // namespace

ScenarioConfig parse_config(const std::string& text) {
  Json root;
  try {
    root = Json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const nlohmann::json::exception& err) {
    throw ConfigError(std::string("config: ") + err.what());
  }
  return from_json(root);
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream file(path);
  if (!file) {
    throw IoError(path + ": cannot read config file");
  }
  std::ostringstream contents;
  contents << file.rdbuf();
  try {
    return parse_config(contents.str());
  } catch (const ConfigError& err) {
    throw ConfigError(path + ": " + err.what());
  }
}

std::string serialize_config(const ScenarioConfig& config) {
  Json root = Json::object();
  root["duration"] = config.duration;
  root["dt"] = config.dt;
  Json features = Json::array();
  for (const Vec3& point : config.features.points) {
    features.push_back(vec3_json(point));
  }
  root["features"] = features;
  root["g0"] = pose_json(config.g0);
  Json twist = Json::object();
  twist["base"] = twist_json(config.truth_twist.base);
  twist["amplitude"] = twist_json(config.truth_twist.amplitude);
  twist["frequency_hz"] = config.truth_twist.frequency_hz;
  root["truth_twist"] = twist;
  Json noise = Json::object();
  noise["position_width"] = config.noise.position_width;
  noise["velocity_width"] = config.noise.velocity_width;
  noise["seed"] = config.noise.seed;
  root["noise"] = noise;
  Json gains = Json::object();
  gains["J"] = mat3_json(config.gains.J);
  gains["M"] = mat3_json(config.gains.M);
  gains["Dr"] = mat3_json(config.gains.Dr);
  gains["Dt"] = mat3_json(config.gains.Dt);
  gains["kappa"] = config.gains.kappa;
  gains["W"] = matrix_json(config.gains.W);
  Json phi = Json::object();
  phi["quadratic"] = config.gains.phi.quadratic;
  gains["phi"] = phi;
  root["gains"] = gains;
  root["g_hat0"] = pose_json(config.g_hat0);
  root["xi_hat0"] = twist_json(config.xi_hat0);
  root["velocity_source"] = velocity_source_name(config.velocity_source);
  root["filter_cutoff_hz"] = config.filter_cutoff_hz;
  root["mode"] = config.mode == StepperMode::rk4 ? "rk4" : "lgvi";
  Json newton = Json::object();
  newton["tolerance"] = config.newton.tolerance;
  newton["max_iterations"] = config.newton.max_iterations;
  root["newton"] = newton;
  root["record_stride"] = config.record_stride;
  return root.dump(2) + "\n";
}

void save_config(const ScenarioConfig& config, const std::string& path) {
  std::ofstream file(path);
  if (!file) {
    throw IoError(path + ": cannot open for writing");
  }
  file << serialize_config(config);
  if (!file.good()) {
    throw IoError(path + ": write failed");
  }
}

}  // namespace relpose
