#include "ecsim/config.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include "ecsim/characterization.hpp"
#include "ecsim/csv.hpp"
#include "ecsim/errors.hpp"

namespace ecsim {

namespace {

using nlohmann::json;

json default_json() {
  return json{
      {"inclusion",
       {{"z", {0.0, 0.0, 0.0}},
        {"alpha", 0.01},
        {"mu0", 1.2566e-6},
        {"mu_star", 1.2566e-6},
        {"sigma_star", 5.96e7},
        {"omega", 133.5},
        {"polarization",
         {{"mode", "sphere"}, {"re", kSpherePolarizationNu1.real()},
          {"im", kSpherePolarizationNu1.imag()}}}}},
      {"array",
       {{"extent", {{-2.0, -2.0}, {2.0, 2.0}}},
        {"counts", {16, 16}},
        {"height", 1.0},
        {"p", {0.0, 0.0, 1.0}},
        {"q", {0.0, 0.0, 1.0}}}},
      {"noise", {{"sigma_n", 0.0}, {"seed", 1}, {"acquisition", "hadamard"}}},
      {"detection", {{"delta", 0.05}, {"trials", 1000}}},
      {"imaging",
       {{"box", {{-0.5, -0.5, -0.5}, {0.5, 0.5, 0.5}}},
        {"resolution", {21, 21, 21}},
        {"rank", 3}}},
      {"output", {{"dir", "out"}}}};
}

class Validator {
 public:
  void error(const std::string& field, const std::string& what) {
    errors_.push_back(field + ": " + what);
  }

  void finish() const {
    if (errors_.empty()) return;
    std::ostringstream msg;
    msg << "invalid configuration (" << errors_.size() << " problem"
        << (errors_.size() > 1 ? "s" : "") << "):";
    for (const auto& e : errors_) msg << "\n  - " << e;
    throw config_error(msg.str());
  }

  bool ok() const { return errors_.empty(); }

 private:
  std::vector<std::string> errors_;
};

// Overlays user values onto the defaults, rejecting unknown keys.
void merge(const json& defaults, const json& user, json& out, const std::string& path,
           Validator& v) {
  out = defaults;
  if (!user.is_object()) {
    v.error(path.empty() ? "<root>" : path, "expected an object");
    return;
  }
  for (const auto& [key, value] : user.items()) {
    const std::string field = path.empty() ? key : path + "." + key;
    if (!defaults.contains(key) && !(path == "noise" && key == "target_ratio")) {
      v.error(field, "unknown field");
      continue;
    }
    if (defaults.contains(key) && defaults[key].is_object()) {
      merge(defaults[key], value, out[key], field, v);
    } else {
      out[key] = value;
    }
  }
}

double require_number(const json& j, const std::string& field, Validator& v) {
  if (!j.is_number()) {
    v.error(field, "expected a number");
    return 0.0;
  }
  return j.get<double>();
}

Vec3 require_vec3(const json& j, const std::string& field, Validator& v) {
  if (!j.is_array() || j.size() != 3 || !j[0].is_number() || !j[1].is_number() ||
      !j[2].is_number()) {
    v.error(field, "expected an array of 3 numbers");
    return Vec3::Zero();
  }
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

}  // namespace

std::uint64_t ScenarioConfig::hash() const { return fnv1a64(canonical.dump()); }

double ScenarioConfig::resolve_sigma_n(double sigma1_a0) const {
  if (sigma_n) return *sigma_n;
  return sigma1_a0 / *target_ratio;
}

ScenarioConfig default_config() { return parse_config(json::object()); }

ScenarioConfig parse_config(const json& user) {
  Validator v;
  json j;
  merge(default_json(), user, j, "", v);
  // target_ratio has no default (it conflicts with sigma_n); keep it if given.
  if (user.is_object() && user.contains("noise") && user["noise"].is_object() &&
      user["noise"].contains("target_ratio"))
    j["noise"]["target_ratio"] = user["noise"]["target_ratio"];
  if (!v.ok()) v.finish();

  ScenarioConfig cfg;

  const json& inc = j["inclusion"];
  cfg.inclusion.z = require_vec3(inc["z"], "inclusion.z", v);
  cfg.inclusion.alpha = require_number(inc["alpha"], "inclusion.alpha", v);
  cfg.inclusion.mu0 = require_number(inc["mu0"], "inclusion.mu0", v);
  cfg.inclusion.mu_star = require_number(inc["mu_star"], "inclusion.mu_star", v);
  cfg.inclusion.sigma_star = require_number(inc["sigma_star"], "inclusion.sigma_star", v);
  cfg.inclusion.omega = require_number(inc["omega"], "inclusion.omega", v);
  try {
    cfg.inclusion.validate();
  } catch (const config_error& e) {
    v.error("inclusion", e.what());
  }

  const json& pol = inc["polarization"];
  const std::string mode = pol["mode"].is_string() ? pol["mode"].get<std::string>() : "";
  if (mode == "sphere") {
    cfg.polarization = PolarizationData::sphere(
        Complex(require_number(pol["re"], "inclusion.polarization.re", v),
                require_number(pol["im"], "inclusion.polarization.im", v)));
  } else if (mode == "table") {
    if (!pol.contains("path") || !pol["path"].is_string()) {
      v.error("inclusion.polarization.path", "table mode needs a CSV path");
    } else if (v.ok()) {
      try {
        const MTable table = MTable::load_csv(pol["path"].get<std::string>());
        cfg.polarization =
            PolarizationData::sphere(table.at(derive_params(cfg.inclusion).nu));
      } catch (const std::exception& e) {
        v.error("inclusion.polarization", e.what());
      }
    }
  } else {
    v.error("inclusion.polarization.mode", "expected \"sphere\" or \"table\"");
  }

  const json& arr = j["array"];
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  if (!arr["extent"].is_array() || arr["extent"].size() != 2) {
    v.error("array.extent", "expected [[xmin,ymin],[xmax,ymax]]");
  } else {
    x0 = require_number(arr["extent"][0][0], "array.extent[0][0]", v);
    y0 = require_number(arr["extent"][0][1], "array.extent[0][1]", v);
    x1 = require_number(arr["extent"][1][0], "array.extent[1][0]", v);
    y1 = require_number(arr["extent"][1][1], "array.extent[1][1]", v);
    if (!(x1 > x0) || !(y1 > y0)) v.error("array.extent", "max corner must exceed min corner");
  }
  int nx = 0, ny = 0;
  if (!arr["counts"].is_array() || arr["counts"].size() != 2 ||
      !arr["counts"][0].is_number_integer() || !arr["counts"][1].is_number_integer()) {
    v.error("array.counts", "expected two integer grid counts");
  } else {
    nx = arr["counts"][0].get<int>();
    ny = arr["counts"][1].get<int>();
    if (nx < 1 || ny < 1) v.error("array.counts", "grid counts must be >= 1");
  }
  const double height = require_number(arr["height"], "array.height", v);
  Vec3 p = require_vec3(arr["p"], "array.p", v);
  Vec3 q = require_vec3(arr["q"], "array.q", v);
  if (p.norm() <= 0.0)
    v.error("array.p", "zero direction");
  else
    p.normalize();
  if (q.norm() <= 0.0)
    v.error("array.q", "zero direction");
  else
    q.normalize();

  // Coincident transmitter/receiver grids, row-major over (ix, iy):
  // sensor index = ix * ny + iy.
  if (v.ok() && nx >= 1 && ny >= 1) {
    for (int ix = 0; ix < nx; ++ix) {
      for (int iy = 0; iy < ny; ++iy) {
        const double x = nx > 1 ? x0 + ix * (x1 - x0) / (nx - 1) : 0.5 * (x0 + x1);
        const double y = ny > 1 ? y0 + iy * (y1 - y0) / (ny - 1) : 0.5 * (y0 + y1);
        const Vec3 pos(x, y, height);
        cfg.array.sources.push_back({pos, p});
        cfg.array.receivers.push_back({pos, q});
      }
    }
    try {
      cfg.array.validate(cfg.inclusion.z);
    } catch (const config_error& e) {
      v.error("array", e.what());
    }
  }

  const json& noise = j["noise"];
  const bool has_ratio = noise.contains("target_ratio");
  if (has_ratio) {
    if (user.contains("noise") && user["noise"].is_object() &&
        user["noise"].contains("sigma_n"))
      v.error("noise", "give either sigma_n or target_ratio, not both");
    const double ratio = require_number(noise["target_ratio"], "noise.target_ratio", v);
    if (!(ratio > 0.0))
      v.error("noise.target_ratio", "must be positive");
    else
      cfg.target_ratio = ratio;
  } else {
    const double sn = require_number(noise["sigma_n"], "noise.sigma_n", v);
    if (!(sn >= 0.0))
      v.error("noise.sigma_n", "must be >= 0");
    else
      cfg.sigma_n = sn;
  }
  if (!noise["seed"].is_number_unsigned() && !noise["seed"].is_number_integer())
    v.error("noise.seed", "expected an integer seed");
  else
    cfg.seed = noise["seed"].get<std::uint64_t>();
  const std::string acq =
      noise["acquisition"].is_string() ? noise["acquisition"].get<std::string>() : "";
  if (acq == "standard") {
    cfg.acquisition = AcquisitionMode::Standard;
  } else if (acq == "hadamard") {
    cfg.acquisition = AcquisitionMode::Hadamard;
    const int m = nx * ny;
    if (m >= 1 && !std::has_single_bit(static_cast<unsigned>(m)))
      v.error("noise.acquisition",
              "Hadamard acquisition needs a power-of-two source count, but the array has M = " +
                  std::to_string(m) + " sources");
  } else {
    v.error("noise.acquisition", "expected \"standard\" or \"hadamard\"");
  }

  const json& det = j["detection"];
  cfg.delta = require_number(det["delta"], "detection.delta", v);
  if (!(cfg.delta > 1e-6 && cfg.delta < 1.0 - 1e-6))
    v.error("detection.delta", "false-alarm rate must lie in (1e-6, 1-1e-6)");
  if (!det["trials"].is_number_integer() || det["trials"].get<int>() < 1)
    v.error("detection.trials", "expected a positive integer");
  else
    cfg.trials = det["trials"].get<int>();

  const json& img = j["imaging"];
  if (!img["box"].is_array() || img["box"].size() != 2) {
    v.error("imaging.box", "expected [[x,y,z] lo, [x,y,z] hi]");
  } else {
    cfg.grid.lo = require_vec3(img["box"][0], "imaging.box[0]", v);
    cfg.grid.hi = require_vec3(img["box"][1], "imaging.box[1]", v);
  }
  if (!img["resolution"].is_array() || img["resolution"].size() != 3) {
    v.error("imaging.resolution", "expected three integer counts");
  } else {
    for (int a = 0; a < 3; ++a) {
      if (!img["resolution"][a].is_number_integer() || img["resolution"][a].get<int>() < 2)
        v.error("imaging.resolution", "needs >= 2 nodes per axis");
      else
        cfg.grid.counts[a] = img["resolution"][a].get<int>();
    }
  }
  if (!img["rank"].is_number_integer() || img["rank"].get<int>() < 1)
    v.error("imaging.rank", "expected a positive integer");
  else
    cfg.music_rank = img["rank"].get<int>();

  // Sensors must stay outside the search box.
  for (std::size_t i = 0; i < cfg.array.receivers.size(); ++i) {
    const Vec3& pos = cfg.array.receivers[i].position;
    const bool inside = (pos.array() >= cfg.grid.lo.array()).all() &&
                        (pos.array() <= cfg.grid.hi.array()).all();
    if (inside) {
      v.error("imaging.box", "sensor " + std::to_string(i) + " lies inside the search box");
      break;
    }
  }

  if (!j["output"]["dir"].is_string())
    v.error("output.dir", "expected a string");
  else
    cfg.out_dir = j["output"]["dir"].get<std::string>();

  v.finish();
  cfg.canonical = j;
  return cfg;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw config_error(std::string("config parse error: ") + e.what());
  }
  return parse_config(j);
}

}  // namespace ecsim
