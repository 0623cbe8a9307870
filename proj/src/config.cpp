#include "wit/config.hpp"

#include "wit/io.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

namespace wit {

using nlohmann::json;

namespace {

const json& require(const json& j, const std::string& key, const std::string& path) {
  auto it = j.find(key);
  if (it == j.end()) throw ConfigError(path + key, "missing");
  return *it;
}

template <typename T>
T as(const json& j, const std::string& path) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    throw ConfigError(path, "wrong type");
  }
}

template <typename T>
T get_or(const json& j, const std::string& key, const std::string& path, T fallback) {
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  return as<T>(*it, path + key);
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError("(root)", std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("(root)", "expected an object");

  ExperimentConfig cfg;
  cfg.name = get_or<std::string>(j, "name", "", cfg.name);
  cfg.output_dir = get_or<std::string>(j, "output_dir", "", cfg.output_dir);
  cfg.eigenvector_snapshots =
      get_or<bool>(j, "eigenvector_snapshots", "", cfg.eigenvector_snapshots);
  cfg.seed_grid_resolution =
      get_or<int>(j, "seed_grid_resolution", "", cfg.seed_grid_resolution);

  const json& man = require(j, "manifold", "");
  cfg.manifold.topology = get_or<std::string>(man, "topology", "manifold.", "torus");
  if (cfg.manifold.topology != "torus" && cfg.manifold.topology != "sphere")
    throw ConfigError("manifold.topology", "must be 'torus' or 'sphere'");
  if (cfg.manifold.topology == "torus") {
    cfg.manifold.dimension = as<int>(require(man, "dimension", "manifold."), "manifold.dimension");
    if (cfg.manifold.dimension < 1 || cfg.manifold.dimension > 3)
      throw ConfigError("manifold.dimension", "must be 1..3");
    cfg.manifold.resolution = as<int>(require(man, "resolution", "manifold."), "manifold.resolution");
    if (cfg.manifold.resolution < 4)
      throw ConfigError("manifold.resolution", "must be >= 4");
    cfg.manifold.periods = get_or<std::vector<double>>(
        man, "periods", "manifold.", std::vector<double>(cfg.manifold.dimension, 1.0));
    if (static_cast<int>(cfg.manifold.periods.size()) != cfg.manifold.dimension)
      throw ConfigError("manifold.periods", "size must equal dimension");
    for (double p : cfg.manifold.periods)
      if (!(p > 0)) throw ConfigError("manifold.periods", "entries must be > 0");
  } else {
    cfg.manifold.dimension = 2;
    cfg.manifold.subdivisions =
        get_or<int>(man, "subdivisions", "manifold.", cfg.manifold.subdivisions);
    if (cfg.manifold.subdivisions < 0 || cfg.manifold.subdivisions > 6)
      throw ConfigError("manifold.subdivisions", "must be 0..6");
  }

  if (j.contains("morse_function")) {
    const json& mf = j["morse_function"];
    cfg.morse.family = get_or<std::string>(mf, "family", "morse_function.", cfg.morse.family);
    cfg.morse.waves = get_or<std::vector<int>>(mf, "waves", "morse_function.", {});
    cfg.morse.wells = get_or<std::vector<int>>(mf, "wells", "morse_function.", {});
    cfg.morse.amplitude =
        get_or<double>(mf, "amplitude", "morse_function.", cfg.morse.amplitude);
    cfg.morse.constant_value =
        get_or<double>(mf, "constant_value", "morse_function.", cfg.morse.constant_value);
    const std::string fam = cfg.morse.family;
    if (fam != "product_cosine" && fam != "quadratic_wells" && fam != "constant" &&
        fam != "sphere_height")
      throw ConfigError("morse_function.family", "unknown family '" + fam + "'");
    if (fam == "sphere_height" && cfg.manifold.topology != "sphere")
      throw ConfigError("morse_function.family", "sphere_height requires a sphere manifold");
    if (fam != "sphere_height" && fam != "constant" && cfg.manifold.topology != "torus")
      throw ConfigError("morse_function.family", "torus families require a torus manifold");
  }

  if (j.contains("t_grid")) {
    const json& tg = j["t_grid"];
    cfg.t_grid.min = get_or<double>(tg, "min", "t_grid.", cfg.t_grid.min);
    cfg.t_grid.max = get_or<double>(tg, "max", "t_grid.", cfg.t_grid.max);
    cfg.t_grid.count = get_or<int>(tg, "count", "t_grid.", cfg.t_grid.count);
    cfg.t_grid.adaptive = get_or<bool>(tg, "adaptive", "t_grid.", cfg.t_grid.adaptive);
    if (!(cfg.t_grid.max >= cfg.t_grid.min))
      throw ConfigError("t_grid.max", "must be >= t_grid.min");
    if (cfg.t_grid.count < 2) throw ConfigError("t_grid.count", "must be >= 2");
  }

  if (j.contains("solver")) {
    const json& sv = j["solver"];
    cfg.solver.eigencount = get_or<int>(sv, "eigencount", "solver.", cfg.solver.eigencount);
    if (cfg.solver.eigencount < 1) throw ConfigError("solver.eigencount", "must be >= 1");
    cfg.solver.seed = get_or<std::uint64_t>(sv, "seed", "solver.", cfg.solver.seed);
    cfg.solver.overlap_min =
        get_or<double>(sv, "overlap_min", "solver.", cfg.solver.overlap_min);
    if (!(cfg.solver.overlap_min > 0.5 && cfg.solver.overlap_min < 1.0))
      throw ConfigError("solver.overlap_min", "must lie in (0.5, 1)");
    cfg.solver.tol_group = get_or<double>(sv, "tol_group", "solver.", cfg.solver.tol_group);
    cfg.solver.max_depth = get_or<int>(sv, "max_depth", "solver.", cfg.solver.max_depth);
    cfg.solver.resolution_cap =
        get_or<double>(sv, "resolution_cap", "solver.", cfg.solver.resolution_cap);
  }

  // Resolution cap: lambda branches localize at scale 1/sqrt(t).
  if (cfg.manifold.topology == "torus" && cfg.t_grid.max > 0.0) {
    double h = 0.0;
    for (double p : cfg.manifold.periods)
      h = std::max(h, p / cfg.manifold.resolution);
    const double cap = cfg.solver.resolution_cap / std::sqrt(cfg.t_grid.max);
    if (h > cap) {
      std::ostringstream os;
      os << "grid spacing h = " << h << " violates the resolution cap h <= "
         << cfg.solver.resolution_cap << "/sqrt(t_max) = " << cap;
      throw ConfigError("t_grid.max", os.str());
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("(file)", "cannot open config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string ExperimentConfig::canonical_json() const {
  json j;
  j["name"] = name;
  j["output_dir"] = output_dir;
  j["eigenvector_snapshots"] = eigenvector_snapshots;
  j["seed_grid_resolution"] = seed_grid_resolution;
  j["manifold"]["topology"] = manifold.topology;
  j["manifold"]["dimension"] = manifold.dimension;
  if (manifold.topology == "torus") {
    j["manifold"]["resolution"] = manifold.resolution;
    j["manifold"]["periods"] = manifold.periods;
  } else {
    j["manifold"]["subdivisions"] = manifold.subdivisions;
  }
  j["morse_function"]["family"] = morse.family;
  j["morse_function"]["waves"] = morse.waves;
  j["morse_function"]["wells"] = morse.wells;
  j["morse_function"]["amplitude"] = morse.amplitude;
  j["morse_function"]["constant_value"] = morse.constant_value;
  j["t_grid"]["min"] = t_grid.min;
  j["t_grid"]["max"] = t_grid.max;
  j["t_grid"]["count"] = t_grid.count;
  j["t_grid"]["adaptive"] = t_grid.adaptive;
  j["solver"]["eigencount"] = solver.eigencount;
  j["solver"]["seed"] = solver.seed;
  j["solver"]["overlap_min"] = solver.overlap_min;
  j["solver"]["tol_group"] = solver.tol_group;
  j["solver"]["max_depth"] = solver.max_depth;
  j["solver"]["resolution_cap"] = solver.resolution_cap;
  return j.dump();
}

std::uint64_t ExperimentConfig::hash() const { return io::fnv1a(canonical_json()); }

CellComplex build_manifold(const ManifoldSpec& spec) {
  if (spec.topology == "torus")
    return build_torus_grid(spec.dimension, spec.resolution, spec.periods);
  return build_icosphere(spec.subdivisions);
}

std::unique_ptr<MorseFunction> build_morse_function(const MorseFunctionSpec& spec,
                                                    const ManifoldSpec& manifold) {
  if (spec.family == "constant") {
    std::vector<double> periods =
        manifold.topology == "torus" ? manifold.periods : std::vector<double>{};
    return std::make_unique<ConstantFunction>(periods, spec.constant_value);
  }
  if (spec.family == "sphere_height") return std::make_unique<SphereHeight>();
  if (spec.family == "product_cosine") {
    std::vector<int> waves = spec.waves;
    if (waves.empty()) waves.assign(manifold.dimension, 1);
    if (static_cast<int>(waves.size()) != manifold.dimension)
      throw ConfigError("morse_function.waves", "size must equal manifold dimension");
    return std::make_unique<ProductCosine>(manifold.periods, waves, spec.amplitude);
  }
  if (spec.family == "quadratic_wells") {
    std::vector<int> wells = spec.wells;
    if (wells.empty()) wells.assign(manifold.dimension, 1);
    if (static_cast<int>(wells.size()) != manifold.dimension)
      throw ConfigError("morse_function.wells", "size must equal manifold dimension");
    return std::make_unique<QuadraticWells>(manifold.periods, wells);
  }
  throw ConfigError("morse_function.family", "unknown family " + spec.family);
}

std::vector<double> make_t_grid(const TGridSpec& spec) {
  std::vector<double> grid(spec.count);
  for (int i = 0; i < spec.count; ++i)
    grid[i] = spec.min + (spec.max - spec.min) * i / (spec.count - 1);
  return grid;
}

}  // namespace wit
