#pragma once

#include "wit/cell_complex.hpp"
#include "wit/morse.hpp"
#include "wit/types.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace wit {

/// Configuration rejected; `field` is the JSON path of the offending entry.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& field, const std::string& msg)
      : Error("config field '" + field + "': " + msg), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct ManifoldSpec {
  std::string topology = "torus";  // torus | sphere
  int dimension = 2;
  int resolution = 16;
  int subdivisions = 2;
  std::vector<double> periods;
};

struct MorseFunctionSpec {
  std::string family = "product_cosine";
  std::vector<int> waves;   // product_cosine
  std::vector<int> wells;   // quadratic_wells
  double amplitude = 1.0 / (4.0 * M_PI * M_PI);
  double constant_value = 0.0;
};

struct TGridSpec {
  double min = 0.0;
  double max = 10.0;
  int count = 6;
  bool adaptive = true;
};

struct SolverSpec {
  int eigencount = 8;
  std::uint64_t seed = 0x5eed0fULL;
  double overlap_min = 0.8;
  double tol_group = 1e-8;
  int max_depth = 12;
  double resolution_cap = 0.5;
};

struct ExperimentConfig {
  std::string name = "experiment";
  ManifoldSpec manifold;
  MorseFunctionSpec morse;
  TGridSpec t_grid;
  SolverSpec solver;
  std::string output_dir = ".";
  bool eigenvector_snapshots = false;
  int seed_grid_resolution = 16;

  std::string canonical_json() const;
  std::uint64_t hash() const;
};

/// Parse + validate against the published schema; throws ConfigError with the
/// path of the offending field. Enforces the resolution cap
/// h <= resolution_cap / sqrt(t_max).
ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const std::string& json_text);

CellComplex build_manifold(const ManifoldSpec& spec);
std::unique_ptr<MorseFunction> build_morse_function(const MorseFunctionSpec& spec,
                                                    const ManifoldSpec& manifold);
std::vector<double> make_t_grid(const TGridSpec& spec);

}  // namespace wit
