#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sticky/density.hpp"

namespace sticky::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNumeric = 3;
inline constexpr int kExitCheckFailed = 4;

// Bad or missing configuration. The message names the offending key.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ModelConfig {
  std::string family;          // exponential | gaussian | wetting
  std::vector<double> params;  // rates, scales, or potential parameters
  int d = 1;
  int N = 1;
  std::string potential = "gaussian";
};

// Fully resolved run configuration. Values come from the config file first;
// command-line flags then override individual keys.
struct RunConfig {
  ModelConfig model;
  double beta = 0.0;
  double grid_h = 0.02;
  double grid_L = 25.0;
  double horizon = 1000.0;
  std::uint64_t seed = 1;
  std::string out = ".";
  std::size_t paths = 0;

  double quad_length = 0.0;  // 0: use grid_L
  std::size_t quad_nodes = 16;

  std::size_t n_samples = 10000;
  std::size_t burn_in = 100;
  std::size_t thin = 1;
  std::size_t grid_nodes = 512;

  std::size_t decimate = 1;
  std::vector<double> x0;  // empty: origin

  double support = 2.0;
  double ibp_tolerance = 0.0;  // 0: 1e-6, or 1e-5 for wetting models
  std::vector<double> betas{0.1, 0.5, 1.0, 2.0, 10.0};

  nlohmann::ordered_json echo;  // the resolved config as written to sidecars
};

// Flag values that take precedence over the file.
struct FlagOverrides {
  std::optional<std::string> model;
  std::optional<double> beta;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::size_t> paths;
  std::optional<double> horizon;
  std::optional<double> grid_h;
  std::optional<double> grid_L;
};

// Merges file contents (may be null) with flags and validates the result.
// Throws ConfigError.
RunConfig resolve_config(const nlohmann::json& file, const FlagOverrides& flags);

// "exponential:1,0.5" | "gaussian:1" | "wetting:d,N,potential[,stiffness]".
ModelConfig parse_model_spec(const std::string& spec);

DensityModel build_density(const ModelConfig& m);

// 64-bit FNV-1a of the string.
std::uint64_t fnv1a(const std::string& s);

// Full command-line entry point; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace sticky::cli
