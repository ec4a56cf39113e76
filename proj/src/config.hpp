#pragma once

#include <binfim/binfim.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace binfim_cli {

/// Malformed experiment configuration (as opposed to a numerical-domain
/// failure while running it).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GaussianBumpSpec {
  double amplitude = 0;
  Eigen::VectorXd center;
  double width = 0;
};

struct ProfileSpec {
  std::vector<GaussianBumpSpec> bumps;
  double background = 0;
};

struct ModelSection {
  std::string kind;  // constant | affine-1d | scaled-profile | gaussian-mixture
  binfim::AttributeSpace<double> space;
  Eigen::VectorXd theta;
  std::optional<Eigen::VectorXd> delta_theta;
  int n_bumps = 0;          // gaussian-mixture
  ProfileSpec profile;      // scaled-profile
};

struct ObjectSpec {
  // either explicit samples or a bump/background generator on the grid
  std::optional<Eigen::VectorXd> values;
  std::vector<GaussianBumpSpec> bumps;  // centers are scalars for 1D objects
  double background = 0;
};

struct SystemSection {
  binfim::AttributeSpace<double> space;
  std::string psf_kind;  // gaussian | bandlimited-sinc
  double psf_parameter = 0;
  double psf_scale = 1;
  double grid_lower = 0;
  double grid_upper = 0;
  binfim::Index grid_points = 0;
  ObjectSpec f;
  ObjectSpec delta_f;
};

struct BinningSection {
  std::optional<Eigen::VectorXi> counts;  // uniform grid
  std::vector<binfim::BinningScheme<double>::Cell> cells;
};

struct TaskSection {
  std::vector<Eigen::VectorXi> bin_counts;  // sweep-bins
  std::vector<double> bandwidths;           // conv-example
  double alpha = 0.5;                       // conv-example
  binfim::Index n_trials = 200;             // mc-validate
  std::optional<Eigen::VectorXd> check_theta;
  bool export_events = false;
};

struct ExperimentConfig {
  std::optional<ModelSection> model;
  std::optional<SystemSection> system;
  BinningSection binning;
  int nodes_per_axis = 4;
  std::uint64_t seed = 0;
  TaskSection task;
};

ExperimentConfig load_config(const std::filesystem::path& path);

// --- materialization helpers -----------------------------------------------

binfim::ParametricModel<double> build_model(const ModelSection& section);
binfim::BinningScheme<double> build_scheme(const ExperimentConfig& config,
                                           const binfim::AttributeSpace<double>& space);
binfim::PsfSpec<double> build_psf(const SystemSection& section);
binfim::ObjectGrid<double> build_object_grid(const SystemSection& section);
Eigen::VectorXd build_object_values(const ObjectSpec& spec, const binfim::ObjectGrid<double>& grid,
                                    const std::string& which);

}  // namespace binfim_cli
