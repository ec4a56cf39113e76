#include "config.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>

namespace binfim_cli {
namespace {

using nlohmann::json;

[[noreturn]] void missing(const std::string& field, const std::string& where) {
  throw ConfigError("config error: missing field '" + field + "' in " + where);
}

const json& require_field(const json& obj, const std::string& field, const std::string& where) {
  auto it = obj.find(field);
  if (it == obj.end()) missing(field, where);
  return *it;
}

double require_number(const json& obj, const std::string& field, const std::string& where) {
  const json& v = require_field(obj, field, where);
  if (!v.is_number()) throw ConfigError("config error: field '" + field + "' in " + where + " must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError("config error: field '" + field + "' in " + where + " must be finite");
  return x;
}

Eigen::VectorXd number_array(const json& v, const std::string& field, const std::string& where) {
  if (!v.is_array() || v.empty())
    throw ConfigError("config error: field '" + field + "' in " + where + " must be a nonempty array");
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    if (!v[static_cast<std::size_t>(i)].is_number())
      throw ConfigError("config error: field '" + field + "' in " + where + " must contain numbers");
    out[i] = v[static_cast<std::size_t>(i)].get<double>();
    if (!std::isfinite(out[i]))
      throw ConfigError("config error: field '" + field + "' in " + where + " must be finite");
  }
  return out;
}

Eigen::VectorXd require_number_array(const json& obj, const std::string& field,
                                     const std::string& where) {
  return number_array(require_field(obj, field, where), field, where);
}

binfim::AttributeSpace<double> parse_space(const json& obj, const std::string& where) {
  const json& space = require_field(obj, "space", where);
  const Eigen::VectorXd lower = require_number_array(space, "lower", where + ".space");
  const Eigen::VectorXd upper = require_number_array(space, "upper", where + ".space");
  try {
    return binfim::AttributeSpace<double>(lower, upper);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config error: invalid space: ") + e.what());
  }
}

GaussianBumpSpec parse_bump(const json& obj, const std::string& where) {
  GaussianBumpSpec bump;
  bump.amplitude = require_number(obj, "amplitude", where);
  const json& center = require_field(obj, "center", where);
  if (center.is_number()) {
    bump.center.resize(1);
    bump.center[0] = center.get<double>();
  } else {
    bump.center = number_array(center, "center", where);
  }
  bump.width = require_number(obj, "width", where);
  if (!(bump.width > 0)) throw ConfigError("config error: bump width must be > 0 in " + where);
  return bump;
}

ObjectSpec parse_object(const json& obj, const std::string& where) {
  ObjectSpec spec;
  if (obj.contains("values")) {
    spec.values = require_number_array(obj, "values", where);
    return spec;
  }
  if (!obj.contains("bumps")) missing("values (or bumps)", where);
  for (const json& b : obj.at("bumps")) spec.bumps.push_back(parse_bump(b, where + ".bumps"));
  if (obj.contains("background")) spec.background = require_number(obj, "background", where);
  return spec;
}

ModelSection parse_model(const json& obj) {
  ModelSection section{
      /*kind=*/"",
      /*space=*/binfim::make_interval<double>(0.0, 1.0),
      /*theta=*/{},
  };
  const json& kind = require_field(obj, "kind", "model");
  if (!kind.is_string()) throw ConfigError("config error: field 'kind' in model must be a string");
  section.kind = kind.get<std::string>();

  if (section.kind == "affine-1d") {
    if (obj.contains("space")) {
      section.space = parse_space(obj, "model");
      if (!section.space.same_box(binfim::make_interval<double>(0.0, 1.0)))
        throw ConfigError("config error: the affine-1d model is defined on [0, 1]");
    }
  } else {
    section.space = parse_space(obj, "model");
  }

  section.theta = require_number_array(obj, "theta", "model");
  if (obj.contains("delta_theta"))
    section.delta_theta = require_number_array(obj, "delta_theta", "model");

  if (section.kind == "gaussian-mixture") {
    section.n_bumps = static_cast<int>(require_number(obj, "bumps", "model"));
    if (section.n_bumps < 1) throw ConfigError("config error: field 'bumps' in model must be >= 1");
  } else if (section.kind == "scaled-profile") {
    const json& profile = require_field(obj, "profile", "model");
    for (const json& b : require_field(profile, "bumps", "model.profile"))
      section.profile.bumps.push_back(parse_bump(b, "model.profile.bumps"));
    if (profile.contains("background"))
      section.profile.background = require_number(profile, "background", "model.profile");
  } else if (section.kind != "constant" && section.kind != "affine-1d") {
    throw ConfigError("config error: unknown model kind '" + section.kind + "'");
  }
  return section;
}

SystemSection parse_system(const json& obj) {
  SystemSection section{/*space=*/parse_space(obj, "system")};
  if (section.space.dim() != 1)
    throw ConfigError("config error: system configs require a 1D attribute space");

  const json& psf = require_field(obj, "psf", "system");
  const json& kind = require_field(psf, "kind", "system.psf");
  if (!kind.is_string()) throw ConfigError("config error: field 'kind' in system.psf must be a string");
  section.psf_kind = kind.get<std::string>();
  if (section.psf_kind == "gaussian") {
    section.psf_parameter = require_number(psf, "width", "system.psf");
  } else if (section.psf_kind == "bandlimited-sinc") {
    section.psf_parameter = require_number(psf, "bandwidth", "system.psf");
  } else {
    throw ConfigError("config error: unknown psf kind '" + section.psf_kind + "'");
  }
  if (psf.contains("scale")) section.psf_scale = require_number(psf, "scale", "system.psf");

  const json& grid = require_field(obj, "object_grid", "system");
  const Eigen::VectorXd support = require_number_array(grid, "support", "system.object_grid");
  if (support.size() != 2)
    throw ConfigError("config error: field 'support' in system.object_grid must have two entries");
  section.grid_lower = support[0];
  section.grid_upper = support[1];
  section.grid_points = static_cast<binfim::Index>(require_number(grid, "n_points", "system.object_grid"));

  section.f = parse_object(require_field(obj, "f", "system"), "system.f");
  section.delta_f = parse_object(require_field(obj, "delta_f", "system"), "system.delta_f");
  return section;
}

BinningSection parse_binning(const json& obj) {
  BinningSection section;
  if (obj.contains("counts")) {
    const Eigen::VectorXd counts = require_number_array(obj, "counts", "binning");
    Eigen::VectorXi c(counts.size());
    for (Eigen::Index i = 0; i < counts.size(); ++i) c[i] = static_cast<int>(counts[i]);
    section.counts = c;
    return section;
  }
  if (!obj.contains("cells")) missing("counts (or cells)", "binning");
  for (const json& cell : obj.at("cells")) {
    binfim::BinningScheme<double>::Cell c;
    c.lower = require_number_array(cell, "lower", "binning.cells");
    c.upper = require_number_array(cell, "upper", "binning.cells");
    section.cells.push_back(std::move(c));
  }
  if (section.cells.empty()) throw ConfigError("config error: field 'cells' in binning must be nonempty");
  return section;
}

TaskSection parse_task(const json& root) {
  TaskSection task;
  if (!root.contains("task")) return task;
  const json& obj = root.at("task");
  if (obj.contains("bin_counts")) {
    for (const json& entry : obj.at("bin_counts")) {
      if (entry.is_number()) {
        task.bin_counts.push_back(Eigen::VectorXi::Constant(1, entry.get<int>()));
      } else {
        const Eigen::VectorXd v = number_array(entry, "bin_counts", "task");
        Eigen::VectorXi c(v.size());
        for (Eigen::Index i = 0; i < v.size(); ++i) c[i] = static_cast<int>(v[i]);
        task.bin_counts.push_back(c);
      }
    }
  }
  if (obj.contains("bandwidths")) {
    const Eigen::VectorXd v = require_number_array(obj, "bandwidths", "task");
    task.bandwidths.assign(v.data(), v.data() + v.size());
  }
  if (obj.contains("alpha")) task.alpha = require_number(obj, "alpha", "task");
  if (obj.contains("n_trials"))
    task.n_trials = static_cast<binfim::Index>(require_number(obj, "n_trials", "task"));
  if (obj.contains("check_theta"))
    task.check_theta = require_number_array(obj, "check_theta", "task");
  if (obj.contains("export_events")) {
    if (!obj.at("export_events").is_boolean())
      throw ConfigError("config error: field 'export_events' in task must be a boolean");
    task.export_events = obj.at("export_events").get<bool>();
  }
  return task;
}

}  // namespace

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("config error: cannot open config file: " + path.string());
  json root;
  try {
    root = json::parse(is);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config error: invalid JSON: ") + e.what());
  }

  ExperimentConfig config;
  const bool has_model = root.contains("model");
  const bool has_system = root.contains("system");
  if (has_model == has_system)
    throw ConfigError("config error: exactly one of 'model' or 'system' is required");
  if (has_model) config.model = parse_model(root.at("model"));
  if (has_system) config.system = parse_system(root.at("system"));

  config.binning = parse_binning(require_field(root, "binning", "config"));
  if (root.contains("quadrature"))
    config.nodes_per_axis =
        static_cast<int>(require_number(root.at("quadrature"), "nodes_per_axis", "quadrature"));
  if (config.nodes_per_axis < 1)
    throw ConfigError("config error: field 'nodes_per_axis' in quadrature must be >= 1");
  if (root.contains("seed")) {
    if (!root.at("seed").is_number_unsigned() && !root.at("seed").is_number_integer())
      throw ConfigError("config error: field 'seed' must be a nonnegative integer");
    config.seed = root.at("seed").get<std::uint64_t>();
  }
  config.task = parse_task(root);
  return config;
}

namespace {

double eval_bumps(const std::vector<GaussianBumpSpec>& bumps, double background,
                  binfim::ConstVectorRef<double> a) {
  double v = background;
  for (const auto& bump : bumps) {
    if (bump.center.size() != a.size())
      throw ConfigError("config error: bump center dimension does not match the space");
    const double r2 = (a - bump.center).squaredNorm();
    v += bump.amplitude * std::exp(-r2 / (2.0 * bump.width * bump.width));
  }
  return v;
}

}  // namespace

binfim::ParametricModel<double> build_model(const ModelSection& section) {
  if (section.kind == "constant") {
    if (section.theta.size() != 1)
      throw ConfigError("config error: the constant model takes theta of length 1");
    return binfim::make_constant_model(section.space);
  }
  if (section.kind == "affine-1d") {
    if (section.theta.size() != 2)
      throw ConfigError("config error: the affine-1d model takes theta of length 2");
    return binfim::make_affine_model<double>();
  }
  if (section.kind == "scaled-profile") {
    if (section.theta.size() != 1)
      throw ConfigError("config error: the scaled-profile model takes theta of length 1");
    ProfileSpec profile = section.profile;
    return binfim::make_scaled_profile_model<double>(
        section.space, [profile](binfim::ConstVectorRef<double> a) {
          return eval_bumps(profile.bumps, profile.background, a);
        });
  }
  // gaussian-mixture
  const binfim::Index expected =
      binfim::Index(section.n_bumps) * (section.space.dim() + 2) + 1;
  if (section.theta.size() != expected)
    throw ConfigError("config error: gaussian-mixture theta must have length " +
                      std::to_string(expected) + " (amplitudes, centers, widths, background)");
  return binfim::make_gaussian_mixture_model(section.space, section.n_bumps);
}

binfim::BinningScheme<double> build_scheme(const ExperimentConfig& config,
                                           const binfim::AttributeSpace<double>& space) {
  try {
    if (config.binning.counts) return binfim::uniform_grid(space, *config.binning.counts);
    return binfim::BinningScheme<double>(space, config.binning.cells);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config error: invalid binning: ") + e.what());
  }
}

binfim::PsfSpec<double> build_psf(const SystemSection& section) {
  try {
    if (section.psf_kind == "gaussian")
      return binfim::PsfSpec<double>::gaussian(section.psf_parameter, section.psf_scale);
    return binfim::PsfSpec<double>::bandlimited_sinc(section.psf_parameter, section.psf_scale);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config error: invalid psf: ") + e.what());
  }
}

binfim::ObjectGrid<double> build_object_grid(const SystemSection& section) {
  try {
    return binfim::ObjectGrid<double>(section.grid_lower, section.grid_upper, section.grid_points);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config error: invalid object_grid: ") + e.what());
  }
}

Eigen::VectorXd build_object_values(const ObjectSpec& spec, const binfim::ObjectGrid<double>& grid,
                                    const std::string& which) {
  if (spec.values) {
    if (spec.values->size() != grid.n_points())
      throw ConfigError("config error: field 'values' in " + which + " must have n_points entries");
    return *spec.values;
  }
  Eigen::VectorXd values(grid.n_points());
  Eigen::VectorXd point(1);
  for (binfim::Index k = 0; k < grid.n_points(); ++k) {
    point[0] = grid.point(k);
    values[k] = eval_bumps(spec.bumps, spec.background, point);
  }
  return values;
}

}  // namespace binfim_cli
