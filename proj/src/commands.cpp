#include "commands.hpp"

#include "report_io.hpp"

#include <fstream>
#include <iostream>

namespace binfim_cli {
namespace {

namespace fs = std::filesystem;
using binfim::Index;

void append_detectability(JsonWriter& w, const char* name, const binfim::Detectability<double>& det) {
  w.key(name).begin_object();
  w.key("d_squared").value(det.d_squared);
  w.key("d").value(det.d);
  w.key("auc").value(det.auc);
  w.end_object();
}

void write_loss_report(const fs::path& path, const binfim::LossReport<double>& report) {
  JsonWriter w;
  w.begin_object();
  w.key("quadform_lm").value(report.quadform_lm);
  w.key("quadform_binned").value(report.quadform_binned);
  w.key("loss_direct").value(report.loss_direct);
  w.key("loss_null_norm").value(report.loss_null_norm);
  w.key("loss_per_bin_total").value(report.loss_per_bin_total);
  w.key("loss_per_bin").value(report.loss_per_bin);
  w.key("perturbation").value(report.perturbation);
  w.end_object();
  write_text_file(path, w.str() + "\n");
}

void write_detectability(const fs::path& path, const binfim::Detectability<double>& list_mode,
                         const binfim::Detectability<double>& binned) {
  JsonWriter w;
  w.begin_object();
  append_detectability(w, "list_mode", list_mode);
  append_detectability(w, "binned", binned);
  w.end_object();
  write_text_file(path, w.str() + "\n");
}

struct SystemSetup {
  binfim::BinningScheme<double> scheme;
  binfim::NodeRule<double> rule;
  binfim::ObjectGrid<double> grid;
  Eigen::VectorXd f;
  Eigen::VectorXd delta_f;
};

SystemSetup materialize_system(const ExperimentConfig& config) {
  const SystemSection& section = *config.system;
  auto scheme = build_scheme(config, section.space);
  auto rule = binfim::build_rule(section.space, scheme, config.nodes_per_axis);
  auto grid = build_object_grid(section);
  Eigen::VectorXd f = build_object_values(section.f, grid, "system.f");
  Eigen::VectorXd delta_f = build_object_values(section.delta_f, grid, "system.delta_f");
  return {std::move(scheme), std::move(rule), grid, std::move(f), std::move(delta_f)};
}

}  // namespace

void run_analyze(const ExperimentConfig& config, const fs::path& out_dir) {
  if (config.model) {
    const ModelSection& section = *config.model;
    if (!section.delta_theta)
      throw ConfigError("config error: missing field 'delta_theta' in model");
    const auto model = build_model(section);
    const auto scheme = build_scheme(config, section.space);
    const auto rule = binfim::build_rule(section.space, scheme, config.nodes_per_axis);

    const auto fim_lm = binfim::fim_list_mode(model, section.theta, rule);
    const auto fim_b = binfim::fim_binned(model, section.theta, scheme, rule);
    const auto fim_diff = binfim::fim_difference(model, section.theta, scheme, rule);
    const auto report =
        binfim::loss_quadform(model, section.theta, *section.delta_theta, scheme, rule);
    const auto det_lm = binfim::detectability_from_fim(fim_lm, *section.delta_theta);
    const auto det_b = binfim::detectability_from_fim(fim_b, *section.delta_theta);

    write_matrix_json(out_dir / "fim_list_mode.json", fim_lm);
    write_matrix_json(out_dir / "fim_binned.json", fim_b);
    write_matrix_json(out_dir / "fim_difference.json", fim_diff);
    write_loss_report(out_dir / "loss_report.json", report);
    write_detectability(out_dir / "detectability.json", det_lm, det_b);
  } else {
    const SystemSection& section = *config.system;
    auto setup = materialize_system(config);
    const auto psf = build_psf(section);
    const auto op = binfim::build_convolution_operator(psf, setup.grid, setup.rule);
    const auto report = binfim::loss_object(op, setup.scheme, setup.rule, setup.f, setup.delta_f);
    const auto det_lm = binfim::detectability_from_quadform(report.quadform_lm);
    const auto det_b = binfim::detectability_from_quadform(report.quadform_binned);
    write_loss_report(out_dir / "loss_report.json", report);
    write_detectability(out_dir / "detectability.json", det_lm, det_b);
  }
  std::cout << "analyze: wrote reports to " << out_dir.string() << "\n";
}

void run_sweep_bins(const ExperimentConfig& config, const fs::path& out_dir) {
  if (!config.model) throw ConfigError("config error: sweep-bins requires a model section");
  const ModelSection& section = *config.model;
  if (!section.delta_theta) throw ConfigError("config error: missing field 'delta_theta' in model");
  if (config.task.bin_counts.empty())
    throw ConfigError("config error: missing field 'bin_counts' in task");
  const auto model = build_model(section);

  std::vector<std::vector<std::string>> rows;
  double previous_loss = 0;
  bool have_previous = false;
  for (const Eigen::VectorXi& counts : config.task.bin_counts) {
    Eigen::VectorXi per_axis = counts;
    if (per_axis.size() == 1 && section.space.dim() > 1)
      per_axis = Eigen::VectorXi::Constant(section.space.dim(), counts[0]);
    const auto scheme = binfim::uniform_grid(section.space, per_axis);
    const auto rule = binfim::build_rule(section.space, scheme, config.nodes_per_axis);
    const auto report =
        binfim::loss_quadform(model, section.theta, *section.delta_theta, scheme, rule);
    std::vector<std::string> row;
    row.push_back(std::to_string(scheme.bin_count()));
    row.push_back(format_double(report.quadform_lm));
    row.push_back(format_double(report.quadform_binned));
    row.push_back(format_double(report.loss_direct));
    row.push_back(have_previous && report.loss_direct != 0.0
                      ? format_double(previous_loss / report.loss_direct)
                      : std::string());
    rows.push_back(std::move(row));
    previous_loss = report.loss_direct;
    have_previous = true;
  }
  write_csv(out_dir / "sweep.csv",
            {"M", "quadform_lm", "quadform_binned", "loss", "loss_ratio_prev"}, rows);
  std::cout << "sweep-bins: wrote " << (out_dir / "sweep.csv").string() << "\n";
}

void run_conv_example(const ExperimentConfig& config, const fs::path& out_dir) {
  if (!config.system) throw ConfigError("config error: conv-example requires a system section");
  const SystemSection& section = *config.system;
  if (section.psf_kind != "bandlimited-sinc")
    throw ConfigError("config error: conv-example requires a bandlimited-sinc psf");
  if (!config.binning.counts)
    throw ConfigError("config error: conv-example requires uniform binning counts");
  auto setup = materialize_system(config);

  const double extent = section.space.upper()[0] - section.space.lower()[0];
  const double bin_width = extent / double(setup.scheme.bin_count());
  const double nyquist_bandwidth = 1.0 / bin_width;

  auto loss_at = [&](double bandwidth, const Eigen::VectorXd& delta_f) {
    const auto psf = binfim::PsfSpec<double>::bandlimited_sinc(bandwidth, section.psf_scale);
    const auto op = binfim::build_convolution_operator(psf, setup.grid, setup.rule);
    return binfim::loss_object(op, setup.scheme, setup.rule, setup.f, delta_f);
  };

  std::vector<std::vector<std::string>> rows;
  auto add_row = [&rows](const std::string& label, double bandwidth,
                         const binfim::LossReport<double>& report) {
    rows.push_back({label, format_double(bandwidth), format_double(report.quadform_lm),
                    format_double(report.quadform_binned), format_double(report.loss_direct)});
  };

  const auto nyquist = loss_at(nyquist_bandwidth, setup.delta_f);
  add_row("nyquist", nyquist_bandwidth, nyquist);
  for (double bandwidth : config.task.bandwidths)
    add_row("sweep", bandwidth, loss_at(bandwidth, setup.delta_f));
  const Eigen::VectorXd scaled_f = config.task.alpha * setup.f;
  const auto control = loss_at(nyquist_bandwidth, scaled_f);
  add_row("alpha-control", nyquist_bandwidth, control);

  write_csv(out_dir / "conv_sweep.csv",
            {"label", "bandwidth", "quadform_lm", "quadform_binned", "loss"}, rows);

  JsonWriter w;
  w.begin_object();
  w.key("bin_width").value(bin_width);
  w.key("nyquist_bandwidth").value(nyquist_bandwidth);
  w.key("nyquist_loss").value(nyquist.loss_direct);
  w.key("nyquist_quadform_lm").value(nyquist.quadform_lm);
  w.key("alpha").value(config.task.alpha);
  w.key("alpha_control_loss").value(control.loss_direct);
  w.end_object();
  write_text_file(out_dir / "conv_report.json", w.str() + "\n");
  std::cout << "conv-example: wrote reports to " << out_dir.string() << "\n";
}

void run_mc_validate(const ExperimentConfig& config, const fs::path& out_dir) {
  if (!config.model) throw ConfigError("config error: mc-validate requires a model section");
  const ModelSection& section = *config.model;
  const auto model = build_model(section);
  const auto scheme = build_scheme(config, section.space);
  const auto rule = binfim::build_rule(section.space, scheme, config.nodes_per_axis);

  Eigen::VectorXd check_theta = config.task.check_theta.value_or(section.theta);
  if (check_theta.size() != section.theta.size())
    throw ConfigError("config error: field 'check_theta' in task must match theta's length");
  const auto report = binfim::empirical_mean_check<double>(
      model, section.theta, check_theta, scheme, rule, config.task.n_trials, config.seed);
  const bool pass = report.max_abs_z <= 5.0;

  std::vector<std::vector<std::string>> rows;
  for (Index m = 0; m < report.z_scores.size(); ++m)
    rows.push_back({std::to_string(m), format_double(report.expected_means[m]),
                    format_double(report.sample_means[m]), format_double(report.z_scores[m])});
  write_csv(out_dir / "mc_zscores.csv", {"bin", "expected_mean", "sample_mean", "z"}, rows);

  JsonWriter w;
  w.begin_object();
  w.key("n_trials").value(static_cast<long long>(report.n_trials));
  w.key("seed").value(static_cast<long long>(config.seed));
  w.key("max_abs_z").value(report.max_abs_z);
  w.key("gate").value(5.0);
  w.key("pass").value(pass);
  w.end_object();
  write_text_file(out_dir / "mc_report.json", w.str() + "\n");

  if (config.task.export_events) {
    const auto list = binfim::sample_list(model, section.theta, rule, config.seed);
    std::ofstream os(out_dir / "events.txt", std::ios::binary);
    binfim::write_events_text(list, os);
  }
  std::cout << "mc-validate: max |z| = " << format_double(report.max_abs_z) << " ("
            << (pass ? "pass" : "fail") << ")\n";
}

int run_command(const std::string& command, const fs::path& config_path, const fs::path& out_dir,
                const Overrides& overrides) {
  try {
    ExperimentConfig config = load_config(config_path);
    if (overrides.seed) config.seed = *overrides.seed;
    if (overrides.nodes_per_axis) {
      if (*overrides.nodes_per_axis < 1)
        throw ConfigError("config error: --nodes must be >= 1");
      config.nodes_per_axis = *overrides.nodes_per_axis;
    }
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw ConfigError("config error: cannot create output directory: " + out_dir.string());

    if (command == "analyze")
      run_analyze(config, out_dir);
    else if (command == "sweep-bins")
      run_sweep_bins(config, out_dir);
    else if (command == "conv-example")
      run_conv_example(config, out_dir);
    else if (command == "mc-validate")
      run_mc_validate(config, out_dir);
    else
      throw ConfigError("config error: unknown command '" + command + "'");
    return kExitOk;
  } catch (const ConfigError& e) {
    std::cerr << e.what() << "\n";
    return kExitConfigError;
  } catch (const binfim::DomainError& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return kExitDomainError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDomainError;
  }
}

}  // namespace binfim_cli
