#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "commands.hpp"
#include "config.hpp"
#include "report_io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <sys/wait.h>
#include <unistd.h>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("binfim_cli_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  static int& counter() {
    static int value = 0;
    return value;
  }
};

std::string cli_path() {
  const char* path = std::getenv("BINFIM_CLI");
  REQUIRE_MESSAGE(path != nullptr, "BINFIM_CLI must point at the built binary");
  return path;
}

int run_cli(const std::string& args) {
  const std::string cmd = cli_path() + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void write_json(const fs::path& path, const json& value) {
  std::ofstream os(path);
  os << value.dump(2) << "\n";
}

std::string slurp(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  REQUIRE_MESSAGE(is.good(), "missing file: " << path.string());
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

json affine_config() {
  return json{
      {"seed", 7},
      {"quadrature", {{"nodes_per_axis", 4}}},
      {"binning", {{"counts", {1}}}},
      {"model",
       {{"kind", "affine-1d"}, {"theta", {1.0, 0.0}}, {"delta_theta", {0.0, 1.0}}}},
  };
}

json mixture_mc_config() {
  return json{
      {"seed", 99},
      {"quadrature", {{"nodes_per_axis", 4}}},
      {"binning", {{"counts", {4}}}},
      {"model",
       {{"kind", "gaussian-mixture"},
        {"bumps", 1},
        {"theta", {5.0, 0.5, 0.1, 0.2}},
        {"space", {{"lower", {0.0}}, {"upper", {1.0}}}}}},
      {"task", {{"n_trials", 120}, {"export_events", true}}},
  };
}

json conv_config() {
  return json{
      {"seed", 1},
      {"quadrature", {{"nodes_per_axis", 8}}},
      {"binning", {{"counts", {8}}}},
      {"system",
       {{"space", {{"lower", {-1.0}}, {"upper", {1.0}}}},
        {"psf", {{"kind", "bandlimited-sinc"}, {"bandwidth", 4.0}}},
        {"object_grid", {{"support", {-1.0, 1.0}}, {"n_points", 160}}},
        {"f",
         {{"bumps", {{{"amplitude", 1.0}, {"center", 0.0}, {"width", 0.15}}}},
          {"background", 1.0}}},
        {"delta_f", {{"bumps", {{{"amplitude", 1.0}, {"center", 0.0}, {"width", 0.05}}}}}}}},
      {"task", {{"bandwidths", {2.0, 4.0, 8.0}}, {"alpha", 0.5}}},
  };
}

}  // namespace

TEST_CASE("number formatting is plain, 17 significant digits") {
  CHECK(binfim_cli::format_double(0.5) == "0.5");
  CHECK(binfim_cli::format_double(1.0 / 3.0) == "0.33333333333333331");
  const double parsed = std::strtod(binfim_cli::format_double(1.0 / 12.0).c_str(), nullptr);
  CHECK(parsed == 1.0 / 12.0);
}

TEST_CASE("config loading validates structure") {
  TempDir dir;
  SUBCASE("missing theta is reported by name") {
    json config = affine_config();
    config["model"].erase("theta");
    write_json(dir.path / "config.json", config);
    CHECK_THROWS_WITH_AS(binfim_cli::load_config(dir.path / "config.json"),
                         doctest::Contains("theta"), binfim_cli::ConfigError);
  }
  SUBCASE("model and system are mutually exclusive") {
    json config = affine_config();
    config["system"] = conv_config()["system"];
    write_json(dir.path / "config.json", config);
    CHECK_THROWS_AS(binfim_cli::load_config(dir.path / "config.json"), binfim_cli::ConfigError);
  }
  SUBCASE("binning is required") {
    json config = affine_config();
    config.erase("binning");
    write_json(dir.path / "config.json", config);
    CHECK_THROWS_WITH_AS(binfim_cli::load_config(dir.path / "config.json"),
                         doctest::Contains("binning"), binfim_cli::ConfigError);
  }
  SUBCASE("invalid JSON is a config error") {
    std::ofstream(dir.path / "config.json") << "{ not json";
    CHECK_THROWS_AS(binfim_cli::load_config(dir.path / "config.json"), binfim_cli::ConfigError);
  }
}

TEST_CASE("analyze writes the affine closed-form loss") {
  TempDir dir;
  write_json(dir.path / "config.json", affine_config());
  const fs::path out = dir.path / "out";
  const int code = run_cli("analyze --config " + (dir.path / "config.json").string() + " --out " +
                           out.string());
  CHECK(code == 0);

  const json report = json::parse(slurp(out / "loss_report.json"));
  CHECK(std::abs(report.at("loss_direct").get<double>() - 1.0 / 12.0) <= 1e-9);
  CHECK(std::abs(report.at("loss_null_norm").get<double>() - 1.0 / 12.0) <= 1e-9);
  CHECK(report.at("loss_per_bin").size() == 1);

  const json fim = json::parse(slurp(out / "fim_list_mode.json"));
  CHECK(fim.at("rows").get<int>() == 2);
  CHECK(fim.at("cols").get<int>() == 2);
  const auto data = fim.at("data").get<std::vector<double>>();
  REQUIRE(data.size() == 4);
  CHECK(std::abs(data[0] - 1.0) <= 1e-12);
  CHECK(std::abs(data[3] - 1.0 / 3.0) <= 1e-12);

  const json det = json::parse(slurp(out / "detectability.json"));
  CHECK(det.at("list_mode").at("auc").get<double>() > 0.5);
}

TEST_CASE("analyze reports zero loss for pure scaling of a profile") {
  TempDir dir;
  json config{
      {"quadrature", {{"nodes_per_axis", 4}}},
      {"binning", {{"counts", {1}}}},
      {"model",
       {{"kind", "scaled-profile"},
        {"theta", {2.0}},
        {"delta_theta", {0.5}},
        {"space", {{"lower", {0.0}}, {"upper", {1.0}}}},
        {"profile",
         {{"bumps", {{{"amplitude", 2.0}, {"center", 0.4}, {"width", 0.2}}}},
          {"background", 0.5}}}}},
  };
  write_json(dir.path / "config.json", config);
  const fs::path out = dir.path / "out";
  CHECK(run_cli("analyze --config " + (dir.path / "config.json").string() + " --out " +
                out.string()) == 0);
  const json report = json::parse(slurp(out / "loss_report.json"));
  const double quadform = report.at("quadform_lm").get<double>();
  CHECK(std::abs(report.at("loss_direct").get<double>()) <= 1e-14 * quadform);
}

TEST_CASE("malformed configs exit with the config code and name the field") {
  TempDir dir;
  json config = affine_config();
  config["model"].erase("theta");
  write_json(dir.path / "config.json", config);
  const std::string cmd = cli_path() + " analyze --config " +
                          (dir.path / "config.json").string() + " --out " +
                          (dir.path / "out").string() + " 2> " +
                          (dir.path / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  CHECK(WEXITSTATUS(status) == binfim_cli::kExitConfigError);
  CHECK(slurp(dir.path / "stderr.txt").find("theta") != std::string::npos);
}

TEST_CASE("numerical domain failures use their own exit code") {
  TempDir dir;
  json config = affine_config();
  config["model"]["theta"] = {0.1, -1.0};  // density goes negative on [0, 1]
  write_json(dir.path / "config.json", config);
  const int code = run_cli("analyze --config " + (dir.path / "config.json").string() + " --out " +
                           (dir.path / "out").string());
  CHECK(code == binfim_cli::kExitDomainError);
}

TEST_CASE("sweep-bins reproduces the quarter-per-doubling law") {
  TempDir dir;
  json config = affine_config();
  config["task"] = {{"bin_counts", {1, 2, 4, 8}}};
  write_json(dir.path / "config.json", config);
  const fs::path out = dir.path / "out";
  CHECK(run_cli("sweep-bins --config " + (dir.path / "config.json").string() + " --out " +
                out.string()) == 0);

  std::istringstream is(slurp(out / "sweep.csv"));
  std::string line;
  std::getline(is, line);
  CHECK(line == "M,quadform_lm,quadform_binned,loss,loss_ratio_prev");
  const double expected[] = {1.0 / 12.0, 1.0 / 48.0, 1.0 / 192.0, 1.0 / 768.0};
  double previous_loss = 0;
  for (int row = 0; row < 4; ++row) {
    REQUIRE(std::getline(is, line));
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream fields(line);
    double m, quad_lm, quad_b, loss;
    fields >> m >> quad_lm >> quad_b >> loss;
    CHECK(std::abs(loss - expected[row]) <= 1e-12);
    if (row > 0) {
      double ratio;
      fields >> ratio;
      CHECK(ratio == doctest::Approx(previous_loss / loss).epsilon(1e-12));
      CHECK(ratio == doctest::Approx(4.0).epsilon(1e-9));
      CHECK(loss < previous_loss);
    }
    previous_loss = loss;
  }
}

TEST_CASE("sweep-bins on a constant model reports zero loss at every M") {
  TempDir dir;
  json config{
      {"quadrature", {{"nodes_per_axis", 4}}},
      {"binning", {{"counts", {1}}}},
      {"model",
       {{"kind", "constant"},
        {"theta", {3.7}},
        {"delta_theta", {1.0}},
        {"space", {{"lower", {0.0}}, {"upper", {1.0}}}}}},
      {"task", {{"bin_counts", {1, 2, 4, 8}}}},
  };
  write_json(dir.path / "config.json", config);
  const fs::path out = dir.path / "out";
  CHECK(run_cli("sweep-bins --config " + (dir.path / "config.json").string() + " --out " +
                out.string()) == 0);
  std::istringstream is(slurp(out / "sweep.csv"));
  std::string line;
  std::getline(is, line);
  int rows = 0;
  while (std::getline(is, line)) {
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream fields(line);
    double m, quad_lm, quad_b, loss;
    fields >> m >> quad_lm >> quad_b >> loss;
    CHECK(std::abs(loss) <= 1e-14 * quad_lm);
    ++rows;
  }
  CHECK(rows == 4);
}

TEST_CASE("explicit cell lists work through the config") {
  TempDir dir;
  json config = affine_config();
  config["binning"] = {{"cells",
                        {{{"lower", {0.0}}, {"upper", {0.5}}},
                         {{"lower", {0.5}}, {"upper", {1.0}}}}}};
  write_json(dir.path / "config.json", config);
  const fs::path out = dir.path / "out";
  CHECK(run_cli("analyze --config " + (dir.path / "config.json").string() + " --out " +
                out.string()) == 0);
  const json report = json::parse(slurp(out / "loss_report.json"));
  CHECK(std::abs(report.at("loss_direct").get<double>() - 1.0 / 48.0) <= 1e-9);
  CHECK(report.at("loss_per_bin").size() == 2);
}

TEST_CASE("conv-example reports a positive Nyquist loss and a zero scaling control") {
  TempDir dir;
  write_json(dir.path / "config.json", conv_config());
  const fs::path out = dir.path / "out";
  CHECK(run_cli("conv-example --config " + (dir.path / "config.json").string() + " --out " +
                out.string()) == 0);

  const json report = json::parse(slurp(out / "conv_report.json"));
  CHECK(report.at("nyquist_bandwidth").get<double>() == doctest::Approx(4.0));
  CHECK(report.at("nyquist_loss").get<double>() >
        1e-10 * report.at("nyquist_quadform_lm").get<double>());
  CHECK(std::abs(report.at("alpha_control_loss").get<double>()) <=
        1e-13 * report.at("nyquist_quadform_lm").get<double>());

  std::istringstream is(slurp(out / "conv_sweep.csv"));
  std::string line;
  std::getline(is, line);
  CHECK(line == "label,bandwidth,quadform_lm,quadform_binned,loss");
  double previous = 0;
  int sweep_rows = 0;
  while (std::getline(is, line)) {
    std::istringstream fields(line);
    std::string label, cell;
    std::getline(fields, label, ',');
    if (label != "sweep") continue;
    std::getline(fields, cell, ',');  // bandwidth
    std::getline(fields, cell, ',');
    std::getline(fields, cell, ',');
    std::getline(fields, cell, ',');
    const double loss = std::strtod(cell.c_str(), nullptr);
    CHECK(loss > previous);
    previous = loss;
    ++sweep_rows;
  }
  CHECK(sweep_rows == 3);
}

TEST_CASE("conv-example rejects a gaussian psf") {
  TempDir dir;
  json config = conv_config();
  config["system"]["psf"] = {{"kind", "gaussian"}, {"width", 0.05}};
  write_json(dir.path / "config.json", config);
  CHECK(run_cli("conv-example --config " + (dir.path / "config.json").string() + " --out " +
                (dir.path / "out").string()) == binfim_cli::kExitConfigError);
}

TEST_CASE("mc-validate passes on an honest config and fails a perturbed check") {
  TempDir dir;
  write_json(dir.path / "config.json", mixture_mc_config());
  const fs::path out = dir.path / "out";
  CHECK(run_cli("mc-validate --config " + (dir.path / "config.json").string() + " --out " +
                out.string()) == 0);
  const json report = json::parse(slurp(out / "mc_report.json"));
  CHECK(report.at("pass").get<bool>());
  CHECK(report.at("max_abs_z").get<double>() <= 5.0);
  CHECK(fs::exists(out / "events.txt"));

  json wrong = mixture_mc_config();
  wrong["task"]["check_theta"] = {10.0, 0.5, 0.1, 0.2};
  write_json(dir.path / "wrong.json", wrong);
  const fs::path out2 = dir.path / "out2";
  CHECK(run_cli("mc-validate --config " + (dir.path / "wrong.json").string() + " --out " +
                out2.string()) == 0);
  const json report2 = json::parse(slurp(out2 / "mc_report.json"));
  CHECK_FALSE(report2.at("pass").get<bool>());
}

TEST_CASE("fixed seeds give byte-identical outputs") {
  TempDir dir;
  write_json(dir.path / "mc.json", mixture_mc_config());
  write_json(dir.path / "conv.json", conv_config());
  json sweep = affine_config();
  sweep["task"] = {{"bin_counts", {1, 2, 4}}};
  write_json(dir.path / "sweep.json", sweep);

  const std::vector<std::pair<std::string, std::string>> runs = {
      {"mc-validate", "mc.json"},
      {"conv-example", "conv.json"},
      {"sweep-bins", "sweep.json"},
      {"analyze", "sweep.json"},
  };
  for (const auto& [command, config] : runs) {
    const fs::path out_a = dir.path / (command + "_a");
    const fs::path out_b = dir.path / (command + "_b");
    CHECK(run_cli(command + " --config " + (dir.path / config).string() + " --out " +
                  out_a.string() + " --seed 42") == 0);
    CHECK(run_cli(command + " --config " + (dir.path / config).string() + " --out " +
                  out_b.string() + " --seed 42") == 0);
    for (const auto& entry : fs::directory_iterator(out_a)) {
      const fs::path twin = out_b / entry.path().filename();
      REQUIRE(fs::exists(twin));
      CHECK_MESSAGE(slurp(entry.path()) == slurp(twin),
                    "outputs differ for " << entry.path().filename().string());
    }
  }
}

TEST_CASE("nodes override changes the quadrature") {
  TempDir dir;
  write_json(dir.path / "config.json", affine_config());
  const fs::path out = dir.path / "out";
  // nodes_per_axis = 1 cannot integrate a^2 exactly, so the list-mode FIM
  // (1,1) entry moves away from 1/3
  CHECK(run_cli("analyze --config " + (dir.path / "config.json").string() + " --out " +
                out.string() + " --nodes 1") == 0);
  const json fim = json::parse(slurp(out / "fim_list_mode.json"));
  const auto data = fim.at("data").get<std::vector<double>>();
  CHECK(std::abs(data[3] - 0.25) <= 1e-12);  // midpoint rule gives 1/4
}
