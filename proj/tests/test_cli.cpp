#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "cli.hpp"
#include "dicke/io.hpp"

using namespace dicke;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("dicke_cli_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string write(const std::string& name, const std::string& text) const {
    std::ofstream(path / name) << text;
    return (path / name).string();
  }
  std::string read(const std::string& name) const {
    std::ifstream in(path / name);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }
};

int run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "dicke-hfb");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return cli::run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace

TEST_CASE("config parsing") {
  const auto c = cli::parse_config(nlohmann::json::parse(
      R"({"atom_number": 500, "mode": "bogoliubov", "y_min": 1, "y_max": 2, "y_points": 3,
          "seed": 42, "init": "random", "atom_numbers": [1e3, 1e4]})"));
  CHECK(c.params.atom_number == 500.0);
  CHECK(c.solver.mode == SolverMode::Bogoliubov);
  CHECK(c.solver.init == InitKind::Random);
  CHECK(c.solver.seed == 42u);
  CHECK(c.y_values == std::vector<double>{1.0, 1.5, 2.0});
  CHECK(c.atom_numbers.size() == 2);
}

TEST_CASE("config errors name the field") {
  auto message = [](const char* text) {
    try {
      cli::parse_config(nlohmann::json::parse(text));
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::InvalidArgument);
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message(R"({"atom_nmber": 5})").find("atom_nmber") != std::string::npos);
  CHECK(message(R"({"mixing": "fast"})").find("mixing") != std::string::npos);
  CHECK(message(R"({"mode_cutoff": 2.5})").find("mode_cutoff") != std::string::npos);
  CHECK(message(R"({"y_min": 1, "y_max": 2})").find("y_points") != std::string::npos);
  CHECK(message(R"({"coupling": 1, "pump_amplitude": 0.1})").find("coupling") != std::string::npos);
  CHECK(message("[1, 2]").find("object") != std::string::npos);
}

TEST_CASE("malformed config exits 1") {
  TempDir t;
  const std::string cfg = t.write("bad.json", "{\n  \"atom_number\": 100,\n  \"mixing\" 0.3\n}\n");
  CHECK(run_cli({"solve", "--config", cfg}) == 1);
  CHECK(run_cli({"solve", "--config", (t.path / "missing.json").string()}) == 1);
  CHECK(run_cli({"solve"}) == 1);
  CHECK(run_cli({"frobnicate", "--config", cfg}) == 1);
}

TEST_CASE("solve without pump") {
  TempDir t;
  const std::string cfg = t.write("c.json", R"({"atom_number": 1000, "pump_amplitude": 0})");
  REQUIRE(run_cli({"solve", "--config", cfg, "--out", (t.path / "o.json").string()}) == 0);
  const auto doc = nlohmann::json::parse(t.read("o.json"));
  CHECK(doc["coherent_photons"].get<double>() == 0.0);
  CHECK(doc["converged"].get<bool>());
  CHECK(doc["convergence"]["converged"].get<bool>());
  CHECK(doc["mean_field"]["gamma"].size() == 3);
}

TEST_CASE("solve near y_c at N = 10^4") {
  TempDir t;
  const std::string cfg = t.write("c.json", R"({"atom_number": 10000, "coupling": 1.98})");
  REQUIRE(run_cli({"solve", "--config", cfg, "--out", (t.path / "o.json").string()}) == 0);
  const auto doc = nlohmann::json::parse(t.read("o.json"));
  CHECK(doc["incoherent_photons"].get<double>() > 10.0);
}

TEST_CASE("non-convergence exits 2") {
  TempDir t;
  const std::string cfg = t.write("c.json", R"({"coupling": 1.5, "max_iterations": 2})");
  CHECK(run_cli({"solve", "--config", cfg, "--out", (t.path / "o.json").string()}) == 2);
}

TEST_CASE("sweep writes one row per grid point") {
  TempDir t;
  const std::string cfg = t.write("c.json", R"({"y_values": [0.5, 1.0, 1.5]})");
  REQUIRE(run_cli({"sweep", "--config", cfg, "--out", (t.path / "s.csv").string()}) == 0);
  std::stringstream ss(t.read("s.csv"));
  const CsvTable tab = read_csv(ss);
  REQUIRE(tab.rows.size() == 3);
  for (const auto& r : tab.rows) {
    CHECK(parse_double(r[1]) < 1e-12);
    CHECK(r[13] == "1");
  }
}

TEST_CASE("sweep starts from the recoil frequency") {
  TempDir t;
  const std::string cfg = t.write("c.json", R"({"y_min": 0, "y_max": 1, "y_points": 5})");
  REQUIRE(run_cli({"sweep", "--config", cfg, "--out", (t.path / "s.csv").string()}) == 0);
  std::stringstream ss(t.read("s.csv"));
  const CsvTable tab = read_csv(ss);
  CHECK(std::abs(parse_double(tab.rows[0][7]) - 1.0) < 1e-10);
}

TEST_CASE("mode flag overrides the config") {
  TempDir t;
  const std::string cfg = t.write("c.json", R"({"coupling": 1.0, "mode": "hfb"})");
  REQUIRE(run_cli({"solve", "--config", cfg, "--mode", "bogoliubov", "--out",
                   (t.path / "o.json").string()}) == 0);
  const auto doc = nlohmann::json::parse(t.read("o.json"));
  CHECK(doc["solver"]["mode"] == "bogoliubov");
  CHECK(run_cli({"solve", "--config", cfg, "--mode", "exact"}) == 1);
}

TEST_CASE("scaling precondition exits 1") {
  TempDir t;
  const std::string cfg = t.write("c.json", R"({"atom_numbers": [1e3, 1e4, 1e5]})");
  CHECK(run_cli({"scaling", "--config", cfg, "--out", (t.path / "o.json").string()}) == 1);
}

TEST_CASE("synthetic collapse self-test") {
  TempDir t;
  const std::string cfg = t.write("c.json", R"({"synthetic": true})");
  REQUIRE(run_cli({"collapse", "--config", cfg, "--out", (t.path / "c.csv").string()}) == 0);
  const auto doc = nlohmann::json::parse(t.read("c.csv.json"));
  CHECK(doc["score"].get<double>() < 1e-10);
  CHECK(doc["epsilon"].get<double>() == doctest::Approx(0.44).epsilon(1e-8));
}

TEST_CASE("collapse window crossing y_c exits 1") {
  TempDir t;
  const std::string cfg = t.write(
      "c.json", R"({"atom_numbers": [1e2, 1e3, 1e4], "window_lo": 1.5, "window_hi": 2.5})");
  CHECK(run_cli({"collapse", "--config", cfg, "--out", (t.path / "c.csv").string()}) == 1);
}

TEST_CASE("reruns are byte-identical") {
  TempDir t;
  const std::string cfg = t.write("c.json", R"({"y_min": 1.8, "y_max": 2.3, "y_points": 6})");
  REQUIRE(run_cli({"sweep", "--config", cfg, "--out", (t.path / "a.csv").string()}) == 0);
  REQUIRE(run_cli({"sweep", "--config", cfg, "--out", (t.path / "b.csv").string(), "--jobs", "4"}) == 0);
  CHECK(t.read("a.csv") == t.read("b.csv"));
}
