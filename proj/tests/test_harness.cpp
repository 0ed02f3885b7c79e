#include <doctest.h>

#include "fraclab/errors.hpp"
#include "fraclab/harness.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace fraclab;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string config_error(const std::string& text, const std::string& command = "") {
  try {
    parse_config(text, command);
  } catch (const ConfigurationError& e) {
    return e.what();
  }
  return "";
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) { fs::remove_all(path); }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("sha256") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("config parsing") {
  const RunConfig c = parse_config("n = 3\nsigma = 0.25\n[K]\nfamily = constant\n");
  CHECK(c.n == 3);
  CHECK(c.sigma == 0.25);
  CHECK(c.k.family == "constant");

  const RunConfig d = parse_config("# comment\nsigma = 0.25 # trailing\nn = 3\nK.family = constant\nseed = 9\n");
  CHECK(d.digest == c.digest);
  CHECK(d.seed == 9);
  CHECK(parse_config("n = 3\nsigma = 0.3\n").digest != c.digest);

  const std::string bound = config_error("n = 3\nsigma = 0.6\n", "existence");
  CHECK(bound.find("(n - 2)/2") != std::string::npos);
  CHECK(config_error("n = 3\nsigma = 0.6\n", "flow").empty());

  const std::string dup = config_error("n = 3\nsigma = 0.25\n\nsigma = 0.3\n");
  CHECK(dup.find("line 4") != std::string::npos);
  CHECK(dup.find("line 2") != std::string::npos);

  // Every problem is listed.
  const std::string many = config_error("n = 3\nsigma = 2\nbogus = 1\n[nowhere]\n[flow]\nmethod = newton\n");
  CHECK(many.find("sigma") != std::string::npos);
  CHECK(many.find("bogus") != std::string::npos);
  CHECK(many.find("nowhere") != std::string::npos);
  CHECK(many.find("newton") != std::string::npos);

  CHECK_FALSE(config_error("n = 3\nsigma = 0.25\n[K]\nfamily = harmonic\nfile = /nonexistent/k.field\n").empty());
  CHECK_THROWS_AS(load_config("/nonexistent/run.cfg"), Error);
}

TEST_CASE("field files round trip") {
  TempDir dir("fraclab_field_test");
  fs::create_directories(dir.path);
  const auto space = make_space(3, 5, Symmetry::full);
  Eigen::VectorXd c = Eigen::VectorXd::LinSpaced(space->basis->size(), -1.0, 1.0 / 3.0);
  const SpectralField f(space->basis, c);
  const std::string path = (dir.path / "f.field").string();
  write_field(path, f, 0.3, "note");
  const StoredField g = read_field(path);
  CHECK(g.sigma == 0.3);
  CHECK(g.field.basis().same_space(*space->basis));
  CHECK(g.field.coefficients() == c);

  std::ofstream(dir.path / "short.field") << "3 0.3 2 1\n1.0\n2.0\n";
  CHECK_THROWS_AS(read_field((dir.path / "short.field").string()), InputError);
  std::ofstream(dir.path / "long.field") << "3 0.3 1 1\n1.0\n2.0\n3.0\n";
  CHECK_THROWS_AS(read_field((dir.path / "long.field").string()), InputError);
  std::ofstream(dir.path / "sym.field") << "3 0.3 1 7\n1.0\n2.0\n";
  CHECK_THROWS_AS(read_field((dir.path / "sym.field").string()), InputError);

  // A harmonic K read back from a file.
  KSpec k;
  k.family = "harmonic";
  k.file = path;
  const SphereFunction K = make_k(k, 3);
  Eigen::VectorXd x(4);
  x << 0.1, 0.2, -0.3, 0.9;
  x.normalize();
  CHECK(K(x) == doctest::Approx(f.evaluate(x)).epsilon(1e-14));
}

TEST_CASE("commands") {
  TempDir dir("fraclab_command_test");
  RunConfig c = parse_config("n = 3\nsigma = 0.25\n");
  c.output_dir = dir.path.string();

  REQUIRE(run_command("spectrum", c, true) == kSuccess);
  std::istringstream csv(slurp(dir.path / "spectrum.csv"));
  std::string line;
  std::getline(csv, line);
  CHECK(line == "# config_digest=" + c.digest + " seed=1");
  std::getline(csv, line);
  int rows = 0;
  double first = 0.0;
  while (std::getline(csv, line)) {
    if (rows == 0) first = std::stod(line.substr(line.find(',') + 1));
    ++rows;
  }
  CHECK(rows == 11);
  CHECK(first == doctest::Approx(c_n_sigma(3, 0.25)).epsilon(1e-15));
  const auto spectrum = nlohmann::json::parse(slurp(dir.path / "spectrum.json"));
  CHECK(spectrum["config_digest"] == c.digest);
  CHECK(spectrum["seed"] == 1);

  c.k.family = "linear";
  CHECK(run_command("existence", c, true) == kNegativeOutcome);
  const auto ex = nlohmann::json::parse(slurp(dir.path / "existence.json"));
  CHECK(ex["multiplicity_criterion"]["holds"] == false);
  CHECK(ex["index_criterion"]["holds"] == false);

  REQUIRE(run_command("flow", c, true) == kSuccess);
  const auto fl = nlohmann::json::parse(slurp(dir.path / "flow.json"));
  CHECK(fl["status"] == "concentrated");
  const std::string flow_json = slurp(dir.path / "flow.json");
  REQUIRE(run_command("flow", c, true) == kSuccess);
  CHECK(slurp(dir.path / "flow.json") == flow_json);

  c.n = 2;
  CHECK(run_command("existence", c, true) == kConfigurationFailure);
  CHECK(run_command("unknown", c, true) == kConfigurationFailure);
}
