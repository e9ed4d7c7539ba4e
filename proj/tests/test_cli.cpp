// Runs the command-line tool as a subprocess. Each case works in its own
// directory below the test's working directory.

#include "support.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <map>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string err;
};

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::current_path() / "cli_runs" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

Run run(const fs::path& dir, const std::string& args) {
  const fs::path err = dir / "stderr.txt";
  const std::string cmd = std::string("\"") + CRNLYAP_CLI + "\" " + args + " --out \"" + dir.string() + "\" 2> \"" +
                          err.string() + "\" > /dev/null";
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.err = testing::read_text(err.string());
  return r;
}

std::string data(const std::string& name) { return "--input \"" + testing::data_path(name) + "\""; }

// state (single species) -> prob, from a stationary-style CSV
std::map<long, double> read_pmf(const fs::path& file, std::string* method = nullptr) {
  std::map<long, double> pmf;
  std::istringstream in(testing::read_text(file.string()));
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("state_1", 0) == 0) continue;
    std::stringstream row(line);
    std::string x, p, lp, m;
    std::getline(row, x, ',');
    std::getline(row, p, ',');
    std::getline(row, lp, ',');
    std::getline(row, m, ',');
    pmf[std::stol(x)] = std::stod(p);
    if (method) *method = m;
  }
  return pmf;
}

}  // namespace

TEST_CASE("check reports complex balance") {
  const auto dir = fresh_dir("check_catalytic");
  const auto r = run(dir, "check " + data("catalytic.crn") + " --x0 1,0");
  REQUIRE(r.code == 0);
  const auto text = testing::read_text((dir / "check.txt").string());
  CHECK(text.find("complex balanced: yes") != std::string::npos);
  CHECK(text.find("equilibrium: (0.66666666666666") != std::string::npos);
  CHECK(text.find("violations: none") != std::string::npos);

  const auto dir2 = fresh_dir("check_pair_birth");
  REQUIRE(run(dir2, "check " + data("pair_birth.crn")).code == 0);
  CHECK(testing::read_text((dir2 / "check.txt").string()).find("complex balanced: no") != std::string::npos);
}

TEST_CASE("input errors exit with code 2") {
  const auto dir = fresh_dir("errors");
  const auto bad = run(dir, "check " + data("malformed.crn"));
  CHECK(bad.code == 2);
  CHECK(bad.err.find("line 2, column 11") != std::string::npos);
  CHECK(run(dir, "check --input /nonexistent/file.crn").code == 2);
  CHECK(run(dir, "stationary " + data("catalytic.crn")).code == 2);  // no --V
  CHECK(run(dir, "stationary " + data("catalytic.crn") + " --V 10,100").code == 2);
  CHECK(run(dir, "converge " + data("catalytic.crn") + " --V 100,10 --grid 0.1:0.9:5 --x0 1,0").code == 2);
  CHECK(run(dir, "simulate " + data("catalytic.crn") + " --V 10").code == 2);  // no --x0
  CHECK(run(dir, "stationary " + data("catalytic.crn") + " --V 10 --bogus").code == 2);
  CHECK_FALSE(fs::exists(dir / "stationary.csv"));
}

TEST_CASE("stationary distributions and method reporting") {
  SUBCASE("cubic network: birth-death formula") {
    const auto dir = fresh_dir("stationary_cubic");
    REQUIRE(run(dir, "stationary " + data("schlogl.crn") + " --V 10").code == 0);
    std::string method;
    const auto pmf = read_pmf(dir / "stationary.csv", &method);
    CHECK(method == "birth-death");
    double s = 0.0;
    for (const auto& [x, p] : pmf) s += p;
    CHECK(std::abs(s - 1) <= 1e-9);
    // ratio of neighbours from the rates at V = 10
    const double p0 = pmf.at(0), p1 = pmf.at(1);
    CHECK(p1 / p0 == doctest::Approx(60.0 / 11.0).epsilon(1e-12));
  }
  SUBCASE("catalytic network: product form") {
    const auto dir = fresh_dir("stationary_catalytic");
    REQUIRE(run(dir, "stationary " + data("catalytic.crn") + " --V 10 --x0 1,0").code == 0);
    const auto text = testing::read_text((dir / "stationary.csv").string());
    CHECK(text.rfind("state_1,state_2,prob,log_prob,method\n", 0) == 0);
    CHECK(text.find("product-form") != std::string::npos);
  }
  SUBCASE("no stationary distribution") {
    const auto dir = fresh_dir("stationary_none");
    const auto r = run(dir, "stationary " + data("no_stationary.crn") + " --V 1 --x0 5");
    CHECK(r.code == 4);
    CHECK(r.err.find("no stationary distribution: n_d ≤ n_u and condition (2) fails") != std::string::npos);
  }
}

TEST_CASE("simulation output") {
  SUBCASE("repeated runs are byte-identical") {
    const auto a = fresh_dir("sim_a"), b = fresh_dir("sim_b");
    const std::string args = "simulate " + data("catalytic.crn") + " --V 10 --x0 1,0 --seed 42 --t-end 50";
    REQUIRE(run(a, args).code == 0);
    REQUIRE(run(b, args).code == 0);
    const auto ta = testing::read_text((a / "trajectory.csv").string());
    CHECK(ta == testing::read_text((b / "trajectory.csv").string()));
    CHECK(ta.rfind("# seed=42\ntime,state_1,state_2\n0,10,0\n", 0) == 0);
  }
  SUBCASE("network without reactions") {
    const auto dir = fresh_dir("sim_inert");
    const auto r = run(dir, "simulate " + data("inert.crn") + " --V 1 --x0 2,3");
    CHECK(r.code == 0);
    CHECK(r.err.find("absorbing") != std::string::npos);
    CHECK(testing::read_text((dir / "trajectory.csv").string()) == "# seed=1\ntime,state_1,state_2\n0,2,3\n");
  }
  SUBCASE("long run approaches the exact law") {
    const auto dir = fresh_dir("sim_cubic");
    REQUIRE(run(dir, "simulate " + data("schlogl.crn") +
                         " --V 100 --x0 1 --empirical --t-end 5000 --burn-in 10 --seed 7").code == 0);
    REQUIRE(run(dir, "stationary " + data("schlogl.crn") + " --V 100").code == 0);
    auto emp = read_pmf(dir / "empirical.csv");
    const auto exact = read_pmf(dir / "stationary.csv");
    double tv = 0.0;
    for (const auto& [x, p] : exact) tv += std::abs(p - emp[x]);
    for (const auto& [x, p] : emp) {
      if (!exact.count(x)) tv += p;
    }
    CHECK(0.5 * tv <= 0.05);
  }
}

TEST_CASE("convergence study files") {
  const auto dir = fresh_dir("converge_cubic");
  REQUIRE(run(dir, "converge " + data("schlogl.crn") + " --V 10,100,1000 --grid 0.5:4:200").code == 0);
  const auto summary = testing::read_text((dir / "summary.csv").string());
  std::istringstream in(summary);
  std::string line;
  std::getline(in, line);
  CHECK(line == "V,sup_error,z_log,method");
  std::vector<double> errors;
  while (std::getline(in, line)) {
    std::stringstream row(line);
    std::string V, e, z, m;
    std::getline(row, V, ',');
    std::getline(row, e, ',');
    std::getline(row, z, ',');
    std::getline(row, m, ',');
    errors.push_back(std::stod(e));
    CHECK(z.empty());
    CHECK(m == "birth-death");
  }
  REQUIRE(errors.size() == 3);
  CHECK(errors[0] > errors[1]);
  CHECK(errors[1] > errors[2]);
  CHECK(errors[2] <= 0.05);

  const auto curves = testing::read_text((dir / "curves.csv").string());
  CHECK(curves.rfind("x_tilde_1,value,label,V\n0.5,", 0) == 0);
  std::size_t rows = 0;
  for (char ch : curves) rows += ch == '\n';
  CHECK(rows == 1 + 200 * 4);

  const auto one = fresh_dir("converge_single");
  REQUIRE(run(one, "converge " + data("schlogl.crn") + " --V 1000 --grid 0.5:4:20").code == 0);
  std::size_t lines = 0;
  for (char ch : testing::read_text((one / "summary.csv").string())) lines += ch == '\n';
  CHECK(lines == 2);
}

TEST_CASE("config file supplies defaults, flags win") {
  const auto dir = fresh_dir("config");
  {
    std::ofstream cfg(dir / "run.json");
    cfg << R"({"V": [10], "x0": [1, 0], "seed": 5, "t_end": 3})";
  }
  const std::string base = "simulate " + data("catalytic.crn") + " --config \"" + (dir / "run.json").string() + "\"";
  REQUIRE(run(dir, base).code == 0);
  CHECK(testing::read_text((dir / "trajectory.csv").string()).rfind("# seed=5\n", 0) == 0);
  REQUIRE(run(dir, base + " --seed 9").code == 0);
  CHECK(testing::read_text((dir / "trajectory.csv").string()).rfind("# seed=9\n", 0) == 0);
}
