#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>
#include <nlohmann/json.hpp>

#include "steerlab/scenario.hpp"
#include "steerlab/steering.hpp"

using namespace steerlab;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const char* cli_path() { return STEERLAB_CLI_PATH; }

struct RunResult {
  int exit_code = -1;
  std::string stdout_text;
};

RunResult run(const std::string& args) {
  static int counter = 0;
  const fs::path out =
      fs::temp_directory_path() / ("steerlab_cli_out_" + std::to_string(counter++));
  const std::string cmd = std::string(cli_path()) + " " + args + " > " +
                          out.string() + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(out);
  std::stringstream ss;
  ss << in.rdbuf();
  r.stdout_text = ss.str();
  fs::remove(out);
  return r;
}

fs::path write_file(const std::string& name, const std::string& content) {
  const fs::path p = fs::temp_directory_path() / name;
  std::ofstream out(p);
  out << content;
  return p;
}

json reference_doc(double c_plus_ratio = 1.0, double theta_plus_pi = 0.35,
                   double epsilon = 0.0) {
  return json{
      {"first",
       {{"cooperativity", 50.0}, {"theta_pi", 0.35}, {"gamma0_hz", 0.1},
        {"nbar", 1e5}}},
      {"second",
       {{"cooperativity", 50.0 * c_plus_ratio}, {"theta_pi", theta_plus_pi},
        {"gamma0_hz", 0.1}, {"nbar", 1e5}}},
      {"channel", {{"epsilon", epsilon}, {"phi", 0.0}}}};
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(field);
  return fields;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    rows.push_back(split_csv_line(line));
  }
  return rows;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_SUITE_BEGIN("cli");

TEST_CASE("eval reports two-way steering for the reference point") {
  const fs::path scenario = write_file("eval_ref.json", reference_doc().dump());
  const RunResult r = run("eval --scenario " + scenario.string());
  CHECK(r.exit_code == 0);
  CHECK(r.stdout_text.find("classification = two_way") != std::string::npos);
  CHECK(r.stdout_text.find("E_plus_given_minus") != std::string::npos);
}

TEST_CASE("eval emits machine-readable json on request") {
  const fs::path scenario = write_file("eval_json.json", reference_doc().dump());
  const RunResult r =
      run("eval --format json --scenario " + scenario.string());
  CHECK(r.exit_code == 0);
  const json doc = json::parse(r.stdout_text);
  const SteeringReport expected = steering_parameters(
      rwa_moments(parse_scenario(reference_doc()).config));
  CHECK(doc["steering"]["e_plus_given_minus"].get<double>() ==
        doctest::Approx(expected.e_plus_given_minus).epsilon(1e-14));
  CHECK(doc["steering"]["classification"] == "two_way");
}

TEST_CASE("full loss yields no steering") {
  const fs::path scenario =
      write_file("eval_loss.json", reference_doc(1.0, 0.35, 1.0).dump());
  const RunResult r = run("eval --scenario " + scenario.string());
  CHECK(r.exit_code == 0);
  CHECK(r.stdout_text.find("classification = no_steering") != std::string::npos);
}

TEST_CASE("malformed json exits with the configuration code") {
  const fs::path scenario = write_file("broken.json", "{ not json");
  CHECK(run("eval --scenario " + scenario.string()).exit_code == 2);
}

TEST_CASE("schema violations exit with the configuration code") {
  json doc = reference_doc();
  doc["channel"]["epsilon"] = 1.2;
  const fs::path scenario = write_file("bad_eps.json", doc.dump());
  CHECK(run("eval --scenario " + scenario.string()).exit_code == 2);
}

TEST_CASE("instability exits with the dedicated code") {
  json doc = reference_doc();
  doc["second"]["theta_pi"] = 0.0;  // pure parametric gain
  const fs::path scenario = write_file("unstable.json", doc.dump());
  CHECK(run("eval --scenario " + scenario.string()).exit_code == 3);
}

TEST_CASE("contour reproduces eval row by row and is thread-deterministic") {
  json doc = reference_doc(1.0, 0.40);
  doc["sweep"] = {{"axes",
                   {{{"param", "first.cooperativity"},
                     {"min", 10.0},
                     {"max", 100.0},
                     {"points", 4},
                     {"scale", "log"}},
                    {{"param", "second.cooperativity"},
                     {"min", 10.0},
                     {"max", 100.0},
                     {"points", 3},
                     {"scale", "log"}}}}};
  const fs::path scenario = write_file("contour.json", doc.dump());
  const fs::path out1 = fs::temp_directory_path() / "contour1.csv";
  const fs::path out4 = fs::temp_directory_path() / "contour4.csv";
  REQUIRE(run("contour --scenario " + scenario.string() + " --out " +
              out1.string())
              .exit_code == 0);
  REQUIRE(run("contour --threads 4 --scenario " + scenario.string() + " --out " +
              out4.string())
              .exit_code == 0);
  CHECK(slurp(out1) == slurp(out4));  // byte-identical regardless of threads

  const auto rows = read_csv(out1);
  REQUIRE(rows.size() == 13);  // header + 12 points
  CHECK(rows[0] == std::vector<std::string>{"axis1", "axis2", "e_pm", "e_mp",
                                            "class"});
  // re-ingest each row through eval and reproduce the E values
  for (std::size_t i = 1; i < rows.size(); i += 5) {
    json point = reference_doc(1.0, 0.40);
    point["first"].erase("cooperativity");
    point["second"].erase("cooperativity");
    point["first"]["cooperativity"] = json::parse(rows[i][0]);
    point["second"]["cooperativity"] = json::parse(rows[i][1]);
    const fs::path pscenario = write_file("contour_pt.json", point.dump());
    const RunResult rr =
        run("eval --format json --scenario " + pscenario.string());
    REQUIRE(rr.exit_code == 0);
    const json edoc = json::parse(rr.stdout_text);
    const double e_pm = std::stod(rows[i][2]);
    const double e_mp = std::stod(rows[i][3]);
    CHECK(std::abs(edoc["steering"]["e_plus_given_minus"].get<double>() - e_pm) <=
          1e-10 * std::max(1.0, e_pm));
    CHECK(std::abs(edoc["steering"]["e_minus_given_plus"].get<double>() - e_mp) <=
          1e-10 * std::max(1.0, e_mp));
    CHECK(std::stoi(rows[i][4]) ==
          class_code(classify(e_pm, e_mp)));
  }
}

TEST_CASE("oracle batch passes at the documented tolerance and fails a bogus one") {
  json doc = reference_doc();
  doc["oracle"] = {{"kind", "lyapunov"}, {"n_configs", 60}, {"seed", 5}};
  const fs::path scenario = write_file("oracle.json", doc.dump());
  const fs::path out = fs::temp_directory_path() / "oracle.csv";
  const RunResult ok =
      run("oracle --scenario " + scenario.string() + " --out " + out.string());
  CHECK(ok.exit_code == 0);
  CHECK(ok.stdout_text.find("max relative deviation") != std::string::npos);
  // manifest written next to the csv
  const json manifest = json::parse(slurp(out.string() + ".manifest.json"));
  CHECK(manifest["command"] == "oracle");
  CHECK(manifest["version"] == "0.1.0");
  CHECK(manifest["config"].contains("first"));

  json strict = doc;
  strict["oracle"]["tolerance"] = 1e-20;  // unreachable, must trip exit 4
  const fs::path strict_scenario = write_file("oracle_strict.json", strict.dump());
  CHECK(run("oracle --scenario " + strict_scenario.string()).exit_code == 4);
}

TEST_CASE("monte-carlo oracle agrees with the lyapunov solution") {
  json doc = reference_doc();
  doc["oracle"] = {{"kind", "mc"}, {"n_traj", 48}, {"seed", 11}};
  const fs::path scenario = write_file("oracle_mc.json", doc.dump());
  const RunResult r = run("oracle --scenario " + scenario.string());
  CHECK(r.exit_code == 0);
  CHECK(r.stdout_text.find("max |z|") != std::string::npos);
}

TEST_CASE("optimize emits both angle modes over the grid") {
  json doc = reference_doc();
  doc["sweep"] = {{"axes",
                   {{{"param", "first.cooperativity"},
                     {"min", 5.0},
                     {"max", 20.0},
                     {"points", 2},
                     {"scale", "log"}}}}};
  doc["optimize"] = {{"objective", "e_plus_given_minus"}};
  const fs::path scenario = write_file("optimize.json", doc.dump());
  const fs::path out = fs::temp_directory_path() / "optimize.csv";
  REQUIRE(run("optimize --scenario " + scenario.string() + " --out " +
              out.string())
              .exit_code == 0);
  const auto rows = read_csv(out);
  REQUIRE(rows.size() == 5);  // header + 2 modes x 2 points
  int free_rows = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i][0] == "free") ++free_rows;
    const double theta_minus = std::stod(rows[i][3]);
    CHECK(theta_minus == doctest::Approx(kTwoPi / 8.0).epsilon(0.05));
  }
  CHECK(free_rows == 2);
  // free mode never loses to the symmetric mode at the same grid point
  CHECK(std::stod(rows[1][2]) <= std::stod(rows[3][2]) + 1e-12);
}

TEST_CASE("conditional reports a tiny improvement at the reference point") {
  json doc = reference_doc(2.0, 0.42);
  doc["conditional"] = {{"efficiency", 1.0}};
  const fs::path scenario = write_file("conditional.json", doc.dump());
  const RunResult r = run("conditional --scenario " + scenario.string());
  CHECK(r.exit_code == 0);
  CHECK(r.stdout_text.find("d_pm") != std::string::npos);
  const auto pos = r.stdout_text.find("d_pm = ");
  REQUIRE(pos != std::string::npos);
  const double d_pm = std::stod(r.stdout_text.substr(pos + 7));
  CHECK(d_pm >= 0.0);
  CHECK(d_pm < 0.01);
}

TEST_SUITE_END();
