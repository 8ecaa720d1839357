// End-to-end checks of the command-line tool. The binary path comes from
// the HMMDUAL_CLI environment variable set by CTest.

#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "doctest.h"

namespace {

struct CliResult {
  int exit_code = -1;
  std::string stdout_text;
};

const char* cli_path() { return std::getenv("HMMDUAL_CLI"); }

CliResult run_cli(const std::string& args) {
  CliResult result;
  const std::string out_file = "/tmp/hmmdual_cli_out.txt";
  const std::string cmd =
      std::string(cli_path()) + " " + args + " > " + out_file + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  result.exit_code = WEXITSTATUS(status);
  std::ifstream in(out_file);
  result.stdout_text.assign(std::istreambuf_iterator<char>(in),
                            std::istreambuf_iterator<char>());
  return result;
}

const char* kModel = R"({
  "d": 2,
  "m": 1,
  "A": [[-1.0, 1.0], [1.0, -1.0]],
  "H": [[1.0], [-1.0]],
  "priors": {"uniform": [0.5, 0.5], "left": [1.0, 0.0]}
})";

const char* kBlindBlockModel = R"({
  "d": 4,
  "m": 1,
  "A": [[-1.0, 1.0, 0.0, 0.0], [1.0, -1.0, 0.0, 0.0],
        [0.0, 0.0, -1.0, 1.0], [0.0, 0.0, 1.0, -1.0]],
  "H": [[0.0], [0.0], [0.0], [0.0]],
  "priors": {"uniform": [0.25, 0.25, 0.25, 0.25]}
})";

struct TempModel {
  std::string path;
  TempModel(const std::string& name, const char* content)
      : path("/tmp/hmmdual_cli_" + name) {
    std::ofstream out(path);
    out << content;
  }
  ~TempModel() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("cli analyze reports observability and stability") {
  REQUIRE(cli_path() != nullptr);
  TempModel model("ergodic.json", kModel);
  const CliResult res = run_cli("analyze " + model.path);
  REQUIRE(res.exit_code == 0);
  const auto j = nlohmann::json::parse(res.stdout_text);
  CHECK(j.at("observable").get<bool>());
  CHECK(j.at("stabilizable").get<bool>());
  CHECK(j.at("dim_C").get<int>() == 2);
  CHECK(j.at("dim_O").get<int>() == 2);
  CHECK(j.at("injective_H").get<bool>());
  CHECK(j.at("model_hash").is_string());

  TempModel blind("blind.json", kBlindBlockModel);
  const CliResult res2 = run_cli("analyze " + blind.path);
  REQUIRE(res2.exit_code == 0);
  const auto j2 = nlohmann::json::parse(res2.stdout_text);
  CHECK_FALSE(j2.at("observable").get<bool>());
  CHECK_FALSE(j2.at("stabilizable").get<bool>());
  CHECK(j2.at("ergodic_classes").size() == 2);
}

TEST_CASE("cli rejects malformed input with exit code 2") {
  REQUIRE(cli_path() != nullptr);
  TempModel bad("bad.json", R"({"d": 2, "m": 1, "A": [[-1.0, 1.0]]})");
  CHECK(run_cli("analyze " + bad.path).exit_code == 2);
  CHECK(run_cli("analyze /tmp/missing_hmmdual_model.json").exit_code == 2);
  TempModel ok("ok.json", kModel);
  CHECK(run_cli("duality " + ok.path + " --prior nope --paths 10").exit_code == 2);
  CHECK(run_cli("duality " + ok.path + " --control warble --paths 10").exit_code == 2);
}

TEST_CASE("cli gramian reproduces the static rank test") {
  REQUIRE(cli_path() != nullptr);
  TempModel model("static.json", R"({
    "d": 2, "m": 1,
    "A": [[0.0, 0.0], [0.0, 0.0]],
    "H": [[1.0], [-1.0]],
    "priors": {"uniform": [0.5, 0.5]}
  })");
  const CliResult res =
      run_cli("gramian " + model.path + " --T 1 --dt 0.002 --paths 2000 --seed 4");
  REQUIRE(res.exit_code == 0);
  const auto j = nlohmann::json::parse(res.stdout_text);
  CHECK(j.at("rank").get<int>() == 2);
  const double w00 = j.at("W")[0][0].get<double>();
  CHECK(std::abs(w00 - std::exp(1.0)) < 0.3);
}

TEST_CASE("cli output is byte-identical for a fixed seed") {
  REQUIRE(cli_path() != nullptr);
  TempModel model("repro.json", kModel);
  const std::string args =
      "duality " + model.path +
      " --prior uniform --control tanh_of_Z --c 0.3 --T 1 --dt 0.01 "
      "--paths 400 --seed 12";
  const CliResult a = run_cli(args);
  const CliResult b = run_cli(args);
  REQUIRE(a.exit_code == 0);
  CHECK(a.stdout_text == b.stdout_text);
  CHECK(a.stdout_text.find("\"z_score\"") != std::string::npos);
}

TEST_CASE("cli filter and entropy emit reports and CSV") {
  REQUIRE(cli_path() != nullptr);
  TempModel model("filter.json", kModel);
  const std::string csv = "/tmp/hmmdual_cli_curve.csv";
  const CliResult res =
      run_cli("filter " + model.path +
              " --mu left --nu uniform --T 1 --dt 0.05 --paths 50 --seed 3 "
              "--csv " + csv);
  REQUIRE(res.exit_code == 0);
  std::ifstream curve(csv);
  std::string header;
  std::getline(curve, header);
  CHECK(header == "t,mean_tv,stderr");
  std::remove(csv.c_str());

  const CliResult ent =
      run_cli("entropy " + model.path +
              " --mu left --nu uniform --T 0.5 --dt 0.01 --paths 100 --seed 3");
  REQUIRE(ent.exit_code == 0);
  const auto j = nlohmann::json::parse(ent.stdout_text);
  CHECK(j.at("kl").get<double>() >= 0.0);
  CHECK(j.at("n_paths").get<int>() == 100);
}

TEST_CASE("cli lg accepts plain matrices without generator constraints") {
  REQUIRE(cli_path() != nullptr);
  TempModel model("lgpair.json", R"({
    "d": 2, "m": 1,
    "A": [[0.0, 1.0], [0.0, 0.0]],
    "H": [[0.0], [1.0]]
  })");
  const CliResult res = run_cli("lg " + model.path + " --T 1 --dt 0.001 --seed 2");
  REQUIRE(res.exit_code == 0);
  const auto j = nlohmann::json::parse(res.stdout_text);
  CHECK(j.at("rank").get<int>() == 2);
  CHECK(j.at("closed_range_max_angle").get<double>() < 1e-8);
  CHECK(j.at("pairing_residual").get<double>() < 1e-8);
  CHECK(j.at("rank").get<int>() == j.at("krylov_dim").get<int>());
}
