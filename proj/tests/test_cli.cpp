#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("qpl_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run(const std::string& args) {
  const std::string cmd = std::string(QPLEVEL_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void write(const fs::path& p, const std::string& s) { std::ofstream(p) << s; }

}  // namespace

TEST_CASE("angles") {
  const auto d = scratch("angles");
  CHECK(run("--out-dir " + d.string() + " angles --max-m 5") == 0);
  const auto j = nlohmann::json::parse(slurp(d / "angles.json"));
  bool has21 = false, has32 = false;
  for (const auto& r : j["rows"]) {
    if (r["m"] == 2 && r["n"] == 1) has21 = std::abs(r["alpha_deg"].get<double>() - 21.787) < 1e-3;
    if (r["m"] == 3 && r["n"] == 2) has32 = std::abs(r["L"].get<double>() - std::sqrt(19.0)) < 1e-12;
  }
  CHECK(has21);
  CHECK(has32);
  CHECK(run("--out-dir " + d.string() + " angles --approx 0.30 --count 4") == 0);
  const auto a = nlohmann::json::parse(slurp(d / "angles.json"));
  CHECK(a["rows"].size() == 4);
  CHECK(a["bound_holds"] == true);
  CHECK(run("--out-dir " + d.string() + " angles --max-m 1") == 0);
  CHECK(nlohmann::json::parse(slurp(d / "angles.json"))["rows"].empty());
  CHECK(run("--out-dir " + d.string() + " angles --max-m -2") == 2);
  CHECK(run("--out-dir " + d.string() + " angles --max-m 3 --approx 0.3") == 2);
}

TEST_CASE("exit codes for bad configs and usage") {
  const auto d = scratch("codes");
  write(d / "bad.json", R"({"angle": {"w": 3}})");
  CHECK(run("--config " + (d / "bad.json").string() + " render") == 2);
  write(d / "typo.json", R"({"tolernace": 1})");
  CHECK(run("--config " + (d / "typo.json").string() + " render") == 2);
  write(d / "magic.json", R"({"angle": {"m": 2, "n": 1}})");
  CHECK(run("--config " + (d / "magic.json").string() + " --out-dir " + d.string() + " scaling") == 2);
  CHECK(run("nosuchcommand") == 2);
  CHECK(run("--config " + (d / "missing.json").string() + " render") == 2);
}

TEST_CASE("render: singular net at a symmetric magic bilayer, and an empty level") {
  const auto d = scratch("render");
  write(d / "magic.json", R"({"angle": {"m": 2, "n": 1}, "torus_resolution": 256})");
  CHECK(run("--config " + (d / "magic.json").string() + " --out-dir " + d.string() + " render --save-field") == 0);
  const auto j = nlohmann::json::parse(slurp(d / "render.json"));
  bool deg4 = false;
  for (int k : j["levels"][0]["degree_sequence"]) deg4 |= k == 4;
  CHECK(deg4);
  CHECK(fs::exists(d / "render.svg"));
  CHECK(fs::file_size(d / "render_field.bin") > 256 * 256 * 8);

  write(d / "low.json", R"({"angle": {"m": 2, "n": 1}, "torus_resolution": 64, "levels": [-100]})");
  CHECK(run("--config " + (d / "low.json").string() + " --out-dir " + d.string() + " render") == 0);
  CHECK(slurp(d / "render.svg").find("<path") == std::string::npos);
}

TEST_CASE("verify and c0 are reproducible; environment override") {
  const auto d1 = scratch("v1"), d2 = scratch("v2");
  CHECK(run("--out-dir " + d1.string() + " verify --trials 5 --seed 7") == 0);
  CHECK(run("--out-dir " + d2.string() + " verify --trials 5 --seed 7") == 0);
  CHECK(slurp(d1 / "verify.json") == slurp(d2 / "verify.json"));
  CHECK(run("--out-dir " + d1.string() + " c0 --alpha-w golden --depth 3") == 0);
  const auto j = nlohmann::json::parse(slurp(d1 / "c0.json"));
  CHECK(j["brackets"]["steps"].size() == 3);
  CHECK(j["brackets"]["pairwise_intersect"] == true);
  const auto d3 = scratch("env");
  const std::string env = "QPLEVEL_OUT_DIR=" + d3.string() + " QPLEVEL_THREADS=1 ";
  const int status = std::system((env + QPLEVEL_CLI + " angles --max-m 3 > /dev/null 2>&1").c_str());
  CHECK(WEXITSTATUS(status) == 0);
  CHECK(fs::exists(d3 / "angles.json"));
}
