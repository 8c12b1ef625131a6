#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "tline/cli.hpp"

using namespace tline;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("tline_cli_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

nlohmann::json manifest(const fs::path& dir) { return nlohmann::json::parse(slurp(dir / "manifest.json")); }

std::size_t lines(const fs::path& p) {
  const std::string s = slurp(p);
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

}  // namespace

TEST_CASE("simulate writes the series and a completed manifest") {
  const auto out = scratch("sim");
  CHECK(run_command({"simulate", "--preset", "amarillo_tx", "--horizon", "2", "--out", out.string(), "--quiet"}) == 0);
  CHECK(lines(out / "series.csv") == 201);
  CHECK(slurp(out / "series.csv").rfind("t,theta_max,phi_max,phi_mid,v_drop,tension,h_B\n", 0) == 0);
  const auto m = manifest(out);
  CHECK(m["status"] == "completed");
  CHECK(m["command"] == "simulate");
  CHECK(m["config_digest"].get<std::string>().size() == 16);
  CHECK(m["files"] == nlohmann::json::array({"series.csv"}));
  CHECK(m["details"]["failure"].is_null());
  fs::remove_all(out);
}

TEST_CASE("a full default run stays within the horizon rows") {
  const auto out = scratch("full");
  CHECK(run_command({"simulate", "--preset", "amarillo_tx", "--out", out.string(), "--quiet"}) == 0);
  const std::size_t rows = lines(out / "series.csv") - 1;
  CHECK(rows <= 5000);
  const auto m = manifest(out);
  CHECK(m["details"]["failure"]["mode"] == "damage");
  CHECK(m["details"]["failure"]["step"].get<std::size_t>() + 1 == rows);
  fs::remove_all(out);
}

TEST_CASE("bad input exits with 1 before touching the output directory") {
  const auto out = scratch("bad");
  CHECK(run_command({"simulate", "--preset", "amarillo_tx", "--dt", "-1", "--out", out.string()}) == 1);
  CHECK_FALSE(fs::exists(out));
  CHECK(run_command({"simulate", "--bogus"}) == 1);
  CHECK(run_command({"frobnicate"}) == 1);
  CHECK(run_command({}) == 1);
  CHECK(run_command({"simulate", "--scenario", "/no/such/file.ini"}) == 1);
  CHECK(run_command({"simulate", "--preset", "atlantis"}) == 1);
  CHECK(run_command({"pcm", "--space", "xi42", "--out", out.string()}) == 1);
  CHECK(run_command({"sobol", "--param", "g_c", "--out", out.string()}) == 1);
}

TEST_CASE("dry runs report the tensor size") {
  const auto out = scratch("plan");
  CHECK(run_command({"pcm", "--preset", "bethel_ak", "--space", "xi3", "--points", "5", "--out", out.string(),
                     "--dry-run", "--quiet"}) == 0);
  const auto m = manifest(out);
  CHECK(m["details"]["runs"] == 3125);
  CHECK(m["status"] == "planned");
  CHECK(m["details"]["grid"]["weights"].size() == 3125);
  fs::remove_all(out);
}

TEST_CASE("stochastic commands write their tables") {
  const auto out = scratch("pcm");
  const std::vector<std::string> common{"--param", "g_c", "--param", "I_b", "--points", "2", "--horizon", "1",
                                        "--quiet", "--jobs", "2"};
  auto with = [&](std::vector<std::string> head, const std::string& dir) {
    head.insert(head.end(), common.begin(), common.end());
    head.push_back("--out");
    head.push_back((out / dir).string());
    return head;
  };
  CHECK(run_command(with({"pcm"}, "pcm")) == 0);
  CHECK(lines(out / "pcm" / "moments.csv") == 101);
  CHECK(slurp(out / "pcm" / "moments.csv").rfind("t,theta_max_mean,theta_max_std,phi_max_mean", 0) == 0);
  CHECK(lines(out / "pcm" / "pfail.csv") == 101);
  CHECK(run_command(with({"sobol"}, "sobol")) == 0);
  CHECK(slurp(out / "sobol" / "sobol.csv").rfind("t,theta_max_S_g_c,theta_max_S_I_b", 0) == 0);
  CHECK(run_command(with({"pfail"}, "pfail")) == 0);
  CHECK(fs::exists(out / "pfail" / "pfail.csv"));
  CHECK_FALSE(fs::exists(out / "pfail" / "moments.csv"));
  auto mc = with({"mc", "--samples", "6", "--seed", "4"}, "mc");
  CHECK(run_command(mc) == 0);
  CHECK(lines(out / "mc" / "mc_moments.csv") == 101);
  CHECK(manifest(out / "mc")["seed"] == 4);
  fs::remove_all(out);
}

TEST_CASE("identical inputs reproduce identical tables") {
  const auto out = scratch("repeat");
  const auto run = [&](const std::string& dir, const std::string& jobs) {
    return run_command({"mc", "--param", "g_c", "--samples", "4", "--horizon", "0.5", "--jobs", jobs, "--seed", "9",
                        "--out", (out / dir).string(), "--quiet"});
  };
  CHECK(run("a", "1") == 0);
  CHECK(run("b", "3") == 0);
  CHECK(slurp(out / "a" / "mc_moments.csv") == slurp(out / "b" / "mc_moments.csv"));
  CHECK(manifest(out / "a")["config_digest"] == manifest(out / "b")["config_digest"]);
  fs::remove_all(out);
}

TEST_CASE("loading synthesis and convergence outputs") {
  const auto out = scratch("misc");
  CHECK(run_command({"synth-loading", "--preset", "san_diego_ca", "--out", (out / "l").string(), "--quiet"}) == 0);
  CHECK(lines(out / "l" / "loading.csv") == 367);
  CHECK(lines(out / "l" / "monthly.csv") == 13);
  CHECK(lines(out / "l" / "coefficients.csv") == 8);
  CHECK(run_command({"converge", "--levels", "1,2", "--reference", "4", "--samples", "3", "--horizon", "0.2",
                     "--out", (out / "c").string(), "--quiet"}) == 0);
  const std::string conv = slurp(out / "c" / "convergence.csv");
  CHECK(conv.rfind("method,n,error\npcm,1,", 0) == 0);
  CHECK(conv.find("\nmc,3,") != std::string::npos);
  fs::remove_all(out);
}

TEST_CASE("config files drive the run and keys are checked") {
  const auto out = scratch("cfg");
  fs::create_directories(out);
  {
    std::ofstream f(out / "run.ini");
    f << "[scenario]\npreset = bethel_ak\nevents = none\n[simulation]\nhorizon = 0.5\n";
  }
  CHECK(run_command({"simulate", "--scenario", (out / "run.ini").string(), "--out", (out / "r").string(), "--quiet"}) ==
        0);
  CHECK(manifest(out / "r")["details"]["scenario_kind"] == "icing");
  {
    std::ofstream f(out / "bad.ini");
    f << "[simulation]\nhorizon_years = 3\n";
  }
  CHECK(run_command({"simulate", "--scenario", (out / "bad.ini").string(), "--out", (out / "b").string()}) == 1);
  fs::remove_all(out);
}
