#include <doctest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args, bool with_stderr = false) {
  const std::string cmd = std::string(RELAY_DDE_EXE) + " " + args + (with_stderr ? " 2>&1" : " 2>/dev/null");
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::vector<nlohmann::json> json_lines(const std::string& text) {
  std::vector<nlohmann::json> out;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line))
    if (!line.empty()) out.push_back(nlohmann::json::parse(line));
  return out;
}

}  // namespace

TEST_CASE("usage errors exit with 2") {
  CHECK(run("").code == 2);
  CHECK(run("no-such-command").code == 2);
  CHECK(run("fixedpoint --Q -1 --Omega 3 --nu 2").code == 2);
  CHECK(run("fixedpoint --Q 1.5 --Omega 14 --nu 3 --sigma 0").code == 2);
  CHECK(run("--format xml fixedpoint --Q 1.5 --Omega 14 --nu 3").code == 2);
  const Run r = run("simulate --Q 1.5 --Omega 14 --x0 0", true);
  CHECK(r.code == 2);
  CHECK(r.out.find("\"error\"") != std::string::npos);
}

TEST_CASE("help exits cleanly") { CHECK(run("--help").code == 0); }

TEST_CASE("runtime failures exit with 1 and a JSON error") {
  // exactly at a relabel corner the fixed point has its headpoint on the manifold
  const Run r = run("simulate --Q 1.5 --Omega 9.996486610856323 --seed-nu 2 --perturbation 0 --events 20", true);
  CHECK(r.code == 1);
  const auto recs = json_lines(r.out);
  REQUIRE(recs.size() == 1);
  CHECK(recs[0]["record"] == "error");
  CHECK(recs[0]["schema_version"] == 1);
}

TEST_CASE("fixedpoint and spectrum") {
  const Run r = run("fixedpoint --Q 1.5 --Omega 14 --sigma -1 --nu 3");
  REQUIRE(r.code == 0);
  const auto j = json_lines(r.out).at(0);
  CHECK(j["schema_version"] == 1);
  CHECK(j["nu"] == 3);
  CHECK(j["valid"]["parity"] == true);
  CHECK(2 * j["Tstar"].get<double>() > 0.5);

  const Run s = run("spectrum --Q 1.5 --Omega 10 --nu 3");
  REQUIRE(s.code == 0);
  CHECK(json_lines(s.out).at(0)["unstable_count"] == 0);
}

TEST_CASE("simulate") {
  const Run r = run("simulate --Q 1.5 --Omega 14 --sigma -1 --seed-nu 3 --perturbation 0.1 --events 5000");
  REQUIRE(r.code == 0);
  const auto j = json_lines(r.out).at(0);
  CHECK(j["class"] == "Periodic");
  CHECK(j["label"] == "[H,Z,Hb,Zb]_3^S");

  const auto dir = std::filesystem::temp_directory_path() / "relay_dde_cli_test";
  std::filesystem::create_directories(dir);
  const auto csv = (dir / "orbit.csv").string();
  const Run c = run("--format csv --out " + csv + " simulate --Q 1.5 --Omega 14 --seed-nu 3 --events 400");
  REQUIRE(c.code == 0);
  CHECK(json_lines(c.out).at(0)["schema_version"] == 1);
  std::ifstream in(csv);
  std::string header;
  std::getline(in, header);
  CHECK(header == "t,x,y");
}

TEST_CASE("locus") {
  const Run r = run("locus --kind ns --nu 3 --Q 1.5 --omega-min 2 --omega-max 20");
  REQUIRE(r.code == 0);
  const auto j = json_lines(r.out).at(0);
  std::vector<double> Oms;
  for (const auto& p : j["points"]) Oms.push_back(p["Omega"].get<double>());
  REQUIRE(Oms.size() == 2);
  CHECK(Oms[0] == doctest::Approx(4.75).epsilon(0.01 / 4.75));
  CHECK(Oms[1] == doctest::Approx(14.78).epsilon(0.01 / 14.78));

  const Run k = run("locus --kind ns --nu 3 --Q 1.5 --omega-min 2 --omega-max 20 --criticality");
  REQUIRE(k.code == 0);
  const auto kj = json_lines(k.out).at(0);
  CHECK(kj["points"][0]["criticality"] == "subcritical");
  CHECK(kj["points"][1]["criticality"] == "supercritical");

  const Run c = run("--format csv locus --kind corner --nu 2 --Q 1.5 --omega-min 2 --omega-max 30");
  REQUIRE(c.code == 0);
  CHECK(c.out.rfind("kind,nu,Q,Omega,Tstar,invP,xH,unstable_count,marker\n", 0) == 0);
}

TEST_CASE("region output is independent of the thread count") {
  const std::string args =
      "--format csv region --nus 0,2,3,4 --q-min 0.3 --q-max 2 --q-steps 7 --omega-min 1 --omega-max 30 "
      "--omega-steps 9";
  const Run a = run("--threads 1 " + args);
  const Run b = run("--threads 4 " + args);
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(a.out == run("--threads 1 " + args).out);
}

TEST_CASE("config file") {
  const auto path = std::filesystem::temp_directory_path() / "relay_dde_cli_test.ini";
  {
    std::ofstream f(path);
    f << "[fixedpoint]\nQ=1.5\nOmega=14\nnu=3\n";
  }
  const Run r = run("--config " + path.string() + " fixedpoint");
  REQUIRE(r.code == 0);
  CHECK(json_lines(r.out).at(0)["Omega"] == 14);
  // flags override the file
  const Run o = run("--config " + path.string() + " fixedpoint --Omega 10");
  REQUIRE(o.code == 0);
  CHECK(json_lines(o.out).at(0)["Omega"] == 10);
}

TEST_CASE("period diagram and mode trace") {
  const Run p = run("--format csv period-diagram --nus 2,3 --Q 1.5 --omega-min 2 --omega-max 30 --samples 200");
  REQUIRE(p.code == 0);
  CHECK(p.out.find("passband") != std::string::npos);
  CHECK(p.out.find(",PF") != std::string::npos);

  const Run m = run("mode-trace --nu 2 --Q 1.5 --omega-min 5 --omega-max 30 --samples 300");
  REQUIRE(m.code == 0);
  const auto recs = json_lines(m.out);
  REQUIRE(recs.size() > 2);
  CHECK(recs.front()["record"] == "fixed_point");
  const auto& j = recs.back();
  CHECK(j["record"] == "mode_events");
  CHECK(j["relabels"].size() == 1);
  CHECK(j["termination"]["kind"] == "Corner2");
}

TEST_CASE("torus scan") {
  const Run r = run("torus-scan --Q 1.5 --omega-min 14.70 --omega-max 14.80 --steps 1 --iterates 20000");
  REQUIRE(r.code == 0);
  const auto recs = json_lines(r.out);
  REQUIRE(recs.size() == 2);
  CHECK(recs[0]["class"] == "Periodic");
  CHECK(recs[1]["class"] == "Quasiperiodic");
}
