// SPDX-License-Identifier: Apache-2.0
//
// Drives the plan executable end to end and checks exit codes and files.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path kWork = fs::path(THZIRS_TEST_SCRATCH) / "cli";

int run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " \"" + std::string(THZIRS_PLAN_EXE) + "\" " + args + " >\"" +
                          (kWork / "stdout.txt").string() + "\" 2>\"" + (kWork / "stderr.txt").string() + "\"";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string write_config(const std::string& name, const std::string& body) {
  fs::create_directories(kWork);
  const fs::path p = kWork / name;
  std::ofstream(p) << body;
  return "\"" + p.string() + "\"";
}

// cheap instance: short array, coarse grid, two seeds
const char* kSmall = R"({
  "ues": {"counts": [1, 2]},
  "irs": {"elements": 4},
  "grid": {"step_x_m": 1.0, "step_y_m": 1.0},
  "seeds": {"first": 1, "count": 2}
})";

}  // namespace

TEST_CASE("band plan and sweep") {
  const auto empty = write_config("empty.json", "");
  CHECK(run("band-plan --config " + empty) == 0);
  const std::string plan = slurp(kWork / "stdout.txt");
  CHECK(plan.rfind("index,center_hz,bandwidth_hz,lower_hz,upper_hz,K_center_per_m\n", 0) == 0);
  CHECK(plan.find("\n3,375000000000.0,50000000000.0,") != std::string::npos);

  const auto a = (kWork / "sweep_a.csv").string();
  const auto b = (kWork / "sweep_b.csv").string();
  CHECK(run("absorption-sweep --config " + empty + " --out \"" + a + "\"") == 0);
  CHECK(run("absorption-sweep --config " + empty + " --out \"" + b + "\"") == 0);
  CHECK(slurp(a) == slurp(b));
  CHECK(slurp(a).rfind("f_hz,K_per_m,gain_db_d1", 0) == 0);
  CHECK(run("absorption-sweep --config " + empty + " --out /nonexistent/dir/sweep.csv") == 1);
}

TEST_CASE("optimize") {
  const auto small = write_config("small.json", kSmall);
  CHECK(run("optimize --config " + small + " --algo minidis --seed 4 --ues 2") == 0);
  const auto doc = nlohmann::json::parse(slurp(kWork / "stdout.txt"));
  CHECK(doc.at("algo").get<std::string>() == "minidis");
  CHECK(doc.at("ues").size() == 2);
  CHECK(doc.at("solution").at("feasible").get<bool>());
  CHECK(doc.at("solution").at("sum_rate_bps").get<double>() > 0.0);

  const auto hard = write_config("hard.json", R"({"irs": {"elements": 4}, "rate_requirement_bps": 1e15,
                                                  "grid": {"step_x_m": 2.5, "step_y_m": 4.0}})");
  CHECK(run("optimize --config " + hard + " --algo bcs --seed 1") == 2);
}

TEST_CASE("usage and configuration errors exit with 1") {
  const auto small = write_config("small.json", kSmall);
  CHECK(run("") == 1);
  CHECK(run("optimize --config " + small + " --algo fastest") == 1);
  CHECK(run("optimize --config " + small + " --ues 0") == 1);
  CHECK(run("band-plan --config /nonexistent.json") == 1);
  CHECK(run("band-plan --config " + write_config("n0.json", R"({"irs": {"elements": 0}})")) == 1);
  CHECK(run("band-plan --config " + write_config("unknown.json", R"({"irs": {"count": 4}})")) == 1);
  CHECK(run("monte-carlo --config " + small + " --seeds 5..2 --out \"" + (kWork / "mc_bad").string() + "\"") == 1);
  CHECK(run("band-plan --config " + write_config("broken.json", "{\"irs\": ")) == 1);
}

TEST_CASE("monte-carlo output is reproducible across runs and thread caps") {
  const auto small = write_config("small.json", kSmall);
  const fs::path a = kWork / "mc_a";
  const fs::path b = kWork / "mc_b";
  CHECK(run("monte-carlo --config " + small + " --seeds 1..2 --no-timing -q --out \"" + a.string() + "\"") == 0);
  CHECK(run("monte-carlo --config " + small + " --seeds 1..2 --no-timing -q --out \"" + b.string() + "\"",
            "PLAN_THREADS=1") == 0);
  const std::string summary = slurp(a / "summary.csv");
  CHECK(summary == slurp(b / "summary.csv"));
  CHECK(slurp(a / "aggregate.csv") == slurp(b / "aggregate.csv"));
  CHECK(summary.rfind("seed,algo,U,sum_rate_bps,feasible,wallclock_s\n", 0) == 0);
  // 2 seeds x 2 UE counts x 4 schemes, plus the header
  std::size_t lines = 0;
  for (char ch : summary) lines += ch == '\n' ? 1 : 0;
  CHECK(lines == 17);
  const auto report = nlohmann::json::parse(slurp(a / "report.json"));
  CHECK(report.at("runs").size() == 16);
  CHECK(report.at("aggregate").size() == 8);
}
