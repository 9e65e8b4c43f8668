// Copyright 2026 The ddsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "doctest.h"
#include "json.hpp"
#include "ddsim/analytic.hpp"
#include "ddsim/curve.hpp"
#include "ddsim/noise.hpp"

namespace fs = std::filesystem;
using namespace ddsim;

namespace {

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  Run r;
  r.code = cli::run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("ddsim_cli_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Data lines only, without the provenance header.
std::string body(const fs::path& p) {
  std::istringstream in(slurp(p));
  std::string line, kept;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] != '#') kept += line + '\n';
  }
  return kept;
}

std::vector<std::vector<double>> rows(const fs::path& p) {
  std::istringstream in(body(p));
  std::string line;
  std::getline(in, line);
  std::vector<std::vector<double>> out;
  while (std::getline(in, line)) {
    std::vector<double> row;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) row.push_back(std::stod(field));
    out.push_back(row);
  }
  return out;
}

const std::vector<std::string> kReferenceFlags{
    "--theta-over-pi", "0.2", "--detuning", "6.283185307179586", "--noise", "ou",
    "--lambda", "2.5", "--gamma", "0.6283185307179586", "--tau-start", "0",
    "--tau-stop", "8", "--tau-count", "40"};

std::vector<std::string> with(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

}  // namespace

TEST_CASE("montecarlo simulate is byte-identical across runs and worker counts") {
  const fs::path a = fresh_dir("det_a");
  const fs::path b = fresh_dir("det_b");
  const auto base = with({"simulate", "--engine", "montecarlo", "--n-trajectories", "500",
                          "--sequences", "ramsey", "hahn_ramsey"},
                         kReferenceFlags);
  REQUIRE(run(with(base, {"--seed", "99", "--out", a.string(), "--workers", "1"})).code == 0);
  REQUIRE(run(with(base, {"--seed", "99", "--out", b.string(), "--workers", "4"})).code == 0);
  for (const char* f : {"ramsey_montecarlo.csv", "hahn_ramsey_montecarlo.csv"}) {
    CHECK(fs::exists(a / f));
    CHECK(slurp(a / f) == slurp(b / f));
  }
  const fs::path c = fresh_dir("det_c");
  REQUIRE(run(with(base, {"--out", c.string(), "--seed", "100"})).code == 0);
  CHECK(body(a / "ramsey_montecarlo.csv") != body(c / "ramsey_montecarlo.csv"));
}

TEST_CASE("noiseless simulate gives identical analytic and Monte Carlo curves") {
  const fs::path d = fresh_dir("quiet");
  const Run r = run({"simulate", "--engine", "both", "--gamma", "0", "--theta-over-pi", "0.3",
                     "--detuning", "5", "--tau-count", "12", "--n-trajectories", "64",
                     "--sequences", "ramsey", "hahn_ramsey", "hahn_echo", "--out", d.string()});
  REQUIRE(r.code == 0);
  for (const char* seq : {"ramsey", "hahn_ramsey", "hahn_echo"}) {
    const auto an = rows(d / (std::string(seq) + "_analytic.csv"));
    const auto mc = rows(d / (std::string(seq) + "_montecarlo.csv"));
    REQUIRE(an.size() == 12);
    REQUIRE(mc.size() == 12);
    for (std::size_t i = 0; i < an.size(); ++i) {
      CHECK(std::abs(an[i][1] - mc[i][1]) < 1e-12);
      CHECK(mc[i][2] == 0.0);
    }
    for (const auto& row : rows(d / (std::string(seq) + "_comparison.csv"))) {
      CHECK(row[4] == 0.0);
    }
  }
}

TEST_CASE("invalid configuration exits 2 without writing") {
  const fs::path d = fresh_dir("bad_grid");
  Run r = run({"simulate", "--tau-start", "3", "--tau-stop", "1", "--out", d.string()});
  CHECK(r.code == cli::kExitConfig);
  CHECK(r.err.find("tau.stop") != std::string::npos);
  CHECK_FALSE(fs::exists(d));
  r = run({"simulate", "--tau-count", "1", "--out", d.string()});
  CHECK(r.code == cli::kExitConfig);
  r = run({"simulate", "--lambda", "-1", "--out", d.string()});
  CHECK(r.code == cli::kExitConfig);
  r = run({"simulate", "--engine", "quantum", "--out", d.string()});
  CHECK(r.code == cli::kExitConfig);
  r = run({"simulate", "--no-such-flag"});
  CHECK(r.code == cli::kExitConfig);
  CHECK_FALSE(fs::exists(d));

  const fs::path cfg = fs::temp_directory_path() / "ddsim_cli_bad.json";
  std::ofstream(cfg) << "{\n  \"noise\": {\"lambda\": 2.5, \"colour\": 1}\n}\n";
  r = run({"simulate", "--config", cfg.string(), "--out", d.string()});
  CHECK(r.code == cli::kExitConfig);
  CHECK(r.err.find("noise.colour") != std::string::npos);
  std::ofstream(cfg) << "{\n  \"noise\": {\"lambda\": 2.5,\n}\n";
  r = run({"simulate", "--config", cfg.string(), "--out", d.string()});
  CHECK(r.code == cli::kExitConfig);
  CHECK(r.err.find(cfg.string() + ":3:1") != std::string::npos);
  CHECK_FALSE(fs::exists(d));
}

TEST_CASE("flags override the config file and every output carries the hash") {
  const fs::path cfg = fs::temp_directory_path() / "ddsim_cli_cfg.json";
  std::ofstream(cfg) << R"({"sequences": ["ramsey"], "theta_over_pi": 0.5, "detuning": 3.0,
    "noise": {"kind": "ou", "lambda": 2.0, "gamma": 0.5}, "tau": {"start": 0, "stop": 2, "count": 9}})";
  const fs::path a = fresh_dir("cfg_a");
  const fs::path b = fresh_dir("cfg_b");
  REQUIRE(run({"simulate", "--config", cfg.string(), "--out", a.string()}).code == 0);
  REQUIRE(run({"simulate", "--config", cfg.string(), "--gamma", "0.9", "--out", b.string()})
              .code == 0);
  const auto ra = rows(a / "ramsey_analytic.csv");
  const auto rb = rows(b / "ramsey_analytic.csv");
  const NoiseParams pa{2.0, 0.5, NoiseKind::OrnsteinUhlenbeck};
  const NoiseParams pb{2.0, 0.9, NoiseKind::OrnsteinUhlenbeck};
  for (std::size_t i = 0; i < ra.size(); ++i) {
    CHECK(ra[i][1] == doctest::Approx(ramsey_signal(3.0, pa, ra[i][0])).epsilon(1e-14));
    CHECK(rb[i][1] == doctest::Approx(ramsey_signal(3.0, pb, rb[i][0])).epsilon(1e-14));
  }
  const std::string ha = slurp(a / "ramsey_analytic.csv");
  const std::string hb = slurp(b / "ramsey_analytic.csv");
  CHECK(ha.rfind("# config_hash=", 0) == 0);
  CHECK(ha.substr(0, 31) != hb.substr(0, 31));
}

TEST_CASE("environment variables override defaults") {
  const fs::path a = fresh_dir("env_a");
  const fs::path b = fresh_dir("env_b");
  const auto base = std::vector<std::string>{"simulate", "--engine", "montecarlo",
                                             "--n-trajectories", "100", "--gamma", "1",
                                             "--tau-count", "4"};
  REQUIRE(run(with(base, {"--seed", "7", "--out", a.string()})).code == 0);
  setenv("DDSIM_SEED", "7", 1);
  const Run r = run(with(base, {"--out", b.string()}));
  unsetenv("DDSIM_SEED");
  REQUIRE(r.code == 0);
  CHECK(slurp(a / "hahn_ramsey_montecarlo.csv") == slurp(b / "hahn_ramsey_montecarlo.csv"));
}

TEST_CASE("cycles frequency unit scales by 2 pi") {
  const fs::path a = fresh_dir("unit_rad");
  const fs::path b = fresh_dir("unit_cyc");
  REQUIRE(run({"simulate", "--detuning", "6.283185307179586", "--gamma", "0.6283185307179586",
               "--theta-over-pi", "0.2", "--out", a.string()})
              .code == 0);
  REQUIRE(run({"simulate", "--freq-unit", "cycles", "--detuning", "1", "--gamma", "0.1",
               "--theta-over-pi", "0.2", "--out", b.string()})
              .code == 0);
  const auto ra = rows(a / "hahn_ramsey_analytic.csv");
  const auto rb = rows(b / "hahn_ramsey_analytic.csv");
  REQUIRE(ra.size() == rb.size());
  for (std::size_t i = 0; i < ra.size(); ++i) {
    CHECK(rb[i][1] == doctest::Approx(ra[i][1]).epsilon(1e-12));
  }
}

TEST_CASE("components writes weights and exponents") {
  const fs::path d = fresh_dir("components");
  REQUIRE(run({"components", "--theta-count", "5", "--lambda", "2.5", "--gamma", "0.7",
               "--tau-count", "11", "--tau-stop", "4", "--out", d.string()})
              .code == 0);
  const auto w = rows(d / "weights.csv");
  REQUIRE(w.size() == 5);
  CHECK(w.back()[0] == doctest::Approx(kPi / 2));
  CHECK(std::abs(w.back()[1]) < 1e-15);
  CHECK(std::abs(w.back()[2]) < 1e-15);
  CHECK(std::abs(w.back()[3]) < 1e-15);
  CHECK(w.back()[4] == doctest::Approx(1.0).epsilon(1e-15));
  const auto e = rows(d / "filter_exponents.csv");
  REQUIRE(e.size() == 11);
  CHECK(e[0] == std::vector<double>{0, 0, 0, 0});
  const NoiseParams p{2.5, 0.7, NoiseKind::OrnsteinUhlenbeck};
  for (const auto& row : e) {
    if (row[0] == 0) continue;
    const double a = f1(p, row[0]);
    const double b = delta_f(p, row[0]);
    CHECK(row[1] == doctest::Approx(2 * (a + b)).epsilon(1e-4));
    CHECK(row[2] == doctest::Approx(a).epsilon(1e-4));
    CHECK(row[3] == doctest::Approx(2 * (a - b)).epsilon(1e-4));
  }
}

TEST_CASE("fit reports the decay ordering and rejects bad input") {
  const fs::path d = fresh_dir("fit");
  REQUIRE(run(with({"simulate", "--sequences", "ramsey", "hahn_ramsey", "hahn_echo", "--out",
                    d.string()},
                   kReferenceFlags))
              .code == 0);
  auto fit = [&](const std::string& seq, std::vector<std::string> extra = {}) {
    const Run r = run(with({"fit", (d / (seq + "_analytic.csv")).string(), "--sequence", seq,
                            "--out", d.string()},
                           extra));
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(slurp(d / (seq + "_analytic_fit.json")));
    CHECK(j.at("config_hash").get<std::string>().size() == 16);
    CHECK(nlohmann::json::parse(r.out.substr(0, r.out.rfind('}') + 1)) == j);
    return std::pair{j.at("tau_c").get<double>(), j.at("tau_c_err").get<double>()};
  };
  const auto ramsey = fit("ramsey");
  const auto hr = fit("hahn_ramsey");
  const auto echo = fit("hahn_echo", {"--no-oscillation"});
  CHECK(hr.first - hr.second > ramsey.first + ramsey.second);
  CHECK(hr.first - hr.second > echo.first + echo.second);

  CHECK(run({"fit", (d / "missing.csv").string()}).code == cli::kExitConfig);
  std::ofstream(d / "flat.csv") << "tau,signal\n0,1\n1,1\n2,1\n3,1\n4,1\n5,1\n6,1\n";
  const Run flat = run({"fit", (d / "flat.csv").string(), "--out", d.string()});
  CHECK(flat.code == cli::kExitRuntime);
  std::ofstream(d / "garbled.csv") << "tau,signal\n0,abc\n";
  CHECK(run({"fit", (d / "garbled.csv").string()}).code != cli::kExitOk);
}

TEST_CASE("scan writes a residual map with the argmin at the truth") {
  const fs::path d = fresh_dir("scan");
  REQUIRE(run({"simulate", "--sequences", "hahn_ramsey", "--theta-over-pi", "0.2", "--detuning",
               "6.283185307179586", "--lambda", "2", "--gamma", "0.6", "--tau-count", "40",
               "--out", d.string()})
              .code == 0);
  const Run r = run({"scan", (d / "hahn_ramsey_analytic.csv").string(), "--sequence",
                     "hahn_ramsey", "--theta-over-pi", "0.2", "--detuning", "6.283185307179586",
                     "--lambda-min", "1", "--lambda-max", "3", "--lambda-count", "5",
                     "--gamma-min", "0.2", "--gamma-max", "1.0", "--gamma-count", "5", "--out",
                     d.string()});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(slurp(d / "hahn_ramsey_analytic_scan.json"));
  CHECK(j.at("best_lambda").get<double>() == doctest::Approx(2.0));
  CHECK(j.at("best_gamma").get<double>() == doctest::Approx(0.6));
  const auto map = rows(d / "hahn_ramsey_analytic_residuals.csv");
  CHECK(map.size() == 25);
  for (const auto& row : map) CHECK(row[2] >= 0.0);
}

TEST_CASE("sensitivity and bloch commands") {
  const fs::path d = fresh_dir("sens");
  const Run r = run(with({"sensitivity", "--out", d.string()}, kReferenceFlags));
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(slurp(d / "sensitivity.json"));
  CHECK(std::abs(j.at("optimal_theta_over_pi").get<double>() - 0.2) <= 0.05);
  CHECK(j.at("eta").get<double>() > 0.0);

  const Run b = run({"bloch", "--sequences", "hahn_ramsey", "--theta-over-pi", "0.3",
                     "--detuning", "6.283185307179586", "--tau", "0.8", "--samples", "20",
                     "--out", d.string()});
  REQUIRE(b.code == 0);
  const auto pts = rows(d / "bloch_hahn_ramsey.csv");
  REQUIRE(pts.size() > 10);
  CHECK(pts.front() == std::vector<double>{0, 0, 0, 1});
  for (const auto& p : pts) CHECK(std::abs(p[1] * p[1] + p[2] * p[2] + p[3] * p[3] - 1) < 1e-10);
  CHECK(pts.back()[3] == doctest::Approx(hahn_ramsey_signal(0.3 * kPi, 2 * kPi,
                                                            NoiseParams::none(), 0.8))
                             .epsilon(1e-10));
}
