#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "skate/codesign.hpp"

using namespace skate;

namespace {

std::string temp_path(const char* name) {
  return std::string("/tmp/skate_test_") + name;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

double coupled_angle(const DesignVector& design) {
  return reduce_design(design, CouplingMode::Coupled1D)[0];
}

// (psi - 0.3)^2 plus small deterministic per-seed noise.
InnerEval noisy_quadratic(const DesignVector& design, std::uint64_t seed) {
  InnerEval eval;
  Rng rng(seed);
  eval.j = std::pow(coupled_angle(design) - 0.3, 2) +
           0.01 * (rng.uniform01() - 0.5);
  return eval;
}

}  // namespace

TEST_CASE("bo config validation and initial design sizes") {
  BoConfig config;
  CHECK(config.initial_design_size() == 4);
  config.mode = CouplingMode::Symmetric2D;
  CHECK(config.initial_design_size() == 6);
  config.mode = CouplingMode::Full4D;
  CHECK(config.initial_design_size() == 10);

  config.budget = 9;
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);
  config.budget = 10;
  CHECK_NOTHROW(config.validate());

  config.beta_end = 5.0;  // above beta_start
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);
  config.beta_end = 0.0;
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);
  config.beta_end = 1.0;
  config.phase1_frac = 0.6;
  config.phase2_frac = 0.6;
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);
}

TEST_CASE("budget equal to the initial design runs no BO proposals") {
  BoConfig config;
  config.budget = 4;
  int calls = 0;
  const CodesignResult result = run_codesign(
      config, 99,
      [&](const DesignVector& design, std::uint64_t seed, int) {
        ++calls;
        return noisy_quadratic(design, seed);
      });
  CHECK(calls == 4);
  REQUIRE(result.records.size() == 4);
  double best_j = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 4; ++it) {
    const EvalRecord& r = result.records[static_cast<std::size_t>(it)];
    CHECK(r.iteration == it);
    CHECK(r.phase == "init");
    CHECK(r.u[0] == doctest::Approx(halton(it + 1, 2)).epsilon(1e-15));
    best_j = std::min(best_j, r.j);
  }
  CHECK(result.best().j == best_j);
}

TEST_CASE("records carry the coupled pattern, derived seeds, and cube mapping") {
  BoConfig config;
  config.budget = 8;
  const std::uint64_t master = 1234;
  const CodesignResult result = run_codesign(
      config, master, [&](const DesignVector& design, std::uint64_t seed, int) {
        return noisy_quadratic(design, seed);
      });
  REQUIRE(result.records.size() == 8);
  for (const EvalRecord& r : result.records) {
    const double psi = r.design.psi_fl;
    CHECK(r.design.psi_fr == doctest::Approx(-psi).epsilon(1e-15));
    CHECK(r.design.psi_rr == doctest::Approx(psi).epsilon(1e-15));
    CHECK(r.design.psi_rl == doctest::Approx(-psi).epsilon(1e-15));
    CHECK(r.seed ==
          Rng::derive(master, 1000 + static_cast<std::uint64_t>(r.iteration)));
    const Eigen::VectorXd reduced = from_unit_cube(r.u, CouplingMode::Coupled1D);
    CHECK(r.reduced[0] == reduced[0]);
  }
  CHECK(result.records[4].phase == "ucb");
}

TEST_CASE("synthetic noisy quadratic: budget 20 lands within 0.05 of the optimum") {
  for (std::uint64_t master : {1ull, 2ull}) {
    BoConfig config;
    config.budget = 20;
    const CodesignResult result = run_codesign(
        config, master,
        [&](const DesignVector& design, std::uint64_t seed, int) {
          return noisy_quadratic(design, seed);
        });
    CHECK(std::abs(result.best().reduced[0] - 0.3) < 0.05);
  }
}

TEST_CASE("deterministic bimodal objective finds the global grid optimum") {
  // Local minimum near 0.4 rad, global minimum at -0.7 rad.
  const auto objective = [](double psi) {
    const double a = (psi - 0.4) * (psi + 0.7);
    return a * a + 0.05 * (psi + 0.7) * (psi + 0.7);
  };
  double grid_best = std::numeric_limits<double>::infinity();
  double grid_arg = 0.0;
  for (int i = 0; i <= 1000; ++i) {
    Eigen::VectorXd u(1);
    u[0] = static_cast<double>(i) / 1000.0;
    const double j = objective(from_unit_cube(u, CouplingMode::Coupled1D)[0]);
    if (j < grid_best) {
      grid_best = j;
      grid_arg = u[0];
    }
  }

  BoConfig config;
  config.budget = 20;
  const CodesignResult result = run_codesign(
      config, 7, [&](const DesignVector& design, std::uint64_t, int) {
        InnerEval eval;
        eval.j = objective(coupled_angle(design));
        return eval;
      });
  CHECK(result.best().u[0] == doctest::Approx(grid_arg).epsilon(1e-12));
  CHECK(result.best().j == doctest::Approx(grid_best).epsilon(1e-12));
}

TEST_CASE("failed inner evaluations are recorded and the loop continues") {
  BoConfig config;
  config.budget = 8;
  const CodesignResult result = run_codesign(
      config, 5, [&](const DesignVector& design, std::uint64_t seed, int it) {
        if (it == 2) return InnerEval{100.0, true, ""};
        return noisy_quadratic(design, seed);
      });
  REQUIRE(result.records.size() == 8);
  CHECK(result.records[2].failed);
  CHECK(result.records[2].j == 100.0);
  CHECK_FALSE(result.records[3].failed);
  CHECK(result.best_index != 2);
}

TEST_CASE("resume from a truncated log replays the uninterrupted run") {
  const std::string full_log = temp_path("bo_full.jsonl");
  const std::string cut_log = temp_path("bo_cut.jsonl");
  std::remove(full_log.c_str());
  std::remove(cut_log.c_str());
  std::remove((full_log + ".timing").c_str());
  std::remove((cut_log + ".timing").c_str());

  BoConfig config;
  config.budget = 12;
  const auto evaluate = [](const DesignVector& design, std::uint64_t seed,
                           int) { return noisy_quadratic(design, seed); };

  const CodesignResult full = run_codesign(config, 42, evaluate, full_log);
  REQUIRE(full.records.size() == 12);

  // Keep the first 7 records, as if the run had been interrupted there.
  {
    std::ifstream in(full_log);
    std::ofstream out(cut_log);
    std::string line;
    for (int i = 0; i < 7 && std::getline(in, line); ++i) out << line << "\n";
  }
  const CodesignResult resumed =
      run_codesign(config, 42, evaluate, cut_log, true);

  CHECK(slurp(cut_log) == slurp(full_log));
  REQUIRE(resumed.records.size() == full.records.size());
  for (std::size_t k = 0; k < full.records.size(); ++k) {
    CHECK(resumed.records[k].u[0] == full.records[k].u[0]);
    CHECK(resumed.records[k].j == full.records[k].j);
    CHECK(resumed.records[k].seed == full.records[k].seed);
    CHECK(resumed.records[k].phase == full.records[k].phase);
  }
  CHECK(resumed.best_index == full.best_index);

  // The timing sidecar tracks every fresh evaluation.
  std::ifstream timing(full_log + ".timing");
  REQUIRE(timing.good());
  int lines = 0;
  std::string line;
  while (std::getline(timing, line)) ++lines;
  CHECK(lines == 12);
}

TEST_CASE("coupled and symmetric searches nest on a shared synthetic objective") {
  // Bowl centred on psi = 0, which sits exactly on both proposal grids.
  const auto objective = [](const DesignVector& d) {
    return d.psi_fl * d.psi_fl + d.psi_rr * d.psi_rr;
  };

  BoConfig c1;
  c1.mode = CouplingMode::Coupled1D;
  c1.budget = 16;
  const CodesignResult r1 = run_codesign(
      c1, 3, [&](const DesignVector& d, std::uint64_t, int) {
        return InnerEval{objective(d), false, ""};
      });

  BoConfig c2;
  c2.mode = CouplingMode::Symmetric2D;
  c2.budget = 24;
  const CodesignResult r2 = run_codesign(
      c2, 3, [&](const DesignVector& d, std::uint64_t, int) {
        return InnerEval{objective(d), false, ""};
      });

  CHECK(r2.best().j <= r1.best().j + 1e-6);
}

TEST_CASE("json log lines round-trip through the reader") {
  const std::string path = temp_path("bo_roundtrip.jsonl");
  std::remove(path.c_str());

  EvalRecord a;
  a.iteration = 0;
  a.phase = "init";
  a.u = Eigen::VectorXd::Constant(1, 0.3251);
  a.reduced = from_unit_cube(a.u, CouplingMode::Coupled1D);
  a.design = expand_design(a.reduced, CouplingMode::Coupled1D);
  a.seed = 987654321;
  a.j = -1.25;
  a.failed = false;
  a.checkpoint = "ckpt_0.bin";

  EvalRecord b = a;
  b.iteration = 1;
  b.phase = "ei";
  b.u[0] = 0.771;
  b.reduced = from_unit_cube(b.u, CouplingMode::Coupled1D);
  b.design = expand_design(b.reduced, CouplingMode::Coupled1D);
  b.failed = true;

  {
    std::ofstream out(path);
    out << eval_record_to_json_line(a, CouplingMode::Coupled1D) << "\n";
    out << eval_record_to_json_line(b, CouplingMode::Coupled1D) << "\n";
  }
  const std::vector<EvalRecord> records =
      read_codesign_log(path, CouplingMode::Coupled1D);
  REQUIRE(records.size() == 2);
  CHECK(records[0].u[0] == a.u[0]);
  CHECK(records[0].seed == a.seed);
  CHECK(records[0].j == a.j);
  CHECK(records[0].checkpoint == a.checkpoint);
  CHECK(records[1].failed);
  CHECK(records[1].phase == "ei");
  CHECK(records[1].design.psi_fl == doctest::Approx(b.design.psi_fl).epsilon(1e-15));
}

TEST_CASE("corrupt or inconsistent logs are rejected with a line number") {
  const std::string path = temp_path("bo_corrupt.jsonl");

  EvalRecord a;
  a.iteration = 0;
  a.phase = "init";
  a.u = Eigen::VectorXd::Constant(1, 0.5);
  a.reduced = from_unit_cube(a.u, CouplingMode::Coupled1D);
  a.design = expand_design(a.reduced, CouplingMode::Coupled1D);

  {
    std::ofstream out(path);
    out << eval_record_to_json_line(a, CouplingMode::Coupled1D) << "\n";
    out << "{ not json\n";
  }
  CHECK_THROWS_WITH_AS(read_codesign_log(path, CouplingMode::Coupled1D),
                       doctest::Contains("line 2"), std::runtime_error);

  {
    std::ofstream out(path);
    out << eval_record_to_json_line(a, CouplingMode::Coupled1D) << "\n";
    EvalRecord skipped = a;
    skipped.iteration = 5;  // out of sequence
    out << eval_record_to_json_line(skipped, CouplingMode::Coupled1D) << "\n";
  }
  CHECK_THROWS_WITH_AS(read_codesign_log(path, CouplingMode::Coupled1D),
                       doctest::Contains("line 2"), std::runtime_error);

  {
    std::ofstream out(path);
    out << eval_record_to_json_line(a, CouplingMode::Coupled1D) << "\n";
  }
  CHECK_THROWS_AS(read_codesign_log(path, CouplingMode::Symmetric2D),
                  std::runtime_error);
  CHECK_THROWS_AS(read_codesign_log(temp_path("no_such.jsonl"),
                                    CouplingMode::Coupled1D),
                  std::runtime_error);
}

TEST_CASE("resume guards") {
  BoConfig config;
  config.budget = 4;
  CHECK_THROWS_AS(run_codesign(config, 1,
                               [](const DesignVector&, std::uint64_t, int) {
                                 return InnerEval{};
                               },
                               "", true),
                  std::invalid_argument);

  const std::string path = temp_path("bo_overlong.jsonl");
  {
    std::ofstream out(path);
    for (int it = 0; it < 5; ++it) {
      EvalRecord r;
      r.iteration = it;
      r.phase = "init";
      r.u = Eigen::VectorXd::Constant(1, 0.1 * (it + 1));
      r.reduced = from_unit_cube(r.u, CouplingMode::Coupled1D);
      r.design = expand_design(r.reduced, CouplingMode::Coupled1D);
      out << eval_record_to_json_line(r, CouplingMode::Coupled1D) << "\n";
    }
  }
  CHECK_THROWS_AS(run_codesign(config, 1,
                               [](const DesignVector&, std::uint64_t, int) {
                                 return InnerEval{};
                               },
                               path, true),
                  std::runtime_error);

  const CodesignResult empty;
  CHECK_THROWS_AS(empty.best(), std::runtime_error);
}
