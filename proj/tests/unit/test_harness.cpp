#include <doctest.h>

#include "dcci/error.hpp"
#include "dcci/harness.hpp"
#include "oracles.hpp"

#include <sstream>

using namespace dcci;

namespace {

ExperimentCell small_cell(Index reps) {
  ExperimentCell cell;
  cell.id = "cell-test";
  cell.n = 60;
  cell.p = 30;
  cell.r = 3;
  cell.k = 3;
  cell.corruption.noise = NoiseKind::gaussian;
  cell.corruption.ratio = 0.2;
  cell.reps = reps;
  cell.base_seed = 123;
  return cell;
}

}  // namespace

TEST_SUITE("harness") {
  TEST_CASE("a single replication") {
    const ExperimentCell cell = small_cell(1);
    std::vector<ReplicationRecord> recs;
    const CoverageRow row = run_cell(cell, &recs);
    REQUIRE(recs.size() == 1);
    CHECK((row.coverage == 0.0 || row.coverage == 1.0));
    CHECK(row.mean_theta == recs[0].theta);
    CHECK(row.reps_ok + row.reps_failed == 1);

    const ReplicationRecord direct = run_replication(cell, 1);
    CHECK(direct.theta == recs[0].theta);
  }

  TEST_CASE("coverage statistics are exact functions of the records") {
    const ExperimentCell cell = small_cell(12);
    std::vector<ReplicationRecord> recs;
    const CoverageRow row = run_cell(cell, &recs);
    REQUIRE(recs.size() == 12);
    std::vector<double> thetas, ses;
    double covered = 0;
    for (const auto& r : recs) {
      REQUIRE(r.ok);
      thetas.push_back(r.theta);
      ses.push_back(r.se);
      covered += r.covered ? 1.0 : 0.0;
      CHECK(r.covered == (std::abs(r.theta - 2.2) <= 1.96 * r.se));
      CHECK(r.se == doctest::Approx(r.sigma / std::sqrt(60.0)));
    }
    CHECK(row.mean_theta == doctest::Approx(oracle::mean(thetas)).epsilon(1e-14));
    CHECK(row.mean_se == doctest::Approx(oracle::mean(ses)).epsilon(1e-14));
    CHECK(row.coverage * 12.0 == doctest::Approx(covered));
    CHECK(std::abs(row.coverage * 12.0 - std::round(row.coverage * 12.0)) < 1e-12);

    // Recompute the studentized values directly from the records.
    const std::vector<double> st = studentized_values(recs, 2.2);
    for (std::size_t i = 0; i < recs.size(); ++i) {
      CHECK(st[i] == doctest::Approx((recs[i].theta - 2.2) * std::sqrt(60.0) / recs[i].sigma).epsilon(1e-12));
    }
  }

  TEST_CASE("identical cells give identical rows and shards merge exactly") {
    const ExperimentCell cell = small_cell(6);
    const CoverageRow a = run_cell(cell);
    ExperimentCell threaded = cell;
    threaded.threads = 3;
    const CoverageRow b = run_cell(threaded);
    CHECK(a.mean_theta == b.mean_theta);
    CHECK(a.mean_se == b.mean_se);
    CHECK(a.coverage == b.coverage);

    CoverageAccumulator odd, even;
    for (Index rep = 6; rep >= 1; --rep) (rep % 2 ? odd : even).add(run_replication(cell, rep));
    odd.merge(even);
    const CoverageRow merged = odd.finalize(cell);
    CHECK(merged.mean_theta == a.mean_theta);
    CHECK(merged.mean_se == a.mean_se);
    CHECK(merged.coverage == a.coverage);
  }

  TEST_CASE("failed replications are counted, not fatal") {
    ExperimentCell cell = small_cell(3);
    cell.k = 40;  // larger than the 30-row training fold allows
    const CoverageRow row = run_cell(cell);
    CHECK(row.reps_failed == 3);
    CHECK(row.reps_ok == 0);
    CHECK(row.flagged);
  }

  TEST_CASE("forced studentized values") {
    std::vector<ReplicationRecord> recs(3);
    for (auto& r : recs) {
      r.ok = true;
      r.theta = 2.2;
      r.sigma = 1.0;
      r.se = 0.1;
    }
    for (double v : studentized_values(recs, 2.2)) CHECK(v == 0.0);
  }

  TEST_CASE("ks distance") {
    CHECK(ks_distance_normal({0.0}) == doctest::Approx(0.5));
    std::vector<double> quantiles;
    // Midpoint normal quantiles by bisection on the cdf.
    for (int i = 0; i < 200; ++i) {
      const double target = (i + 0.5) / 200.0;
      double lo = -10, hi = 10;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (0.5 * std::erfc(-mid / std::sqrt(2.0)) < target ? lo : hi) = mid;
      }
      quantiles.push_back(0.5 * (lo + hi));
    }
    CHECK(ks_distance_normal(quantiles) == doctest::Approx(0.0025).epsilon(1e-6));
  }

  TEST_CASE("config parsing and grid layout") {
    const ExperimentConfig c = ExperimentConfig::from_json_text(R"({
      "schema_version": 1, "n": 100, "p": 100, "r": 5, "k": [5, 7, 10],
      "corruptions": [{"noise": "gaussian", "ratio": 0.2},
                      {"missing": 0.3},
                      {"privacy": "central", "epsilon": 2.0, "a_bar": 1.0, "units": 50, "published": 100}],
      "reps": 10, "base_seed": 4})");
    const auto cells = c.cells();
    REQUIRE(cells.size() == 9);
    CHECK(cells[0].id == "cell-000");
    CHECK(cells[1].k == 7);
    CHECK(cells[3].corruption.missing == 0.3);
    CHECK(cells[8].id == "cell-008");
    const CorruptionSpec dp = cells[6].corruption.to_spec(5, 100, 1);
    CHECK(dp.noise == NoiseKind::laplace);
    CHECK(dp.sigma_h == doctest::Approx(std::sqrt(2.0) * 2.0 * 100.0 / (2.0 * 50.0)));

    CHECK(ExperimentConfig::from_json_text(R"({"corruptions": []})").cells().empty());
    CHECK_THROWS_AS(ExperimentConfig::from_json_text(R"({"bogus": 1})"), ConfigurationError);
    CHECK_THROWS_AS(ExperimentConfig::from_json_text(R"({"reps": 0})").validate(), ConfigurationError);
    CHECK_THROWS_AS(ExperimentConfig::from_json_text(R"({"k": [500]})").validate(), ConfigurationError);
    CHECK_THROWS_AS(ExperimentConfig::from_json_text("{"), ConfigurationError);
  }

  TEST_CASE("coverage csv layout") {
    CoverageRow row;
    row.cell_id = "cell-000";
    row.corruption = "gaussian(0.2)";
    row.k = 5;
    row.mean_theta = 2.5;
    row.mean_se = 0.25;
    row.coverage = 0.5;
    std::ostringstream out;
    write_coverage_csv({row}, out);
    CHECK(out.str() == "cell_id,corruption,k,mean_theta,mean_se,coverage,reps_failed\n"
                       "cell-000,\"gaussian(0.2)\",5,2.5,0.25,0.5,0\n");
  }

  TEST_CASE("ols contrast cell") {
    ExperimentCell cell = small_cell(2);
    cell.method = CellMethod::ols;
    const CoverageRow row = run_cell(cell);
    CHECK(row.reps_ok == 2);
    CHECK(std::isfinite(row.mean_theta));
  }
}
