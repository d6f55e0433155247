#include <doctest.h>

#include "dcci/error.hpp"
#include "dcci/numeric.hpp"
#include "dcci/rng.hpp"
#include "oracles.hpp"

#include <atomic>
#include <numeric>
#include <set>

using namespace dcci;

TEST_SUITE("rng") {
  TEST_CASE("same seed and stream reproduce the sequence") {
    Rng a(42, 3), b(42, 3);
    for (int i = 0; i < 1000; ++i) {
      CHECK(a.normal() == b.normal());
      CHECK(a.poisson(2.5) == b.poisson(2.5));
    }
  }

  TEST_CASE("streams and seeds separate") {
    Rng a(42, 0), b(42, 1), c(43, 0);
    const double x = a.uniform();
    CHECK(x != b.uniform());
    CHECK(x != c.uniform());
  }

  TEST_CASE("uniform stays in the open unit interval") {
    Rng rng(1);
    for (int i = 0; i < 100000; ++i) {
      const double u = rng.uniform();
      REQUIRE(u > 0.0);
      REQUIRE(u < 1.0);
    }
  }

  TEST_CASE("moments of the distribution transforms") {
    Rng rng(9, 9);
    const int n = 200000;
    std::vector<double> normal(n), laplace(n), pois_small(n), pois_large(n), bern(n);
    for (int i = 0; i < n; ++i) {
      normal[i] = rng.normal();
      laplace[i] = rng.laplace(0.7);
      pois_small[i] = static_cast<double>(rng.poisson(1.7));
      pois_large[i] = static_cast<double>(rng.poisson(42.0));
      bern[i] = rng.bernoulli(0.3) ? 1.0 : 0.0;
    }
    const double tol = 4.0 / std::sqrt(static_cast<double>(n));
    CHECK(std::abs(oracle::mean(normal)) < tol);
    CHECK(oracle::variance(normal) == doctest::Approx(1.0).epsilon(0.02));
    CHECK(std::abs(oracle::mean(laplace)) < 4.0 * tol);
    CHECK(oracle::variance(laplace) == doctest::Approx(2.0 * 0.49).epsilon(0.03));
    CHECK(oracle::mean(pois_small) == doctest::Approx(1.7).epsilon(0.01));
    CHECK(oracle::variance(pois_small) == doctest::Approx(1.7).epsilon(0.03));
    CHECK(oracle::mean(pois_large) == doctest::Approx(42.0).epsilon(0.005));
    CHECK(oracle::variance(pois_large) == doctest::Approx(42.0).epsilon(0.03));
    CHECK(oracle::mean(bern) == doctest::Approx(0.3).epsilon(0.02));
  }

  TEST_CASE("poisson at zero mean is degenerate") {
    Rng rng(5);
    for (int i = 0; i < 100; ++i) CHECK(rng.poisson(0.0) == 0);
  }

  TEST_CASE("below covers its range") {
    Rng rng(2);
    std::set<std::uint64_t> seen;
    for (int i = 0; i < 1000; ++i) {
      const auto v = rng.below(7);
      REQUIRE(v < 7);
      seen.insert(v);
    }
    CHECK(seen.size() == 7);
  }

  TEST_CASE("replication seeds xor the index") {
    CHECK(derive_seed(0b1100, 0b0101) == 0b1001);
    CHECK(derive_seed(77, 0) == 77);
  }
}

TEST_SUITE("numeric") {
  TEST_CASE("pairwise sum matches extended precision accumulation") {
    Rng rng(3);
    std::vector<double> v(10007);
    long double ref = 0;
    for (auto& x : v) {
      x = rng.normal() * 1e3;
      ref += x;
    }
    CHECK(pairwise_sum(v) == doctest::Approx(static_cast<double>(ref)).epsilon(1e-13));
    CHECK(pairwise_sum(std::span<const double>()) == 0.0);
  }

  TEST_CASE("population variance uses divisor n") {
    const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
    CHECK(population_variance(v) == doctest::Approx(1.25));
  }

  TEST_CASE("column means") {
    Matrix m(2, 3);
    m << 1, 2, 3, 3, 4, 5;
    const RowVector c = column_means(m);
    CHECK(c(0) == 2.0);
    CHECK(c(1) == 3.0);
    CHECK(c(2) == 4.0);
  }

  TEST_CASE("numerical rank") {
    Vector s(4);
    s << 10.0, 1.0, 2e-7, 1e-9;
    CHECK(numerical_rank(s) == 3);
    CHECK(numerical_rank(Vector::Zero(3)) == 0);
  }

  TEST_CASE("parallel_for runs every index once and rethrows the lowest failure") {
    std::vector<std::atomic<int>> hits(100);
    parallel_for(100, 4, [&](std::size_t i) { hits[i]++; });
    for (auto& h : hits) CHECK(h.load() == 1);

    std::string message;
    try {
      parallel_for(50, 3, [](std::size_t i) {
        if (i == 7 || i == 31) throw Error("fail " + std::to_string(i));
      });
    } catch (const Error& e) {
      message = e.what();
    }
    CHECK(message == "fail 7");
  }

  TEST_CASE("normal cdf") {
    CHECK(normal_cdf(0.0) == doctest::Approx(0.5));
    CHECK(normal_cdf(1.96) == doctest::Approx(0.9750021).epsilon(1e-6));
  }
}
