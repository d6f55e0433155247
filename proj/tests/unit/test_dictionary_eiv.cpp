#include <doctest.h>

#include "dcci/clean.hpp"
#include "dcci/corrupt.hpp"
#include "dcci/dictionary.hpp"
#include "dcci/eiv.hpp"
#include "dcci/error.hpp"
#include "dcci/rng.hpp"
#include "oracles.hpp"

using namespace dcci;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

Matrix random_matrix(Index n, Index p, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(n, p);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < p; ++j) m(i, j) = rng.normal();
  return m;
}

double row_norm_max(const Matrix& m) { return m.rowwise().norm().maxCoeff(); }

}  // namespace

TEST_SUITE("dictionary") {
  TEST_CASE("output widths") {
    CHECK(Dictionary(DictKind::identity, 4).p_out() == 4);
    CHECK(Dictionary(DictKind::interacted, 4).p_out() == 8);
    CHECK(Dictionary(DictKind::partially_linear, 4).p_out() == 5);
    CHECK(Dictionary(DictKind::quadratic_interacted, 4).p_out() == 15);
  }

  TEST_CASE("layouts") {
    const Dictionary inter(DictKind::interacted, 2);
    CHECK(inter.apply(1.0, vec({3, 4})) == vec({3, 4, 0, 0}));
    CHECK(inter.apply(0.0, vec({3, 4})) == vec({0, 0, 3, 4}));
    const Dictionary quad(DictKind::quadratic_interacted, 1);
    CHECK(quad.apply(2.0, vec({1})) == vec({1, 2, 4, 1, 2, 4}));
    const Dictionary pl(DictKind::partially_linear, 2);
    CHECK(pl.apply(0.5, vec({3, 4})) == vec({0.5, 3, 4}));
    CHECK(quad.derivative(2.0, vec({3})) == vec({0, 1, 4, 0, 3, 12}));
  }

  TEST_CASE("apply_matrix agrees with rowwise apply") {
    const Matrix x = random_matrix(3, 2, 1);
    const Vector d = vec({0, 1, 2});
    for (DictKind k : {DictKind::identity, DictKind::interacted, DictKind::partially_linear,
                       DictKind::quadratic_interacted}) {
      const Dictionary dict(k, 2);
      const Matrix b = dict.apply_matrix(d, x);
      for (Index i = 0; i < 3; ++i) CHECK(b.row(i).transpose() == dict.apply(d(i), x.row(i).transpose()));
    }
    CHECK(Dictionary(DictKind::identity, 2).apply_matrix(d, x) == x);
    const Matrix b = Dictionary(DictKind::interacted, 2).apply_matrix(Vector::Ones(3), x);
    CHECK(b.leftCols(2) == x);
    CHECK(b.rightCols(2).isZero(0.0));
  }

  TEST_CASE("linear in x for fixed d") {
    const Vector x = vec({0.5, -1.0, 2.0});
    const Vector y = vec({1.5, 0.25, -3.0});
    for (DictKind k : {DictKind::identity, DictKind::interacted, DictKind::partially_linear,
                       DictKind::quadratic_interacted}) {
      const Dictionary dict(k, 3);
      for (double d : {0.0, 1.0}) {
        // Constant columns break homogeneity, so compare affine combinations (a + b = 1).
        const Vector lhs = dict.apply(d, 0.25 * x + 0.75 * y);
        const Vector rhs = 0.25 * dict.apply(d, x) + 0.75 * dict.apply(d, y);
        CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-15);
      }
    }
    // Without constant columns the map is exactly linear.
    const Dictionary inter(DictKind::interacted, 3);
    CHECK(((inter.apply(1.0, 2.0 * x - 3.0 * y)) - (2.0 * inter.apply(1.0, x) - 3.0 * inter.apply(1.0, y)))
              .cwiseAbs()
              .maxCoeff() < 1e-14);
  }

  TEST_CASE("interacted rows have exactly one active block") {
    const Dictionary dict(DictKind::interacted, 3);
    const Vector x = vec({1, 2, 3});
    for (double d : {0.0, 1.0}) {
      const Vector b = dict.apply(d, x);
      const bool left = !b.head(3).isZero(0.0);
      const bool right = !b.tail(3).isZero(0.0);
      CHECK(left != right);
    }
  }

  TEST_CASE("lipschitz pass-through in the (2, inf) norm") {
    const Vector d = vec({0, 1, 1, 0, 1});
    for (std::uint64_t s = 0; s < 10; ++s) {
      const Matrix m1 = random_matrix(5, 4, 10 + s);
      const Matrix m2 = random_matrix(5, 4, 50 + s);
      const double gap = row_norm_max(m1 - m2);
      // Binary treatment: each row difference is copied into at most three slots.
      const Dictionary quad(DictKind::quadratic_interacted, 4);
      CHECK(row_norm_max(quad.apply_matrix(d, m1) - quad.apply_matrix(d, m2)) <= std::sqrt(3.0) * gap + 1e-12);
      const Dictionary inter(DictKind::interacted, 4);
      CHECK(row_norm_max(inter.apply_matrix(d, m1) - inter.apply_matrix(d, m2)) <= gap + 1e-12);
    }
  }

  TEST_CASE("covariate_of maps columns back to inputs") {
    const Dictionary quad(DictKind::quadratic_interacted, 2);
    CHECK(!quad.covariate_of(0));
    CHECK(!quad.covariate_of(2));
    CHECK(*quad.covariate_of(3) == 0);
    CHECK(*quad.covariate_of(6) == 1);
    CHECK(*quad.covariate_of(8) == 1);
    CHECK(!Dictionary(DictKind::partially_linear, 2).covariate_of(0));
  }

  TEST_CASE("custom dictionaries and bad input") {
    const Dictionary custom = Dictionary::custom(2, 1, [](double d, const Vector& x) { return vec({d * x.sum()}); });
    CHECK(custom.apply(2.0, vec({1, 2})) == vec({6}));
    CHECK_THROWS_AS(check_compatible(Estimand::ate(), custom), ConfigurationError);
    CHECK_THROWS_AS(Dictionary(DictKind::identity, 2).apply(0.0, vec({1, 2, 3})), DimensionError);
    CHECK(parse_dict_kind("quad") == DictKind::quadratic_interacted);
    CHECK_THROWS_AS(parse_dict_kind("cubic"), ConfigurationError);
  }
}

TEST_SUITE("eiv") {
  TEST_CASE("orthonormal design") {
    Eigen::HouseholderQR<Matrix> qr(random_matrix(8, 3, 2));
    const Matrix b = Matrix(qr.householderQ()).leftCols(3);
    const Vector y = random_matrix(8, 1, 3).col(0);
    CHECK((fit_regression(b, y).coef - b.transpose() * y).cwiseAbs().maxCoeff() < 1e-12);
  }

  TEST_CASE("exact recovery with full column rank") {
    const Matrix b = random_matrix(20, 5, 4);
    const Vector beta = vec({1, -2, 0.5, 3, 0});
    const EivFit fit = fit_regression(b, b * beta);
    CHECK((fit.coef - beta).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(fit.rank_used == 5);
    CHECK((fit.gram - fit.gram.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(Eigen::SelfAdjointEigenSolver<Matrix>(fit.gram).eigenvalues().minCoeff() >= -1e-10);
  }

  TEST_CASE("rank deficient design gives the minimum norm solution") {
    Matrix b(5, 3);
    const Matrix base = random_matrix(5, 2, 5);
    b << base, base.col(0) + base.col(1);
    const Vector y = b * vec({1, 1, 1});
    const EivFit fit = fit_regression(b, y);
    CHECK(fit.rank_used == 2);
    const Vector want = oracle::min_norm_solve(b, y);
    CHECK((fit.coef - want).cwiseAbs().maxCoeff() < 1e-8);
    // Every other solution (add the null vector (1, 1, -1)) is longer.
    for (double t : {-1.0, -0.1, 0.3, 2.0}) {
      CHECK(fit.coef.norm() <= (fit.coef + t * vec({1, 1, -1})).norm());
    }
    // Row space: orthogonal to the null direction.
    CHECK(std::abs(fit.coef.dot(vec({1, 1, -1}))) < 1e-8);
  }

  TEST_CASE("all-zero design is degenerate") {
    CHECK_THROWS_AS(fit_regression(Matrix::Zero(4, 2), Vector::Ones(4)), DegenerateFitError);
    CHECK_THROWS_AS(fit_regression(Matrix::Zero(4, 2), Vector::Ones(3)), DimensionError);
  }

  TEST_CASE("counterfactual moments") {
    const Dictionary inter(DictKind::interacted, 2);
    Matrix x(1, 2);
    x << 3, 4;
    CHECK(counterfactual_moment(Estimand::ate(), vec({1}), x, inter).m_hat == vec({3, 4, -3, -4}));

    const Dictionary ident(DictKind::identity, 2);
    const Matrix xs = random_matrix(6, 2, 7);
    CHECK(counterfactual_moment(Estimand::policy(Vector::Ones(2), Vector::Zero(2)), Vector::Zero(6), xs, ident)
              .m_hat.isZero(0.0));
    CHECK(counterfactual_moment(Estimand::policy(vec({2, 1}), vec({0, 1})), Vector::Zero(6), xs, ident)
              .m_hat.isApprox(vec({xs.col(0).mean(), 1.0})));

    const Dictionary quad(DictKind::quadratic_interacted, 1);
    Matrix xq(2, 1);
    xq << 1, 3;
    CHECK(counterfactual_moment(Estimand::average_derivative(), vec({0, 2}), xq, quad).m_hat ==
          vec({0, 1, 2, 0, 2, 6}));

    const Dictionary pl(DictKind::partially_linear, 2);
    CHECK(counterfactual_moment(Estimand::partially_linear(), vec({0, 1, 1}), random_matrix(3, 2, 1), pl)
              .m_hat == vec({1, 0, 0}));

    CHECK_THROWS_AS(counterfactual_moment(Estimand::ate(), vec({1}), x, pl), ConfigurationError);
  }

  TEST_CASE("balancing weights") {
    CounterfactualMoment m{vec({1, -2, 3}), Estimand::Kind::ate};
    CHECK(fit_balance(Matrix::Identity(3, 3), m).coef == m.m_hat);

    const Matrix b = random_matrix(3, 2, 9);
    const Matrix g = b.transpose() * b / 3.0;
    CounterfactualMoment m2{vec({0.4, -1.1}), Estimand::Kind::ate};
    const Vector want = g.ldlt().solve(m2.m_hat);
    CHECK((fit_balance(g, m2).coef - want).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((fit_balance(g, m2).coef - oracle::psd_solve(g, m2.m_hat)).cwiseAbs().maxCoeff() < 1e-8);
  }

  TEST_CASE("balance identity on a cleaned simulated fold") {
    CorruptionSpec spec;
    spec.noise = NoiseKind::gaussian;
    spec.sigma_h = 1.0;
    spec.rho = {0.9};
    const CorruptedDataset data = simulate_dgp(50, 40, 5, spec, 31);
    const Matrix x_hat = fit_cleaning(data.z, 5).cleaned.values;
    const Dictionary dict(DictKind::interacted, 40);
    const Matrix b = dict.apply_matrix(*data.d, x_hat);
    const EivFit reg = fit_regression(b, *data.y);
    const CounterfactualMoment m = counterfactual_moment(Estimand::ate(), *data.d, x_hat, dict);
    CHECK(rowspace_residual(reg.gram, m.m_hat) < 1e-8);
    const EivFit bal = fit_balance(reg.gram, m);
    CHECK(balance_report(bal, *data.d, x_hat, dict, m).cwiseAbs().maxCoeff() < 1e-8);

    // Regression and weighting coincide on the training fold.
    Vector plug_in(50), weighting(50);
    for (Index i = 0; i < 50; ++i) {
      plug_in(i) = (dict.apply(1.0, x_hat.row(i).transpose()) - dict.apply(0.0, x_hat.row(i).transpose()))
                       .dot(reg.coef);
      weighting(i) = (*data.y)(i) * b.row(i).dot(bal.coef);
    }
    CHECK(std::abs(plug_in.mean() - weighting.mean()) < 1e-8);
  }

  TEST_CASE("balance report by hand") {
    // Identity dictionary, one covariate x = (1, 2, 3, 4), eta = 0.5, M = 3.
    const Dictionary dict(DictKind::identity, 1);
    Matrix x(4, 1);
    x << 1, 2, 3, 4;
    EivFit bal;
    bal.coef = vec({0.5});
    const CounterfactualMoment m{vec({3.0}), Estimand::Kind::policy_affine};
    // mean(x^2 * 0.5) - 3 = 0.5 * 30 / 4 - 3 = 0.75
    CHECK(balance_report(bal, Vector::Zero(4), x, dict, m)(0) == 0.75);

    // Zero covariates: zero gram, zero moment, zero weight, zero residual.
    const Matrix zero = Matrix::Zero(4, 2);
    const Dictionary inter(DictKind::interacted, 2);
    const CounterfactualMoment mz = counterfactual_moment(Estimand::ate(), vec({0, 1, 0, 1}), zero, inter);
    const EivFit bz = fit_balance(Matrix::Zero(4, 4), mz);
    CHECK(bz.coef.isZero(0.0));
    CHECK(balance_report(bz, vec({0, 1, 0, 1}), zero, inter, mz).isZero(0.0));
  }

  TEST_CASE("prediction on raw rows") {
    const Dictionary ident(DictKind::identity, 3);
    EivFit fit;
    fit.coef = vec({1, 0, 0});
    bind(fit, ident, Vector::Ones(3));
    RowVector z(3);
    z << 2.5, -1, 7;
    CHECK(predict(fit, 0.0, z, BoolRow::Constant(3, true)) == 2.5);

    const Dictionary inter(DictKind::interacted, 4);
    EivFit f2;
    f2.coef = vec({1, 2, 3, 4, -1, -2, -3, -4});
    const Vector rho = vec({0.5, 0.8, 1.0, 0.25});
    bind(f2, inter, rho);
    RowVector zr(4);
    zr << 1.0, kMissing, 3.0, 2.0;
    BoolRow obs(4);
    obs << true, false, true, true;
    for (double d : {0.0, 1.0}) {
      double want = 0.0;
      for (Index j = 0; j < 4; ++j) {
        const double filled = obs(j) ? zr(j) / rho(j) : 0.0;
        want += d * filled * f2.coef(j) + (1.0 - d) * filled * f2.coef(4 + j);
      }
      CHECK(predict(f2, d, zr, obs) == doctest::Approx(want).epsilon(1e-14));
    }
    CHECK(predict(f2, 1.0, zr, BoolRow::Constant(4, false)) == 0.0);

    EivFit unbound;
    unbound.coef = vec({1, 0, 0});
    CHECK_THROWS_AS(predict(unbound, 0.0, z, BoolRow::Constant(3, true)), ConfigurationError);
  }
}
