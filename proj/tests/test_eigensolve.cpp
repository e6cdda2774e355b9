#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "oracles.hpp"
#include "spl/eigensolve.hpp"
#include "spl/errors.hpp"
#include "spl/optimize.hpp"

using namespace spl;

namespace {

std::vector<std::vector<double>> dense(const DiscreteOperator::Sparse& m) {
    std::vector<std::vector<double>> a(static_cast<std::size_t>(m.rows()), std::vector<double>(static_cast<std::size_t>(m.cols()), 0.0));
    for (int k = 0; k < m.outerSize(); ++k)
        for (DiscreteOperator::Sparse::InnerIterator it(m, k); it; ++it)
            a[static_cast<std::size_t>(it.row())][static_cast<std::size_t>(it.col())] = it.value();
    return a;
}

PotentialField constant(const GridPtr& g, double c) { return PotentialField::constant(g, c); }

double l2_squared(const Grid& g, const std::vector<double>& u) {
    std::vector<double> u2(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) u2[i] = u[i] * u[i];
    return integrate(g, u2);
}

} // namespace

TEST_CASE("potential field validation") {
    const auto g = make_interval_grid(-1, 1, 7);
    CHECK_THROWS_AS(PotentialField(g, std::vector<double>(6, 0.5)), SizingError);
    CHECK_THROWS_AS(PotentialField(g, std::vector<double>(7, 1.1)), DomainError);
    CHECK_THROWS_AS(PotentialField(nullptr, {}), StateError);
    const PotentialField v(g, std::vector<double>(7, 1.0 + 1e-14));
    CHECK(v.values()[0] == 1.0);
    CHECK(v.mass() == doctest::Approx(7 * 0.25));
}

TEST_CASE("interval stencil") {
    const auto g = make_interval_grid(-1, 1, 3);
    const auto a = dense(assemble(*g, constant(g, 0.0)).matrix());
    CHECK(a[0][0] == doctest::Approx(8));
    CHECK(a[1][1] == doctest::Approx(8));
    CHECK(a[0][1] == doctest::Approx(-4));
    CHECK(a[1][2] == doctest::Approx(-4));
    CHECK(a[0][2] == 0.0);
    const auto s = dense(assemble(*g, constant(g, 0.25)).matrix());
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) CHECK(s[i][j] == doctest::Approx(a[i][j] - (i == j ? 0.25 : 0.0)));
    CHECK_THROWS_AS(assemble(*g, constant(make_interval_grid(-1, 1, 4), 0.0)), SizingError);
}

TEST_CASE("radial operator is symmetric after diagonal similarity") {
    const auto g = make_radial_grid(1.0, 1024);
    const auto op = assemble(*g, constant(g, 0.0));
    const auto A = op.matrix();
    const auto w = op.weights();
    double asym = 0.0, scale = 0.0;
    for (int k = 0; k < A.outerSize(); ++k)
        for (DiscreteOperator::Sparse::InnerIterator it(A, k); it; ++it) {
            const auto i = static_cast<std::size_t>(it.row()), j = static_cast<std::size_t>(it.col());
            const double sij = std::sqrt(w[i]) * it.value() / std::sqrt(w[j]);
            const double sji = std::sqrt(w[j]) * A.coeff(it.col(), it.row()) / std::sqrt(w[i]);
            asym = std::max(asym, std::abs(sij - sji));
            scale = std::max(scale, std::abs(sij));
        }
    CHECK(asym <= 1e-12 * scale);
}

TEST_CASE("principal eigenpair against closed forms") {
    const auto line = make_interval_grid(-1, 1, 2047);
    const EigenPair e = principal_eigenpair(constant(line, 0.0));
    CHECK(std::abs(e.lambda - pi * pi / 4) < 1e-4);
    CHECK(l2_squared(*line, e.u) == doctest::Approx(1.0).epsilon(1e-10));
    for (double x : e.u) CHECK(x >= -1e-10);
    CHECK(e.residual <= 1e-8 * (1 + e.lambda));

    const double j01 = oracle::bessel_zero(0, 1);
    const auto disk = make_radial_grid(1.0, 2048);
    CHECK(std::abs(principal_eigenpair(constant(disk, 0.0)).lambda - j01 * j01) < 1e-2);
}

TEST_CASE("ball potential on the interval against the matching condition") {
    const auto line = make_interval_grid(-1, 1, 2047);
    const double expect = oracle::interval_ball_eigenvalue(1.0, 0.6);
    CHECK(std::abs(principal_eigenpair(ball_potential(line, 0.6)).lambda - expect) < 1e-4);
}

TEST_CASE("second eigenvalues") {
    const auto line = make_interval_grid(-1, 1, 2047);
    CHECK(std::abs(second_eigenvalue(constant(line, 0.0)) - pi * pi) < 5e-4);

    const double j02 = oracle::bessel_zero(0, 2);
    const auto disk = make_radial_grid(1.0, 2048);
    CHECK(std::abs(second_eigenvalue(constant(disk, 0.0)) - j02 * j02) < 5e-2);

    const double j11 = oracle::bessel_zero(1, 1);
    const auto polar = make_polar_grid(1.0, 256, 256);
    const auto op = assemble(*polar, constant(polar, 0.0));
    const EigenPair first = principal_eigenpair(op);
    const EigenPair second = second_eigenpair(op, first);
    CHECK(std::abs(second.lambda - j11 * j11) < 0.1);
    CHECK(second.which == 2);
    CHECK(std::abs(integrate(*polar, [&] {
              std::vector<double> p(first.u.size());
              for (std::size_t i = 0; i < p.size(); ++i) p[i] = first.u[i] * second.u[i];
              return p;
          }())) < 1e-8);
}

TEST_CASE("constant potentials shift the spectrum exactly") {
    for (const GridPtr& g : {make_interval_grid(-1, 1, 255), make_radial_grid(1, 256), make_polar_grid(1, 24, 32)}) {
        const double l0 = principal_eigenpair(constant(g, 0.0)).lambda;
        CHECK(std::abs(principal_eigenpair(constant(g, 0.3)).lambda - (l0 - 0.3)) < 1e-10);
    }
}

TEST_CASE("shift equivariance and monotonicity on random potentials") {
    const auto g = make_radial_grid(1.0, 200);
    CounterRng rng(3, 0);
    for (int trial = 0; trial < 10; ++trial) {
        auto v = testutil::random_admissible(*g, 0.3, rng);
        for (double c : {0.1, 0.5, 1.0}) {
            std::vector<double> lo(v.size()), hi(v.size());
            for (std::size_t i = 0; i < v.size(); ++i) {
                lo[i] = v[i] * (1.0 - c);
                hi[i] = lo[i] + c;
            }
            const double a = principal_eigenpair(PotentialField(g, lo)).lambda;
            const double b = principal_eigenpair(PotentialField(g, hi)).lambda;
            CHECK(std::abs(b - (a - c)) < 1e-10);
        }
        std::vector<double> bigger(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) bigger[i] = std::min(1.0, v[i] + 0.2 * rng.uniform());
        CHECK(principal_eigenpair(PotentialField(g, v)).lambda >= principal_eigenpair(PotentialField(g, bigger)).lambda - 1e-10);
    }
}

TEST_CASE("dense oracle on tiny grids") {
    CounterRng rng(17, 0);
    for (const GridPtr& g : {make_interval_grid(-1, 1, 40), make_radial_grid(1, 40), make_polar_grid(1, 6, 8)}) {
        for (int trial = 0; trial < 5; ++trial) {
            const PotentialField V(g, testutil::random_admissible(*g, 0.4, rng));
            const auto op = assemble(*g, V);
            const auto ev = oracle::jacobi_eigenvalues(dense(op.symmetric_matrix()));
            SolveOptions tight;
            tight.tol = 1e-12;
            const EigenPair first = principal_eigenpair(op, tight);
            CHECK(first.lambda == doctest::Approx(ev[0]).epsilon(1e-9));
            CHECK(second_eigenpair(op, first, tight).lambda == doctest::Approx(ev[1]).epsilon(1e-9));
        }
    }
}

TEST_CASE("mesh convergence is second order") {
    double prev = 0.0;
    for (int n : {63, 127, 255, 511}) {
        const auto g = make_interval_grid(-1, 1, n);
        const double err = std::abs(principal_eigenpair(constant(g, 0.0)).lambda - pi * pi / 4);
        if (prev > 0.0) CHECK(prev / err >= 3.5);
        prev = err;
    }
}

TEST_CASE("rayleigh quotient") {
    const auto line = make_interval_grid(-1, 1, 2047);
    const auto x = std::get<IntervalGrid>(*line).nodes();
    std::vector<double> w(x.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = 1 - x[i] * x[i];
    CHECK(std::abs(rayleigh_quotient(*line, constant(line, 0.0), w) - 2.5) < 1e-3);
    CHECK_THROWS_AS(rayleigh_quotient(*line, constant(line, 0.0), std::vector<double>(w.size(), 0.0)), DegenerateInputError);

    const auto g = make_polar_grid(1, 16, 16);
    CounterRng rng(23, 0);
    for (int trial = 0; trial < 200; ++trial) {
        const PotentialField V(g, testutil::random_admissible(*g, 0.5, rng));
        const EigenPair e = principal_eigenpair(V);
        if (trial % 20 == 0) CHECK(rayleigh_quotient(*g, V, e.u) == doctest::Approx(e.lambda).epsilon(1e-8));
        for (int k = 0; k < 20; ++k) {
            std::vector<double> f(e.u.size());
            for (double& fi : f) fi = rng.uniform(-1.0, 1.0);
            CHECK(rayleigh_quotient(*g, V, f) >= e.lambda - 1e-8);
        }
    }
}

TEST_CASE("iteration limit reports the last residual") {
    const auto g = make_polar_grid(1, 16, 16);
    SolveOptions opts;
    opts.tol = 1e-15;
    opts.max_iter = 1;
    opts.shift_guess = -30.0;
    try {
        principal_eigenpair(ball_potential(g, 0.5), opts);
        FAIL("expected an iteration limit");
    } catch (const IterationLimitError& e) {
        CHECK(e.iterations() == 1);
        CHECK(e.last_residual() > 0.0);
    }
}
