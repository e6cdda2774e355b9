#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "spl/eigensolve.hpp"
#include "spl/errors.hpp"
#include "spl/kernels.hpp"
#include "spl/optimize.hpp"
#include "spl/rng.hpp"

using namespace spl;

namespace {

std::vector<double> random_vector(std::size_t n, std::uint64_t stream) {
    CounterRng rng(11, stream);
    std::vector<double> v(n);
    for (double& x : v) x = rng.uniform(-1.0, 1.0);
    return v;
}

} // namespace

TEST_CASE("parallel reductions match the serial reference") {
    for (std::size_t n : {1u, 17u, 2048u, 2049u, 100000u}) {
        const auto w = random_vector(n, 1), a = random_vector(n, 2), b = random_vector(n, 3);
        const double s = kernels::serial::weighted_sum(w, a);
        CHECK(kernels::parallel::weighted_sum(w, a) == doctest::Approx(s).epsilon(1e-12));
        CHECK(kernels::parallel::weighted_dot(w, a, b) == doctest::Approx(kernels::serial::weighted_dot(w, a, b)).epsilon(1e-12));
    }
}

TEST_CASE("parallel reductions do not depend on the thread count") {
    const auto w = random_vector(50000, 4), a = random_vector(50000, 5);
    kernels::set_thread_limit(1);
    const double one = kernels::parallel::weighted_sum(w, a);
    kernels::set_thread_limit(4);
    const double four = kernels::parallel::weighted_sum(w, a);
    kernels::set_thread_limit(0);
    CHECK(one == four);
}

TEST_CASE("spmv agrees with the serial loop and with Eigen") {
    const GridPtr grid = make_polar_grid(1.0, 12, 16);
    auto P = assemble(*grid, ball_potential(grid, 0.4)).pencil();
    P.makeCompressed();
    const auto n = static_cast<std::size_t>(P.rows());
    const kernels::CsrView view{{P.outerIndexPtr(), n + 1},
                                {P.innerIndexPtr(), static_cast<std::size_t>(P.nonZeros())},
                                {P.valuePtr(), static_cast<std::size_t>(P.nonZeros())}};
    const auto x = random_vector(n, 6);
    std::vector<double> ys(n), yp(n);
    kernels::serial::spmv(view, x, ys);
    kernels::parallel::spmv(view, x, yp);
    const Eigen::VectorXd ref = P * Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<long>(n));
    for (std::size_t i = 0; i < n; ++i) {
        CHECK(yp[i] == ys[i]);
        CHECK(ys[i] == doctest::Approx(ref[static_cast<long>(i)]).epsilon(1e-12));
    }
}

TEST_CASE("graph disk fractions: circle, agreement and validation") {
    const int nr = 20, nt = 8, sub = 4;
    std::vector<double> rho(nt * sub, 0.43);
    const kernels::GraphDiskInput in{nr, nt, sub, 1.0 / nr, rho};
    std::vector<double> s(nr * nt), p(nr * nt);
    kernels::serial::graph_disk_fractions(in, s);
    kernels::parallel::graph_disk_fractions(in, p);
    CHECK(s == p);
    // r = 0.43 lies in cell 8 = [0.40, 0.45].
    CHECK(s[7 * nt] == 1.0);
    CHECK(s[8 * nt] == doctest::Approx((0.43 * 0.43 - 0.16) / (0.45 * 0.45 - 0.16)));
    CHECK(s[9 * nt] == 0.0);
    std::vector<double> small(3);
    CHECK_THROWS_AS(kernels::serial::graph_disk_fractions(in, small), SizingError);
}

TEST_CASE("counter generator is a pure function of seed, stream and draw") {
    CounterRng a(5, 9), b(5, 9), c(5, 10);
    for (int i = 0; i < 10; ++i) {
        const auto x = a.next();
        CHECK(x == b.next());
        CHECK(x != c.next());
    }
    CounterRng u(1, 2);
    double mean = 0.0;
    for (int i = 0; i < 20000; ++i) {
        const double x = u.uniform();
        CHECK(x >= 0.0);
        CHECK(x < 1.0);
        mean += x / 20000;
    }
    CHECK(mean == doctest::Approx(0.5).epsilon(0.02));
}
