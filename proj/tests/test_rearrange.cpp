#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "oracles.hpp"
#include "spl/eigensolve.hpp"
#include "spl/errors.hpp"
#include "spl/optimize.hpp"
#include "spl/rearrange.hpp"
#include "spl/shapecalc.hpp"

using namespace spl;

namespace {

double above(const Grid& g, const std::vector<double>& f, double t) {
    const auto w = cell_weights(g);
    double m = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i)
        if (f[i] > t) m += w[i];
    return m;
}

double max_weight(const Grid& g) {
    double m = 0.0;
    for (double w : cell_weights(g)) m = std::max(m, w);
    return m;
}

std::vector<double> random_field(std::size_t n, CounterRng& rng) {
    std::vector<double> f(n);
    for (double& x : f) x = rng.uniform();
    return f;
}

double dot(const Grid& g, const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> p(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) p[i] = a[i] * b[i];
    return integrate(g, p);
}

} // namespace

TEST_CASE("radial decreasing input is a fixed point") {
    const RadialGrid g(1.0, 50);
    std::vector<double> f(g.size());
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = std::exp(-g.nodes()[i]);
    CHECK(schwarz_rearrangement(Grid(g), f) == f);
    CHECK_THROWS_AS(schwarz_rearrangement(Grid(g), std::vector<double>(50, -1.0)), DomainError);
}

TEST_CASE("interval: off-centre interval becomes centred") {
    const auto g = make_interval_grid(-1, 1, 999);
    const double h = std::get<IntervalGrid>(*g).h();
    const auto x = std::get<IntervalGrid>(*g).nodes();
    std::vector<double> shifted(x.size());
    for (std::size_t i = 0; i < shifted.size(); ++i) shifted[i] = oracle::overlap_fraction(x[i] - h / 2, x[i] + h / 2, 0.2, 0.8);
    const auto r = schwarz_rearrangement(*g, shifted);
    CHECK(l1_distance(*g, r, band_fraction(*g, 0.0, 0.3)) <= 2 * h);
}

TEST_CASE("polar: off-centre disk becomes the centred disk of equal area") {
    const auto g = make_polar_grid(1.0, 128, 128);
    const double c = 0.2, rho = 0.4;
    const PotentialField off = star_shaped_potential(g, [&](double th) {
        const double s = std::sin(th);
        return c * std::cos(th) + std::sqrt(rho * rho - c * c * s * s);
    });
    const auto r = schwarz_rearrangement(*g, off.values());
    const double h = std::get<PolarGrid>(*g).dr();
    CHECK(l1_distance(*g, r, band_fraction(*g, 0.0, std::sqrt(off.mass() / pi))) <= 4 * h);
}

TEST_CASE("equimeasurability and L2 behaviour") {
    CounterRng rng(41, 0);
    for (const GridPtr& g : {make_interval_grid(-1, 1, 200), make_radial_grid(1, 200), make_polar_grid(1, 20, 16)}) {
        const auto f = random_field(node_count(*g), rng);
        const auto r = schwarz_rearrangement(*g, f);
        const double cell = std::holds_alternative<PolarGrid>(*g) ? max_weight(*g) * 16 : max_weight(*g);
        for (double t : {0.1, 0.3, 0.5, 0.7, 0.9}) CHECK(std::abs(above(*g, r, t) - above(*g, f, t)) <= cell * (1 + 1e-12));
        CHECK(integrate(*g, r) == doctest::Approx(integrate(*g, f)).epsilon(1e-12));
        const double e = dot(*g, f, f), er = dot(*g, r, r);
        if (std::holds_alternative<IntervalGrid>(*g)) CHECK(er == doctest::Approx(e).epsilon(1e-8));
        else CHECK(er <= e * (1 + 1e-12));
        for (std::size_t i = 1; i < r.size(); ++i)
            if (!std::holds_alternative<IntervalGrid>(*g)) CHECK(r[i] <= r[i - 1] + 1e-15);
    }
}

TEST_CASE("Hardy-Littlewood inequality") {
    CounterRng rng(43, 0);
    for (const GridPtr& g : {make_interval_grid(-1, 1, 101), make_radial_grid(1, 101), make_polar_grid(1, 12, 16)}) {
        for (int trial = 0; trial < 100; ++trial) {
            const auto f = random_field(node_count(*g), rng), h = random_field(node_count(*g), rng);
            CHECK(dot(*g, schwarz_rearrangement(*g, f), schwarz_rearrangement(*g, h)) >= dot(*g, f, h) - 1e-8);
        }
    }
}

TEST_CASE("rearranged potentials do not raise the eigenvalue") {
    CounterRng rng(47, 0);
    for (const GridPtr& g : {make_interval_grid(-1, 1, 101), make_radial_grid(1, 101), make_polar_grid(1, 16, 16)}) {
        for (int trial = 0; trial < 100; ++trial) {
            const PotentialField V(g, testutil::random_admissible(*g, 0.4, rng));
            CHECK(principal_eigenpair(schwarz_rearrangement(V)).lambda <= principal_eigenpair(V).lambda + 1e-6);
        }
    }
}

TEST_CASE("bathtub: full, empty, infeasible") {
    const auto g = make_interval_grid(-1, 1, 9);
    std::vector<double> u = {0.1, 0.5, 0.3, 0.9, 0.7, 0.2, 0.8, 0.4, 0.6};
    std::vector<double> mask(9, 1.0);
    const auto full = bathtub_select(*g, u, 9 * 0.2, mask);
    CHECK(full.indicator == mask);
    CHECK(full.threshold == 0.1);
    const auto none = bathtub_select(*g, u, 0.0, mask);
    CHECK(none.threshold == 0.9);
    for (double x : none.indicator) CHECK(x == 0.0);
    CHECK_THROWS_AS(bathtub_select(*g, u, 2.0, mask), InfeasibleError);
    CHECK_THROWS_AS(bathtub_select(*g, u, -0.1, mask), DomainError);
    const auto part = bathtub_select(*g, u, 0.5, mask);
    CHECK(part.mass == doctest::Approx(0.5));
    CHECK(part.indicator[3] == 1.0);
    CHECK(part.indicator[6] == 1.0);
    CHECK(part.indicator[4] == doctest::Approx(0.5));
    CHECK(part.threshold == 0.7);
}

TEST_CASE("bathtub on the cosine gives the centred interval") {
    const auto g = make_interval_grid(-1, 1, 2047);
    const auto x = std::get<IntervalGrid>(*g).nodes();
    const double h = std::get<IntervalGrid>(*g).h();
    std::vector<double> u(x.size());
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = std::cos(pi * x[i] / 2);
    const auto sel = bathtub_select(*g, u, 1.2, std::vector<double>(u.size(), 1.0));
    CHECK(l1_distance(*g, sel.indicator, band_fraction(*g, 0.0, 0.6)) <= 2 * h);
    CHECK(std::abs(sel.threshold - std::cos(0.3 * pi)) <= 2 * h);
}

TEST_CASE("bathtub greedy is optimal by exhaustive enumeration") {
    const auto g = make_interval_grid(0, 1, 30);
    const double h = std::get<IntervalGrid>(*g).h();
    CounterRng rng(53, 0);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> u(30), mask(30, 0.0);
        for (double& x : u) x = rng.uniform(-1, 1);
        std::vector<std::size_t> cand;
        while (cand.size() < 16) {
            const auto i = static_cast<std::size_t>(rng.below(30));
            if (mask[i] == 0.0) {
                mask[i] = 1.0;
                cand.push_back(i);
            }
        }
        const std::size_t k = 1 + static_cast<std::size_t>(rng.below(15));
        // u enters through u^2 in the objective; select on u^2.
        std::vector<double> u2(30);
        for (std::size_t i = 0; i < 30; ++i) u2[i] = u[i] * u[i];
        const auto sel = bathtub_select(*g, u2, static_cast<double>(k) * h, mask);
        double got = 0.0;
        for (std::size_t i = 0; i < 30; ++i) got += sel.indicator[i] * u2[i];
        CHECK(got == doctest::Approx(oracle::best_subset_energy(u, cand, k)).epsilon(1e-12));
    }
}

TEST_CASE("l1 distances") {
    const auto g = make_interval_grid(-1, 1, 999);
    const double h = std::get<IntervalGrid>(*g).h();
    const auto a = band_fraction(*g, 0.0, 0.6);
    CHECK(l1_distance(*g, a, a) == 0.0);
    const auto x = std::get<IntervalGrid>(*g).nodes();
    std::vector<double> b(x.size());
    for (std::size_t i = 0; i < b.size(); ++i) b[i] = oracle::overlap_fraction(x[i] - h / 2, x[i] + h / 2, -0.5, 0.7);
    CHECK(std::abs(l1_distance(*g, a, b) - 0.2) <= 2 * h);

    const auto disk = make_radial_grid(1.0, 1024);
    const double hd = std::get<RadialGrid>(*disk).h();
    CHECK(std::abs(l1_distance(ball_potential(disk, 0.25), annulus_competitor(disk, 0.25, 0.05).field) - 0.05) <= 4 * hd);
    CHECK_THROWS_AS(l1_distance(ball_potential(disk, 0.25), ball_potential(g, 0.25)), SizingError);
}
