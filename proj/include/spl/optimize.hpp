#pragma once

#include <optional>
#include <vector>

#include "spl/eigensolve.hpp"
#include "spl/grids.hpp"

namespace spl {

// Radius of the centred ball holding the fraction v0 of the domain
// (half-length on the interval).
double star_radius(const Grid& grid, double v0);

// Area-fraction indicator of the centred ball of measure v0*|domain|.
PotentialField ball_potential(const GridPtr& grid, double v0);

// Inner ball of radius r* - r_delta plus the shell r* <= |x| <= r* + r'_delta,
// both removed/added pieces of measure delta/2.
struct AnnulusCompetitor {
    double r_star;
    double r_delta;
    double r_delta_prime;
    PotentialField field;
};

AnnulusCompetitor annulus_competitor(const GridPtr& grid, double v0, double delta);

struct OptimizeOptions {
    SolveOptions solve;
    int max_iter = 100;
    // Starting potential; defaults to the centred ball.
    std::optional<std::vector<double>> initial;
};

struct OptimizerReport {
    PotentialField V;
    double lambda = 0.0;
    int iterations = 0;
    bool converged = false;
    double v0 = 0.0;
    double delta = 0.0;
    std::optional<double> mu_delta;
    std::optional<double> eta_delta;
    std::optional<double> zeta_delta;
    std::optional<double> f_delta;
    std::vector<double> history;
    EigenPair eig;
    std::vector<double> star;
};

OptimizerReport minimize_global(const GridPtr& grid, double v0, const OptimizeOptions& opts = {});

// Minimizes lambda over potentials with mass(V*) - delta/2 inside B* and
// delta/2 outside. Radial/interval grids only.
OptimizerReport minimize_delta_radial(const GridPtr& grid, double v0, double delta, const OptimizeOptions& opts = {});

// Same problem on the full polar grid, no symmetry imposed.
OptimizerReport minimize_delta_2d(const GridPtr& grid, double v0, double delta, const OptimizeOptions& opts = {});

// Measure of ({u >= eta} outside B*) \ {u >= zeta}, counting only the part
// of each cell outside B*. Zero when delta = 0.
double dichotomy_diagnostic(const OptimizerReport& report);

} // namespace spl
