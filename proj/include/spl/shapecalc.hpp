#pragma once

#include <functional>
#include <vector>

#include "spl/eigensolve.hpp"
#include "spl/grids.hpp"

namespace spl {

// Principal eigenpair of the centred ball potential on a radial grid, with
// boundary data at r* taken by one-sided quadratic interpolation from inside.
struct BallContext {
    GridPtr grid;
    double v0 = 0.0;
    double r_star = 0.0;
    double lambda_star = 0.0;
    std::vector<double> u_star;
    std::vector<double> star;
    double u_star_boundary = 0.0;
    double du_star_boundary = 0.0;
    double tau = 0.0;     // Lagrange multiplier of the volume constraint, -u*(r*)^2
    double H_star = 0.0;  // curvature of the ball boundary, 1/r*
};

BallContext ball_context(const GridPtr& radial_grid, double v0, const SolveOptions& opts = {});

// Boundary normal displacement g(theta) = sum_k alpha_k cos(k theta) + beta_k sin(k theta),
// k >= 1; alpha[k-1] and beta[k-1] hold mode k.
struct FourierPerturbation {
    std::vector<double> alpha;
    std::vector<double> beta;

    static FourierPerturbation cosine(int k, double amplitude = 1.0);
    static FourierPerturbation sine(int k, double amplitude = 1.0);

    int max_mode() const;
    double operator()(double theta) const;
    // integral of g^2 over the circle of the given radius: pi * radius * sum(alpha^2 + beta^2)
    double l2_norm_squared(double radius) const;
};

struct ModeSolution {
    int k = 0;
    std::vector<double> psi;
    double psi_at_rstar = 0.0;
    double omega_k = 0.0;
};

ModeSolution solve_mode(const BallContext& ctx, int k);
ModeSolution solve_mode(const BallContext& ctx, const RadialGrid& grid, int k);
// Modes 1..K, solved concurrently.
std::vector<ModeSolution> solve_modes(const BallContext& ctx, int K);

// The series u*(r*) * sum_k omega_k (alpha_k^2 + beta_k^2), as printed.
double hessian_quadratic_form(const BallContext& ctx, const std::vector<ModeSolution>& modes,
                              const FourierPerturbation& g);

// The boundary-integral form 2 * int_{dB*} (-u* du*/dnu g^2 - u* u'_g g) ds
// evaluated mode by mode: 2*pi*r* times hessian_quadratic_form. This is what
// finite differences of L(t) converge to.
double second_shape_derivative(const BallContext& ctx, const std::vector<ModeSolution>& modes,
                               const FourierPerturbation& g);

// Area-fraction indicator of the star-shaped set {r <= radius(theta)}, the
// boundary sampled at `subslices` angles per angular cell.
PotentialField star_shaped_potential(const GridPtr& polar_grid, const std::function<double(double)>& radius,
                                     int subslices = 8);

// Area-fraction indicator of {r <= r* + t g(theta)}, each column's boundary
// sampled at `subslices` angles per cell.
PotentialField perturbed_ball_potential(const GridPtr& polar_grid, const BallContext& ctx,
                                        const FourierPerturbation& g, double t, int subslices = 8);

struct FdShapeRecord {
    std::vector<double> ts;
    double lambda0 = 0.0;
    double mass0 = 0.0;
    double L0 = 0.0;
    std::vector<double> L_plus;
    std::vector<double> L_minus;
    std::vector<double> first_derivative;
    std::vector<double> second_derivative;
    std::vector<double> mass_second_derivative;
    // Set when consecutive second-derivative estimates differ by more than 20%.
    bool noisy = false;
};

// L(t) = lambda(B_{t,g}) - tau * Mass(t) on the polar grid; central
// differences of first and second order at t = 0.
FdShapeRecord fd_shape_check(const BallContext& ctx, const GridPtr& polar_grid, const FourierPerturbation& g,
                             const std::vector<double>& ts, const SolveOptions& opts = {}, int subslices = 8);

} // namespace spl
