#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/SparseCore>

#include "spl/grids.hpp"

namespace spl {

// Grid-sampled potential with 0 <= v_i <= 1. Values within 1e-12 outside
// [0, 1] are clamped; anything further out is a DomainError.
class PotentialField {
public:
    PotentialField(GridPtr grid, std::vector<double> values);

    static PotentialField constant(GridPtr grid, double c);

    const Grid& grid() const { return *grid_; }
    const GridPtr& grid_ptr() const { return grid_; }
    std::span<const double> values() const { return values_; }
    std::size_t size() const { return values_.size(); }
    double mass() const { return mass_; }
    double mean_fraction() const { return mass_ / domain_measure(*grid_); }

private:
    GridPtr grid_;
    std::vector<double> values_;
    double mass_;
};

struct SolveOptions {
    double tol = 1e-8;
    int max_iter = 1000;
    // Spectral shift for the inverse iteration; must lie strictly below the
    // wanted eigenvalues. Defaults to -max(V) - 1, a guaranteed lower bound.
    std::optional<double> shift_guess;
};

struct EigenPair {
    double lambda = 0.0;
    std::vector<double> u;
    double residual = 0.0;
    int which = 1;
    int iterations = 0;
};

// -Laplace - V on a grid, stored as the symmetric pencil (K, W): K is the
// Dirichlet energy matrix (u^T K u approximates the integral of |grad u|^2)
// and W the diagonal of cell measures, so -Laplace u ~ W^{-1} K u.
class DiscreteOperator {
public:
    using Sparse = Eigen::SparseMatrix<double>;

    DiscreteOperator(Sparse stiffness, std::vector<double> weights, std::vector<double> potential);

    std::size_t size() const { return weights_.size(); }
    std::span<const double> weights() const { return weights_; }
    std::span<const double> potential() const { return potential_; }
    const Sparse& stiffness() const { return stiffness_; }

    // K - W diag(V): symmetric; eigenproblem pencil() u = lambda W u.
    Sparse pencil() const;
    // W^{-1} K - diag(V), the finite-difference matrix of -Laplace - V.
    Sparse matrix() const;
    // W^{-1/2} K W^{-1/2} - diag(V), similar to matrix() and symmetric.
    Sparse symmetric_matrix() const;

    // y = (-Laplace - V) u.
    std::vector<double> apply(std::span<const double> u) const;
    // u^T K u.
    double gradient_energy(std::span<const double> u) const;

private:
    Sparse stiffness_;
    std::vector<double> weights_;
    std::vector<double> potential_;
};

DiscreteOperator assemble(const Grid& grid, std::span<const double> v);
DiscreteOperator assemble(const Grid& grid, const PotentialField& V);

// Smallest eigenpair by shifted inverse iteration from the all-ones vector.
// u is normalized to integrate(u^2) = 1 with nonnegative mean.
EigenPair principal_eigenpair(const DiscreteOperator& op, const SolveOptions& opts = {});
EigenPair principal_eigenpair(const Grid& grid, const PotentialField& V, const SolveOptions& opts = {});
EigenPair principal_eigenpair(const PotentialField& V, const SolveOptions& opts = {});

// Second eigenpair by block inverse iteration deflated against `first`.
EigenPair second_eigenpair(const DiscreteOperator& op, const EigenPair& first, const SolveOptions& opts = {});
double second_eigenvalue(const Grid& grid, const PotentialField& V, const SolveOptions& opts = {});
double second_eigenvalue(const PotentialField& V, const SolveOptions& opts = {});

// (integral |grad w|^2 - integral V w^2) / integral w^2 via the assembled
// bilinear form. Dirichlet values are implicit (grids carry interior nodes only).
double rayleigh_quotient(const Grid& grid, const PotentialField& V, std::span<const double> w);

} // namespace spl
