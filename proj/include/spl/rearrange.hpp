#pragma once

#include <span>
#include <vector>

#include "spl/eigensolve.hpp"
#include "spl/grids.hpp"

namespace spl {

struct LevelSetSelection {
    // Selected fraction of every cell, 0 <= chi_i <= mask_i. Only cells tied
    // at the threshold value are partially selected, all by the same share.
    std::vector<double> indicator;
    double threshold = 0.0;
    double mass = 0.0;
};

// Decreasing rearrangement about the domain centre. The cells sorted by
// value are laid end to end on a measure line; target cells, ordered by
// distance to the centre, receive the average over their stretch of that
// line. Polar rings are filled as a whole so the result is radial. On the
// interval the result is a permutation of f (ties in |x| go left first).
std::vector<double> schwarz_rearrangement(const Grid& grid, std::span<const double> f);
PotentialField schwarz_rearrangement(const PotentialField& V);

// Greedy fill of `mass` into the cells with largest u, cell i offering
// capacity w_i * mask_i. Ties in u are broken by node index.
LevelSetSelection bathtub_select(const Grid& grid, std::span<const double> u, double mass,
                                 std::span<const double> mask);

double l1_distance(const Grid& grid, std::span<const double> a, std::span<const double> b);
double l1_distance(const PotentialField& a, const PotentialField& b);

} // namespace spl
