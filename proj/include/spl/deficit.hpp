#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "spl/eigensolve.hpp"
#include "spl/grids.hpp"

namespace spl {

// The centred ball potential and its eigenvalue on the grid the samples
// live on, so that deficits compare like with like.
struct Baseline {
    GridPtr grid;
    double v0 = 0.0;
    PotentialField star;
    double lambda_star = 0.0;
    double mass_star = 0.0;
};

Baseline make_baseline(const GridPtr& grid, double v0, const SolveOptions& opts = {});

// -integral h u^2, the derivative of lambda at V in the direction h.
// h must keep V + eps*h admissible: h <= 0 where V = 1, h >= 0 where V = 0,
// integral h = 0.
double parametric_derivative(const PotentialField& V, std::span<const double> h, const EigenPair& eig);

enum class Family { annulus, radial_random, polar_random, normal_deformation };

const char* family_name(Family f);
Family parse_family(const std::string& name);
std::vector<std::string> family_names();

// `size` is the L1 distance delta for annulus/radial-random/polar-random
// and the deformation amplitude t for normal-deformation.
struct SampleSpec {
    Family family = Family::annulus;
    double size = 0.0;
};

// Admissible field with the exact discrete mass of the ball. Random
// choices come from CounterRng(seed, stream).
PotentialField sample_admissible(const GridPtr& grid, double v0, const SampleSpec& spec, std::uint64_t seed,
                                 std::uint64_t stream = 0);

struct DeficitSample {
    Family family = Family::annulus;
    double size = 0.0;
    double delta = 0.0;
    double lambda = 0.0;
    double deficit = 0.0;
    double ratio = 0.0;
    // Set when delta is below four cell measures; the ratio is then
    // dominated by discretization error and is left out of min_ratio.
    bool flagged = false;
    std::string warning;
};

DeficitSample deficit_ratio(const PotentialField& V, const Baseline& base, const SolveOptions& opts = {});

struct PlanEntry {
    Family family = Family::annulus;
    // Explicit sizes, one sample each; otherwise `count` sizes drawn
    // log-uniformly in [size_lo, size_hi].
    std::vector<double> sizes;
    int count = 0;
    double size_lo = 0.0;
    double size_hi = 0.0;
};

struct FamilyStats {
    Family family = Family::annulus;
    int count = 0;
    int flagged = 0;
    double min_ratio = 0.0;
    double median_ratio = 0.0;
};

struct DeficitReport {
    std::vector<DeficitSample> samples;
    double min_ratio = 0.0;
    std::vector<FamilyStats> families;
    std::string grid;
    double v0 = 0.0;
    double lambda_star = 0.0;
    std::uint64_t seed = 0;
};

// Samples are generated and evaluated concurrently; sample i always uses
// random stream i and results are aggregated in index order.
DeficitReport deficit_survey(const GridPtr& grid, double v0, const std::vector<PlanEntry>& plan, std::uint64_t seed,
                             const SolveOptions& opts = {});

// lambda_2(V) - lambda_1(V).
double spectral_gap(const Grid& grid, const PotentialField& V, const SolveOptions& opts = {});

} // namespace spl
