#include "spl/rearrange.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <sstream>

#include "spl/errors.hpp"

namespace spl {

namespace {

// Target cells grouped into blocks that receive one common value, in order
// of increasing distance to the centre.
std::vector<std::vector<std::size_t>> target_blocks(const Grid& grid) {
    std::vector<std::vector<std::size_t>> blocks;
    if (const auto* g = std::get_if<IntervalGrid>(&grid)) {
        const auto n = static_cast<long>(g->size());
        std::vector<std::size_t> order(g->size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        // |x_i - c| is proportional to |2(i+1) - (n+1)|; compare exact integers.
        auto key = [n](std::size_t i) { return std::labs(2 * (static_cast<long>(i) + 1) - (n + 1)); };
        std::stable_sort(order.begin(), order.end(), [&](std::size_t p, std::size_t q) { return key(p) < key(q); });
        for (std::size_t i : order) blocks.push_back({i});
    } else if (const auto* g = std::get_if<RadialGrid>(&grid)) {
        for (std::size_t i = 0; i < g->size(); ++i) blocks.push_back({i});
    } else {
        const auto& p = std::get<PolarGrid>(grid);
        for (int i = 0; i < p.nr(); ++i) {
            std::vector<std::size_t> ring(static_cast<std::size_t>(p.ntheta()));
            for (int j = 0; j < p.ntheta(); ++j) ring[static_cast<std::size_t>(j)] = p.index(i, j);
            blocks.push_back(std::move(ring));
        }
    }
    return blocks;
}

} // namespace

std::vector<double> schwarz_rearrangement(const Grid& grid, std::span<const double> f) {
    const auto w = cell_weights(grid);
    if (f.size() != w.size()) throw SizingError("schwarz_rearrangement: field length does not match grid");
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (!(f[i] >= 0.0)) {
            std::ostringstream os;
            os << "schwarz_rearrangement: negative value " << f[i] << " at node " << i;
            throw DomainError(os.str());
        }
    }

    std::vector<std::size_t> src(f.size());
    std::iota(src.begin(), src.end(), std::size_t{0});
    std::stable_sort(src.begin(), src.end(), [&](std::size_t p, std::size_t q) { return f[p] > f[q]; });

    std::vector<double> out(f.size(), 0.0);
    std::size_t s = 0;
    double left = src.empty() ? 0.0 : w[src[0]];  // unused measure of source cell s
    for (const auto& block : target_blocks(grid)) {
        double need = 0.0;
        for (std::size_t i : block) need += w[i];
        const double total = need;
        double acc = 0.0;
        const std::size_t first = s;
        while (need > 0.0 && s < src.size()) {
            const double take = std::min(need, left);
            acc += take * f[src[s]];
            need -= take;
            left -= take;
            if (left <= 1e-15 * w[src[s]]) {
                ++s;
                if (s < src.size()) left = w[src[s]];
            }
        }
        // Rounding can leave the final block a few ulps short of measure.
        if (need > 0.0 && !src.empty()) acc += need * f[src.back()];
        // A block fed by equal values keeps them bit-for-bit.
        const std::size_t end = s < src.size() && left < w[src[s]] ? s + 1 : s;
        bool uniform = end > first;
        for (std::size_t k = first; k < end; ++k) uniform = uniform && f[src[k]] == f[src[first]];
        const double value = uniform ? f[src[first]] : acc / total;
        for (std::size_t i : block) out[i] = value;
    }
    return out;
}

PotentialField schwarz_rearrangement(const PotentialField& V) {
    return PotentialField(V.grid_ptr(), schwarz_rearrangement(V.grid(), V.values()));
}

LevelSetSelection bathtub_select(const Grid& grid, std::span<const double> u, double mass,
                                 std::span<const double> mask) {
    const auto w = cell_weights(grid);
    if (u.size() != w.size() || mask.size() != w.size())
        throw SizingError("bathtub_select: field or mask length does not match grid");
    if (!(mass >= 0.0)) throw DomainError("bathtub_select: mass must be nonnegative");

    double capacity = 0.0;
    std::vector<std::size_t> cand;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (mask[i] < 0.0 || mask[i] > 1.0) throw DomainError("bathtub_select: mask values must lie in [0, 1]");
        if (mask[i] > 0.0) {
            cand.push_back(i);
            capacity += w[i] * mask[i];
        }
    }
    if (mass > capacity * (1.0 + 1e-12)) {
        std::ostringstream os;
        os << "bathtub_select: requested mass " << mass << " exceeds mask capacity " << capacity;
        throw InfeasibleError(os.str());
    }
    if (cand.empty()) throw DegenerateInputError("bathtub_select: empty mask");
    std::stable_sort(cand.begin(), cand.end(), [&](std::size_t p, std::size_t q) { return u[p] > u[q]; });

    LevelSetSelection sel;
    sel.indicator.assign(w.size(), 0.0);
    sel.threshold = u[cand.front()];
    double remaining = mass;
    // Values within tie_tol of each other form one level; a partially filled
    // level is shared in proportion to capacity instead of by index order.
    const double tie_tol = 1e-9 * std::max(std::abs(u[cand.front()]), std::abs(u[cand.back()]));
    for (std::size_t lo = 0; lo < cand.size() && remaining > 1e-14 * capacity;) {
        std::size_t hi = lo + 1;
        double cap = w[cand[lo]] * mask[cand[lo]];
        while (hi < cand.size() && u[cand[lo]] - u[cand[hi]] <= tie_tol) {
            cap += w[cand[hi]] * mask[cand[hi]];
            ++hi;
        }
        sel.threshold = u[cand[hi - 1]];
        const double share = remaining >= cap * (1.0 - 1e-12) ? 1.0 : remaining / cap;
        for (std::size_t k = lo; k < hi; ++k) sel.indicator[cand[k]] = mask[cand[k]] * share;
        remaining = share == 1.0 ? remaining - cap : 0.0;
        lo = hi;
    }
    sel.mass = integrate(grid, sel.indicator);
    return sel;
}

double l1_distance(const Grid& grid, std::span<const double> a, std::span<const double> b) {
    const auto w = cell_weights(grid);
    if (a.size() != w.size() || b.size() != w.size()) throw SizingError("l1_distance: field length does not match grid");
    std::vector<double> d(a.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = std::abs(a[i] - b[i]);
    return integrate(grid, d);
}

double l1_distance(const PotentialField& a, const PotentialField& b) {
    if (!same_layout(a.grid(), b.grid())) throw SizingError("l1_distance: potentials live on different grids");
    return l1_distance(a.grid(), a.values(), b.values());
}

} // namespace spl
