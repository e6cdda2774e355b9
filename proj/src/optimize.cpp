#include "spl/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "spl/errors.hpp"
#include "spl/rearrange.hpp"

namespace spl {

namespace {

void check_fraction(double v0) {
    if (!(v0 > 0.0 && v0 < 1.0)) throw DomainError("v0 must lie in (0, 1)");
}

struct Step {
    std::vector<double> V;
    double mu = 0.0;
    std::optional<double> eta;
};

// One bathtub map u -> V, either over the whole domain or split between
// B* (capacity V*) and its complement (capacity 1 - V*).
class BathtubMap {
public:
    BathtubMap(const Grid& grid, const std::vector<double>& star, double mass_star, std::optional<double> delta)
        : grid_(grid), star_(star), mass_star_(mass_star), delta_(delta) {
        const std::size_t n = star.size();
        ones_.assign(n, 1.0);
        outside_.resize(n);
        for (std::size_t i = 0; i < n; ++i) outside_[i] = 1.0 - star[i];
        if (delta_) {
            const double out_capacity = integrate(grid, outside_);
            if (*delta_ < 0.0) throw DomainError("delta must be nonnegative");
            if (mass_star - 0.5 * *delta_ < 0.0 || 0.5 * *delta_ > out_capacity) {
                std::ostringstream os;
                os << "delta = " << *delta_ << " cannot be split as delta/2 removed from B* and delta/2 added outside";
                throw InfeasibleError(os.str());
            }
        }
    }

    Step operator()(std::span<const double> u) const {
        Step s;
        if (!delta_) {
            auto sel = bathtub_select(grid_, u, mass_star_, ones_);
            s.V = std::move(sel.indicator);
            s.mu = sel.threshold;
            return s;
        }
        auto in = bathtub_select(grid_, u, mass_star_ - 0.5 * *delta_, star_);
        auto out = bathtub_select(grid_, u, 0.5 * *delta_, outside_);
        s.V.resize(in.indicator.size());
        for (std::size_t i = 0; i < s.V.size(); ++i) s.V[i] = std::min(1.0, in.indicator[i] + out.indicator[i]);
        s.mu = in.threshold;
        s.eta = out.threshold;
        return s;
    }

    bool feasible(std::span<const double> V) const {
        const double tol = 1e-9 * mass_star_;
        if (!delta_) return std::abs(integrate(grid_, V) - mass_star_) <= tol;
        std::vector<double> in(V.size()), out(V.size());
        for (std::size_t i = 0; i < V.size(); ++i) {
            in[i] = std::min(V[i], star_[i]);
            out[i] = V[i] - in[i];
        }
        return std::abs(integrate(grid_, in) - (mass_star_ - 0.5 * *delta_)) <= tol &&
               std::abs(integrate(grid_, out) - 0.5 * *delta_) <= tol;
    }

    double zeta(std::span<const double> u) const { return bathtub_select(grid_, u, mass_star_, ones_).threshold; }

private:
    const Grid& grid_;
    const std::vector<double>& star_;
    double mass_star_;
    std::optional<double> delta_;
    std::vector<double> ones_;
    std::vector<double> outside_;
};

EigenPair solve(const GridPtr& grid, const std::vector<double>& V, const SolveOptions& opts) {
    return principal_eigenpair(assemble(*grid, V), opts);
}

OptimizerReport run_fixed_point(const GridPtr& grid, double v0, std::optional<double> delta, const OptimizeOptions& opts) {
    check_fraction(v0);
    if (opts.max_iter < 1) throw DomainError("OptimizeOptions: max_iter must be positive");
    const PotentialField star = ball_potential(grid, v0);
    const std::vector<double> star_values(star.values().begin(), star.values().end());
    const double mass_star = star.mass();
    const BathtubMap step(*grid, star_values, mass_star, delta);

    std::vector<double> prev = opts.initial.value_or(star_values);
    if (prev.size() != star_values.size()) throw SizingError("OptimizeOptions: initial potential length does not match grid");
    (void)PotentialField(grid, prev);  // validates 0 <= V <= 1

    double max_w = 0.0;
    for (double w : cell_weights(*grid)) max_w = std::max(max_w, w);
    const double tol_V = std::max(1e-3 * mass_star, 2.0 * max_w);

    OptimizerReport report{PotentialField(grid, prev), 0.0, 0, false, v0, delta.value_or(0.0), {}, {}, {}, {}, {}, {}, {}};
    EigenPair e_prev = solve(grid, prev, opts.solve);
    if (step.feasible(prev)) report.history.push_back(e_prev.lambda);

    std::vector<double> prev2;
    std::vector<double> final_V = prev;
    EigenPair final_e = e_prev;
    bool converged = false;
    int iterations = 0;
    for (int m = 1; m <= opts.max_iter; ++m) {
        iterations = m;
        Step s = step(e_prev.u);
        EigenPair e = solve(grid, s.V, opts.solve);
        report.history.push_back(e.lambda);
        const double change = l1_distance(*grid, s.V, prev);
        if (change < tol_V && std::abs(e.lambda - e_prev.lambda) < 1e-9) {
            final_V = std::move(s.V);
            final_e = std::move(e);
            converged = true;
            break;
        }
        const double tiny = 1e-12 * mass_star;
        if (!prev2.empty() && change > tiny && l1_distance(*grid, s.V, prev2) <= tiny) {
            // 2-cycle: keep the better of the two alternating iterates.
            if (e.lambda <= e_prev.lambda) {
                final_V = std::move(s.V);
                final_e = std::move(e);
            } else {
                final_V = prev;
                final_e = e_prev;
            }
            break;
        }
        prev2 = std::move(prev);
        prev = std::move(s.V);
        e_prev = std::move(e);
        final_V = prev;
        final_e = e_prev;
    }

    report.V = PotentialField(grid, std::move(final_V));
    report.lambda = final_e.lambda;
    report.iterations = iterations;
    report.converged = converged;
    report.v0 = v0;
    report.delta = delta.value_or(0.0);
    report.star = star_values;
    const Step at_final = step(final_e.u);
    report.mu_delta = at_final.mu;
    report.eta_delta = at_final.eta;
    report.zeta_delta = step.zeta(final_e.u);
    report.eig = std::move(final_e);
    if (delta) report.f_delta = dichotomy_diagnostic(report);
    return report;
}

} // namespace

double star_radius(const Grid& grid, double v0) {
    check_fraction(v0);
    if (const auto* g = std::get_if<IntervalGrid>(&grid)) return 0.5 * v0 * g->measure();
    return std::sqrt(v0) * outer_radius(grid);
}

PotentialField ball_potential(const GridPtr& grid, double v0) {
    return PotentialField(grid, band_fraction(*grid, 0.0, star_radius(*grid, v0)));
}

AnnulusCompetitor annulus_competitor(const GridPtr& grid, double v0, double delta) {
    const double rs = star_radius(*grid, v0);
    const double R = outer_radius(*grid);
    if (!(delta >= 0.0)) throw InfeasibleError("annulus_competitor: delta must be nonnegative");
    double inner = 0.25 * delta, outer = 0.25 * delta;
    bool feasible = true;
    if (!std::holds_alternative<IntervalGrid>(*grid)) {
        const double a = delta / (2.0 * pi);
        feasible = a < rs * rs;
        if (feasible) {
            inner = rs - std::sqrt(rs * rs - a);
            outer = std::sqrt(rs * rs + a) - rs;
        }
    }
    if (!feasible || inner > rs || rs + outer > R) {
        std::ostringstream os;
        os << "annulus_competitor: delta = " << delta << " infeasible for r* = " << rs << " in a domain of radius " << R;
        throw InfeasibleError(os.str());
    }
    std::vector<double> v = band_fraction(*grid, 0.0, rs - inner);
    const std::vector<double> shell = band_fraction(*grid, rs, rs + outer);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::min(1.0, v[i] + shell[i]);
    return {rs, inner, outer, PotentialField(grid, std::move(v))};
}

OptimizerReport minimize_global(const GridPtr& grid, double v0, const OptimizeOptions& opts) {
    return run_fixed_point(grid, v0, std::nullopt, opts);
}

OptimizerReport minimize_delta_radial(const GridPtr& grid, double v0, double delta, const OptimizeOptions& opts) {
    if (std::holds_alternative<PolarGrid>(*grid))
        throw DomainError("minimize_delta_radial: needs a radial or interval grid (use minimize_delta_2d)");
    return run_fixed_point(grid, v0, delta, opts);
}

OptimizerReport minimize_delta_2d(const GridPtr& grid, double v0, double delta, const OptimizeOptions& opts) {
    if (!std::holds_alternative<PolarGrid>(*grid)) throw DomainError("minimize_delta_2d: needs a polar grid");
    return run_fixed_point(grid, v0, delta, opts);
}

double dichotomy_diagnostic(const OptimizerReport& report) {
    if (!report.eta_delta || !report.zeta_delta) throw StateError("dichotomy_diagnostic: report carries no thresholds");
    const auto& u = report.eig.u;
    const auto w = cell_weights(report.V.grid());
    if (u.size() != w.size() || report.star.size() != w.size())
        throw StateError("dichotomy_diagnostic: report carries no eigenfunction or ball");
    if (report.delta == 0.0) return 0.0;
    const double eta = *report.eta_delta, zeta = *report.zeta_delta;
    double f = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double outside = 1.0 - report.star[i];
        if (outside > 0.0 && u[i] >= eta && u[i] < zeta) f += w[i] * outside;
    }
    return f;
}

} // namespace spl
