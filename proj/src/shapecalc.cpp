#include "spl/shapecalc.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/SparseCholesky>

#include "spl/errors.hpp"
#include "spl/kernels.hpp"
#include "spl/optimize.hpp"

namespace spl {

namespace {

const RadialGrid& as_radial(const GridPtr& grid, const char* who) {
    const auto* g = grid ? std::get_if<RadialGrid>(grid.get()) : nullptr;
    if (!g) throw DomainError(std::string(who) + ": needs a radial grid");
    return *g;
}

const PolarGrid& as_polar(const GridPtr& grid, const char* who) {
    const auto* g = grid ? std::get_if<PolarGrid>(grid.get()) : nullptr;
    if (!g) throw DomainError(std::string(who) + ": needs a polar grid");
    return *g;
}

// Value and slope at x of the parabola through three samples.
std::pair<double, double> quadratic_at(const double* xs, const double* ys, double x) {
    double value = 0.0, slope = 0.0;
    for (int a = 0; a < 3; ++a) {
        const int b = (a + 1) % 3, c = (a + 2) % 3;
        const double den = (xs[a] - xs[b]) * (xs[a] - xs[c]);
        value += ys[a] * (x - xs[b]) * (x - xs[c]) / den;
        slope += ys[a] * ((x - xs[b]) + (x - xs[c])) / den;
    }
    return {value, slope};
}

// Index j with r_j <= r < r_{j+1} and the hat weight of node j+1.
std::pair<std::size_t, double> bracket(const RadialGrid& g, double r) {
    const double s = r / g.h() - 1.0;
    const auto j = static_cast<std::size_t>(std::clamp(std::floor(s), 0.0, static_cast<double>(g.size() - 2)));
    return {j, s - static_cast<double>(j)};
}

} // namespace

BallContext ball_context(const GridPtr& radial_grid, double v0, const SolveOptions& opts) {
    const RadialGrid& g = as_radial(radial_grid, "ball_context");
    const PotentialField star = ball_potential(radial_grid, v0);
    const EigenPair e = principal_eigenpair(star, opts);

    BallContext ctx;
    ctx.grid = radial_grid;
    ctx.v0 = v0;
    ctx.r_star = star_radius(*radial_grid, v0);
    ctx.lambda_star = e.lambda;
    ctx.u_star = e.u;
    ctx.star.assign(star.values().begin(), star.values().end());

    // Last node whose cell lies inside B*, then the two before it.
    const auto nodes = g.nodes();
    std::size_t k = 0;
    while (k + 1 < g.size() && nodes[k + 1] <= ctx.r_star - 0.5 * g.h() + 1e-12 * g.h()) ++k;
    if (k < 2) throw DomainError("ball_context: r* is not resolved by the radial grid");
    const double xs[3] = {nodes[k - 2], nodes[k - 1], nodes[k]};
    const double ys[3] = {e.u[k - 2], e.u[k - 1], e.u[k]};
    const auto [value, slope] = quadratic_at(xs, ys, ctx.r_star);
    ctx.u_star_boundary = value;
    ctx.du_star_boundary = slope;
    ctx.tau = -value * value;
    ctx.H_star = 1.0 / ctx.r_star;
    return ctx;
}

FourierPerturbation FourierPerturbation::cosine(int k, double amplitude) {
    if (k < 1) throw DomainError("FourierPerturbation: modes start at k = 1");
    FourierPerturbation g;
    g.alpha.assign(static_cast<std::size_t>(k), 0.0);
    g.beta.assign(static_cast<std::size_t>(k), 0.0);
    g.alpha.back() = amplitude;
    return g;
}

FourierPerturbation FourierPerturbation::sine(int k, double amplitude) {
    FourierPerturbation g = cosine(k, 0.0);
    g.beta.back() = amplitude;
    return g;
}

int FourierPerturbation::max_mode() const {
    return static_cast<int>(std::max(alpha.size(), beta.size()));
}

double FourierPerturbation::operator()(double theta) const {
    double s = 0.0;
    for (std::size_t i = 0; i < alpha.size(); ++i) s += alpha[i] * std::cos(static_cast<double>(i + 1) * theta);
    for (std::size_t i = 0; i < beta.size(); ++i) s += beta[i] * std::sin(static_cast<double>(i + 1) * theta);
    return s;
}

double FourierPerturbation::l2_norm_squared(double radius) const {
    double s = 0.0;
    for (double a : alpha) s += a * a;
    for (double b : beta) s += b * b;
    return pi * radius * s;
}

ModeSolution solve_mode(const BallContext& ctx, const RadialGrid& g, int k) {
    if (k < 1) throw DomainError("solve_mode: k must be >= 1");
    if (!ctx.grid || !same_layout(*ctx.grid, Grid(g))) throw SizingError("solve_mode: grid differs from the context grid");
    const std::size_t n = g.size();
    const auto w = g.weights();
    const auto r = g.nodes();

    const DiscreteOperator op = assemble(*ctx.grid, ctx.star);
    DiscreteOperator::Sparse m = op.stiffness();
    // psi(0) = 0: the innermost node couples to a zero value at the origin
    // through the face at h/2.
    m.coeffRef(0, 0) += 2.0 * pi * (0.5 * g.h()) / g.h();
    const double kk = static_cast<double>(k) * static_cast<double>(k);
    for (std::size_t i = 0; i < n; ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        m.coeffRef(ii, ii) += w[i] * (kk / (r[i] * r[i]) - ctx.lambda_star - ctx.star[i]);
    }

    // Jump [psi'](r*) = -u*(r*) as a point load of 2*pi*r*u*(r*) shared by
    // the two nodes bracketing r*.
    const auto [j, theta] = bracket(g, ctx.r_star);
    const double load = 2.0 * pi * ctx.r_star * ctx.u_star_boundary;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    rhs[static_cast<Eigen::Index>(j)] = (1.0 - theta) * load;
    rhs[static_cast<Eigen::Index>(j + 1)] = theta * load;

    Eigen::SimplicialLDLT<DiscreteOperator::Sparse> ldlt(m);
    if (ldlt.info() != Eigen::Success) {
        std::ostringstream os;
        os << "solve_mode: mode " << k << " system is singular";
        throw SolverError(os.str());
    }
    const Eigen::VectorXd psi = ldlt.solve(rhs);
    if (ldlt.vectorD().minCoeff() <= 0.0) {
        std::ostringstream os;
        os << "solve_mode: mode " << k << " operator is not positive definite (lambda* resonant)";
        throw SolverError(os.str());
    }

    ModeSolution out;
    out.k = k;
    out.psi.assign(psi.data(), psi.data() + psi.size());
    out.psi_at_rstar = (1.0 - theta) * psi[static_cast<Eigen::Index>(j)] + theta * psi[static_cast<Eigen::Index>(j + 1)];
    out.omega_k = -ctx.du_star_boundary - out.psi_at_rstar;
    return out;
}

ModeSolution solve_mode(const BallContext& ctx, int k) {
    return solve_mode(ctx, as_radial(ctx.grid, "solve_mode"), k);
}

std::vector<ModeSolution> solve_modes(const BallContext& ctx, int K) {
    if (K < 1) throw DomainError("solve_modes: need K >= 1");
    const RadialGrid& g = as_radial(ctx.grid, "solve_modes");
    std::vector<ModeSolution> out(static_cast<std::size_t>(K));
    std::vector<std::string> errors(static_cast<std::size_t>(K));
#pragma omp parallel for schedule(dynamic)
    for (int k = 1; k <= K; ++k) {
        try {
            out[static_cast<std::size_t>(k - 1)] = solve_mode(ctx, g, k);
        } catch (const std::exception& ex) {
            errors[static_cast<std::size_t>(k - 1)] = ex.what();
        }
    }
    for (const auto& e : errors)
        if (!e.empty()) throw SolverError(e);
    return out;
}

double hessian_quadratic_form(const BallContext& ctx, const std::vector<ModeSolution>& modes,
                              const FourierPerturbation& g) {
    double s = 0.0;
    for (int k = 1; k <= g.max_mode(); ++k) {
        const auto idx = static_cast<std::size_t>(k - 1);
        const double a = idx < g.alpha.size() ? g.alpha[idx] : 0.0;
        const double b = idx < g.beta.size() ? g.beta[idx] : 0.0;
        if (a == 0.0 && b == 0.0) continue;
        const auto it = std::find_if(modes.begin(), modes.end(), [k](const ModeSolution& m) { return m.k == k; });
        if (it == modes.end()) {
            std::ostringstream os;
            os << "hessian_quadratic_form: mode " << k << " not solved";
            throw StateError(os.str());
        }
        s += it->omega_k * (a * a + b * b);
    }
    return ctx.u_star_boundary * s;
}

double second_shape_derivative(const BallContext& ctx, const std::vector<ModeSolution>& modes,
                               const FourierPerturbation& g) {
    return 2.0 * pi * ctx.r_star * hessian_quadratic_form(ctx, modes, g);
}

PotentialField star_shaped_potential(const GridPtr& polar_grid, const std::function<double(double)>& radius,
                                     int subslices) {
    const PolarGrid& p = as_polar(polar_grid, "star_shaped_potential");
    if (subslices < 1) throw DomainError("star_shaped_potential: subslices must be positive");
    const auto nt = static_cast<std::size_t>(p.ntheta());
    const auto ns = static_cast<std::size_t>(subslices);
    std::vector<double> rho(nt * ns);
    for (std::size_t j = 0; j < nt; ++j)
        for (std::size_t s = 0; s < ns; ++s)
            rho[j * ns + s] = radius(p.angles()[j] + p.dtheta() * ((static_cast<double>(s) + 0.5) / subslices - 0.5));
    std::vector<double> v(p.size());
    kernels::parallel::graph_disk_fractions({p.nr(), p.ntheta(), subslices, p.dr(), rho}, v);
    return PotentialField(polar_grid, std::move(v));
}

PotentialField perturbed_ball_potential(const GridPtr& polar_grid, const BallContext& ctx,
                                        const FourierPerturbation& g, double t, int subslices) {
    const PolarGrid& p = as_polar(polar_grid, "perturbed_ball_potential");
    if (subslices < 1) throw DomainError("perturbed_ball_potential: subslices must be positive");
    const double rs = ctx.r_star;
    if (!(rs > 0.0 && rs < p.R())) throw DomainError("perturbed_ball_potential: r* outside (0, R)");
    // max|g| over the same angles the boundary is sampled at
    const int samples = p.ntheta() * subslices;
    double gmax = 0.0;
    for (int s = 0; s < samples; ++s) gmax = std::max(gmax, std::abs(g(2.0 * pi * (s + 0.5) / samples - 0.5 * p.dtheta())));
    if (!(std::abs(t) * gmax < std::min(rs, p.R() - rs))) {
        std::ostringstream os;
        os << "perturbed_ball_potential: |t| max|g| = " << std::abs(t) * gmax << " must stay below min(r*, R - r*)";
        throw DomainError(os.str());
    }
    return star_shaped_potential(polar_grid, [&](double theta) { return rs + t * g(theta); }, subslices);
}

FdShapeRecord fd_shape_check(const BallContext& ctx, const GridPtr& polar_grid, const FourierPerturbation& g,
                             const std::vector<double>& ts, const SolveOptions& opts, int subslices) {
    if (ts.empty()) throw DomainError("fd_shape_check: no step sizes");
    for (std::size_t i = 0; i < ts.size(); ++i) {
        if (!(ts[i] > 0.0) || (i > 0 && !(ts[i] < ts[i - 1])))
            throw DomainError("fd_shape_check: step sizes must be positive and decreasing");
    }
    auto evaluate = [&](double t, double& mass) {
        const PotentialField V = perturbed_ball_potential(polar_grid, ctx, g, t, subslices);
        mass = V.mass();
        return principal_eigenpair(V, opts).lambda;
    };

    FdShapeRecord rec;
    rec.ts = ts;
    rec.lambda0 = evaluate(0.0, rec.mass0);
    rec.L0 = rec.lambda0 - ctx.tau * rec.mass0;
    for (double t : ts) {
        double mp = 0.0, mm = 0.0;
        const double lp = evaluate(t, mp) - ctx.tau * mp;
        const double lm = evaluate(-t, mm) - ctx.tau * mm;
        rec.L_plus.push_back(lp);
        rec.L_minus.push_back(lm);
        rec.first_derivative.push_back((lp - lm) / (2.0 * t));
        rec.second_derivative.push_back((lp + lm - 2.0 * rec.L0) / (t * t));
        rec.mass_second_derivative.push_back((mp + mm - 2.0 * rec.mass0) / (t * t));
    }
    for (std::size_t i = 1; i < rec.second_derivative.size(); ++i) {
        const double a = rec.second_derivative[i - 1], b = rec.second_derivative[i];
        if (std::abs(b - a) > 0.2 * std::max(std::abs(a), std::abs(b))) rec.noisy = true;
    }
    return rec;
}

} // namespace spl
