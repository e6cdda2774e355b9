#include "spl/deficit.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <sstream>

#include "spl/errors.hpp"
#include "spl/optimize.hpp"
#include "spl/rearrange.hpp"
#include "spl/rng.hpp"
#include "spl/shapecalc.hpp"

namespace spl {

namespace {

// Radii |x| covered by the union of grid cells.
std::pair<double, double> covered_radii(const Grid& grid) {
    if (const auto* g = std::get_if<IntervalGrid>(&grid)) return {0.0, 0.5 * g->measure() - 0.5 * g->h()};
    if (const auto* g = std::get_if<RadialGrid>(&grid)) return {0.5 * g->h(), g->R() - 0.5 * g->h()};
    return {0.0, outer_radius(grid)};
}

// Measure of {|x| <= r} and its inverse.
double ball_measure(const Grid& grid, double r) {
    return std::holds_alternative<IntervalGrid>(grid) ? 2.0 * r : pi * r * r;
}

double ball_radius(const Grid& grid, double m) {
    return std::holds_alternative<IntervalGrid>(grid) ? 0.5 * m : std::sqrt(std::max(0.0, m) / pi);
}

std::vector<double> random_partition(CounterRng& rng, int parts, double total) {
    std::vector<double> w(static_cast<std::size_t>(parts));
    double s = 0.0;
    for (double& x : w) s += (x = rng.uniform(0.2, 1.0));
    for (double& x : w) x *= total / s;
    return w;
}

// Disjoint shells of the given measures placed at random inside the
// measure range [lo, hi]; returned as radius pairs.
std::vector<std::pair<double, double>> random_shells(const Grid& grid, CounterRng& rng, double lo, double hi,
                                                     const std::vector<double>& masses) {
    double used = 0.0;
    for (double m : masses) used += m;
    const double free = (hi - lo) - used;
    if (free < 0.0) throw InfeasibleError("radial-random: shells do not fit in the available measure");
    const auto gaps = random_partition(rng, static_cast<int>(masses.size()) + 1, free);
    std::vector<std::pair<double, double>> out;
    double a = lo;
    for (std::size_t p = 0; p < masses.size(); ++p) {
        a += gaps[p];
        out.emplace_back(ball_radius(grid, a), ball_radius(grid, a + masses[p]));
        a += masses[p];
    }
    return out;
}

PotentialField radial_random(const GridPtr& grid, double v0, double delta, CounterRng& rng) {
    const double rs = star_radius(*grid, v0);
    const auto [r_min, r_max] = covered_radii(*grid);
    const double a_min = ball_measure(*grid, r_min), a_star = ball_measure(*grid, rs), a_max = ball_measure(*grid, r_max);
    const int m_in = 1 + static_cast<int>(rng.below(3));
    const int m_out = 1 + static_cast<int>(rng.below(3));
    const auto inner = random_shells(*grid, rng, a_min, a_star, random_partition(rng, m_in, 0.5 * delta));
    const auto outer = random_shells(*grid, rng, a_star, a_max, random_partition(rng, m_out, 0.5 * delta));

    std::vector<double> v = band_fraction(*grid, 0.0, rs);
    for (const auto& [lo, hi] : inner) {
        const auto f = band_fraction(*grid, lo, hi);
        for (std::size_t i = 0; i < v.size(); ++i) v[i] -= f[i];
    }
    for (const auto& [lo, hi] : outer) {
        const auto f = band_fraction(*grid, lo, hi);
        for (std::size_t i = 0; i < v.size(); ++i) v[i] += f[i];
    }
    for (double& x : v) x = std::clamp(x, 0.0, 1.0);
    return PotentialField(grid, std::move(v));
}

double arc_overlap(double lo, double hi, double a, double b) {
    double s = 0.0;
    for (int shift = -1; shift <= 1; ++shift) {
        const double o = 2.0 * pi * shift;
        s += std::max(0.0, std::min(hi, b + o) - std::max(lo, a + o));
    }
    return s;
}

struct PolarPiece {
    double theta0, width, rho_lo, rho_hi;
};

// Polar rectangles of the given masses in disjoint angular slots, radially
// inside [r_lo, r_hi].
std::vector<PolarPiece> random_pieces(CounterRng& rng, const std::vector<double>& masses, double r_lo, double r_hi) {
    const double slot = 2.0 * pi / static_cast<double>(masses.size());
    const double phase = rng.uniform(0.0, 2.0 * pi);
    const double room = r_hi * r_hi - r_lo * r_lo;
    std::vector<PolarPiece> out;
    for (std::size_t p = 0; p < masses.size(); ++p) {
        double width = slot * rng.uniform(0.4, 1.0);
        double need = 2.0 * masses[p] / width;  // rho_hi^2 - rho_lo^2
        if (need > room) {
            width = slot;
            need = 2.0 * masses[p] / width;
        }
        if (need > room) throw InfeasibleError("polar-random: sector mass does not fit in its slot");
        const double start = phase + slot * static_cast<double>(p) + rng.uniform(0.0, slot - width);
        const double lo2 = r_lo * r_lo + rng.uniform() * (room - need);
        out.push_back({std::fmod(start, 2.0 * pi), width, std::sqrt(lo2), std::sqrt(lo2 + need)});
    }
    return out;
}

void add_pieces(const PolarGrid& p, const std::vector<PolarPiece>& pieces, double sign, std::vector<double>& v) {
    for (const auto& piece : pieces) {
        for (int i = 0; i < p.nr(); ++i) {
            const double lo = i * p.dr(), hi = (i + 1) * p.dr();
            const double a = std::clamp(piece.rho_lo, lo, hi), b = std::clamp(piece.rho_hi, lo, hi);
            if (b <= a) continue;
            const double radial = (b * b - a * a) / (hi * hi - lo * lo);
            for (int j = 0; j < p.ntheta(); ++j) {
                const double c = p.angles()[static_cast<std::size_t>(j)];
                const double ang = arc_overlap(c - 0.5 * p.dtheta(), c + 0.5 * p.dtheta(), piece.theta0,
                                               piece.theta0 + piece.width) / p.dtheta();
                if (ang > 0.0) v[p.index(i, j)] += sign * ang * radial;
            }
        }
    }
}

PotentialField polar_random(const GridPtr& grid, double v0, double delta, CounterRng& rng) {
    const auto* p = std::get_if<PolarGrid>(grid.get());
    if (!p) throw DomainError("polar-random samples need a polar grid");
    const double rs = star_radius(*grid, v0);
    const int m_in = 1 + static_cast<int>(rng.below(3));
    const int m_out = 1 + static_cast<int>(rng.below(3));
    const auto inner = random_pieces(rng, random_partition(rng, m_in, 0.5 * delta), 0.0, rs);
    const auto outer = random_pieces(rng, random_partition(rng, m_out, 0.5 * delta), rs, p->R());
    std::vector<double> v = band_fraction(*grid, 0.0, rs);
    add_pieces(*p, inner, -1.0, v);
    add_pieces(*p, outer, 1.0, v);
    for (double& x : v) x = std::clamp(x, 0.0, 1.0);
    return PotentialField(grid, std::move(v));
}

PotentialField normal_deformation(const GridPtr& grid, double v0, double t, CounterRng& rng) {
    const auto* p = std::get_if<PolarGrid>(grid.get());
    if (!p) throw DomainError("normal-deformation samples need a polar grid");
    const double rs = star_radius(*grid, v0);
    if (!(t > 0.0) || 2.0 * t >= std::min(rs, p->R() - rs))
        throw InfeasibleError("normal-deformation: amplitude must satisfy 0 < 2t < min(r*, R - r*)");
    FourierPerturbation g;
    const int modes = 4;
    g.alpha.resize(modes);
    g.beta.resize(modes);
    double l1 = 0.0;
    for (int k = 0; k < modes; ++k) {
        g.alpha[static_cast<std::size_t>(k)] = rng.normal();
        g.beta[static_cast<std::size_t>(k)] = rng.normal();
        l1 += std::abs(g.alpha[static_cast<std::size_t>(k)]) + std::abs(g.beta[static_cast<std::size_t>(k)]);
    }
    for (int k = 0; k < modes; ++k) {
        g.alpha[static_cast<std::size_t>(k)] /= l1;
        g.beta[static_cast<std::size_t>(k)] /= l1;
    }
    // |g| <= 1, so a radial offset in [-t, t] brackets the target mass.
    const double target = integrate(*grid, band_fraction(*grid, 0.0, rs));
    auto field = [&](double c) {
        return star_shaped_potential(grid, [&](double th) { return rs + c + t * g(th); });
    };
    double lo = -t, hi = t;
    for (int it = 0; it < 100 && hi - lo > 1e-15 * rs; ++it) {
        const double mid = 0.5 * (lo + hi);
        (field(mid).mass() < target ? lo : hi) = mid;
    }
    return field(0.5 * (lo + hi));
}

std::string describe_sample(std::size_t index, Family family, double size) {
    std::ostringstream os;
    os << "sample " << index << " (" << family_name(family) << ", size " << size << ")";
    return os.str();
}

} // namespace

Baseline make_baseline(const GridPtr& grid, double v0, const SolveOptions& opts) {
    PotentialField star = ball_potential(grid, v0);
    const double lambda = principal_eigenpair(star, opts).lambda;
    const double mass = star.mass();
    return {grid, v0, std::move(star), lambda, mass};
}

double parametric_derivative(const PotentialField& V, std::span<const double> h, const EigenPair& eig) {
    const auto w = cell_weights(V.grid());
    if (h.size() != w.size() || eig.u.size() != w.size())
        throw SizingError("parametric_derivative: direction or eigenfunction length does not match grid");
    const auto v = V.values();
    double total = 0.0, size = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) {
        if (v[i] >= 1.0 - 1e-12 && h[i] > 1e-12) {
            std::ostringstream os;
            os << "parametric_derivative: direction violates h <= 0 on {V = 1} at node " << i;
            throw DomainError(os.str());
        }
        if (v[i] <= 1e-12 && h[i] < -1e-12) {
            std::ostringstream os;
            os << "parametric_derivative: direction violates h >= 0 on {V = 0} at node " << i;
            throw DomainError(os.str());
        }
        total += w[i] * h[i];
        size += w[i] * std::abs(h[i]);
    }
    if (std::abs(total) > 1e-8 * std::max(1.0, size))
        throw DomainError("parametric_derivative: direction violates integral h = 0");
    std::vector<double> hu2(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) hu2[i] = h[i] * eig.u[i] * eig.u[i];
    return -integrate(V.grid(), hu2);
}

const char* family_name(Family f) {
    switch (f) {
    case Family::annulus: return "annulus";
    case Family::radial_random: return "radial-random";
    case Family::polar_random: return "polar-random";
    case Family::normal_deformation: return "normal-deformation";
    }
    return "?";
}

std::vector<std::string> family_names() {
    return {"annulus", "radial-random", "polar-random", "normal-deformation"};
}

Family parse_family(const std::string& name) {
    for (Family f : {Family::annulus, Family::radial_random, Family::polar_random, Family::normal_deformation})
        if (name == family_name(f)) return f;
    std::ostringstream os;
    os << "unknown family '" << name << "'; valid families:";
    for (const auto& n : family_names()) os << ' ' << n;
    throw ConfigError(os.str());
}

PotentialField sample_admissible(const GridPtr& grid, double v0, const SampleSpec& spec, std::uint64_t seed,
                                 std::uint64_t stream) {
    if (!(spec.size > 0.0)) throw InfeasibleError("sample_admissible: size must be positive");
    CounterRng rng(seed, stream);
    switch (spec.family) {
    case Family::annulus: return annulus_competitor(grid, v0, spec.size).field;
    case Family::radial_random: return radial_random(grid, v0, spec.size, rng);
    case Family::polar_random: return polar_random(grid, v0, spec.size, rng);
    case Family::normal_deformation: return normal_deformation(grid, v0, spec.size, rng);
    }
    throw DomainError("sample_admissible: unknown family");
}

DeficitSample deficit_ratio(const PotentialField& V, const Baseline& base, const SolveOptions& opts) {
    if (!base.grid || !same_layout(V.grid(), *base.grid)) throw SizingError("deficit_ratio: V and baseline live on different grids");
    DeficitSample s;
    s.delta = l1_distance(V, base.star);
    if (!(s.delta > 0.0)) throw DegenerateInputError("deficit_ratio: V coincides with the ball potential");
    s.lambda = principal_eigenpair(V, opts).lambda;
    s.deficit = s.lambda - base.lambda_star;
    s.ratio = s.deficit / (s.delta * s.delta);
    double max_w = 0.0;
    for (double w : cell_weights(V.grid())) max_w = std::max(max_w, w);
    if (s.delta < 4.0 * max_w) {
        s.flagged = true;
        std::ostringstream os;
        os << "delta = " << s.delta << " is below four cell measures (" << 4.0 * max_w << ")";
        s.warning = os.str();
    }
    return s;
}

DeficitReport deficit_survey(const GridPtr& grid, double v0, const std::vector<PlanEntry>& plan, std::uint64_t seed,
                             const SolveOptions& opts) {
    std::vector<SampleSpec> specs;
    for (std::size_t e = 0; e < plan.size(); ++e) {
        const auto& entry = plan[e];
        if (!entry.sizes.empty()) {
            for (double s : entry.sizes) specs.push_back({entry.family, s});
            continue;
        }
        if (entry.count < 0 || (entry.count > 0 && !(entry.size_lo > 0.0 && entry.size_hi >= entry.size_lo)))
            throw DomainError("deficit_survey: plan entry needs count >= 0 and 0 < size_lo <= size_hi");
        for (int c = 0; c < entry.count; ++c) {
            CounterRng rng(seed, (std::uint64_t{1} << 40) + specs.size());
            const double s = entry.size_lo * std::pow(entry.size_hi / entry.size_lo, rng.uniform());
            specs.push_back({entry.family, s});
        }
    }
    if (specs.empty()) throw DomainError("deficit_survey: empty plan");

    const Baseline base = make_baseline(grid, v0, opts);
    DeficitReport report;
    report.samples.resize(specs.size());
    std::vector<std::exception_ptr> errors(specs.size());
    const auto n = static_cast<long>(specs.size());
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        try {
            const PotentialField V = sample_admissible(grid, v0, specs[k], seed, k);
            DeficitSample s = deficit_ratio(V, base, opts);
            s.family = specs[k].family;
            s.size = specs[k].size;
            report.samples[k] = std::move(s);
        } catch (...) {
            errors[k] = std::current_exception();
        }
    }
    for (std::size_t k = 0; k < errors.size(); ++k) {
        if (!errors[k]) continue;
        const std::string where = "deficit_survey: " + describe_sample(k, specs[k].family, specs[k].size) + ": ";
        try {
            std::rethrow_exception(errors[k]);
        } catch (const InfeasibleError& ex) {
            throw InfeasibleError(where + ex.what());
        } catch (const std::exception& ex) {
            throw SolverError(where + ex.what());
        }
    }

    report.grid = describe(*grid);
    report.v0 = v0;
    report.lambda_star = base.lambda_star;
    report.seed = seed;
    report.min_ratio = std::numeric_limits<double>::quiet_NaN();
    for (const auto& s : report.samples)
        if (!s.flagged && !(s.ratio >= report.min_ratio)) report.min_ratio = s.ratio;
    for (Family f : {Family::annulus, Family::radial_random, Family::polar_random, Family::normal_deformation}) {
        FamilyStats st;
        st.family = f;
        std::vector<double> ratios;
        for (const auto& s : report.samples) {
            if (s.family != f) continue;
            ++st.count;
            if (s.flagged) ++st.flagged;
            else ratios.push_back(s.ratio);
        }
        if (st.count == 0) continue;
        std::sort(ratios.begin(), ratios.end());
        const double nan = std::numeric_limits<double>::quiet_NaN();
        st.min_ratio = ratios.empty() ? nan : ratios.front();
        st.median_ratio = ratios.empty() ? nan
                          : ratios.size() % 2 ? ratios[ratios.size() / 2]
                                              : 0.5 * (ratios[ratios.size() / 2 - 1] + ratios[ratios.size() / 2]);
        report.families.push_back(st);
    }
    return report;
}

double spectral_gap(const Grid& grid, const PotentialField& V, const SolveOptions& opts) {
    const DiscreteOperator op = assemble(grid, V);
    const EigenPair first = principal_eigenpair(op, opts);
    return second_eigenpair(op, first, opts).lambda - first.lambda;
}

} // namespace spl
