#include "spl/grids.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "spl/errors.hpp"
#include "spl/kernels.hpp"

namespace spl {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Area fraction of the annular cell [lo, hi] inside r_lo <= r <= r_hi.
double annulus_fraction(double lo, double hi, double r_lo, double r_hi) {
    const double a = std::clamp(r_lo, lo, hi);
    const double b = std::clamp(r_hi, lo, hi);
    if (b <= a) return 0.0;
    return (b * b - a * a) / (hi * hi - lo * lo);
}

double overlap(double lo, double hi, double a, double b) {
    return std::max(0.0, std::min(hi, b) - std::max(lo, a));
}

} // namespace

IntervalGrid::IntervalGrid(double a, double b, int n) : a_(a), b_(b), n_(n) {
    if (!(b > a)) throw DomainError("IntervalGrid: need b > a");
    if (n < 3) throw DomainError("IntervalGrid: need at least 3 interior nodes");
    h_ = (b - a) / (n + 1);
    nodes_.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) nodes_[static_cast<std::size_t>(i)] = a + (i + 1) * h_;
    weights_.assign(static_cast<std::size_t>(n), h_);
}

RadialGrid::RadialGrid(double R, int n) : R_(R), n_(n) {
    if (!(R > 0)) throw DomainError("RadialGrid: need R > 0");
    if (n < 3) throw DomainError("RadialGrid: need at least 3 nodes");
    h_ = R / (n + 1);
    nodes_.resize(static_cast<std::size_t>(n));
    weights_.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double r = (i + 1) * h_;
        nodes_[static_cast<std::size_t>(i)] = r;
        weights_[static_cast<std::size_t>(i)] = 2.0 * pi * r * h_;
    }
}

PolarGrid::PolarGrid(double R, int nr, int ntheta) : R_(R), nr_(nr), ntheta_(ntheta) {
    if (!(R > 0)) throw DomainError("PolarGrid: need R > 0");
    if (nr < 2) throw DomainError("PolarGrid: need at least 2 radial cells");
    if (ntheta < 4 || ntheta % 2 != 0) throw DomainError("PolarGrid: ntheta must be even and >= 4");
    dr_ = R / nr;
    dtheta_ = 2.0 * pi / ntheta;
    radii_.resize(static_cast<std::size_t>(nr));
    angles_.resize(static_cast<std::size_t>(ntheta));
    for (int i = 0; i < nr; ++i) radii_[static_cast<std::size_t>(i)] = (i + 0.5) * dr_;
    for (int j = 0; j < ntheta; ++j) angles_[static_cast<std::size_t>(j)] = j * dtheta_;
    weights_.resize(static_cast<std::size_t>(nr) * static_cast<std::size_t>(ntheta));
    for (int i = 0; i < nr; ++i)
        for (int j = 0; j < ntheta; ++j)
            weights_[index(i, j)] = radii_[static_cast<std::size_t>(i)] * dr_ * dtheta_;
}

GridPtr make_interval_grid(double a, double b, int n) {
    return std::make_shared<const Grid>(IntervalGrid(a, b, n));
}

GridPtr make_radial_grid(double R, int n) {
    return std::make_shared<const Grid>(RadialGrid(R, n));
}

GridPtr make_polar_grid(double R, int nr, int ntheta) {
    return std::make_shared<const Grid>(PolarGrid(R, nr, ntheta));
}

std::size_t node_count(const Grid& grid) {
    return std::visit([](const auto& g) { return g.size(); }, grid);
}

std::span<const double> cell_weights(const Grid& grid) {
    return std::visit([](const auto& g) { return g.weights(); }, grid);
}

double domain_measure(const Grid& grid) {
    return std::visit([](const auto& g) { return g.measure(); }, grid);
}

std::string describe(const Grid& grid) {
    std::ostringstream os;
    std::visit(overloaded{
                   [&](const IntervalGrid& g) { os << "interval(a=" << g.a() << ",b=" << g.b() << ",n=" << g.n() << ")"; },
                   [&](const RadialGrid& g) { os << "disk(R=" << g.R() << ",n=" << g.n() << ")"; },
                   [&](const PolarGrid& g) {
                       os << "polar(R=" << g.R() << ",nr=" << g.nr() << ",ntheta=" << g.ntheta() << ")";
                   },
               },
               grid);
    return os.str();
}

bool same_layout(const Grid& a, const Grid& b) {
    if (a.index() != b.index()) return false;
    return std::visit(
        overloaded{
            [&](const IntervalGrid& g) {
                const auto& o = std::get<IntervalGrid>(b);
                return g.a() == o.a() && g.b() == o.b() && g.n() == o.n();
            },
            [&](const RadialGrid& g) {
                const auto& o = std::get<RadialGrid>(b);
                return g.R() == o.R() && g.n() == o.n();
            },
            [&](const PolarGrid& g) {
                const auto& o = std::get<PolarGrid>(b);
                return g.R() == o.R() && g.nr() == o.nr() && g.ntheta() == o.ntheta();
            },
        },
        a);
}

std::vector<double> node_radius(const Grid& grid) {
    return std::visit(overloaded{
                          [](const IntervalGrid& g) {
                              std::vector<double> r(g.size());
                              for (std::size_t i = 0; i < r.size(); ++i) r[i] = std::abs(g.nodes()[i] - g.center());
                              return r;
                          },
                          [](const RadialGrid& g) { return std::vector<double>(g.nodes().begin(), g.nodes().end()); },
                          [](const PolarGrid& g) {
                              std::vector<double> r(g.size());
                              for (int i = 0; i < g.nr(); ++i)
                                  for (int j = 0; j < g.ntheta(); ++j) r[g.index(i, j)] = g.radii()[static_cast<std::size_t>(i)];
                              return r;
                          },
                      },
                      grid);
}

double outer_radius(const Grid& grid) {
    return std::visit(overloaded{
                          [](const IntervalGrid& g) { return 0.5 * g.measure(); },
                          [](const RadialGrid& g) { return g.R(); },
                          [](const PolarGrid& g) { return g.R(); },
                      },
                      grid);
}

double integrate(const Grid& grid, std::span<const double> f) {
    const auto w = cell_weights(grid);
    if (f.size() != w.size()) throw SizingError("integrate: field length does not match grid");
    return kernels::parallel::weighted_sum(w, f);
}

double circle_integral(double radius, std::span<const double> g) {
    if (g.empty()) throw SizingError("circle_integral: no angular samples");
    const double dtheta = 2.0 * pi / static_cast<double>(g.size());
    double s = 0.0;
    for (double v : g) s += v;
    return radius * s * dtheta;
}

double boundary_circle_integral(const RadialGrid& grid, double radius, double g) {
    if (!(radius > 0.0 && radius < grid.R())) throw DomainError("boundary_circle_integral: radius outside (0, R)");
    return 2.0 * pi * radius * g;
}

double boundary_circle_integral(const PolarGrid& grid, double radius, std::span<const double> g) {
    if (!(radius > 0.0 && radius < grid.R())) throw DomainError("boundary_circle_integral: radius outside (0, R)");
    if (g.size() != static_cast<std::size_t>(grid.ntheta()))
        throw SizingError("boundary_circle_integral: expected one sample per grid angle");
    return circle_integral(radius, g);
}

std::vector<double> band_fraction(const Grid& grid, double r_lo, double r_hi) {
    r_lo = std::max(r_lo, 0.0);
    return std::visit(
        overloaded{
            [&](const IntervalGrid& g) {
                std::vector<double> out(g.size(), 0.0);
                const double c = g.center(), h = g.h();
                for (std::size_t i = 0; i < out.size(); ++i) {
                    const double lo = g.nodes()[i] - 0.5 * h, hi = g.nodes()[i] + 0.5 * h;
                    const double len = overlap(lo, hi, c + r_lo, c + r_hi) + overlap(lo, hi, c - r_hi, c - r_lo);
                    out[i] = std::min(1.0, len / h);
                }
                return out;
            },
            [&](const RadialGrid& g) {
                std::vector<double> out(g.size(), 0.0);
                const double h = g.h();
                for (std::size_t i = 0; i < out.size(); ++i) {
                    const double r = g.nodes()[i];
                    out[i] = annulus_fraction(r - 0.5 * h, r + 0.5 * h, r_lo, r_hi);
                }
                return out;
            },
            [&](const PolarGrid& g) {
                std::vector<double> out(g.size(), 0.0);
                for (int i = 0; i < g.nr(); ++i) {
                    const double f = annulus_fraction(i * g.dr(), (i + 1) * g.dr(), r_lo, r_hi);
                    for (int j = 0; j < g.ntheta(); ++j) out[g.index(i, j)] = f;
                }
                return out;
            },
        },
        grid);
}

} // namespace spl
