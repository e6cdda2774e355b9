#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace spl {

inline constexpr double pi = 3.141592653589793238462643383279502884;

// Uniform interior samples of (a, b); Dirichlet values at a and b are
// eliminated. Node i owns the cell [x_i - h/2, x_i + h/2].
class IntervalGrid {
public:
    IntervalGrid(double a, double b, int n);

    double a() const { return a_; }
    double b() const { return b_; }
    int n() const { return n_; }
    double h() const { return h_; }
    double center() const { return 0.5 * (a_ + b_); }
    double measure() const { return b_ - a_; }
    std::size_t size() const { return nodes_.size(); }
    std::span<const double> nodes() const { return nodes_; }
    std::span<const double> weights() const { return weights_; }

private:
    double a_, b_;
    int n_;
    double h_;
    std::vector<double> nodes_;
    std::vector<double> weights_;
};

// Radial section of the disk B(0, R) in dimension 2. Nodes r_i = i*h,
// i = 1..n, h = R/(n+1); the node at r = 0 is excluded and u'(0) = 0 is
// imposed by a zero-flux face at h/2. Cell i is the annulus
// [r_i - h/2, r_i + h/2] with area 2*pi*r_i*h.
class RadialGrid {
public:
    RadialGrid(double R, int n);

    double R() const { return R_; }
    int n() const { return n_; }
    double h() const { return h_; }
    int dim() const { return 2; }
    double measure() const { return pi * R_ * R_; }
    std::size_t size() const { return nodes_.size(); }
    std::span<const double> nodes() const { return nodes_; }
    std::span<const double> weights() const { return weights_; }

private:
    double R_;
    int n_;
    double h_;
    std::vector<double> nodes_;
    std::vector<double> weights_;
};

// Cell-centred polar grid on B(0, R): radial cells [i*dr, (i+1)*dr] with
// dr = R/nr, angular cells centred on theta_j = j*dtheta. Node (i, j) is
// stored at index i*ntheta + j.
class PolarGrid {
public:
    PolarGrid(double R, int nr, int ntheta);

    double R() const { return R_; }
    int nr() const { return nr_; }
    int ntheta() const { return ntheta_; }
    double dr() const { return dr_; }
    double dtheta() const { return dtheta_; }
    double measure() const { return pi * R_ * R_; }
    std::size_t size() const { return weights_.size(); }
    std::size_t index(int i, int j) const {
        return static_cast<std::size_t>(i) * static_cast<std::size_t>(ntheta_) +
               static_cast<std::size_t>(j);
    }
    std::span<const double> radii() const { return radii_; }
    std::span<const double> angles() const { return angles_; }
    std::span<const double> weights() const { return weights_; }

private:
    double R_;
    int nr_, ntheta_;
    double dr_, dtheta_;
    std::vector<double> radii_;
    std::vector<double> angles_;
    std::vector<double> weights_;
};

using Grid = std::variant<IntervalGrid, RadialGrid, PolarGrid>;

// Grids are immutable and shared between fields, operators and reports.
using GridPtr = std::shared_ptr<const Grid>;

GridPtr make_interval_grid(double a, double b, int n);
GridPtr make_radial_grid(double R, int n);
GridPtr make_polar_grid(double R, int nr, int ntheta);

std::size_t node_count(const Grid& grid);
std::span<const double> cell_weights(const Grid& grid);
double domain_measure(const Grid& grid);
std::string describe(const Grid& grid);

// Same kind and same parameters (fields on either grid are interchangeable).
bool same_layout(const Grid& a, const Grid& b);

// Distance of every node to the centre of the domain.
std::vector<double> node_radius(const Grid& grid);

// Outer radius of the domain measured from its centre (R, or (b-a)/2).
double outer_radius(const Grid& grid);

// Quadrature sum_i w_i f_i. Throws SizingError on length mismatch.
double integrate(const Grid& grid, std::span<const double> f);

// Trapezoid rule on the circle |x| = radius: radius * sum_j g_j * dtheta,
// with dtheta = 2*pi/g.size().
double circle_integral(double radius, std::span<const double> g);

// Same, with 0 < radius < R checked against the grid. The radial variant
// takes the (constant) angular value g and returns 2*pi*radius*g.
double boundary_circle_integral(const RadialGrid& grid, double radius, double g);
double boundary_circle_integral(const PolarGrid& grid, double radius, std::span<const double> g);

// Fraction of every cell lying in the centred band r_lo <= |x| <= r_hi
// (exact cell-area fractions; on the interval both symmetric pieces count).
std::vector<double> band_fraction(const Grid& grid, double r_lo, double r_hi);

} // namespace spl
