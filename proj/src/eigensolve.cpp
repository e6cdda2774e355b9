#include "spl/eigensolve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include "spl/errors.hpp"
#include "spl/kernels.hpp"
#include "spl/rng.hpp"

namespace spl {

PotentialField::PotentialField(GridPtr grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
    if (!grid_) throw StateError("PotentialField: null grid");
    if (values_.size() != node_count(*grid_)) throw SizingError("PotentialField: value count does not match grid");
    for (std::size_t i = 0; i < values_.size(); ++i) {
        double& v = values_[i];
        if (!(v >= -1e-12 && v <= 1.0 + 1e-12)) {
            std::ostringstream os;
            os << "PotentialField: value " << v << " at node " << i << " outside [0, 1]";
            throw DomainError(os.str());
        }
        v = std::clamp(v, 0.0, 1.0);
    }
    mass_ = integrate(*grid_, values_);
}

PotentialField PotentialField::constant(GridPtr grid, double c) {
    const std::size_t n = grid ? node_count(*grid) : 0;
    return PotentialField(std::move(grid), std::vector<double>(n, c));
}

namespace {

using Sparse = DiscreteOperator::Sparse;
using Triplets = std::vector<Eigen::Triplet<double>>;
using Vec = Eigen::VectorXd;

std::span<const double> view(const Vec& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

void couple(Triplets& t, std::size_t p, std::size_t q, double c) {
    const auto a = static_cast<int>(p), b = static_cast<int>(q);
    t.emplace_back(a, a, c);
    t.emplace_back(b, b, c);
    t.emplace_back(a, b, -c);
    t.emplace_back(b, a, -c);
}

void ground(Triplets& t, std::size_t p, double c) {
    t.emplace_back(static_cast<int>(p), static_cast<int>(p), c);
}

Triplets interval_stiffness(const IntervalGrid& g) {
    Triplets t;
    const double c = 1.0 / g.h();
    const std::size_t n = g.size();
    ground(t, 0, c);
    for (std::size_t i = 0; i + 1 < n; ++i) couple(t, i, i + 1, c);
    ground(t, n - 1, c);
    return t;
}

// Flux through the circle of radius rho between neighbouring nodes is
// 2*pi*rho*(u_i - u_{i+1})/h. No face at h/2 (zero flux: u'(0) = 0).
Triplets radial_stiffness(const RadialGrid& g) {
    Triplets t;
    const double h = g.h();
    const std::size_t n = g.size();
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double rho = (static_cast<double>(i) + 1.5) * h;
        couple(t, i, i + 1, 2.0 * pi * rho / h);
    }
    ground(t, n - 1, 2.0 * pi * (static_cast<double>(n) + 0.5) * h / h);
    return t;
}

// Cell-centred finite volumes. The face at r = 0 has zero length, so the
// innermost ring needs no pole treatment; the Dirichlet face at R sits half
// a cell away from the last ring of centres.
Triplets polar_stiffness(const PolarGrid& g) {
    Triplets t;
    const int nr = g.nr(), nt = g.ntheta();
    const double dr = g.dr(), dth = g.dtheta();
    t.reserve(static_cast<std::size_t>(nr) * static_cast<std::size_t>(nt) * 10);
    for (int i = 0; i < nr; ++i) {
        const double ang = dr / (g.radii()[static_cast<std::size_t>(i)] * dth);
        for (int j = 0; j < nt; ++j) {
            const std::size_t p = g.index(i, j);
            couple(t, p, g.index(i, (j + 1) % nt), ang);
            if (i + 1 < nr)
                couple(t, p, g.index(i + 1, j), (i + 1) * dr * dth / dr);
            else
                ground(t, p, 2.0 * g.R() * dth / dr);
        }
    }
    return t;
}

Sparse stiffness_matrix(const Grid& grid) {
    const auto n = static_cast<int>(node_count(grid));
    Triplets t = std::visit(
        [](const auto& g) -> Triplets {
            using G = std::decay_t<decltype(g)>;
            if constexpr (std::is_same_v<G, IntervalGrid>) return interval_stiffness(g);
            else if constexpr (std::is_same_v<G, RadialGrid>) return radial_stiffness(g);
            else return polar_stiffness(g);
        },
        grid);
    Sparse k(n, n);
    k.setFromTriplets(t.begin(), t.end());
    k.makeCompressed();
    return k;
}

Sparse diagonal(std::span<const double> d) {
    const auto n = static_cast<int>(d.size());
    Sparse m(n, n);
    m.reserve(Eigen::VectorXi::Constant(n, 1));
    for (int i = 0; i < n; ++i) m.insert(i, i) = d[static_cast<std::size_t>(i)];
    m.makeCompressed();
    return m;
}

kernels::CsrView csr(const Sparse& m) {
    const auto n = static_cast<std::size_t>(m.outerSize());
    const auto nnz = static_cast<std::size_t>(m.nonZeros());
    return {{m.outerIndexPtr(), n + 1}, {m.innerIndexPtr(), nnz}, {m.valuePtr(), nnz}};
}

// Shared machinery of the two eigen solves: the factorized shifted pencil
// P - shift*W, plus residual evaluation in the discrete L2 norm.
class ShiftedPencil {
public:
    ShiftedPencil(const DiscreteOperator& op, const SolveOptions& opts) : opts_(opts) {
        if (!(opts.tol > 0)) throw DomainError("SolveOptions: tol must be positive");
        if (opts.max_iter < 1) throw DomainError("SolveOptions: max_iter must be positive");
        const auto n = static_cast<Eigen::Index>(op.size());
        w_ = Eigen::Map<const Vec>(op.weights().data(), n);
        pencil_ = op.pencil();
        pencil_.makeCompressed();
        double vmax = 0.0;
        for (double v : op.potential()) vmax = std::max(vmax, v);
        shift_ = opts.shift_guess.value_or(-vmax - 1.0);
        Sparse shifted = pencil_;
        for (Eigen::Index i = 0; i < n; ++i) shifted.coeffRef(i, i) -= shift_ * w_[i];
        ldlt_.compute(shifted);
        if (ldlt_.info() != Eigen::Success) throw SolverError("eigensolve: factorization of the shifted operator failed");
        diag_.resize(n);
        for (Eigen::Index i = 0; i < n; ++i) diag_[i] = std::abs(pencil_.coeff(i, i)) / w_[i];
    }

    Vec solve_weighted(const Vec& x) const { return ldlt_.solve(w_.cwiseProduct(x)); }

    Vec apply_pencil(const Vec& x) const {
        Vec y(x.size());
        kernels::parallel::spmv(csr(pencil_), view(x), {y.data(), static_cast<std::size_t>(y.size())});
        return y;
    }

    double wdot(const Vec& a, const Vec& b) const {
        return kernels::parallel::weighted_dot(view(w_), view(a), view(b));
    }

    void normalize(Vec& x) const {
        const double nrm = std::sqrt(wdot(x, x));
        if (!(nrm > 0) || !std::isfinite(nrm)) throw SolverError("eigensolve: iterate collapsed");
        x /= nrm;
    }

    // Residual of a W-normalized vector, and the rounding floor of the
    // residual evaluation itself (fine stencils carry entries ~1/h^2, so
    // the computed residual cannot fall below a few ulps of |A u|).
    std::pair<double, double> residual(const Vec& u, const Vec& pu, double lambda) const {
        Vec r = pu - lambda * w_.cwiseProduct(u);
        const Vec winv = w_.cwiseInverse();
        const double res = std::sqrt(kernels::parallel::weighted_dot(view(winv), view(r), view(r)));
        const Vec du = diag_.cwiseProduct(u);
        const double floor = 32.0 * std::numeric_limits<double>::epsilon() * std::sqrt(wdot(du, du));
        return {res, floor};
    }

    bool converged(double res, double floor, double lambda) const {
        return res <= std::max(opts_.tol * (1.0 + std::abs(lambda)), floor);
    }

    const Vec& weights() const { return w_; }

private:
    const SolveOptions& opts_;
    Vec w_;
    Vec diag_;
    Sparse pencil_;
    double shift_ = 0.0;
    Eigen::SimplicialLDLT<Sparse> ldlt_;
};

EigenPair to_pair(const Vec& u, double lambda, double res, int which, int iterations) {
    EigenPair out;
    out.lambda = lambda;
    out.u.assign(u.data(), u.data() + u.size());
    out.residual = res;
    out.which = which;
    out.iterations = iterations;
    return out;
}

// W-orthonormalize the columns of z against u (optional) and each other,
// two passes of modified Gram-Schmidt.
void orthonormalize(const ShiftedPencil& sp, Eigen::MatrixXd& z, const Vec* u) {
    for (Eigen::Index c = 0; c < z.cols(); ++c) {
        Vec col = z.col(c);
        for (int pass = 0; pass < 2; ++pass) {
            if (u) col -= sp.wdot(*u, col) * *u;
            for (Eigen::Index p = 0; p < c; ++p) {
                const Vec q = z.col(p);
                col -= sp.wdot(q, col) * q;
            }
        }
        sp.normalize(col);
        z.col(c) = col;
    }
}

} // namespace

DiscreteOperator::DiscreteOperator(Sparse stiffness, std::vector<double> weights, std::vector<double> potential)
    : stiffness_(std::move(stiffness)), weights_(std::move(weights)), potential_(std::move(potential)) {
    const auto n = weights_.size();
    if (potential_.size() != n || static_cast<std::size_t>(stiffness_.rows()) != n ||
        static_cast<std::size_t>(stiffness_.cols()) != n)
        throw SizingError("DiscreteOperator: inconsistent sizes");
    stiffness_.makeCompressed();
}

Sparse DiscreteOperator::pencil() const {
    std::vector<double> d(size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = -weights_[i] * potential_[i];
    Sparse p = stiffness_ + diagonal(d);
    p.makeCompressed();
    return p;
}

Sparse DiscreteOperator::matrix() const {
    std::vector<double> inv(size());
    for (std::size_t i = 0; i < inv.size(); ++i) inv[i] = 1.0 / weights_[i];
    std::vector<double> mv(size());
    for (std::size_t i = 0; i < mv.size(); ++i) mv[i] = -potential_[i];
    Sparse a = diagonal(inv) * stiffness_;
    a += diagonal(mv);
    a.makeCompressed();
    return a;
}

Sparse DiscreteOperator::symmetric_matrix() const {
    std::vector<double> s(size());
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = 1.0 / std::sqrt(weights_[i]);
    std::vector<double> mv(size());
    for (std::size_t i = 0; i < mv.size(); ++i) mv[i] = -potential_[i];
    const Sparse d = diagonal(s);
    Sparse a = d * stiffness_ * d;
    a += diagonal(mv);
    a.makeCompressed();
    return a;
}

std::vector<double> DiscreteOperator::apply(std::span<const double> u) const {
    if (u.size() != size()) throw SizingError("DiscreteOperator::apply: length mismatch");
    std::vector<double> y(size());
    kernels::parallel::spmv(csr(stiffness_), u, y);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = y[i] / weights_[i] - potential_[i] * u[i];
    return y;
}

double DiscreteOperator::gradient_energy(std::span<const double> u) const {
    if (u.size() != size()) throw SizingError("DiscreteOperator::gradient_energy: length mismatch");
    std::vector<double> y(size());
    kernels::parallel::spmv(csr(stiffness_), u, y);
    const std::vector<double> ones(size(), 1.0);
    return kernels::parallel::weighted_dot(ones, u, y);
}

DiscreteOperator assemble(const Grid& grid, std::span<const double> v) {
    if (v.size() != node_count(grid)) throw SizingError("assemble: potential length does not match grid");
    const auto w = cell_weights(grid);
    return DiscreteOperator(stiffness_matrix(grid), std::vector<double>(w.begin(), w.end()),
                            std::vector<double>(v.begin(), v.end()));
}

DiscreteOperator assemble(const Grid& grid, const PotentialField& V) {
    if (!same_layout(grid, V.grid())) throw SizingError("assemble: potential lives on a different grid");
    return assemble(grid, V.values());
}

EigenPair principal_eigenpair(const DiscreteOperator& op, const SolveOptions& opts) {
    const ShiftedPencil sp(op, opts);
    const auto n = static_cast<Eigen::Index>(op.size());
    Vec x = Vec::Ones(n);
    sp.normalize(x);
    double lambda = 0.0, res = 0.0;
    for (int it = 1; it <= opts.max_iter; ++it) {
        x = sp.solve_weighted(x);
        sp.normalize(x);
        const Vec px = sp.apply_pencil(x);
        lambda = x.dot(px);
        const auto [r, floor] = sp.residual(x, px, lambda);
        res = r;
        if (sp.converged(res, floor, lambda)) {
            if (x.dot(sp.weights()) < 0) x = -x;
            return to_pair(x, lambda, res, 1, it);
        }
    }
    throw IterationLimitError("principal_eigenpair: no convergence within max_iter", opts.max_iter, res);
}

EigenPair principal_eigenpair(const Grid& grid, const PotentialField& V, const SolveOptions& opts) {
    return principal_eigenpair(assemble(grid, V), opts);
}

EigenPair principal_eigenpair(const PotentialField& V, const SolveOptions& opts) {
    return principal_eigenpair(V.grid(), V, opts);
}

EigenPair second_eigenpair(const DiscreteOperator& op, const EigenPair& first, const SolveOptions& opts) {
    const auto n = static_cast<Eigen::Index>(op.size());
    if (first.u.size() != op.size()) throw SizingError("second_eigenpair: principal vector length mismatch");
    if (n < 2) throw DomainError("second_eigenpair: need at least two nodes");
    const ShiftedPencil sp(op, opts);
    Vec u1 = Eigen::Map<const Vec>(first.u.data(), n);
    sp.normalize(u1);

    const Eigen::Index block = std::min<Eigen::Index>(4, n - 1);
    CounterRng rng(0x2d5eedULL, 2);
    Eigen::MatrixXd q(n, block);
    for (Eigen::Index c = 0; c < block; ++c)
        for (Eigen::Index i = 0; i < n; ++i) q(i, c) = rng.normal();
    orthonormalize(sp, q, &u1);

    double res = 0.0;
    for (int it = 1; it <= opts.max_iter; ++it) {
        Eigen::MatrixXd z(n, block);
        for (Eigen::Index c = 0; c < block; ++c) z.col(c) = sp.solve_weighted(q.col(c));
        orthonormalize(sp, z, &u1);

        Eigen::MatrixXd pz(n, block);
        for (Eigen::Index c = 0; c < block; ++c) pz.col(c) = sp.apply_pencil(z.col(c));
        Eigen::MatrixXd h = z.transpose() * pz;
        h = 0.5 * (h + h.transpose()).eval();
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ritz(h);
        q = z * ritz.eigenvectors();

        const double lambda = ritz.eigenvalues()(0);
        const Vec x = q.col(0);
        const auto [r, floor] = sp.residual(x, sp.apply_pencil(x), lambda);
        res = r;
        if (sp.converged(res, floor, lambda)) {
            Vec u = x;
            if (u.dot(sp.weights()) < 0) u = -u;
            return to_pair(u, lambda, res, 2, it);
        }
    }
    throw IterationLimitError("second_eigenpair: no convergence within max_iter", opts.max_iter, res);
}

double second_eigenvalue(const Grid& grid, const PotentialField& V, const SolveOptions& opts) {
    const DiscreteOperator op = assemble(grid, V);
    return second_eigenpair(op, principal_eigenpair(op, opts), opts).lambda;
}

double second_eigenvalue(const PotentialField& V, const SolveOptions& opts) {
    return second_eigenvalue(V.grid(), V, opts);
}

double rayleigh_quotient(const Grid& grid, const PotentialField& V, std::span<const double> w) {
    const DiscreteOperator op = assemble(grid, V);
    if (w.size() != op.size()) throw SizingError("rayleigh_quotient: field length does not match grid");
    const double norm2 = kernels::parallel::weighted_dot(op.weights(), w, w);
    if (!(norm2 > 0)) throw DegenerateInputError("rayleigh_quotient: test field has zero L2 norm");
    std::vector<double> vw(op.size());
    for (std::size_t i = 0; i < vw.size(); ++i) vw[i] = op.weights()[i] * op.potential()[i];
    const double potential = kernels::parallel::weighted_dot(vw, w, w);
    return (op.gradient_energy(w) - potential) / norm2;
}

} // namespace spl
