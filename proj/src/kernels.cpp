#include "spl/kernels.hpp"

#include <algorithm>
#include <cstdlib>
#include <vector>

#include <omp.h>

#include "spl/errors.hpp"

namespace spl::kernels {

namespace {

double cell_fraction(double lo, double hi, double rho) {
    if (rho <= lo) return 0.0;
    if (rho >= hi) return 1.0;
    return (rho * rho - lo * lo) / (hi * hi - lo * lo);
}

void check_graph_input(const GraphDiskInput& in, std::span<double> out) {
    if (in.subslices < 1) throw DomainError("graph_disk_fractions: subslices must be positive");
    if (in.rho.size() != static_cast<std::size_t>(in.ntheta) * static_cast<std::size_t>(in.subslices))
        throw SizingError("graph_disk_fractions: rho must hold ntheta*subslices samples");
    if (out.size() != static_cast<std::size_t>(in.nr) * static_cast<std::size_t>(in.ntheta))
        throw SizingError("graph_disk_fractions: output must hold nr*ntheta cells");
}

void graph_column(const GraphDiskInput& in, int j, std::span<double> out) {
    const auto nth = static_cast<std::size_t>(in.ntheta);
    const auto s_count = static_cast<std::size_t>(in.subslices);
    const double inv = 1.0 / in.subslices;
    for (int i = 0; i < in.nr; ++i) {
        const double lo = i * in.dr, hi = (i + 1) * in.dr;
        double acc = 0.0;
        for (std::size_t s = 0; s < s_count; ++s) acc += cell_fraction(lo, hi, in.rho[static_cast<std::size_t>(j) * s_count + s]);
        out[static_cast<std::size_t>(i) * nth + static_cast<std::size_t>(j)] = acc * inv;
    }
}

} // namespace

namespace serial {

double weighted_sum(std::span<const double> w, std::span<const double> f) {
    double s = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * f[i];
    return s;
}

double weighted_dot(std::span<const double> w, std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * a[i] * b[i];
    return s;
}

void spmv(const CsrView& a, std::span<const double> x, std::span<double> y) {
    const std::size_t rows = a.outer.size() - 1;
    for (std::size_t r = 0; r < rows; ++r) {
        double s = 0.0;
        for (int k = a.outer[r]; k < a.outer[r + 1]; ++k) s += a.values[static_cast<std::size_t>(k)] * x[static_cast<std::size_t>(a.inner[static_cast<std::size_t>(k)])];
        y[r] = s;
    }
}

void graph_disk_fractions(const GraphDiskInput& in, std::span<double> out) {
    check_graph_input(in, out);
    for (int j = 0; j < in.ntheta; ++j) graph_column(in, j, out);
}

} // namespace serial

namespace parallel {

double weighted_sum(std::span<const double> w, std::span<const double> f) {
    const std::size_t n = w.size();
    const auto blocks = static_cast<long>((n + reduction_block - 1) / reduction_block);
    std::vector<double> partial(static_cast<std::size_t>(blocks), 0.0);
#pragma omp parallel for schedule(static)
    for (long b = 0; b < blocks; ++b) {
        const std::size_t lo = static_cast<std::size_t>(b) * reduction_block;
        const std::size_t hi = std::min(n, lo + reduction_block);
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += w[i] * f[i];
        partial[static_cast<std::size_t>(b)] = s;
    }
    double s = 0.0;
    for (double p : partial) s += p;
    return s;
}

double weighted_dot(std::span<const double> w, std::span<const double> a, std::span<const double> b) {
    const std::size_t n = w.size();
    const auto blocks = static_cast<long>((n + reduction_block - 1) / reduction_block);
    std::vector<double> partial(static_cast<std::size_t>(blocks), 0.0);
#pragma omp parallel for schedule(static)
    for (long k = 0; k < blocks; ++k) {
        const std::size_t lo = static_cast<std::size_t>(k) * reduction_block;
        const std::size_t hi = std::min(n, lo + reduction_block);
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += w[i] * a[i] * b[i];
        partial[static_cast<std::size_t>(k)] = s;
    }
    double s = 0.0;
    for (double p : partial) s += p;
    return s;
}

void spmv(const CsrView& a, std::span<const double> x, std::span<double> y) {
    const auto rows = static_cast<long>(a.outer.size()) - 1;
#pragma omp parallel for schedule(static)
    for (long r = 0; r < rows; ++r) {
        double s = 0.0;
        for (int k = a.outer[static_cast<std::size_t>(r)]; k < a.outer[static_cast<std::size_t>(r) + 1]; ++k)
            s += a.values[static_cast<std::size_t>(k)] * x[static_cast<std::size_t>(a.inner[static_cast<std::size_t>(k)])];
        y[static_cast<std::size_t>(r)] = s;
    }
}

void graph_disk_fractions(const GraphDiskInput& in, std::span<double> out) {
    check_graph_input(in, out);
#pragma omp parallel for schedule(static)
    for (int j = 0; j < in.ntheta; ++j) graph_column(in, j, out);
}

} // namespace parallel

namespace {
int g_thread_limit = 0;
int g_default_threads = -1;
} // namespace

void set_thread_limit(int threads) {
    if (g_default_threads < 0) g_default_threads = omp_get_max_threads();
    g_thread_limit = std::max(0, threads);
    omp_set_num_threads(g_thread_limit > 0 ? g_thread_limit : g_default_threads);
}

void apply_thread_limit_from_env() {
    if (const char* env = std::getenv("SPL_THREADS")) set_thread_limit(std::atoi(env));
}

int thread_limit() { return g_thread_limit; }

} // namespace spl::kernels
