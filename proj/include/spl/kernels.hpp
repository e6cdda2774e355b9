#pragma once

// Data-parallel inner loops. Every kernel exists twice: `serial` is the
// plain reference loop kept for testing and benchmarking, `parallel` is the
// OpenMP version the library calls. Parallel reductions sum fixed-size
// blocks and then add the block partials in order, so their result does not
// depend on the thread count.

#include <cstddef>
#include <span>

namespace spl::kernels {

inline constexpr std::size_t reduction_block = 2048;

// Compressed rows of a square matrix (Eigen's compressed column storage of
// a symmetric matrix can be passed as-is).
struct CsrView {
    std::span<const int> outer;
    std::span<const int> inner;
    std::span<const double> values;
};

// Disk whose boundary is the polar graph r = rho(theta). `rho` holds
// `subslices` samples per angular column (column-major by angle); the output
// is the area fraction of every polar cell (i, j) inside the disk.
struct GraphDiskInput {
    int nr;
    int ntheta;
    int subslices;
    double dr;
    std::span<const double> rho;
};

namespace serial {
double weighted_sum(std::span<const double> w, std::span<const double> f);
double weighted_dot(std::span<const double> w, std::span<const double> a, std::span<const double> b);
void spmv(const CsrView& a, std::span<const double> x, std::span<double> y);
void graph_disk_fractions(const GraphDiskInput& in, std::span<double> out);
} // namespace serial

namespace parallel {
double weighted_sum(std::span<const double> w, std::span<const double> f);
double weighted_dot(std::span<const double> w, std::span<const double> a, std::span<const double> b);
void spmv(const CsrView& a, std::span<const double> x, std::span<double> y);
void graph_disk_fractions(const GraphDiskInput& in, std::span<double> out);
} // namespace parallel

// Caps OpenMP parallelism for the whole process; 0 restores the runtime
// default. apply_thread_limit_from_env reads SPL_THREADS.
void set_thread_limit(int threads);
void apply_thread_limit_from_env();
int thread_limit();

} // namespace spl::kernels
