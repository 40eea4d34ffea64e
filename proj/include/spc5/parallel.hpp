#ifndef SPC5_PARALLEL_HPP
#define SPC5_PARALLEL_HPP

#include <span>
#include <vector>

#include "spc5/format.hpp"
#include "spc5/kernels.hpp"

namespace spc5 {

/// One contiguous panel range per worker. Ranges are ordered, disjoint and
/// cover every panel; trailing ranges may be empty.
struct Partition {
    std::vector<PanelRange> ranges;
};

/// Worker count from SPC5_NUM_THREADS, else hardware concurrency (min 1).
unsigned default_worker_count();

/// Greedy prefix split on value counts: the boundary before worker k is the
/// panel edge whose prefix nnz is closest to k * nnz / workers. Each share is
/// then within one panel's nnz of the ideal share.
template <Real T>
Partition partition_by_nnz(const Spc5Matrix<T>& m, unsigned workers);

/// Fork-join product: worker k runs the sequential kernel over ranges[k] and
/// writes only the rows of those panels. Bitwise equal to the sequential
/// kernel for any worker count.
template <Real T>
SpmvResult spmv_parallel(const Spc5Matrix<T>& m, std::span<const T> x, std::span<T> y, const KernelConfig& cfg,
                         const Partition& partition);

template <Real T>
SpmvResult spmv_parallel(const Spc5Matrix<T>& m, std::span<const T> x, std::span<T> y, const KernelConfig& cfg,
                         unsigned workers);

#define SPC5_PARALLEL_EXTERN(T)                                                                          \
    extern template Partition partition_by_nnz<T>(const Spc5Matrix<T>&, unsigned);                     \
    extern template SpmvResult spmv_parallel<T>(const Spc5Matrix<T>&, std::span<const T>, std::span<T>, \
                                                const KernelConfig&, const Partition&);                 \
    extern template SpmvResult spmv_parallel<T>(const Spc5Matrix<T>&, std::span<const T>, std::span<T>, \
                                                const KernelConfig&, unsigned);
SPC5_PARALLEL_EXTERN(float)
SPC5_PARALLEL_EXTERN(double)
#undef SPC5_PARALLEL_EXTERN

}  // namespace spc5

#endif
