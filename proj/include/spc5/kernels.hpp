#ifndef SPC5_KERNELS_HPP
#define SPC5_KERNELS_HPP

#include <cstdint>
#include <span>
#include <string_view>

#include "spc5/format.hpp"
#include "spc5/types.hpp"

namespace spc5 {

enum class Strategy { scalar, expand, compact };
enum class Reduction { per_vector_hsum, multi_reduce };
enum class XLoad { partial, single };

std::string_view to_string(Strategy s);
std::string_view to_string(Reduction r);
std::string_view to_string(XLoad x);
Strategy parse_strategy(std::string_view text);
Reduction parse_reduction(std::string_view text);
XLoad parse_xload(std::string_view text);

/// Kernel variant selection.
///
/// `expand` always loads x once per block without a predicate, so `x_load`
/// only changes the `compact` strategy. `scalar` ignores reduction and
/// x_load. `lanes` (0 = take the matrix's vs) must match the matrix.
struct KernelConfig {
    Strategy strategy = Strategy::compact;
    Reduction reduction = Reduction::per_vector_hsum;
    XLoad x_load = XLoad::partial;
    Precision precision = Precision::f64;
    unsigned lanes = 0;

    friend bool operator==(const KernelConfig&, const KernelConfig&) = default;
};

std::string describe(const KernelConfig& cfg);

/// Run time and operation count of one product. flops = 2 * nnz.
struct SpmvResult {
    std::uint64_t flops = 0;
    double elapsed_seconds = 0;
};

/// Contiguous run of panels plus the offset of its first value.
struct PanelRange {
    Index first_panel = 0;
    Index last_panel = 0;  // exclusive
    std::size_t value_offset = 0;

    bool empty() const { return first_panel == last_panel; }
    friend bool operator==(const PanelRange&, const PanelRange&) = default;
};

template <Real T>
PanelRange full_range(const Spc5Matrix<T>& m) {
    return {0, m.num_panels(), 0};
}

// All kernels accumulate: y[i] += (A x)[i]. They require x.size() >= num_cols
// and y.size() >= num_rows and throw std::invalid_argument otherwise.

/// Reference CSR product; each row summed left to right, then added to y.
template <Real T>
void spmv_csr(const CsrMatrix<T>& m, std::span<const T> x, std::span<T> y);

/// Blocked product, scalar loop over mask bits. Each row is accumulated in
/// ascending column order, so the result is bitwise equal to spmv_csr.
template <Real T>
void spmv_spc5_scalar(const Spc5Matrix<T>& m, std::span<const T> x, std::span<T> y);

/// Blocked product on vector lanes; cfg.strategy must not be scalar.
template <Real T>
void spmv_spc5_vector(const Spc5Matrix<T>& m, std::span<const T> x, std::span<T> y, const KernelConfig& cfg);

/// Dispatches on cfg.strategy.
template <Real T>
void spmv(const Spc5Matrix<T>& m, std::span<const T> x, std::span<T> y, const KernelConfig& cfg);

/// Restricted to the panels of `range`; only rows of those panels are written.
/// Returns the value cursor after the last block, which equals the offset
/// of the next range (nnz for the last one).
template <Real T>
std::size_t spmv_range(const Spc5Matrix<T>& m, std::span<const T> x, std::span<T> y, const KernelConfig& cfg,
                       PanelRange range);

#define SPC5_KERNELS_EXTERN(T)                                                                          \
    extern template void spmv_csr<T>(const CsrMatrix<T>&, std::span<const T>, std::span<T>);           \
    extern template void spmv_spc5_scalar<T>(const Spc5Matrix<T>&, std::span<const T>, std::span<T>);  \
    extern template void spmv_spc5_vector<T>(const Spc5Matrix<T>&, std::span<const T>, std::span<T>,   \
                                             const KernelConfig&);                                     \
    extern template void spmv<T>(const Spc5Matrix<T>&, std::span<const T>, std::span<T>, const KernelConfig&); \
    extern template std::size_t spmv_range<T>(const Spc5Matrix<T>&, std::span<const T>, std::span<T>,  \
                                              const KernelConfig&, PanelRange);
SPC5_KERNELS_EXTERN(float)
SPC5_KERNELS_EXTERN(double)
#undef SPC5_KERNELS_EXTERN

}  // namespace spc5

#endif
