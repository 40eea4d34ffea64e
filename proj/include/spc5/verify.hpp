#ifndef SPC5_VERIFY_HPP
#define SPC5_VERIFY_HPP

#include <cstdint>
#include <limits>
#include <type_traits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spc5/format.hpp"
#include "spc5/kernels.hpp"

namespace spc5 {

/// Reference product computed with Neumaier-compensated summation in long
/// double, independent of the blocked layout. Also returns, per row, the
/// magnitude sum |a_ij * x_j| used to scale errors.
struct OracleProduct {
    std::vector<long double> y;
    std::vector<long double> magnitude;
};

template <Real T>
OracleProduct oracle_spmv(const CsrMatrix<T>& m, std::span<const T> x);

/// Per-row error bound: |y - y_ref| <= tolerance_factor * nnz_row * eps * max(sum |a x|, floor).
struct OracleTolerance {
    double factor = 8.0;
    double eps = 0;
    double floor = 0;
};

template <Real T>
constexpr OracleTolerance default_tolerance() {
    if constexpr (std::is_same_v<T, float>) {
        return {8.0, double(std::numeric_limits<float>::epsilon()), 1e-30};
    } else {
        return {8.0, std::numeric_limits<double>::epsilon(), 1e-300};
    }
}

struct VerifyReport {
    bool passed = true;
    std::size_t trials = 0;
    /// max over rows of |y - y_ref| / max(sum |a x|, floor) / max(nnz_row, 1), in units of eps.
    double max_scaled_error = 0;
    std::optional<Index> first_bad_row;
    std::optional<std::size_t> first_bad_trial;
    std::string diagnostic;
};

/// Runs `trials` products with random x in [-1, 1) against the oracle.
/// Failures are reported, never thrown. A structurally inconsistent matrix
/// (value count not matching the masks) fails without running the kernel.
template <Real T>
VerifyReport verify_against_oracle(const CsrMatrix<T>& reference, const Spc5Matrix<T>& blocked,
                                   const KernelConfig& cfg, std::size_t trials, std::uint64_t seed);

/// Converts with the given block shape, then verifies.
template <Real T>
VerifyReport verify_against_oracle(const CsrMatrix<T>& m, BlockShape shape, const KernelConfig& cfg,
                                   std::size_t trials, std::uint64_t seed);

/// Compares one computed product with the oracle (scaled error as above).
template <Real T>
VerifyReport compare_with_oracle(const CsrMatrix<T>& m, std::span<const T> x, std::span<const T> y,
                                 const OracleTolerance& tol = default_tolerance<T>());

#define SPC5_VERIFY_EXTERN(T)                                                                              \
    extern template OracleProduct oracle_spmv<T>(const CsrMatrix<T>&, std::span<const T>);                \
    extern template VerifyReport verify_against_oracle<T>(const CsrMatrix<T>&, const Spc5Matrix<T>&,       \
                                                          const KernelConfig&, std::size_t, std::uint64_t); \
    extern template VerifyReport verify_against_oracle<T>(const CsrMatrix<T>&, BlockShape,                 \
                                                          const KernelConfig&, std::size_t, std::uint64_t); \
    extern template VerifyReport compare_with_oracle<T>(const CsrMatrix<T>&, std::span<const T>,           \
                                                        std::span<const T>, const OracleTolerance&);
SPC5_VERIFY_EXTERN(float)
SPC5_VERIFY_EXTERN(double)
#undef SPC5_VERIFY_EXTERN

}  // namespace spc5

#endif
