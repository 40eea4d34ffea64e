#include "spc5/verify.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace spc5 {

template <Real T>
OracleProduct oracle_spmv(const CsrMatrix<T>& m, std::span<const T> x) {
    OracleProduct out;
    out.y.assign(m.num_rows, 0.0L);
    out.magnitude.assign(m.num_rows, 0.0L);
    for (Index row = 0; row < m.num_rows; ++row) {
        long double sum = 0, compensation = 0, magnitude = 0;
        for (Index k = m.row_ptr[row]; k < m.row_ptr[row + 1]; ++k) {
            const long double term = static_cast<long double>(m.values[k]) * x[m.col_idx[k]];
            const long double t = sum + term;
            if (std::fabs(sum) >= std::fabs(term)) {
                compensation += (sum - t) + term;
            } else {
                compensation += (term - t) + sum;
            }
            sum = t;
            magnitude += std::fabs(term);
        }
        out.y[row] = sum + compensation;
        out.magnitude[row] = magnitude;
    }
    return out;
}

template <Real T>
VerifyReport compare_with_oracle(const CsrMatrix<T>& m, std::span<const T> x, std::span<const T> y,
                                 const OracleTolerance& tol) {
    VerifyReport report;
    report.trials = 1;
    const OracleProduct ref = oracle_spmv(m, x);
    for (Index row = 0; row < m.num_rows; ++row) {
        const double err = double(std::fabs(static_cast<long double>(y[row]) - ref.y[row]));
        const double scale = std::max(double(ref.magnitude[row]), tol.floor);
        const double nnz_row = std::max<double>(m.row_nnz(row), 1.0);
        // NaN-safe: a NaN error must fail.
        const double scaled = err / scale / nnz_row / tol.eps;
        if (!(scaled <= tol.factor)) {
            if (report.passed) {
                report.passed = false;
                report.first_bad_row = row;
                std::ostringstream msg;
                msg.precision(17);
                msg << "row " << row << ": got " << y[row] << ", expected " << double(ref.y[row])
                    << " (scaled error " << scaled << " eps > " << tol.factor << ")";
                report.diagnostic = msg.str();
            }
        }
        if (std::isnan(scaled)) {
            report.max_scaled_error = scaled;
        } else if (!std::isnan(report.max_scaled_error)) {
            report.max_scaled_error = std::max(report.max_scaled_error, scaled);
        }
    }
    return report;
}

template <Real T>
VerifyReport verify_against_oracle(const CsrMatrix<T>& reference, const Spc5Matrix<T>& blocked,
                                   const KernelConfig& cfg, std::size_t trials, std::uint64_t seed) {
    VerifyReport report;
    std::size_t mask_total = 0;
    for (BlockMask mask : blocked.block_masks) mask_total += popcount(mask);
    if (mask_total != blocked.values.size() || blocked.num_rows != reference.num_rows ||
        blocked.num_cols != reference.num_cols) {
        report.passed = false;
        report.diagnostic = "blocked matrix is structurally inconsistent with the reference (" +
                            std::to_string(mask_total) + " mask bits, " + std::to_string(blocked.values.size()) +
                            " values)";
        return report;
    }

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<T> x(reference.num_cols);
    std::vector<T> y(reference.num_rows);
    for (std::size_t trial = 0; trial < trials; ++trial) {
        for (auto& v : x) v = T(dist(rng));
        std::fill(y.begin(), y.end(), T(0));
        try {
            spmv<T>(blocked, x, y, cfg);
        } catch (const std::exception& e) {
            report.passed = false;
            report.first_bad_trial = trial;
            report.diagnostic = std::string("kernel threw: ") + e.what();
            report.trials = trial + 1;
            return report;
        }
        VerifyReport one = compare_with_oracle<T>(reference, x, y);
        report.trials = trial + 1;
        report.max_scaled_error = std::max(report.max_scaled_error, one.max_scaled_error);
        if (!one.passed && report.passed) {
            report.passed = false;
            report.first_bad_row = one.first_bad_row;
            report.first_bad_trial = trial;
            report.diagnostic = "trial " + std::to_string(trial) + ", " + one.diagnostic;
        }
    }
    return report;
}

template <Real T>
VerifyReport verify_against_oracle(const CsrMatrix<T>& m, BlockShape shape, const KernelConfig& cfg,
                                   std::size_t trials, std::uint64_t seed) {
    return verify_against_oracle(m, csr_to_spc5(m, shape.r, shape.vs), cfg, trials, seed);
}

#define SPC5_VERIFY_INSTANTIATE(T)                                                                  \
    template OracleProduct oracle_spmv<T>(const CsrMatrix<T>&, std::span<const T>);                \
    template VerifyReport verify_against_oracle<T>(const CsrMatrix<T>&, const Spc5Matrix<T>&,       \
                                                   const KernelConfig&, std::size_t, std::uint64_t); \
    template VerifyReport verify_against_oracle<T>(const CsrMatrix<T>&, BlockShape,                 \
                                                   const KernelConfig&, std::size_t, std::uint64_t); \
    template VerifyReport compare_with_oracle<T>(const CsrMatrix<T>&, std::span<const T>,           \
                                                 std::span<const T>, const OracleTolerance&);
SPC5_VERIFY_INSTANTIATE(float)
SPC5_VERIFY_INSTANTIATE(double)

}  // namespace spc5
