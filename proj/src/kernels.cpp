#include "spc5/kernels.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <stdexcept>
#include <string>

#include "spc5/vlane.hpp"

namespace spc5 {

std::string_view to_string(Strategy s) {
    switch (s) {
        case Strategy::scalar: return "scalar";
        case Strategy::expand: return "expand";
        case Strategy::compact: return "compact";
    }
    return "?";
}

std::string_view to_string(Reduction r) {
    return r == Reduction::per_vector_hsum ? "hsum" : "multi";
}

std::string_view to_string(XLoad x) {
    return x == XLoad::partial ? "partial" : "single";
}

Strategy parse_strategy(std::string_view text) {
    if (text == "scalar") return Strategy::scalar;
    if (text == "expand") return Strategy::expand;
    if (text == "compact") return Strategy::compact;
    throw std::invalid_argument("unknown strategy '" + std::string(text) + "'");
}

Reduction parse_reduction(std::string_view text) {
    if (text == "hsum") return Reduction::per_vector_hsum;
    if (text == "multi") return Reduction::multi_reduce;
    throw std::invalid_argument("unknown reduction '" + std::string(text) + "'");
}

XLoad parse_xload(std::string_view text) {
    if (text == "partial") return XLoad::partial;
    if (text == "single") return XLoad::single;
    throw std::invalid_argument("unknown x-load strategy '" + std::string(text) + "'");
}

std::string describe(const KernelConfig& cfg) {
    std::string out(to_string(cfg.strategy));
    if (cfg.strategy != Strategy::scalar) {
        out += "/";
        out += to_string(cfg.reduction);
        out += "/";
        out += to_string(cfg.x_load);
    }
    out += "/";
    out += to_string(cfg.precision);
    return out;
}

namespace {

template <Real T>
void check_dims(Index rows, Index cols, std::span<const T> x, std::span<T> y) {
    if (x.size() < cols) {
        throw std::invalid_argument("spmv: x has " + std::to_string(x.size()) + " entries, matrix has " +
                                    std::to_string(cols) + " columns");
    }
    if (y.size() < rows) {
        throw std::invalid_argument("spmv: y has " + std::to_string(y.size()) + " entries, matrix has " +
                                    std::to_string(rows) + " rows");
    }
}

template <Real T>
void check_config(const Spc5Matrix<T>& m, const KernelConfig& cfg) {
    if (cfg.precision != precision_of<T>()) {
        throw std::invalid_argument("spmv: configured precision " + std::string(to_string(cfg.precision)) +
                                    " does not match matrix values");
    }
    if (cfg.lanes != 0 && cfg.lanes != m.vs) {
        throw std::invalid_argument("spmv: lane width " + std::to_string(cfg.lanes) +
                                    " does not match block width " + std::to_string(m.vs));
    }
}

template <Real T>
std::size_t scalar_range(const Spc5Matrix<T>& m, std::span<const T> x, std::span<T> y, PanelRange range) {
    const unsigned r = m.r;
    std::size_t idx_val = range.value_offset;
    std::array<T, 8> sum{};
    for (Index panel = range.first_panel; panel < range.last_panel; ++panel) {
        sum.fill(T(0));
        for (Index b = m.block_rowptr[panel]; b < m.block_rowptr[panel + 1]; ++b) {
            const Index col = m.block_colidx[b];
            for (unsigned i = 0; i < r; ++i) {
                // Set bits in ascending order, the same order as the CSR row.
                for (unsigned bits = m.block_masks[std::size_t(b) * r + i]; bits != 0; bits &= bits - 1) {
                    sum[i] += x[col + unsigned(std::countr_zero(bits))] * m.values[idx_val];
                    idx_val += 1;
                }
            }
        }
        const Index first_row = panel * r;
        const unsigned valid = unsigned(std::min<Index>(r, m.num_rows - first_row));
        for (unsigned i = 0; i < valid; ++i) y[first_row + i] += sum[i];
    }
    return idx_val;
}

// The x window of a block: full vs lanes from the anchor, except at the right
// edge of x where lanes past the end read as zero.
template <class T, unsigned VS>
vlane::LaneVector<T, VS> load_x_window(std::span<const T> x, Index anchor) {
    if (std::size_t(anchor) + VS <= x.size()) return vlane::load<T, VS>(x, anchor);
    return vlane::masked_load<T, VS>(x, anchor, vlane::first_n_predicate<VS>(unsigned(x.size() - anchor)));
}

template <Real T, unsigned VS, Strategy S, Reduction R, XLoad X>
std::size_t vector_range(const Spc5Matrix<T>& m, std::span<const T> x, std::span<T> y, PanelRange range) {
    using Vec = vlane::LaneVector<T, VS>;
    constexpr auto filter = vlane::make_filter<VS>();
    const unsigned r = m.r;
    const std::span<const T> values(m.values);
    std::size_t idx_val = range.value_offset;
    std::array<Vec, 8> sum;

    for (Index panel = range.first_panel; panel < range.last_panel; ++panel) {
        sum.fill(Vec::zero());
        for (Index b = m.block_rowptr[panel]; b < m.block_rowptr[panel + 1]; ++b) {
            const Index col = m.block_colidx[b];
            const BlockMask* masks = m.block_masks.data() + std::size_t(b) * r;
            if constexpr (S == Strategy::expand) {
                // One unpredicated x load per block, reused by all rows.
                const Vec xvec = load_x_window<T, VS>(x, col);
                for (unsigned i = 0; i < r; ++i) {
                    const Vec block = vlane::expand<T, VS>(values, idx_val, masks[i]);
                    sum[i] = vlane::fma(sum[i], block, xvec);
                    idx_val += popcount(masks[i]);
                }
            } else {
                Vec xfull;
                if constexpr (X == XLoad::single) xfull = load_x_window<T, VS>(x, col);
                for (unsigned i = 0; i < r; ++i) {
                    const auto active = vlane::mask_to_predicate<VS>(masks[i], filter);
                    const unsigned increment = active.count();
                    Vec xvals;
                    if constexpr (X == XLoad::single) {
                        xvals = vlane::compact(xfull, active);
                    } else {
                        xvals = vlane::compact(vlane::masked_load<T, VS>(x, col, active), active);
                    }
                    const Vec block =
                        vlane::masked_load<T, VS>(values, idx_val, vlane::first_n_predicate<VS>(increment));
                    idx_val += increment;
                    sum[i] = vlane::fma(sum[i], block, xvals);
                }
            }
        }

        const Index first_row = panel * r;
        const unsigned valid = unsigned(std::min<Index>(r, m.num_rows - first_row));
        if constexpr (R == Reduction::per_vector_hsum) {
            for (unsigned i = 0; i < valid; ++i) y[first_row + i] += vlane::hsum(sum[i]);
        } else {
            // r may exceed VS (e.g. 8 rows of 4 lanes): reduce VS rows at a time.
            const unsigned chunk = std::min<unsigned>(r, VS);
            for (unsigned base = 0; base < valid; base += chunk) {
                const Vec totals = vlane::multi_reduce<T, VS>(std::span<const Vec>(sum.data() + base, chunk));
                const unsigned live = std::min(chunk, valid - base);
                const auto pred = vlane::first_n_predicate<VS>(live);
                const Vec updated =
                    vlane::add(vlane::masked_load<T, VS>(std::span<const T>(y), first_row + base, pred), totals);
                for (unsigned i = 0; i < live; ++i) y[first_row + base + i] = updated[i];
            }
        }
    }
    return idx_val;
}

template <Real T, unsigned VS, Strategy S>
std::size_t dispatch_reduction(const Spc5Matrix<T>& m, std::span<const T> x, std::span<T> y,
                               const KernelConfig& cfg, PanelRange range) {
    const bool multi = cfg.reduction == Reduction::multi_reduce;
    const bool single = cfg.x_load == XLoad::single;
    if constexpr (S == Strategy::expand) {
        return multi ? vector_range<T, VS, S, Reduction::multi_reduce, XLoad::single>(m, x, y, range)
                     : vector_range<T, VS, S, Reduction::per_vector_hsum, XLoad::single>(m, x, y, range);
    } else {
        if (multi) {
            return single ? vector_range<T, VS, S, Reduction::multi_reduce, XLoad::single>(m, x, y, range)
                          : vector_range<T, VS, S, Reduction::multi_reduce, XLoad::partial>(m, x, y, range);
        }
        return single ? vector_range<T, VS, S, Reduction::per_vector_hsum, XLoad::single>(m, x, y, range)
                      : vector_range<T, VS, S, Reduction::per_vector_hsum, XLoad::partial>(m, x, y, range);
    }
}

template <Real T, unsigned VS>
std::size_t dispatch_strategy(const Spc5Matrix<T>& m, std::span<const T> x, std::span<T> y,
                              const KernelConfig& cfg, PanelRange range) {
    if (cfg.strategy == Strategy::expand) return dispatch_reduction<T, VS, Strategy::expand>(m, x, y, cfg, range);
    return dispatch_reduction<T, VS, Strategy::compact>(m, x, y, cfg, range);
}

template <Real T>
std::size_t vector_dispatch(const Spc5Matrix<T>& m, std::span<const T> x, std::span<T> y, const KernelConfig& cfg,
                            PanelRange range) {
    switch (m.vs) {
        case 4: return dispatch_strategy<T, 4>(m, x, y, cfg, range);
        case 8: return dispatch_strategy<T, 8>(m, x, y, cfg, range);
        case 16: return dispatch_strategy<T, 16>(m, x, y, cfg, range);
        default: throw std::invalid_argument("spmv: unsupported block width " + std::to_string(m.vs));
    }
}

template <Real T>
void check_range(const Spc5Matrix<T>& m, PanelRange range) {
    if (range.first_panel > range.last_panel || range.last_panel > m.num_panels() ||
        range.value_offset > m.values.size()) {
        throw std::invalid_argument("spmv: panel range out of bounds");
    }
}

}  // namespace

template <Real T>
void spmv_csr(const CsrMatrix<T>& m, std::span<const T> x, std::span<T> y) {
    check_dims(m.num_rows, m.num_cols, x, y);
    for (Index row = 0; row < m.num_rows; ++row) {
        T sum = 0;
        for (Index k = m.row_ptr[row]; k < m.row_ptr[row + 1]; ++k) {
            sum += x[m.col_idx[k]] * m.values[k];
        }
        y[row] += sum;
    }
}

template <Real T>
void spmv_spc5_scalar(const Spc5Matrix<T>& m, std::span<const T> x, std::span<T> y) {
    check_dims(m.num_rows, m.num_cols, x, y);
    scalar_range(m, x, y, full_range(m));
}

template <Real T>
void spmv_spc5_vector(const Spc5Matrix<T>& m, std::span<const T> x, std::span<T> y, const KernelConfig& cfg) {
    if (cfg.strategy == Strategy::scalar) {
        throw std::invalid_argument("spmv_spc5_vector: strategy must be expand or compact");
    }
    check_dims(m.num_rows, m.num_cols, x, y);
    check_config(m, cfg);
    vector_dispatch(m, x, y, cfg, full_range(m));
}

template <Real T>
void spmv(const Spc5Matrix<T>& m, std::span<const T> x, std::span<T> y, const KernelConfig& cfg) {
    spmv_range(m, x, y, cfg, full_range(m));
}

template <Real T>
std::size_t spmv_range(const Spc5Matrix<T>& m, std::span<const T> x, std::span<T> y, const KernelConfig& cfg,
                       PanelRange range) {
    check_dims(m.num_rows, m.num_cols, x, y);
    check_config(m, cfg);
    check_range(m, range);
    if (cfg.strategy == Strategy::scalar) return scalar_range(m, x, y, range);
    return vector_dispatch(m, x, y, cfg, range);
}

#define SPC5_KERNELS_INSTANTIATE(T)                                                                   \
    template void spmv_csr<T>(const CsrMatrix<T>&, std::span<const T>, std::span<T>);                \
    template void spmv_spc5_scalar<T>(const Spc5Matrix<T>&, std::span<const T>, std::span<T>);       \
    template void spmv_spc5_vector<T>(const Spc5Matrix<T>&, std::span<const T>, std::span<T>,        \
                                      const KernelConfig&);                                          \
    template void spmv<T>(const Spc5Matrix<T>&, std::span<const T>, std::span<T>, const KernelConfig&); \
    template std::size_t spmv_range<T>(const Spc5Matrix<T>&, std::span<const T>, std::span<T>,       \
                                       const KernelConfig&, PanelRange);
SPC5_KERNELS_INSTANTIATE(float)
SPC5_KERNELS_INSTANTIATE(double)

}  // namespace spc5
