#include "spc5/format.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>

namespace spc5 {

namespace {

void check_shape(unsigned r, unsigned vs) {
    if (!valid_rows_per_block(r)) {
        throw std::invalid_argument("rows per block must be 1, 2, 4 or 8 (got " + std::to_string(r) + ")");
    }
    if (!valid_lane_count(vs)) {
        throw std::invalid_argument("block width must be 4, 8 or 16 (got " + std::to_string(vs) + ")");
    }
}

// Walks the panels of `m` and calls on_block(panel, anchor, masks, cursors_before)
// for every block, in storage order. `masks` has r entries.
template <Real T, class OnBlock, class OnPanelEnd>
void form_blocks(const CsrMatrix<T>& m, unsigned r, unsigned vs, OnBlock&& on_block, OnPanelEnd&& on_panel_end) {
    std::array<Index, 8> cursor{};
    std::array<Index, 8> row_end{};
    std::array<BlockMask, 8> masks{};
    const Index panels = panel_count(m.num_rows, r);
    for (Index panel = 0; panel < panels; ++panel) {
        const Index first_row = panel * r;
        for (unsigned i = 0; i < r; ++i) {
            const Index row = first_row + i;
            // Rows past the end behave as empty rows.
            cursor[i] = row < m.num_rows ? m.row_ptr[row] : 0;
            row_end[i] = row < m.num_rows ? m.row_ptr[row + 1] : 0;
        }
        while (true) {
            Index anchor = std::numeric_limits<Index>::max();
            bool any = false;
            for (unsigned i = 0; i < r; ++i) {
                if (cursor[i] < row_end[i]) {
                    any = true;
                    anchor = std::min(anchor, m.col_idx[cursor[i]]);
                }
            }
            if (!any) break;
            const std::array<Index, 8> start = cursor;
            // 64-bit so anchors close to the index limit do not wrap.
            const std::uint64_t limit = std::uint64_t(anchor) + vs;
            for (unsigned i = 0; i < r; ++i) {
                BlockMask mask = 0;
                while (cursor[i] < row_end[i] && m.col_idx[cursor[i]] < limit) {
                    mask = BlockMask(mask | (1u << (m.col_idx[cursor[i]] - anchor)));
                    ++cursor[i];
                }
                masks[i] = mask;
            }
            on_block(panel, anchor, std::span<const BlockMask>(masks.data(), r), start);
        }
        on_panel_end(panel);
    }
}

}  // namespace

template <Real T>
void Spc5Matrix<T>::validate() const {
    check_shape(r, vs);
    const Index panels = panel_count(num_rows, r);
    if (block_rowptr.size() != std::size_t(panels) + 1) {
        throw std::invalid_argument("spc5: block_rowptr length must be panels+1");
    }
    if (block_rowptr.front() != 0 || block_rowptr.back() != block_colidx.size()) {
        throw std::invalid_argument("spc5: block_rowptr bounds do not match block count");
    }
    if (block_masks.size() != block_colidx.size() * r) {
        throw std::invalid_argument("spc5: expected r masks per block");
    }
    const std::uint32_t lane_bits = (1u << vs) - 1u;
    std::size_t mask_total = 0;
    for (Index panel = 0; panel < panels; ++panel) {
        if (block_rowptr[panel] > block_rowptr[panel + 1]) {
            throw std::invalid_argument("spc5: block_rowptr decreasing at panel " + std::to_string(panel));
        }
        for (Index b = block_rowptr[panel]; b < block_rowptr[panel + 1]; ++b) {
            if (b > block_rowptr[panel] && block_colidx[b] <= block_colidx[b - 1]) {
                throw std::invalid_argument("spc5: anchors not increasing in panel " + std::to_string(panel));
            }
            BlockMask any = 0;
            for (unsigned i = 0; i < r; ++i) {
                const BlockMask mask = block_masks[std::size_t(b) * r + i];
                if (mask & ~lane_bits) {
                    throw std::invalid_argument("spc5: mask of block " + std::to_string(b) + " exceeds vs bits");
                }
                if (mask != 0) {
                    const Index row = panel * r + i;
                    if (row >= num_rows) {
                        throw std::invalid_argument("spc5: padding row of block " + std::to_string(b) + " has entries");
                    }
                    const unsigned top = unsigned(std::bit_width(unsigned(mask))) - 1;
                    if (std::uint64_t(block_colidx[b]) + top >= num_cols) {
                        throw std::invalid_argument("spc5: block " + std::to_string(b) + " addresses a column past the edge");
                    }
                }
                any = BlockMask(any | mask);
                mask_total += popcount(mask);
            }
            if ((any & 1u) == 0) {
                throw std::invalid_argument("spc5: block " + std::to_string(b) + " has no entry at its anchor column");
            }
        }
    }
    if (mask_total != values.size()) {
        throw std::invalid_argument("spc5: mask popcount total " + std::to_string(mask_total) +
                                    " differs from value count " + std::to_string(values.size()));
    }
}

template <Real T>
Spc5Matrix<T> csr_to_spc5(const CsrMatrix<T>& m, unsigned r, unsigned vs) {
    check_shape(r, vs);
    Spc5Matrix<T> out;
    out.num_rows = m.num_rows;
    out.num_cols = m.num_cols;
    out.r = r;
    out.vs = vs;
    const Index panels = panel_count(m.num_rows, r);
    out.block_rowptr.assign(std::size_t(panels) + 1, 0);
    out.values.reserve(m.nnz());
    out.block_colidx.reserve(m.nnz() / vs + panels);

    form_blocks(
        m, r, vs,
        [&](Index, Index anchor, std::span<const BlockMask> masks, const std::array<Index, 8>& start) {
            out.block_colidx.push_back(anchor);
            for (unsigned i = 0; i < r; ++i) {
                out.block_masks.push_back(masks[i]);
                const unsigned count = popcount(masks[i]);
                for (unsigned k = 0; k < count; ++k) {
                    out.values.push_back(m.values[start[i] + k]);
                }
            }
        },
        [&](Index panel) { out.block_rowptr[panel + 1] = Index(out.block_colidx.size()); });
    return out;
}

template <Real T>
std::size_t count_blocks(const CsrMatrix<T>& m, unsigned r, unsigned vs) {
    check_shape(r, vs);
    std::size_t blocks = 0;
    form_blocks(
        m, r, vs, [&](Index, Index, std::span<const BlockMask>, const std::array<Index, 8>&) { ++blocks; },
        [](Index) {});
    return blocks;
}

template <Real T>
CsrMatrix<T> spc5_to_csr(const Spc5Matrix<T>& m) {
    CsrMatrix<T> out;
    out.num_rows = m.num_rows;
    out.num_cols = m.num_cols;
    out.row_ptr.assign(std::size_t(m.num_rows) + 1, 0);

    const Index panels = m.num_panels();
    for (Index panel = 0; panel < panels; ++panel) {
        for (Index b = m.block_rowptr[panel]; b < m.block_rowptr[panel + 1]; ++b) {
            for (unsigned i = 0; i < m.r; ++i) {
                const Index row = panel * m.r + i;
                if (row < m.num_rows) out.row_ptr[row + 1] += popcount(m.block_masks[std::size_t(b) * m.r + i]);
            }
        }
    }
    for (Index row = 0; row < m.num_rows; ++row) out.row_ptr[row + 1] += out.row_ptr[row];

    out.col_idx.resize(out.row_ptr.back());
    out.values.resize(out.row_ptr.back());
    std::vector<Index> fill(out.row_ptr.begin(), out.row_ptr.end() - 1);
    std::size_t idx_val = 0;
    for (Index panel = 0; panel < panels; ++panel) {
        for (Index b = m.block_rowptr[panel]; b < m.block_rowptr[panel + 1]; ++b) {
            const Index anchor = m.block_colidx[b];
            for (unsigned i = 0; i < m.r; ++i) {
                const Index row = panel * m.r + i;
                const BlockMask mask = m.block_masks[std::size_t(b) * m.r + i];
                for (unsigned k = 0; k < m.vs; ++k) {
                    if (mask & (1u << k)) {
                        out.col_idx[fill[row]] = anchor + k;
                        out.values[fill[row]] = m.values[idx_val++];
                        ++fill[row];
                    }
                }
            }
        }
    }
    return out;
}

std::size_t spc5_footprint_bytes(std::size_t nnz, std::size_t num_blocks, Index num_rows, unsigned r, unsigned vs,
                                 std::size_t value_bytes) {
    return nnz * value_bytes + num_blocks * sizeof(Index) + num_blocks * r * mask_storage_bytes(vs) +
           (std::size_t(panel_count(num_rows, r)) + 1) * sizeof(Index);
}

std::size_t csr_footprint_bytes(std::size_t nnz, Index num_rows, std::size_t value_bytes) {
    return nnz * value_bytes + nnz * sizeof(Index) + (std::size_t(num_rows) + 1) * sizeof(Index);
}

template <Real T>
FillingStats filling_stats(const Spc5Matrix<T>& m) {
    FillingStats s;
    s.nnz = m.nnz();
    s.num_blocks = m.num_blocks();
    if (s.num_blocks > 0) {
        s.avg_nnz_per_block = double(s.nnz) / double(s.num_blocks);
        s.filling = double(s.nnz) / (double(s.num_blocks) * m.r * m.vs);
    }
    s.footprint_bytes = spc5_footprint_bytes(s.nnz, s.num_blocks, m.num_rows, m.r, m.vs, sizeof(T));
    return s;
}

template <Real T>
FootprintComparison footprint_comparison(const CsrMatrix<T>& m, unsigned r, unsigned vs) {
    const std::size_t blocks = count_blocks(m, r, vs);
    FootprintComparison f;
    f.csr_bytes = csr_footprint_bytes(m.nnz(), m.num_rows, sizeof(T));
    f.spc5_bytes = spc5_footprint_bytes(m.nnz(), blocks, m.num_rows, r, vs, sizeof(T));
    f.csr_colidx_bytes = m.nnz() * sizeof(Index);
    f.spc5_colidx_bytes = blocks * sizeof(Index);
    f.spc5_mask_bytes = blocks * r * mask_storage_bytes(vs);
    return f;
}

#define SPC5_FORMAT_INSTANTIATE(T)                                                     \
    template void Spc5Matrix<T>::validate() const;                                     \
    template Spc5Matrix<T> csr_to_spc5<T>(const CsrMatrix<T>&, unsigned, unsigned);    \
    template CsrMatrix<T> spc5_to_csr<T>(const Spc5Matrix<T>&);                        \
    template std::size_t count_blocks<T>(const CsrMatrix<T>&, unsigned, unsigned);     \
    template FillingStats filling_stats<T>(const Spc5Matrix<T>&);                      \
    template FootprintComparison footprint_comparison<T>(const CsrMatrix<T>&, unsigned, unsigned);
SPC5_FORMAT_INSTANTIATE(float)
SPC5_FORMAT_INSTANTIATE(double)

}  // namespace spc5
