#ifndef SPC5_FORMAT_HPP
#define SPC5_FORMAT_HPP

#include <bit>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "spc5/types.hpp"

namespace spc5 {

/// One row of a block: bit k set <=> a value at column (block anchor + k).
/// Bit 0 is the anchor column. Only the low `vs` bits may be set.
using BlockMask = std::uint16_t;

/// Bytes used to store one mask on disk and in footprint accounting:
/// the smallest of 8 or 16 bits that holds `vs` bits.
constexpr std::size_t mask_storage_bytes(unsigned vs) { return vs <= 8 ? 1 : 2; }

constexpr bool valid_rows_per_block(unsigned r) { return r == 1 || r == 2 || r == 4 || r == 8; }
constexpr bool valid_lane_count(unsigned vs) { return vs == 4 || vs == 8 || vs == 16; }

/// Block shape: r rows, vs columns.
struct BlockShape {
    unsigned r = 1;
    unsigned vs = 8;

    friend bool operator==(const BlockShape&, const BlockShape&) = default;
};

/// Sparse matrix in the blocked beta(r, vs) layout.
///
/// Rows are grouped into panels of `r` rows. Each panel holds a sequence of
/// blocks; a block is anchored at a single column and covers `vs` columns of
/// each of its `r` rows. Per block there are `r` masks (row-major), and the
/// values of a block are stored row by row in ascending column order, with no
/// padding zeros.
template <Real T>
struct Spc5Matrix {
    Index num_rows = 0;
    Index num_cols = 0;
    unsigned r = 1;
    unsigned vs = 8;
    std::vector<Index> block_rowptr{0};  // one entry per panel, plus one
    std::vector<Index> block_colidx;     // anchor column per block
    std::vector<BlockMask> block_masks;  // num_blocks * r
    std::vector<T> values;

    std::size_t nnz() const { return values.size(); }
    std::size_t num_blocks() const { return block_colidx.size(); }
    Index num_panels() const { return Index(block_rowptr.size() - 1); }
    BlockShape shape() const { return {r, vs}; }

    /// Throws std::invalid_argument naming the first violated invariant.
    void validate() const;

    friend bool operator==(const Spc5Matrix&, const Spc5Matrix&) = default;
};

constexpr Index panel_count(Index num_rows, unsigned r) { return (num_rows + r - 1) / r; }

inline unsigned popcount(BlockMask m) { return unsigned(std::popcount(m)); }

/// Blocks are formed per panel by repeatedly anchoring at the smallest column
/// not yet consumed in any of the panel's rows, then consuming, row by row,
/// every entry in [anchor, anchor + vs).
template <Real T>
Spc5Matrix<T> csr_to_spc5(const CsrMatrix<T>& m, unsigned r, unsigned vs);

template <Real T>
CsrMatrix<T> spc5_to_csr(const Spc5Matrix<T>& m);

/// Number of blocks csr_to_spc5 would produce, without building the matrix.
template <Real T>
std::size_t count_blocks(const CsrMatrix<T>& m, unsigned r, unsigned vs);

struct FillingStats {
    std::size_t nnz = 0;
    std::size_t num_blocks = 0;
    double avg_nnz_per_block = 0;
    double filling = 0;  // nnz / (num_blocks * r * vs)
    std::size_t footprint_bytes = 0;
};

template <Real T>
FillingStats filling_stats(const Spc5Matrix<T>& m);

/// Footprint of the blocked layout: values + anchors + masks + panel pointers.
std::size_t spc5_footprint_bytes(std::size_t nnz, std::size_t num_blocks, Index num_rows, unsigned r, unsigned vs,
                                 std::size_t value_bytes);

/// Footprint of CSR: values + column indices + row pointers.
std::size_t csr_footprint_bytes(std::size_t nnz, Index num_rows, std::size_t value_bytes);

struct FootprintComparison {
    std::size_t csr_bytes = 0;
    std::size_t spc5_bytes = 0;
    std::size_t csr_colidx_bytes = 0;
    std::size_t spc5_colidx_bytes = 0;
    std::size_t spc5_mask_bytes = 0;
};

template <Real T>
FootprintComparison footprint_comparison(const CsrMatrix<T>& m, unsigned r, unsigned vs);

#define SPC5_FORMAT_EXTERN(T)                                                         \
    extern template void Spc5Matrix<T>::validate() const;                             \
    extern template Spc5Matrix<T> csr_to_spc5<T>(const CsrMatrix<T>&, unsigned, unsigned); \
    extern template CsrMatrix<T> spc5_to_csr<T>(const Spc5Matrix<T>&);               \
    extern template std::size_t count_blocks<T>(const CsrMatrix<T>&, unsigned, unsigned); \
    extern template FillingStats filling_stats<T>(const Spc5Matrix<T>&);             \
    extern template FootprintComparison footprint_comparison<T>(const CsrMatrix<T>&, unsigned, unsigned);
SPC5_FORMAT_EXTERN(float)
SPC5_FORMAT_EXTERN(double)
#undef SPC5_FORMAT_EXTERN

}  // namespace spc5

#endif
