#ifndef SPC5_TYPES_HPP
#define SPC5_TYPES_HPP

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

namespace spc5 {

/// Row/column index type. 32 bits covers every matrix of the benchmark set
/// (the largest dimension there is below 3 million).
using Index = std::uint32_t;

enum class Precision { f32, f64 };

template <class T>
concept Real = std::is_same_v<T, float> || std::is_same_v<T, double>;

template <Real T>
constexpr Precision precision_of() {
    return std::is_same_v<T, float> ? Precision::f32 : Precision::f64;
}

std::string_view to_string(Precision p);
Precision parse_precision(std::string_view text);

/// Default block width for a precision: one 512-bit register.
constexpr unsigned default_lane_count(Precision p) {
    return p == Precision::f32 ? 16u : 8u;
}

template <Real T>
struct CooEntry {
    Index row;
    Index col;
    T value;

    friend bool operator==(const CooEntry&, const CooEntry&) = default;
};

template <Real T>
struct CooMatrix {
    Index num_rows = 0;
    Index num_cols = 0;
    std::vector<CooEntry<T>> entries;

    /// Sort by (row, col) and sum duplicate coordinates. Explicit zeros stay.
    void normalize() {
        std::stable_sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
            return a.row < b.row || (a.row == b.row && a.col < b.col);
        });
        std::size_t out = 0;
        for (std::size_t i = 0; i < entries.size(); ++i) {
            if (out > 0 && entries[out - 1].row == entries[i].row && entries[out - 1].col == entries[i].col) {
                entries[out - 1].value += entries[i].value;
            } else {
                entries[out++] = entries[i];
            }
        }
        entries.resize(out);
    }

    friend bool operator==(const CooMatrix&, const CooMatrix&) = default;
};

template <Real T>
struct CsrMatrix {
    Index num_rows = 0;
    Index num_cols = 0;
    std::vector<Index> row_ptr{0};
    std::vector<Index> col_idx;
    std::vector<T> values;

    std::size_t nnz() const { return values.size(); }

    Index row_nnz(Index row) const { return row_ptr[row + 1] - row_ptr[row]; }

    /// Throws std::invalid_argument when a structural invariant is broken.
    void validate() const {
        if (row_ptr.size() != std::size_t(num_rows) + 1) {
            throw std::invalid_argument("csr: row_ptr length must be num_rows+1");
        }
        if (row_ptr.front() != 0 || row_ptr.back() != values.size() || col_idx.size() != values.size()) {
            throw std::invalid_argument("csr: row_ptr bounds do not match nnz");
        }
        for (Index row = 0; row < num_rows; ++row) {
            if (row_ptr[row] > row_ptr[row + 1]) {
                throw std::invalid_argument("csr: row_ptr is decreasing at row " + std::to_string(row));
            }
            for (Index k = row_ptr[row]; k < row_ptr[row + 1]; ++k) {
                if (col_idx[k] >= num_cols) {
                    throw std::invalid_argument("csr: column out of range in row " + std::to_string(row));
                }
                if (k > row_ptr[row] && col_idx[k] <= col_idx[k - 1]) {
                    throw std::invalid_argument("csr: columns not strictly increasing in row " + std::to_string(row));
                }
            }
        }
    }

    friend bool operator==(const CsrMatrix&, const CsrMatrix&) = default;
};

/// Expects a normalized matrix (sorted, no duplicates).
template <Real T>
CsrMatrix<T> coo_to_csr(const CooMatrix<T>& coo) {
    CsrMatrix<T> csr;
    csr.num_rows = coo.num_rows;
    csr.num_cols = coo.num_cols;
    csr.row_ptr.assign(std::size_t(coo.num_rows) + 1, 0);
    csr.col_idx.reserve(coo.entries.size());
    csr.values.reserve(coo.entries.size());
    for (const auto& e : coo.entries) {
        csr.row_ptr[e.row + 1] += 1;
        csr.col_idx.push_back(e.col);
        csr.values.push_back(e.value);
    }
    for (Index row = 0; row < coo.num_rows; ++row) {
        csr.row_ptr[row + 1] += csr.row_ptr[row];
    }
    return csr;
}

template <Real T>
CooMatrix<T> csr_to_coo(const CsrMatrix<T>& csr) {
    CooMatrix<T> coo;
    coo.num_rows = csr.num_rows;
    coo.num_cols = csr.num_cols;
    coo.entries.reserve(csr.nnz());
    for (Index row = 0; row < csr.num_rows; ++row) {
        for (Index k = csr.row_ptr[row]; k < csr.row_ptr[row + 1]; ++k) {
            coo.entries.push_back({row, csr.col_idx[k], csr.values[k]});
        }
    }
    return coo;
}

/// Same sparsity pattern with values converted to another precision.
template <Real To, Real From>
CsrMatrix<To> convert_values(const CsrMatrix<From>& in) {
    CsrMatrix<To> out;
    out.num_rows = in.num_rows;
    out.num_cols = in.num_cols;
    out.row_ptr = in.row_ptr;
    out.col_idx = in.col_idx;
    out.values.assign(in.values.begin(), in.values.end());
    return out;
}

}  // namespace spc5

#endif
