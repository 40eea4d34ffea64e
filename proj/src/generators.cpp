#include "spc5/generators.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace spc5 {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

double unit_from_bits(std::uint64_t bits) {
    return double(bits >> 11) * 0x1.0p-53;
}

}  // namespace

std::string_view to_string(Precision p) {
    return p == Precision::f32 ? "f32" : "f64";
}

Precision parse_precision(std::string_view text) {
    if (text == "f32" || text == "float") return Precision::f32;
    if (text == "f64" || text == "double") return Precision::f64;
    throw std::invalid_argument("unknown precision '" + std::string(text) + "'");
}

double hashed_value(std::uint64_t seed, Index row, Index col) {
    const std::uint64_t key = (std::uint64_t(row) << 32) | col;
    return 2.0 * unit_from_bits(splitmix64(splitmix64(seed) ^ key)) - 1.0;
}

template <Real T>
CsrMatrix<T> make_dense(Index n, std::uint64_t seed) {
    if (n == 0) {
        throw std::invalid_argument("make_dense: n must be at least 1");
    }
    CsrMatrix<T> m;
    m.num_rows = n;
    m.num_cols = n;
    const std::size_t nnz = std::size_t(n) * n;
    m.row_ptr.resize(std::size_t(n) + 1);
    m.col_idx.resize(nnz);
    m.values.resize(nnz);
    for (Index i = 0; i < n; ++i) {
        m.row_ptr[i] = Index(std::size_t(i) * n);
        for (Index j = 0; j < n; ++j) {
            m.col_idx[std::size_t(i) * n + j] = j;
            m.values[std::size_t(i) * n + j] = T(hashed_value(seed, i, j));
        }
    }
    m.row_ptr[n] = Index(nnz);
    return m;
}

template <Real T>
CsrMatrix<T> make_identity(Index n) {
    CsrMatrix<T> m;
    m.num_rows = n;
    m.num_cols = n;
    m.row_ptr.resize(std::size_t(n) + 1);
    m.col_idx.resize(n);
    m.values.assign(n, T(1));
    for (Index i = 0; i <= n; ++i) m.row_ptr[i] = i;
    for (Index i = 0; i < n; ++i) m.col_idx[i] = i;
    return m;
}

template <Real T>
CsrMatrix<T> make_random(Index n_rows, Index n_cols, Index nnz_per_row, double clustering, std::uint64_t seed) {
    if (nnz_per_row > n_cols) {
        throw std::invalid_argument("make_random: nnz_per_row (" + std::to_string(nnz_per_row) +
                                    ") exceeds column count (" + std::to_string(n_cols) + ")");
    }
    if (!(clustering >= 0.0 && clustering <= 1.0)) {
        throw std::invalid_argument("make_random: clustering must lie in [0, 1]");
    }
    std::mt19937_64 rng(seed);
    const auto clustered = Index(std::lround(clustering * nnz_per_row));

    CsrMatrix<T> m;
    m.num_rows = n_rows;
    m.num_cols = n_cols;
    m.row_ptr.assign(std::size_t(n_rows) + 1, 0);
    m.col_idx.reserve(std::size_t(n_rows) * nnz_per_row);
    m.values.reserve(std::size_t(n_rows) * nnz_per_row);

    std::vector<Index> cols;
    std::vector<char> taken(n_cols, 0);
    for (Index row = 0; row < n_rows; ++row) {
        cols.clear();
        if (clustered > 0) {
            std::uniform_int_distribution<Index> start_dist(0, n_cols - clustered);
            const Index start = start_dist(rng);
            for (Index k = 0; k < clustered; ++k) cols.push_back(start + k);
        }
        for (Index c : cols) taken[c] = 1;
        // Rejection sampling while the row is sparse, exhaustive pick otherwise.
        const Index remaining = nnz_per_row - clustered;
        if (remaining > 0 && std::size_t(nnz_per_row) * 2 <= n_cols) {
            std::uniform_int_distribution<Index> col_dist(0, n_cols - 1);
            while (cols.size() < nnz_per_row) {
                const Index c = col_dist(rng);
                if (!taken[c]) {
                    taken[c] = 1;
                    cols.push_back(c);
                }
            }
        } else if (remaining > 0) {
            std::vector<Index> free_cols;
            for (Index c = 0; c < n_cols; ++c) {
                if (!taken[c]) free_cols.push_back(c);
            }
            std::shuffle(free_cols.begin(), free_cols.end(), rng);
            for (Index k = 0; k < remaining; ++k) {
                taken[free_cols[k]] = 1;
                cols.push_back(free_cols[k]);
            }
        }
        std::sort(cols.begin(), cols.end());
        for (Index c : cols) {
            taken[c] = 0;
            m.col_idx.push_back(c);
            m.values.push_back(T(2.0 * unit_from_bits(rng()) - 1.0));
        }
        m.row_ptr[row + 1] = Index(m.col_idx.size());
    }
    return m;
}

template CsrMatrix<float> make_dense<float>(Index, std::uint64_t);
template CsrMatrix<double> make_dense<double>(Index, std::uint64_t);
template CsrMatrix<float> make_identity<float>(Index);
template CsrMatrix<double> make_identity<double>(Index);
template CsrMatrix<float> make_random<float>(Index, Index, Index, double, std::uint64_t);
template CsrMatrix<double> make_random<double>(Index, Index, Index, double, std::uint64_t);

}  // namespace spc5
