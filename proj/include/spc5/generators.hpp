#ifndef SPC5_GENERATORS_HPP
#define SPC5_GENERATORS_HPP

#include <cstdint>

#include "spc5/types.hpp"

namespace spc5 {

constexpr std::uint64_t kDefaultDenseSeed = 0x5bc5'2048'd0e5ULL;

/// Stateless value in [-1, 1) derived from (seed, row, col).
double hashed_value(std::uint64_t seed, Index row, Index col);

/// n x n matrix with every entry stored; value(i, j) = hashed_value(seed, i, j).
template <Real T>
CsrMatrix<T> make_dense(Index n, std::uint64_t seed = kDefaultDenseSeed);

template <Real T>
CsrMatrix<T> make_identity(Index n);

/// Each row gets exactly nnz_per_row entries. A fraction `clustering` of them
/// forms one contiguous run at a random start column; the rest are spread
/// uniformly over the remaining columns. Deterministic for a given seed.
template <Real T>
CsrMatrix<T> make_random(Index n_rows, Index n_cols, Index nnz_per_row, double clustering, std::uint64_t seed);

extern template CsrMatrix<float> make_dense<float>(Index, std::uint64_t);
extern template CsrMatrix<double> make_dense<double>(Index, std::uint64_t);
extern template CsrMatrix<float> make_identity<float>(Index);
extern template CsrMatrix<double> make_identity<double>(Index);
extern template CsrMatrix<float> make_random<float>(Index, Index, Index, double, std::uint64_t);
extern template CsrMatrix<double> make_random<double>(Index, Index, Index, double, std::uint64_t);

}  // namespace spc5

#endif
