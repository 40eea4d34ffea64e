#ifndef SPC5_BINARY_IO_HPP
#define SPC5_BINARY_IO_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>

#include "spc5/format.hpp"

namespace spc5 {

// Converted-matrix cache file, all fields little-endian:
//
//   magic "SPC5BLK\0" | u32 version | u32 r | u32 vs | u32 rows | u32 cols
//   | u64 nnz | u64 num_blocks | u8 value_bytes (4 or 8) | 7 bytes zero
//   | u32 block_rowptr[panels+1] | u32 block_colidx[num_blocks]
//   | mask[num_blocks*r] (1 byte if vs <= 8, else 2) | value[nnz] (IEEE-754)
inline constexpr std::uint32_t kBinaryFormatVersion = 1;

class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

template <Real T>
void write_spc5(std::ostream& out, const Spc5Matrix<T>& m);

/// Validates the decoded matrix; throws FormatError on any mismatch
/// (wrong magic, version, precision, truncation, broken invariants).
template <Real T>
Spc5Matrix<T> read_spc5(std::istream& in);

template <Real T>
void save_spc5(const std::filesystem::path& path, const Spc5Matrix<T>& m);

template <Real T>
Spc5Matrix<T> load_spc5(const std::filesystem::path& path);

extern template void write_spc5<float>(std::ostream&, const Spc5Matrix<float>&);
extern template void write_spc5<double>(std::ostream&, const Spc5Matrix<double>&);
extern template Spc5Matrix<float> read_spc5<float>(std::istream&);
extern template Spc5Matrix<double> read_spc5<double>(std::istream&);
extern template void save_spc5<float>(const std::filesystem::path&, const Spc5Matrix<float>&);
extern template void save_spc5<double>(const std::filesystem::path&, const Spc5Matrix<double>&);
extern template Spc5Matrix<float> load_spc5<float>(const std::filesystem::path&);
extern template Spc5Matrix<double> load_spc5<double>(const std::filesystem::path&);

}  // namespace spc5

#endif
