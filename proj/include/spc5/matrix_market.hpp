#ifndef SPC5_MATRIX_MARKET_HPP
#define SPC5_MATRIX_MARKET_HPP

#include <cstddef>
#include <filesystem>
#include <istream>
#include <stdexcept>
#include <string>

#include "spc5/types.hpp"

namespace spc5 {

/// Raised for malformed Matrix Market input; line() is 1-based (0 if unknown).
class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

enum class MmField { real, integer, pattern };
enum class MmSymmetry { general, symmetric, skew_symmetric };

struct MmHeader {
    MmField field = MmField::real;
    MmSymmetry symmetry = MmSymmetry::general;
    Index num_rows = 0;
    Index num_cols = 0;
    std::size_t stored_entries = 0;
};

/// Reads a `coordinate` Matrix Market stream. Symmetric storage is expanded
/// (mirrored, diagonal kept once), skew-symmetric is mirrored with negation,
/// pattern values become 1. The result is normalized and 0-based.
template <Real T>
CooMatrix<T> parse_matrix_market(std::istream& in, MmHeader* header = nullptr);

template <Real T>
CooMatrix<T> read_matrix_market(const std::filesystem::path& path, MmHeader* header = nullptr);

extern template CooMatrix<float> parse_matrix_market<float>(std::istream&, MmHeader*);
extern template CooMatrix<double> parse_matrix_market<double>(std::istream&, MmHeader*);
extern template CooMatrix<float> read_matrix_market<float>(const std::filesystem::path&, MmHeader*);
extern template CooMatrix<double> read_matrix_market<double>(const std::filesystem::path&, MmHeader*);

}  // namespace spc5

#endif
