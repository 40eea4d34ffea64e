#include "spc5/matrix_market.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <string_view>
#include <vector>

namespace spc5 {

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return char(std::tolower(c)); });
    return out;
}

std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> tokens;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        std::size_t start = i;
        while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        if (i > start) tokens.push_back(line.substr(start, i - start));
    }
    return tokens;
}

bool blank_or_comment(std::string_view line) {
    for (char c : line) {
        if (c == '%') return true;
        if (!std::isspace(static_cast<unsigned char>(c))) return false;
    }
    return true;
}

template <class Int>
Int parse_int(std::string_view tok, std::size_t line_no, const char* what) {
    Int value{};
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (ec != std::errc() || ptr != tok.data() + tok.size()) {
        throw ParseError(line_no, std::string("invalid ") + what + " '" + std::string(tok) + "'");
    }
    return value;
}

template <Real T>
T parse_value(std::string_view tok, std::size_t line_no) {
    // from_chars rejects a leading '+', which some writers emit.
    if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
    T value{};
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (ec == std::errc::result_out_of_range) {
        throw ParseError(line_no, "value out of range '" + std::string(tok) + "'");
    }
    if (ec != std::errc() || ptr != tok.data() + tok.size()) {
        throw ParseError(line_no, "invalid value '" + std::string(tok) + "'");
    }
    return value;
}

MmHeader parse_banner(std::string_view line) {
    auto tokens = split_ws(line);
    if (tokens.size() != 5 || lower(tokens[0]) != "%%matrixmarket" || lower(tokens[1]) != "matrix") {
        throw ParseError(1, "malformed banner");
    }
    if (lower(tokens[2]) != "coordinate") {
        throw ParseError(1, "unsupported format '" + std::string(tokens[2]) + "' (only coordinate)");
    }
    MmHeader header;
    const auto field = lower(tokens[3]);
    if (field == "real" || field == "double") {
        header.field = MmField::real;
    } else if (field == "integer") {
        header.field = MmField::integer;
    } else if (field == "pattern") {
        header.field = MmField::pattern;
    } else if (field == "complex") {
        throw ParseError(1, "complex matrices are not supported");
    } else {
        throw ParseError(1, "unknown field '" + std::string(tokens[3]) + "'");
    }
    const auto symmetry = lower(tokens[4]);
    if (symmetry == "general") {
        header.symmetry = MmSymmetry::general;
    } else if (symmetry == "symmetric") {
        header.symmetry = MmSymmetry::symmetric;
    } else if (symmetry == "skew-symmetric") {
        header.symmetry = MmSymmetry::skew_symmetric;
    } else {
        throw ParseError(1, "unsupported symmetry '" + std::string(tokens[4]) + "'");
    }
    return header;
}

}  // namespace

template <Real T>
CooMatrix<T> parse_matrix_market(std::istream& in, MmHeader* header_out) {
    std::string line;
    std::size_t line_no = 1;
    if (!std::getline(in, line)) {
        throw ParseError(1, "malformed banner: empty input");
    }
    MmHeader header = parse_banner(line);

    bool have_size = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (blank_or_comment(line)) continue;
        auto tokens = split_ws(line);
        if (tokens.size() != 3) {
            throw ParseError(line_no, "size line must hold rows, columns and entry count");
        }
        header.num_rows = parse_int<Index>(tokens[0], line_no, "row count");
        header.num_cols = parse_int<Index>(tokens[1], line_no, "column count");
        header.stored_entries = parse_int<std::size_t>(tokens[2], line_no, "entry count");
        have_size = true;
        break;
    }
    if (!have_size) {
        throw ParseError(line_no, "missing size line");
    }
    if (header.symmetry != MmSymmetry::general && header.num_rows != header.num_cols) {
        throw ParseError(line_no, "symmetric storage requires a square matrix");
    }

    CooMatrix<T> coo;
    coo.num_rows = header.num_rows;
    coo.num_cols = header.num_cols;
    const bool mirrored = header.symmetry != MmSymmetry::general;
    coo.entries.reserve(mirrored ? 2 * header.stored_entries : header.stored_entries);

    const std::size_t expected_tokens = header.field == MmField::pattern ? 2 : 3;
    std::size_t read = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (blank_or_comment(line)) continue;
        if (read == header.stored_entries) {
            throw ParseError(line_no, "entry count mismatch: more than " + std::to_string(header.stored_entries) +
                                          " entries");
        }
        auto tokens = split_ws(line);
        if (tokens.size() != expected_tokens) {
            throw ParseError(line_no, "expected " + std::to_string(expected_tokens) + " fields per entry");
        }
        const auto row = parse_int<std::uint64_t>(tokens[0], line_no, "row index");
        const auto col = parse_int<std::uint64_t>(tokens[1], line_no, "column index");
        if (row < 1 || row > header.num_rows || col < 1 || col > header.num_cols) {
            throw ParseError(line_no, "index (" + std::string(tokens[0]) + ", " + std::string(tokens[1]) +
                                          ") out of range");
        }
        const T value = header.field == MmField::pattern ? T(1) : parse_value<T>(tokens[2], line_no);
        const auto r = Index(row - 1);
        const auto c = Index(col - 1);
        coo.entries.push_back({r, c, value});
        if (mirrored && r != c) {
            const T mirror = header.symmetry == MmSymmetry::skew_symmetric ? -value : value;
            coo.entries.push_back({c, r, mirror});
        }
        ++read;
    }
    if (read != header.stored_entries) {
        throw ParseError(line_no, "entry count mismatch: expected " + std::to_string(header.stored_entries) +
                                      ", found " + std::to_string(read));
    }

    coo.normalize();
    if (header_out) *header_out = header;
    return coo;
}

template <Real T>
CooMatrix<T> read_matrix_market(const std::filesystem::path& path, MmHeader* header) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    return parse_matrix_market<T>(in, header);
}

template CooMatrix<float> parse_matrix_market<float>(std::istream&, MmHeader*);
template CooMatrix<double> parse_matrix_market<double>(std::istream&, MmHeader*);
template CooMatrix<float> read_matrix_market<float>(const std::filesystem::path&, MmHeader*);
template CooMatrix<double> read_matrix_market<double>(const std::filesystem::path&, MmHeader*);

}  // namespace spc5
