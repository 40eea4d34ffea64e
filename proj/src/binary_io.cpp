#include "spc5/binary_io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

namespace spc5 {

namespace {

constexpr std::array<char, 8> kMagic = {'S', 'P', 'C', '5', 'B', 'L', 'K', '\0'};

template <class U>
void put_le(std::ostream& out, U value, std::size_t bytes = sizeof(U)) {
    static_assert(std::is_unsigned_v<U>);
    char buf[8];
    for (std::size_t i = 0; i < bytes; ++i) buf[i] = char((value >> (8 * i)) & 0xffu);
    out.write(buf, std::streamsize(bytes));
}

template <class U>
U get_le(std::istream& in, std::size_t bytes = sizeof(U)) {
    unsigned char buf[8];
    if (!in.read(reinterpret_cast<char*>(buf), std::streamsize(bytes))) {
        throw FormatError("spc5 cache: truncated file");
    }
    U value = 0;
    for (std::size_t i = 0; i < bytes; ++i) value = U(value | (U(buf[i]) << (8 * i)));
    return value;
}

template <Real T>
using Bits = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;

}  // namespace

template <Real T>
void write_spc5(std::ostream& out, const Spc5Matrix<T>& m) {
    out.write(kMagic.data(), kMagic.size());
    put_le<std::uint32_t>(out, kBinaryFormatVersion);
    put_le<std::uint32_t>(out, m.r);
    put_le<std::uint32_t>(out, m.vs);
    put_le<std::uint32_t>(out, m.num_rows);
    put_le<std::uint32_t>(out, m.num_cols);
    put_le<std::uint64_t>(out, m.nnz());
    put_le<std::uint64_t>(out, m.num_blocks());
    put_le<std::uint8_t>(out, std::uint8_t(sizeof(T)));
    put_le<std::uint64_t>(out, 0, 7);
    for (Index v : m.block_rowptr) put_le<std::uint32_t>(out, v);
    for (Index v : m.block_colidx) put_le<std::uint32_t>(out, v);
    const std::size_t mask_bytes = mask_storage_bytes(m.vs);
    for (BlockMask mask : m.block_masks) put_le<std::uint16_t>(out, mask, mask_bytes);
    for (T v : m.values) put_le<Bits<T>>(out, std::bit_cast<Bits<T>>(v));
    if (!out) throw FormatError("spc5 cache: write failed");
}

template <Real T>
Spc5Matrix<T> read_spc5(std::istream& in) {
    std::array<char, 8> magic{};
    if (!in.read(magic.data(), magic.size()) || magic != kMagic) {
        throw FormatError("spc5 cache: bad magic");
    }
    const auto version = get_le<std::uint32_t>(in);
    if (version != kBinaryFormatVersion) {
        throw FormatError("spc5 cache: unsupported version " + std::to_string(version));
    }
    Spc5Matrix<T> m;
    m.r = get_le<std::uint32_t>(in);
    m.vs = get_le<std::uint32_t>(in);
    m.num_rows = get_le<std::uint32_t>(in);
    m.num_cols = get_le<std::uint32_t>(in);
    const auto nnz = get_le<std::uint64_t>(in);
    const auto blocks = get_le<std::uint64_t>(in);
    const auto value_bytes = get_le<std::uint8_t>(in);
    (void)get_le<std::uint64_t>(in, 7);
    if (value_bytes != sizeof(T)) {
        throw FormatError("spc5 cache: stored precision has " + std::to_string(value_bytes) +
                          "-byte values, requested " + std::to_string(sizeof(T)));
    }
    if (!valid_rows_per_block(m.r) || !valid_lane_count(m.vs)) {
        throw FormatError("spc5 cache: invalid block shape");
    }
    if (blocks > nnz || nnz > (std::uint64_t(1) << 40)) {
        throw FormatError("spc5 cache: inconsistent sizes");
    }
    m.block_rowptr.resize(std::size_t(panel_count(m.num_rows, m.r)) + 1);
    for (auto& v : m.block_rowptr) v = get_le<std::uint32_t>(in);
    m.block_colidx.resize(blocks);
    for (auto& v : m.block_colidx) v = get_le<std::uint32_t>(in);
    m.block_masks.resize(blocks * m.r);
    const std::size_t mask_bytes = mask_storage_bytes(m.vs);
    for (auto& v : m.block_masks) v = get_le<std::uint16_t>(in, mask_bytes);
    m.values.resize(nnz);
    for (auto& v : m.values) v = std::bit_cast<T>(get_le<Bits<T>>(in));
    try {
        m.validate();
    } catch (const std::invalid_argument& e) {
        throw FormatError(std::string("spc5 cache: ") + e.what());
    }
    return m;
}

template <Real T>
void save_spc5(const std::filesystem::path& path, const Spc5Matrix<T>& m) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot open " + path.string() + " for writing");
    write_spc5(out, m);
}

template <Real T>
Spc5Matrix<T> load_spc5(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path.string());
    return read_spc5<T>(in);
}

template void write_spc5<float>(std::ostream&, const Spc5Matrix<float>&);
template void write_spc5<double>(std::ostream&, const Spc5Matrix<double>&);
template Spc5Matrix<float> read_spc5<float>(std::istream&);
template Spc5Matrix<double> read_spc5<double>(std::istream&);
template void save_spc5<float>(const std::filesystem::path&, const Spc5Matrix<float>&);
template void save_spc5<double>(const std::filesystem::path&, const Spc5Matrix<double>&);
template Spc5Matrix<float> load_spc5<float>(const std::filesystem::path&);
template Spc5Matrix<double> load_spc5<double>(const std::filesystem::path&);

}  // namespace spc5
