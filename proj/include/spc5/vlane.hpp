#ifndef SPC5_VLANE_HPP
#define SPC5_VLANE_HPP

// Fixed-width vector lanes with scalar reference semantics for the handful
// of SIMD operations the blocked kernels need: predicated loads, compact
// (SVE svcompact), expand (AVX-512 vexpand), fused accumulate, horizontal
// sum and the odd/even multi-vector reduction.
//
// Inactive lanes are always zero. Every function is pure.

#include <array>
#include <bit>
#include <cassert>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>

namespace spc5::vlane {

/// Multiply-add in fma() rounds twice (product, then sum). The library is
/// built with -ffp-contract=off so the compiler does not fuse it either.
inline constexpr bool kFusedMultiplyAdd = false;
inline constexpr const char* kFmaMode = kFusedMultiplyAdd ? "fused" : "unfused";

template <unsigned VS>
concept LaneCount = VS == 4 || VS == 8 || VS == 16;

namespace detail {

[[noreturn, gnu::cold, gnu::noinline]] inline void throw_expand_out_of_range(unsigned needed, std::size_t offset,
                                                                           std::size_t size) {
    throw std::out_of_range("expand: mask needs " + std::to_string(needed) + " values at offset " +
                            std::to_string(offset) + ", source holds " + std::to_string(size));
}

}  // namespace detail

template <unsigned VS>
inline constexpr std::uint32_t kLaneBits = VS >= 32 ? ~0u : ((1u << VS) - 1u);

template <class T, unsigned VS>
struct LaneVector {
    std::array<T, VS> lanes{};

    static constexpr unsigned size() { return VS; }

    T& operator[](unsigned i) { return lanes[i]; }
    const T& operator[](unsigned i) const { return lanes[i]; }

    static LaneVector zero() { return {}; }

    friend bool operator==(const LaneVector&, const LaneVector&) = default;
};

/// Per-lane activity, lane i <-> bit i.
template <unsigned VS>
class LanePredicate {
public:
    constexpr LanePredicate() = default;

    static constexpr LanePredicate from_bits(std::uint32_t bits) { return LanePredicate(bits & kAll); }
    static constexpr LanePredicate all() { return LanePredicate(kAll); }
    static constexpr LanePredicate none() { return LanePredicate(0); }

    constexpr bool active(unsigned lane) const { return (bits_ >> lane) & 1u; }
    constexpr bool operator[](unsigned lane) const { return active(lane); }
    constexpr unsigned count() const { return unsigned(std::popcount(bits_)); }
    constexpr std::uint32_t bits() const { return bits_; }

    friend constexpr bool operator==(const LanePredicate&, const LanePredicate&) = default;

private:
    static constexpr std::uint32_t kAll = VS >= 32 ? ~0u : ((1u << VS) - 1u);
    constexpr explicit LanePredicate(std::uint32_t bits) : bits_(bits) {}
    std::uint32_t bits_ = 0;
};

/// Lane i holds 1 << i.
template <unsigned VS>
using FilterVector = LaneVector<std::uint32_t, VS>;

template <unsigned VS>
constexpr FilterVector<VS> make_filter() {
    FilterVector<VS> f;
    for (unsigned i = 0; i < VS; ++i) f.lanes[i] = 1u << i;
    return f;
}

/// Broadcast the mask, AND it with the filter, compare each lane with zero.
template <unsigned VS>
constexpr LanePredicate<VS> mask_to_predicate(std::uint32_t mask, const FilterVector<VS>& filter) {
    std::uint32_t bits = 0;
    for (unsigned i = 0; i < VS; ++i) bits |= std::uint32_t((mask & filter.lanes[i]) != 0) << i;
    return LanePredicate<VS>::from_bits(bits);
}

template <unsigned VS>
constexpr LanePredicate<VS> mask_to_predicate(std::uint32_t mask) {
    return mask_to_predicate<VS>(mask, make_filter<VS>());
}

/// Lanes 0..n-1 active (svwhilelt(0, n)).
template <unsigned VS>
constexpr LanePredicate<VS> first_n_predicate(unsigned n) {
    assert(n <= VS);
    return LanePredicate<VS>::from_bits(n >= VS ? ~0u : ((1u << n) - 1u));
}

/// Lane i = src[offset + i] when active, 0 otherwise. Inactive lanes are
/// never read, so they may lie past the end of src.
template <class T, unsigned VS>
LaneVector<T, VS> masked_load(std::span<const T> src, std::size_t offset, LanePredicate<VS> pred) {
    LaneVector<T, VS> v;
    for (std::uint32_t bits = pred.bits(); bits != 0; bits &= bits - 1) {
        const unsigned i = unsigned(std::countr_zero(bits));
        assert(offset + i < src.size());
        v.lanes[i] = src[offset + i];
    }
    return v;
}

template <class T, unsigned VS>
LaneVector<T, VS> load(std::span<const T> src, std::size_t offset) {
    return masked_load<T, VS>(src, offset, LanePredicate<VS>::all());
}

/// Active lanes packed to the front in lane order; the tail is zero.
template <class T, unsigned VS>
LaneVector<T, VS> compact(const LaneVector<T, VS>& v, LanePredicate<VS> pred) {
    LaneVector<T, VS> out;
    unsigned next = 0;
    for (std::uint32_t bits = pred.bits(); bits != 0; bits &= bits - 1) {
        out.lanes[next++] = v.lanes[unsigned(std::countr_zero(bits))];
    }
    return out;
}

/// The popcount(mask) values starting at src[offset] scattered, in order, to
/// the lanes whose mask bit is set; other lanes are zero.
template <class T, unsigned VS>
LaneVector<T, VS> expand(std::span<const T> src, std::size_t offset, std::uint32_t mask) {
    const unsigned needed = unsigned(std::popcount(mask & kLaneBits<VS>));
    if (offset > src.size() || src.size() - offset < needed) [[unlikely]] {
        detail::throw_expand_out_of_range(needed, offset, src.size());
    }
    LaneVector<T, VS> out;
    std::size_t next = offset;
    for (std::uint32_t bits = mask & kLaneBits<VS>; bits != 0; bits &= bits - 1) {
        out.lanes[unsigned(std::countr_zero(bits))] = src[next++];
    }
    return out;
}

/// acc + a * b per lane.
template <class T, unsigned VS>
LaneVector<T, VS> fma(const LaneVector<T, VS>& acc, const LaneVector<T, VS>& a, const LaneVector<T, VS>& b) {
    LaneVector<T, VS> out;
    for (unsigned i = 0; i < VS; ++i) {
        const T product = a.lanes[i] * b.lanes[i];
        out.lanes[i] = acc.lanes[i] + product;
    }
    return out;
}

template <class T, unsigned VS>
LaneVector<T, VS> add(const LaneVector<T, VS>& a, const LaneVector<T, VS>& b) {
    LaneVector<T, VS> out;
    for (unsigned i = 0; i < VS; ++i) out.lanes[i] = a.lanes[i] + b.lanes[i];
    return out;
}

/// Even-indexed lanes of a, then even-indexed lanes of b (svuzp1).
template <class T, unsigned VS>
LaneVector<T, VS> uzp_even(const LaneVector<T, VS>& a, const LaneVector<T, VS>& b) {
    LaneVector<T, VS> out;
    for (unsigned i = 0; i < VS / 2; ++i) {
        out.lanes[i] = a.lanes[2 * i];
        out.lanes[VS / 2 + i] = b.lanes[2 * i];
    }
    return out;
}

/// Odd-indexed lanes of a, then odd-indexed lanes of b (svuzp2).
template <class T, unsigned VS>
LaneVector<T, VS> uzp_odd(const LaneVector<T, VS>& a, const LaneVector<T, VS>& b) {
    LaneVector<T, VS> out;
    for (unsigned i = 0; i < VS / 2; ++i) {
        out.lanes[i] = a.lanes[2 * i + 1];
        out.lanes[VS / 2 + i] = b.lanes[2 * i + 1];
    }
    return out;
}

/// Sum of all lanes over a pairwise tree of adjacent lanes:
/// ((v0+v1) + (v2+v3)) + ((v4+v5) + (v6+v7)) for VS = 8.
template <class T, unsigned VS>
T hsum(const LaneVector<T, VS>& v) {
    std::array<T, VS> work = v.lanes;
    for (unsigned width = VS; width > 1; width /= 2) {
        for (unsigned i = 0; i < width / 2; ++i) work[i] = work[2 * i] + work[2 * i + 1];
    }
    return work[0];
}

/// Reduce up to VS accumulators at once by repeated odd/even de-interleave.
///
/// Pairs of vectors are merged with uzp_even + uzp_odd until one vector is
/// left; that vector is then folded onto itself until lane i holds the total
/// of vectors[i]. Each total is summed over the same adjacent-pair tree as
/// hsum(), so lane i == hsum(vectors[i]) bit for bit. Lanes >= count repeat
/// the totals periodically. `count` must be a power of two no larger than VS.
template <class T, unsigned VS>
LaneVector<T, VS> multi_reduce(std::span<const LaneVector<T, VS>> vectors) {
    const std::size_t count = vectors.size();
    if (count == 0 || count > VS || !std::has_single_bit(count)) {
        throw std::invalid_argument("multi_reduce: vector count must be a power of two in [1, " +
                                    std::to_string(VS) + "], got " + std::to_string(count));
    }
    std::array<LaneVector<T, VS>, VS> work;
    for (std::size_t i = 0; i < count; ++i) work[i] = vectors[i];
    for (std::size_t live = count; live > 1; live /= 2) {
        for (std::size_t k = 0; k < live / 2; ++k) {
            work[k] = add(uzp_even(work[2 * k], work[2 * k + 1]), uzp_odd(work[2 * k], work[2 * k + 1]));
        }
    }
    // work[0] now holds `count` segments of VS/count partial sums each.
    for (std::size_t segment = VS / count; segment > 1; segment /= 2) {
        work[0] = add(uzp_even(work[0], work[0]), uzp_odd(work[0], work[0]));
    }
    return work[0];
}

}  // namespace spc5::vlane

#endif
