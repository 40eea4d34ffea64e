#include "doctest.h"

#include <random>
#include <vector>

#include "spc5/vlane.hpp"

using namespace spc5::vlane;

TEST_CASE("mask to predicate through the filter vector") {
    constexpr auto filter = make_filter<8>();
    CHECK(filter.lanes[0] == 1u);
    CHECK(filter.lanes[7] == 128u);
    CHECK(mask_to_predicate<8>(0b1101, filter).bits() == 0b1101u);
    CHECK(mask_to_predicate<4>(0xFF).bits() == 0xFu);
    CHECK(mask_to_predicate<16>(0).count() == 0);
    CHECK(first_n_predicate<8>(3).bits() == 0b111u);
    CHECK(first_n_predicate<16>(16) == LanePredicate<16>::all());
    CHECK(first_n_predicate<4>(0) == LanePredicate<4>::none());
}

TEST_CASE("compact and expand examples") {
    const LaneVector<double, 4> v{{1, 2, 3, 4}};
    const auto p = LanePredicate<4>::from_bits(0b1101);
    CHECK(compact(v, p) == LaneVector<double, 4>{{1, 3, 4, 0}});

    const std::vector<double> packed{1, 3, 4};
    CHECK(expand<double, 4>(packed, 0, 0b1101) == LaneVector<double, 4>{{1, 0, 3, 4}});
    CHECK(expand<double, 4>(packed, 3, 0) == LaneVector<double, 4>::zero());
    CHECK_THROWS_AS((expand<double, 4>(packed, 1, 0b1101)), std::out_of_range);
}

TEST_CASE("masked load never touches inactive lanes") {
    const std::vector<float> src{1, 2, 3};
    auto v = masked_load<float, 8>(src, 1, first_n_predicate<8>(2));
    CHECK(v == LaneVector<float, 8>{{2, 3, 0, 0, 0, 0, 0, 0}});
    auto w = masked_load<float, 4>(src, 0, LanePredicate<4>::from_bits(0b101));
    CHECK(w == LaneVector<float, 4>{{1, 0, 3, 0}});
}

TEST_CASE("uzp de-interleave") {
    const LaneVector<int, 4> a{{0, 1, 2, 3}};
    const LaneVector<int, 4> b{{4, 5, 6, 7}};
    CHECK(uzp_even(a, b) == LaneVector<int, 4>{{0, 2, 4, 6}});
    CHECK(uzp_odd(a, b) == LaneVector<int, 4>{{1, 3, 5, 7}});
}

TEST_CASE("hsum uses the adjacent pair tree") {
    CHECK(hsum(LaneVector<double, 4>{{1, 2, 3, 4}}) == 10);
    // ((1e16 + 1) + (-1e16 + 0)) rounds 1e16 + 1 to 1e16: the exact sum is 1.
    CHECK(hsum(LaneVector<double, 4>{{1e16, 1, -1e16, 0}}) == 0);
    // Left to right gives 1 here; the tree gives (1e16) + (-1e16) = 0.
    CHECK(hsum(LaneVector<double, 4>{{1, 1e16, -1e16, 1}}) == 0);
    CHECK(hsum(LaneVector<double, 4>{{1e16, -1e16, 1, 0}}) == 1);
}

TEST_CASE("multi_reduce examples") {
    const std::vector<LaneVector<double, 4>> two{{{1, 2, 3, 4}}, {{5, 6, 7, 8}}};
    CHECK(multi_reduce<double, 4>(two) == LaneVector<double, 4>{{10, 26, 10, 26}});

    const std::vector<LaneVector<double, 4>> four{{{1, 0, 0, 0}}, {{0, 2, 0, 0}}, {{0, 0, 3, 0}}, {{1, 1, 1, 1}}};
    CHECK(multi_reduce<double, 4>(four) == LaneVector<double, 4>{{1, 2, 3, 4}});

    const std::vector<LaneVector<double, 4>> one{{{1, 2, 3, 4}}};
    CHECK(multi_reduce<double, 4>(one) == LaneVector<double, 4>{{10, 10, 10, 10}});

    const std::vector<LaneVector<double, 4>> three(3);
    CHECK_THROWS_AS((multi_reduce<double, 4>(three)), std::invalid_argument);
    const std::vector<LaneVector<double, 4>> eight(8);
    CHECK_THROWS_AS((multi_reduce<double, 4>(eight)), std::invalid_argument);
}

TEST_CASE("fma is unfused") {
    CHECK_FALSE(kFusedMultiplyAdd);
    // a*b = 1 - 2^-60 exactly; rounding the product first loses the tail.
    const double a = 1.0 + 0x1p-30;
    const double b = 1.0 - 0x1p-30;
    const LaneVector<double, 4> va{{a, a, a, a}};
    const LaneVector<double, 4> vb{{b, b, b, b}};
    const LaneVector<double, 4> acc{{-1, -1, -1, -1}};
    CHECK(fma(acc, va, vb)[0] == 0.0);
}

namespace {

template <unsigned VS>
void check_compact_expand(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> value(-1000, 1000);
    std::uniform_int_distribution<std::uint32_t> mask_dist(0, (1u << VS) - 1);
    LaneVector<double, VS> v;
    for (auto& e : v.lanes) e = value(rng);
    const std::uint32_t mask = mask_dist(rng);
    const auto pred = mask_to_predicate<VS>(mask);

    // expand(compact(v, p), p) keeps exactly the active lanes of v.
    const auto packed = compact(v, pred);
    const std::span<const double> packed_span(packed.lanes);
    const auto back = expand<double, VS>(packed_span.first(pred.count()), 0, mask);
    for (unsigned i = 0; i < VS; ++i) CHECK(back[i] == (pred.active(i) ? v[i] : 0.0));
    // compact(expand(s, m), p) returns s.
    const auto again = compact(back, pred);
    for (unsigned i = 0; i < pred.count(); ++i) CHECK(again[i] == packed[i]);
}

template <unsigned VS>
void check_multi_reduce(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> value(-1 << 20, 1 << 20);
    const unsigned max_log = std::bit_width(VS) - 1;
    const unsigned count = 1u << std::uniform_int_distribution<unsigned>(0, max_log)(rng);
    std::vector<LaneVector<double, VS>> vs(count);
    for (auto& v : vs) {
        for (auto& e : v.lanes) e = value(rng);
    }
    const auto out = multi_reduce<double, VS>(vs);
    for (unsigned i = 0; i < VS; ++i) CHECK(out[i] == hsum(vs[i % count]));
}

}  // namespace

TEST_CASE("compact/expand inverse property, randomized") {
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 300; ++trial) {
        check_compact_expand<4>(rng);
        check_compact_expand<8>(rng);
        check_compact_expand<16>(rng);
    }
}

TEST_CASE("multi_reduce lane i equals hsum of vector i, randomized") {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 300; ++trial) {
        check_multi_reduce<4>(rng);
        check_multi_reduce<8>(rng);
        check_multi_reduce<16>(rng);
    }
}
