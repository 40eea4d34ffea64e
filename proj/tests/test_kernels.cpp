#include "doctest.h"

#include <cstring>
#include <random>
#include <vector>

#include "spc5/format.hpp"
#include "spc5/generators.hpp"
#include "spc5/kernels.hpp"
#include "spc5/verify.hpp"
#include "support/test_support.hpp"

using namespace spc5;

namespace {

std::vector<KernelConfig> all_configs(Precision p) {
    std::vector<KernelConfig> out;
    out.push_back({Strategy::scalar, Reduction::per_vector_hsum, XLoad::partial, p, 0});
    for (Strategy s : {Strategy::expand, Strategy::compact}) {
        for (Reduction red : {Reduction::per_vector_hsum, Reduction::multi_reduce}) {
            for (XLoad xl : {XLoad::partial, XLoad::single}) out.push_back({s, red, xl, p, 0});
        }
    }
    return out;
}

template <class T>
bool bitwise_equal(const std::vector<T>& a, const std::vector<T>& b) {
    return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(T)) == 0;
}

}  // namespace

TEST_CASE("hand matrix with x = ones") {
    const auto csr = testing::hand_matrix<double>();
    const std::vector<double> x(8, 1.0);
    for (unsigned r : {1u, 2u, 4u, 8u}) {
        for (unsigned vs : {4u, 8u, 16u}) {
            const auto m = csr_to_spc5(csr, r, vs);
            for (const auto& cfg : all_configs(Precision::f64)) {
                std::vector<double> y(4, 0.0);
                spmv<double>(m, x, y, cfg);
                const bool ok = y == std::vector<double>{10, 5, 0, 13};
                CHECK_MESSAGE(ok, describe(cfg), " r=", r, " vs=", vs);
            }
        }
    }
}

TEST_CASE("kernels accumulate into y") {
    const auto m = csr_to_spc5(testing::hand_matrix<float>(), 2, 16);
    const std::vector<float> x(8, 1.0f);
    for (const auto& cfg : all_configs(Precision::f32)) {
        std::vector<float> y{1, 2, 3, 4};
        spmv<float>(m, x, y, cfg);
        CHECK(y == std::vector<float>{11, 7, 3, 17});
    }
}

TEST_CASE("argument checks") {
    const auto csr = testing::hand_matrix<double>();
    const auto m = csr_to_spc5(csr, 1, 8);
    std::vector<double> x(8, 1.0), y(4, 0.0), short_x(7), short_y(3);
    KernelConfig cfg;
    CHECK_THROWS_AS(spmv<double>(m, short_x, y, cfg), std::invalid_argument);
    CHECK_THROWS_AS(spmv<double>(m, x, short_y, cfg), std::invalid_argument);
    CHECK_THROWS_AS(spmv_csr<double>(csr, short_x, y), std::invalid_argument);

    KernelConfig wrong_precision = cfg;
    wrong_precision.precision = Precision::f32;
    CHECK_THROWS_WITH_AS(spmv<double>(m, x, y, wrong_precision), doctest::Contains("precision"),
                         std::invalid_argument);
    KernelConfig wrong_lanes = cfg;
    wrong_lanes.lanes = 16;
    CHECK_THROWS_WITH_AS(spmv<double>(m, x, y, wrong_lanes), doctest::Contains("lane width"),
                         std::invalid_argument);
    KernelConfig scalar = cfg;
    scalar.strategy = Strategy::scalar;
    CHECK_THROWS_AS(spmv_spc5_vector<double>(m, x, y, scalar), std::invalid_argument);
    CHECK_THROWS_AS(spmv_range<double>(m, x, y, cfg, PanelRange{2, 9, 0}), std::invalid_argument);
}

TEST_CASE("config names") {
    CHECK(parse_strategy("compact") == Strategy::compact);
    CHECK(parse_reduction(to_string(Reduction::multi_reduce)) == Reduction::multi_reduce);
    CHECK(parse_xload("single") == XLoad::single);
    CHECK_THROWS_AS(parse_strategy("gather"), std::invalid_argument);
}

TEST_CASE("panel ranges report the next value offset") {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 50; ++trial) {
        const auto csr = testing::random_csr<double>(rng, 60);
        const auto m = csr_to_spc5(csr, 4, 8);
        const auto x = testing::random_vector<double>(rng, csr.num_cols);
        for (const auto& cfg : all_configs(Precision::f64)) {
            std::vector<double> y(csr.num_rows, 0.0);
            CHECK(spmv_range<double>(m, x, y, cfg, full_range(m)) == m.nnz());

            // Two halves reproduce the full product.
            const Index split = m.num_panels() / 2;
            std::vector<double> halves(csr.num_rows, 0.0);
            const std::size_t offset = spmv_range<double>(m, x, halves, cfg, {0, split, 0});
            CHECK(spmv_range<double>(m, x, halves, cfg, {split, m.num_panels(), offset}) == m.nnz());
            CHECK(bitwise_equal(halves, y));
        }
    }
}

TEST_CASE("scalar blocked kernel is bitwise equal to CSR") {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 100; ++trial) {
        const auto csr = testing::random_csr<float>(rng, 80);
        const auto x = testing::random_vector<float>(rng, csr.num_cols);
        std::vector<float> expected(csr.num_rows, 0.5f);
        spmv_csr<float>(csr, x, expected);
        for (unsigned r : {1u, 2u, 4u, 8u}) {
            for (unsigned vs : {4u, 8u, 16u}) {
                std::vector<float> y(csr.num_rows, 0.5f);
                spmv_spc5_scalar<float>(csr_to_spc5(csr, r, vs), x, y);
                CHECK(bitwise_equal(y, expected));
            }
        }
    }
}

TEST_CASE("compact with single and partial x loads is bitwise identical") {
    std::mt19937_64 rng(10);
    for (int trial = 0; trial < 100; ++trial) {
        const auto csr = testing::random_csr<double>(rng, 80);
        const auto x = testing::random_vector<double>(rng, csr.num_cols);
        for (unsigned r : {1u, 2u, 4u, 8u}) {
            const auto m = csr_to_spc5(csr, r, 8);
            for (Reduction red : {Reduction::per_vector_hsum, Reduction::multi_reduce}) {
                std::vector<double> partial(csr.num_rows, 0.0), single(csr.num_rows, 0.0);
                spmv<double>(m, x, partial, {Strategy::compact, red, XLoad::partial, Precision::f64, 0});
                spmv<double>(m, x, single, {Strategy::compact, red, XLoad::single, Precision::f64, 0});
                CHECK(bitwise_equal(partial, single));
            }
        }
    }
}

TEST_CASE("reductions agree bitwise") {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 100; ++trial) {
        const auto csr = testing::random_csr<double>(rng, 80);
        const auto x = testing::random_vector<double>(rng, csr.num_cols);
        for (unsigned r : {1u, 2u, 4u, 8u}) {
            for (unsigned vs : {4u, 8u, 16u}) {
                const auto m = csr_to_spc5(csr, r, vs);
                for (Strategy s : {Strategy::expand, Strategy::compact}) {
                    std::vector<double> hsum(csr.num_rows, 0.0), multi(csr.num_rows, 0.0);
                    spmv<double>(m, x, hsum, {s, Reduction::per_vector_hsum, XLoad::partial, Precision::f64, 0});
                    spmv<double>(m, x, multi, {s, Reduction::multi_reduce, XLoad::partial, Precision::f64, 0});
                    CHECK(bitwise_equal(hsum, multi));
                }
            }
        }
    }
}

TEST_CASE("integer data is exact in every configuration") {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 60; ++trial) {
        const auto csr = testing::random_csr<double>(rng, 70, testing::ValueKind::integer);
        const auto x = testing::random_vector<double>(rng, csr.num_cols, testing::ValueKind::integer);
        const auto dense = testing::to_dense(csr);
        std::vector<double> expected(csr.num_rows, 0.0);
        for (Index i = 0; i < csr.num_rows; ++i) {
            for (Index j = 0; j < csr.num_cols; ++j) expected[i] += dense[i][j] * x[j];
        }
        for (unsigned r : {1u, 2u, 4u, 8u}) {
            for (unsigned vs : {4u, 8u, 16u}) {
                const auto m = csr_to_spc5(csr, r, vs);
                for (const auto& cfg : all_configs(Precision::f64)) {
                    std::vector<double> y(csr.num_rows, 0.0);
                    spmv<double>(m, x, y, cfg);
                    CHECK(y == expected);
                }
            }
        }
    }
}

TEST_CASE("linearity: A(ax + by) matches aAx + bAy on integer data") {
    std::mt19937_64 rng(14);
    for (int trial = 0; trial < 30; ++trial) {
        const auto csr = testing::random_csr<double>(rng, 50, testing::ValueKind::integer);
        const auto m = csr_to_spc5(csr, 2, 8);
        const auto u = testing::random_vector<double>(rng, csr.num_cols, testing::ValueKind::integer);
        const auto v = testing::random_vector<double>(rng, csr.num_cols, testing::ValueKind::integer);
        std::vector<double> w(csr.num_cols);
        for (std::size_t j = 0; j < w.size(); ++j) w[j] = 3 * u[j] - 2 * v[j];
        for (const auto& cfg : all_configs(Precision::f64)) {
            std::vector<double> au(csr.num_rows, 0.0), av(csr.num_rows, 0.0), aw(csr.num_rows, 0.0);
            spmv<double>(m, u, au, cfg);
            spmv<double>(m, v, av, cfg);
            spmv<double>(m, w, aw, cfg);
            for (Index i = 0; i < csr.num_rows; ++i) CHECK(aw[i] == 3 * au[i] - 2 * av[i]);
        }
    }
}

TEST_CASE("verify_against_oracle passes on random data") {
    std::mt19937_64 rng(15);
    for (int trial = 0; trial < 40; ++trial) {
        const auto csr = testing::random_csr<float>(rng, 90);
        for (const auto& cfg : all_configs(Precision::f32)) {
            const auto report = verify_against_oracle(csr, BlockShape{4, 16}, cfg, 2, trial);
            CHECK_MESSAGE(report.passed, report.diagnostic);
            CHECK(report.max_scaled_error <= 8.0);
        }
    }
}

TEST_CASE("verify detects a wrong value and a broken mask") {
    const auto csr = testing::hand_matrix<double>();
    auto m = csr_to_spc5(csr, 1, 4);
    m.values[4] = 5.5;
    auto report = verify_against_oracle(csr, m, KernelConfig{}, 3, 1);
    CHECK_FALSE(report.passed);
    REQUIRE(report.first_bad_row);
    CHECK(*report.first_bad_row == 1);

    auto missing = csr_to_spc5(csr, 1, 4);
    missing.block_masks[0] = 0b0101;
    report = verify_against_oracle(csr, missing, KernelConfig{}, 1, 1);
    CHECK_FALSE(report.passed);
    CHECK(report.diagnostic.find("structurally inconsistent") != std::string::npos);
}

TEST_CASE("oracle product on the hand matrix") {
    const auto csr = testing::hand_matrix<double>();
    const std::vector<double> x{1, -1, 2, 0, 0, 0, 1, 3};
    const auto ref = oracle_spmv<double>(csr, x);
    CHECK(ref.y == std::vector<long double>{9, -5, 0, 27});
    CHECK(ref.magnitude == std::vector<long double>{9, 5, 0, 27});
}
