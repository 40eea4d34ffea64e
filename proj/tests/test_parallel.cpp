#include "doctest.h"

#include <cstdlib>
#include <cstring>
#include <random>

#include "spc5/format.hpp"
#include "spc5/generators.hpp"
#include "spc5/parallel.hpp"
#include "support/test_support.hpp"

using namespace spc5;

namespace {

std::size_t range_nnz(const Spc5Matrix<double>& m, const PanelRange& r) {
    std::size_t n = 0;
    for (Index b = m.block_rowptr[r.first_panel]; b < m.block_rowptr[r.last_panel]; ++b) {
        for (unsigned i = 0; i < m.r; ++i) n += popcount(m.block_masks[std::size_t(b) * m.r + i]);
    }
    return n;
}

std::size_t panel_nnz(const Spc5Matrix<double>& m, Index panel) { return range_nnz(m, {panel, panel + 1, 0}); }

}  // namespace

TEST_CASE("partition covers every panel in order") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 100; ++trial) {
        const auto m = csr_to_spc5(testing::random_csr<double>(rng, 100), 2, 8);
        std::size_t max_panel = 0;
        for (Index p = 0; p < m.num_panels(); ++p) max_panel = std::max(max_panel, panel_nnz(m, p));
        for (unsigned workers : {1u, 2u, 3u, 4u, 8u, 64u}) {
            const auto part = partition_by_nnz(m, workers);
            REQUIRE(part.ranges.size() == workers);
            Index next = 0;
            std::size_t offset = 0;
            for (const auto& r : part.ranges) {
                CHECK(r.first_panel == next);
                CHECK(r.value_offset == offset);
                CHECK(r.last_panel >= r.first_panel);
                const std::size_t share = range_nnz(m, r);
                const double ideal = double(m.nnz()) / workers;
                CHECK(std::abs(double(share) - ideal) <= double(max_panel) + 1e-9);
                next = r.last_panel;
                offset += share;
            }
            CHECK(next == m.num_panels());
        }
    }
}

TEST_CASE("partition boundaries land on the prefix closest to the ideal split") {
    // Panels (r = 1) with nnz 4, 4, 4, 4: two workers split 2 + 2.
    const auto dense = csr_to_spc5(make_dense<double>(4), 1, 4);
    const auto two = partition_by_nnz(dense, 2);
    CHECK(two.ranges[0] == PanelRange{0, 2, 0});
    CHECK(two.ranges[1] == PanelRange{2, 4, 8});

    CHECK_THROWS_AS(partition_by_nnz(dense, 0), std::invalid_argument);

    // Eight workers over four panels: the surplus ranges are empty.
    const auto eight = partition_by_nnz(dense, 8);
    std::size_t empty = 0;
    for (const auto& r : eight.ranges) empty += r.empty();
    CHECK(empty == 4);
}

TEST_CASE("parallel product is bitwise equal to the sequential one") {
    std::mt19937_64 rng(22);
    for (int trial = 0; trial < 30; ++trial) {
        const auto csr = testing::random_csr<double>(rng, 120);
        const auto x = testing::random_vector<double>(rng, csr.num_cols);
        for (unsigned r : {1u, 4u, 8u}) {
            const auto m = csr_to_spc5(csr, r, 8);
            for (Strategy s : {Strategy::scalar, Strategy::expand, Strategy::compact}) {
                const KernelConfig cfg{s, Reduction::multi_reduce, XLoad::single, Precision::f64, 0};
                std::vector<double> seq(csr.num_rows, 1.0);
                spmv<double>(m, x, seq, cfg);
                for (unsigned workers : {1u, 2u, 4u, 8u}) {
                    std::vector<double> par(csr.num_rows, 1.0);
                    const auto result = spmv_parallel<double>(m, x, par, cfg, workers);
                    CHECK(result.flops == 2 * m.nnz());
                    CHECK(std::memcmp(par.data(), seq.data(), par.size() * sizeof(double)) == 0);
                }
            }
        }
    }
}

TEST_CASE("worker errors propagate") {
    const auto m = csr_to_spc5(testing::hand_matrix<double>(), 1, 4);
    std::vector<double> x(8), y(4);
    KernelConfig cfg;
    cfg.lanes = 8;
    CHECK_THROWS_AS(spmv_parallel<double>(m, x, y, cfg, 4u), std::invalid_argument);
}

TEST_CASE("worker count comes from the environment") {
    ::setenv("SPC5_NUM_THREADS", "3", 1);
    CHECK(default_worker_count() == 3);
    ::setenv("SPC5_NUM_THREADS", "junk", 1);
    CHECK(default_worker_count() >= 1);
    ::unsetenv("SPC5_NUM_THREADS");
    CHECK(default_worker_count() >= 1);
}
