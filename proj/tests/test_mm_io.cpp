#include "doctest.h"

#include <random>
#include <sstream>

#include "spc5/generators.hpp"
#include "spc5/matrix_market.hpp"
#include "support/test_support.hpp"

using namespace spc5;

namespace {

template <Real T = double>
CooMatrix<T> parse(const std::string& text, MmHeader* header = nullptr) {
    std::istringstream in(text);
    return parse_matrix_market<T>(in, header);
}

std::string parse_error(const std::string& text) {
    try {
        parse(text);
    } catch (const ParseError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_CASE("real general entries are read 0-based") {
    auto coo = parse("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 3.0\n2 2 4.0\n");
    CHECK(coo.num_rows == 2);
    CHECK(coo.num_cols == 2);
    REQUIRE(coo.entries.size() == 2);
    CHECK(coo.entries[0] == CooEntry<double>{0, 0, 3.0});
    CHECK(coo.entries[1] == CooEntry<double>{1, 1, 4.0});
}

TEST_CASE("pattern symmetric is mirrored without duplicating the diagonal") {
    auto coo = parse("%%MatrixMarket matrix coordinate pattern symmetric\n2 2 2\n2 1\n2 2\n");
    REQUIRE(coo.entries.size() == 3);
    CHECK(coo.entries[0] == CooEntry<double>{0, 1, 1.0});
    CHECK(coo.entries[1] == CooEntry<double>{1, 0, 1.0});
    CHECK(coo.entries[2] == CooEntry<double>{1, 1, 1.0});
}

TEST_CASE("skew-symmetric entries are mirrored with negation") {
    auto coo = parse("%%MatrixMarket matrix coordinate real skew-symmetric\n3 3 2\n2 1 2.5\n3 1 -1\n");
    REQUIRE(coo.entries.size() == 4);
    CHECK(coo.entries[0] == CooEntry<double>{0, 1, -2.5});
    CHECK(coo.entries[1] == CooEntry<double>{0, 2, 1.0});
    CHECK(coo.entries[2] == CooEntry<double>{1, 0, 2.5});
    CHECK(coo.entries[3] == CooEntry<double>{2, 0, -1.0});
}

TEST_CASE("integer field, comments, blank lines and upper-case banner") {
    auto coo = parse(
        "%%MatrixMarket MATRIX Coordinate INTEGER General\n% comment\n\n3 4 2\n% another\n1 4 7\n3 2 -2\n");
    REQUIRE(coo.entries.size() == 2);
    CHECK(coo.entries[0] == CooEntry<double>{0, 3, 7.0});
    CHECK(coo.entries[1] == CooEntry<double>{2, 1, -2.0});
}

TEST_CASE("duplicates are summed and explicit zeros kept") {
    auto coo = parse("%%MatrixMarket matrix coordinate real general\n2 2 4\n1 1 1\n2 2 0\n1 1 2.5\n1 2 1e-1\n");
    REQUIRE(coo.entries.size() == 3);
    CHECK(coo.entries[0] == CooEntry<double>{0, 0, 3.5});
    CHECK(coo.entries[1] == CooEntry<double>{0, 1, 0.1});
    CHECK(coo.entries[2] == CooEntry<double>{1, 1, 0.0});
}

TEST_CASE("values are parsed directly in the requested precision") {
    auto coo = parse<float>("%%MatrixMarket matrix coordinate real general\n1 1 1\n1 1 0.1\n");
    CHECK(coo.entries[0].value == 0.1f);
}

TEST_CASE("parse errors name the offending line") {
    CHECK(parse_error("%%MatrixMarket matrix coordinate real general\n2 2 3\n1 1 1\n2 2 1\n").find(
              "entry count mismatch") != std::string::npos);
    CHECK(parse_error("%%MatrixMarket matrix coordinate real general\n2 2 1\n1 1 1\n2 2 1\n").find("line 4") !=
          std::string::npos);
    CHECK(parse_error("%%MatrixMarket matrix coordinate complex general\n1 1 1\n1 1 1 0\n").find("complex") !=
          std::string::npos);
    CHECK(parse_error("%%MatrixMarket matrix array real general\n1 1\n1\n").find("line 1") != std::string::npos);
    CHECK(parse_error("%MatrixMarket matrix coordinate real general\n1 1 1\n1 1 1\n").find("malformed banner") !=
          std::string::npos);
    CHECK(parse_error("%%MatrixMarket matrix coordinate real hermitian\n1 1 1\n1 1 1\n") != "");
    CHECK(parse_error("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1\n") ==
          "line 3: index (3, 1) out of range");
    CHECK(parse_error("%%MatrixMarket matrix coordinate real general\n2 2 1\n1 0 1\n").find("line 3") !=
          std::string::npos);
    CHECK(parse_error("%%MatrixMarket matrix coordinate real general\n2 2 1\n1 1 abc\n").find("invalid value") !=
          std::string::npos);
    CHECK(parse_error("").find("malformed banner") != std::string::npos);
}

TEST_CASE("symmetric expansion satisfies nnz_general = 2 nnz_stored - nnz_diagonal") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        const Index n = std::uniform_int_distribution<Index>(1, 30)(rng);
        std::set<std::pair<Index, Index>> lower;
        const int count = std::uniform_int_distribution<int>(0, int(n * (n + 1) / 2))(rng);
        for (int k = 0; k < count; ++k) {
            Index i = std::uniform_int_distribution<Index>(0, n - 1)(rng);
            Index j = std::uniform_int_distribution<Index>(0, n - 1)(rng);
            if (i < j) std::swap(i, j);
            lower.insert({i, j});
        }
        std::ostringstream text;
        text << "%%MatrixMarket matrix coordinate real symmetric\n" << n << ' ' << n << ' ' << lower.size() << '\n';
        std::size_t diagonal = 0;
        for (auto [i, j] : lower) {
            text << i + 1 << ' ' << j + 1 << " 1.5\n";
            diagonal += i == j;
        }
        auto coo = parse(text.str());
        CHECK(coo.entries.size() == 2 * lower.size() - diagonal);
    }
}

TEST_CASE("write-parse round trip preserves the normalized matrix") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 100; ++trial) {
        auto csr = testing::random_csr<double>(rng, 40);
        auto coo = csr_to_coo(csr);
        auto again = parse(testing::write_matrix_market(coo));
        CHECK(again == coo);
    }
}

TEST_CASE("coo_to_csr examples") {
    CooMatrix<double> empty{3, 3, {}};
    CHECK(coo_to_csr(empty).row_ptr == std::vector<Index>{0, 0, 0, 0});

    CooMatrix<double> diag{2, 2, {{0, 0, 3}, {1, 1, 4}}};
    auto d = coo_to_csr(diag);
    CHECK(d.row_ptr == std::vector<Index>{0, 1, 2});
    CHECK(d.col_idx == std::vector<Index>{0, 1});
    CHECK(d.values == std::vector<double>{3, 4});

    CooMatrix<double> ones{2, 2, {{0, 0, 1}, {0, 1, 1}, {1, 0, 1}, {1, 1, 1}}};
    auto o = coo_to_csr(ones);
    CHECK(o.row_ptr == std::vector<Index>{0, 2, 4});
    CHECK(o.col_idx == std::vector<Index>{0, 1, 0, 1});
}

TEST_CASE("coo_to_csr enumerates exactly the COO entry set") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        auto csr = testing::random_csr<double>(rng, 50);
        auto coo = csr_to_coo(csr);
        auto back = coo_to_csr(coo);
        CHECK_NOTHROW(back.validate());
        CHECK(back.nnz() == coo.entries.size());
        CHECK(csr_to_coo(back) == coo);
    }
}

TEST_CASE("dense generator") {
    auto two = make_dense<double>(2);
    CHECK(two.row_ptr == std::vector<Index>{0, 2, 4});
    CHECK(make_dense<double>(1).nnz() == 1);
    auto big = make_dense<float>(2048);
    CHECK(big.nnz() == 4194304);
    CHECK_NOTHROW(big.validate());
    // Values are a pure function of (seed, i, j).
    CHECK(two.values[3] == hashed_value(kDefaultDenseSeed, 1, 1));
    CHECK(make_dense<double>(5, 1) != make_dense<double>(5, 2));
    CHECK_THROWS_AS(make_dense<double>(0), std::invalid_argument);
}

TEST_CASE("random generator") {
    auto a = make_random<double>(50, 60, 7, 0.5, 99);
    auto b = make_random<double>(50, 60, 7, 0.5, 99);
    CHECK(a == b);
    CHECK_NOTHROW(a.validate());
    for (Index i = 0; i < a.num_rows; ++i) CHECK(a.row_nnz(i) == 7);

    auto empty_rows = make_random<double>(10, 10, 0, 0.3, 1);
    CHECK(empty_rows.nnz() == 0);
    CHECK_NOTHROW(empty_rows.validate());

    auto full_rows = make_random<double>(5, 9, 9, 0.0, 1);
    CHECK(full_rows.nnz() == 45);

    auto clustered = make_random<double>(40, 100, 8, 1.0, 5);
    for (Index i = 0; i < clustered.num_rows; ++i) {
        CHECK(clustered.col_idx[clustered.row_ptr[i + 1] - 1] - clustered.col_idx[clustered.row_ptr[i]] == 7);
    }

    CHECK_THROWS_AS(make_random<double>(3, 4, 5, 0.5, 1), std::invalid_argument);
    CHECK_THROWS_AS(make_random<double>(3, 4, 2, 1.5, 1), std::invalid_argument);
}
