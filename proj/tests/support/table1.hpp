#ifndef SPC5_TABLE1_HPP
#define SPC5_TABLE1_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "spc5/bench.hpp"

namespace spc5::testing {

/// Published filling percentages, b(1..8,VS), f64 (VS = 8) and f32 (VS = 16).
struct Table1Row {
    const char* label;
    const char* group;
    const char* name;
    Index dim;
    std::uint64_t nnz;
    std::array<int, 4> f64;
    std::array<int, 4> f32;
};

inline constexpr std::array<Table1Row, 3> kTable1Rows{{
    {"nd6k", "ND", "nd6k", 18000, 6897316, {80, 76, 71, 64}, {71, 68, 64, 58}},
    {"pdb1HYS", "Williams", "pdb1HYS", 36417, 4344765, {77, 72, 63, 54}, {65, 60, 54, 46}},
    {"mixtank", "Mulvey", "mixtank_new", 29957, 1995041, {31, 24, 17, 12}, {20, 16, 11, 8}},
}};

inline constexpr double kTable1TolerancePoints = 1.0;

struct Table1Check {
    bool passed = true;      // b(1,VS) and b(2,VS) within tolerance
    std::string summary;     // one line per cell
};

/// Compares measured filling with the published row. b(4,VS) and b(8,VS)
/// are reported but not judged.
inline Table1Check compare_table1(const Table1Row& row, const bench::StatsRow& stats) {
    Table1Check out;
    std::ostringstream s;
    s << row.label << ": dim " << stats.num_rows << " (published " << row.dim << "), nnz " << stats.nnz
      << " (published " << row.nnz << ")\n";
    const unsigned rs[] = {1, 2, 4, 8};
    for (int k = 0; k < 4; ++k) {
        for (Precision p : {Precision::f64, Precision::f32}) {
            const int published = p == Precision::f64 ? row.f64[k] : row.f32[k];
            const double measured = 100.0 * stats.filling(rs[k], p).value_or(0.0);
            const bool judged = rs[k] <= 2;
            const bool ok = std::abs(measured - published) <= kTable1TolerancePoints;
            if (judged && !ok) out.passed = false;
            s << "  b(" << rs[k] << ",VS) " << to_string(p) << ": measured " << measured << "%, published "
              << published << "%" << (judged ? (ok ? " ok" : " OUT OF TOLERANCE") : " (informational)") << '\n';
        }
    }
    out.summary = s.str();
    return out;
}

}  // namespace spc5::testing

#endif
