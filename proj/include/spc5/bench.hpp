#ifndef SPC5_BENCH_HPP
#define SPC5_BENCH_HPP

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "spc5/format.hpp"
#include "spc5/kernels.hpp"
#include "spc5/verify.hpp"

namespace spc5::bench {

/// One timed configuration. r == 0 marks the CSR baseline.
struct BenchRecord {
    std::string matrix;
    Precision precision = Precision::f64;
    unsigned r = 1;
    unsigned vs = 8;
    Strategy strategy = Strategy::scalar;
    Reduction reduction = Reduction::per_vector_hsum;
    XLoad x_load = XLoad::partial;
    unsigned workers = 1;
    unsigned reps = 0;
    std::uint64_t nnz = 0;
    double median_seconds = 0;
    double gflops = 0;
    double filling = 0;
    std::uint64_t num_blocks = 0;
    double avg_nnz_per_block = 0;
    std::string fma = "unfused";

    friend bool operator==(const BenchRecord&, const BenchRecord&) = default;
};

/// 2 flops (one multiply, one add) per stored value.
double gflops_for(std::uint64_t nnz, double seconds);

inline constexpr const char* kCsvVersionLine = "# spc5-bench-csv v1";

/// Header comment, column header, one line per record. Doubles use the
/// shortest representation that reads back to the same value.
void write_csv(std::ostream& out, const std::vector<BenchRecord>& records);
std::vector<BenchRecord> read_csv(std::istream& in);

/// (avg nnz per block, GFlop/s) pairs, one line per record.
void write_scatter_csv(std::ostream& out, const std::vector<BenchRecord>& records);

// ---------------------------------------------------------------- statistics

struct FillingCell {
    unsigned r = 1;
    unsigned vs = 8;
    Precision precision = Precision::f64;
    std::size_t num_blocks = 0;
    double filling = 0;
};

struct StatsRow {
    std::string name;
    Index num_rows = 0;
    Index num_cols = 0;
    std::uint64_t nnz = 0;
    double nnz_per_row = 0;
    std::vector<FillingCell> cells;  // ordered by r, then precision list order

    std::optional<double> filling(unsigned r, Precision p) const;
};

/// Filling of every beta(r, VS) for each precision. vs_override (non-zero)
/// replaces the per-precision default width (8 for f64, 16 for f32).
template <Real T>
StatsRow compute_stats(const std::string& name, const CsrMatrix<T>& m, const std::vector<Precision>& precisions,
                       const std::vector<unsigned>& rs, unsigned vs_override = 0);

/// Table rows: "name dim nnz nnz/row f64%|f32% ..." (columns per r).
void print_stats_table(std::ostream& out, const std::vector<StatsRow>& rows, int decimals = 0);

// ----------------------------------------------------------------- verify

struct GridSpec {
    std::vector<unsigned> rs{1, 2, 4, 8};
    unsigned vs = 0;  // 0 = default for the precision
    std::vector<Strategy> strategies{Strategy::scalar, Strategy::expand, Strategy::compact};
    std::vector<Reduction> reductions{Reduction::per_vector_hsum, Reduction::multi_reduce};
    std::vector<XLoad> x_loads{XLoad::partial, XLoad::single};
    bool include_csr = false;
};

struct GridPoint {
    BlockShape shape;  // r == 0 for CSR
    KernelConfig cfg;
};

/// Cartesian product of the grid for one precision.
std::vector<GridPoint> expand_grid(const GridSpec& grid, Precision precision);

struct VerifyOutcome {
    GridPoint point;
    VerifyReport report;
};

enum class FaultInjection { none, move_mask_bit };

/// Corrupt one mask of `m` in place: move the lowest set bit of the first
/// mask with a free in-range lane to that lane. The popcount is unchanged so
/// kernels stay in bounds but read values at wrong columns. Returns the
/// affected row, or nothing if no mask could be changed.
template <Real T>
std::optional<Index> inject_mask_fault(Spc5Matrix<T>& m);

template <Real T>
std::vector<VerifyOutcome> run_verify(const CsrMatrix<T>& m, const GridSpec& grid, std::size_t trials,
                                      std::uint64_t seed, FaultInjection fault = FaultInjection::none);

// ------------------------------------------------------------------ timing

struct TimingOptions {
    unsigned reps = 10;
    unsigned warmup = 3;
    unsigned workers = 1;
    std::size_t verify_trials = 2;
    std::uint64_t seed = 42;
};

struct BenchOutcome {
    std::vector<BenchRecord> records;
    std::vector<std::string> skipped;  // diagnostics for configs that failed validation
};

/// Times every grid point after validating it against the oracle; points
/// that fail validation are skipped with a diagnostic, never timed.
template <Real T>
BenchOutcome run_bench(const std::string& name, const CsrMatrix<T>& m, const GridSpec& grid,
                       const TimingOptions& opts);

double median(std::vector<double> samples);

// -------------------------------------------------------------- cost model

class InsufficientData : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct CostModelKey {
    unsigned r = 1;
    unsigned vs = 8;
    Precision precision = Precision::f64;
    Strategy strategy = Strategy::scalar;
    Reduction reduction = Reduction::per_vector_hsum;
    XLoad x_load = XLoad::partial;
    unsigned workers = 1;

    auto tie() const { return std::tie(r, vs, precision, strategy, reduction, x_load, workers); }
    friend bool operator<(const CostModelKey& a, const CostModelKey& b) { return a.tie() < b.tie(); }
    friend bool operator==(const CostModelKey& a, const CostModelKey& b) { return a.tie() == b.tie(); }
};

struct CostModelFit {
    double cost_per_block_seconds = 0;
    double r_squared = 0;
    std::size_t samples = 0;
    bool constant_cost = false;  // r_squared >= kConstantCostR2
};

inline constexpr std::size_t kMinFitSamples = 5;
inline constexpr double kConstantCostR2 = 0.9;

/// Least squares through the origin, time = alpha * num_blocks, per group.
/// CSR baseline rows (r == 0) are ignored. Throws InsufficientData when a
/// group has fewer than kMinFitSamples records or there is no group at all.
std::map<CostModelKey, CostModelFit> fit_cost_model(const std::vector<BenchRecord>& records);

/// Spearman rank correlation with average ranks for ties.
double spearman(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace spc5::bench

#endif
