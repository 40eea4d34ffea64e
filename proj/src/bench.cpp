#include "spc5/bench.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <iomanip>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include "spc5/parallel.hpp"
#include "spc5/vlane.hpp"

namespace spc5::bench {

double gflops_for(std::uint64_t nnz, double seconds) {
    return seconds > 0 ? 2.0 * double(nnz) / seconds / 1e9 : 0.0;
}

// ------------------------------------------------------------------- CSV

namespace {

constexpr const char* kColumns[] = {"matrix", "precision", "r",           "vs",        "strategy",
                                    "reduction", "x_load", "workers",     "reps",      "nnz",
                                    "median_seconds", "gflops", "filling", "num_blocks", "avg_nnz_per_block",
                                    "fma"};
constexpr std::size_t kNumColumns = std::size(kColumns);

std::string fmt_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

std::string quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool in_quotes = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (in_quotes) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                in_quotes = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            in_quotes = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    fields.push_back(std::move(cur));
    return fields;
}

template <class N>
N parse_number(const std::string& s, std::size_t line_no, const char* column) {
    N value{};
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw std::runtime_error("csv line " + std::to_string(line_no) + ": bad " + column + " '" + s + "'");
    }
    return value;
}

}  // namespace

void write_csv(std::ostream& out, const std::vector<BenchRecord>& records) {
    out << kCsvVersionLine << '\n';
    for (std::size_t i = 0; i < kNumColumns; ++i) out << (i ? "," : "") << kColumns[i];
    out << '\n';
    for (const auto& rec : records) {
        out << quote(rec.matrix) << ',' << to_string(rec.precision) << ',' << rec.r << ',' << rec.vs << ','
            << to_string(rec.strategy) << ',' << to_string(rec.reduction) << ',' << to_string(rec.x_load) << ','
            << rec.workers << ',' << rec.reps << ',' << rec.nnz << ',' << fmt_double(rec.median_seconds) << ','
            << fmt_double(rec.gflops) << ',' << fmt_double(rec.filling) << ',' << rec.num_blocks << ','
            << fmt_double(rec.avg_nnz_per_block) << ',' << rec.fma << '\n';
    }
}

std::vector<BenchRecord> read_csv(std::istream& in) {
    std::vector<BenchRecord> records;
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        auto fields = split_csv_line(line);
        if (!have_header) {
            if (fields.size() != kNumColumns || !std::equal(fields.begin(), fields.end(), std::begin(kColumns))) {
                throw std::runtime_error("csv line " + std::to_string(line_no) + ": unexpected header");
            }
            have_header = true;
            continue;
        }
        if (fields.size() != kNumColumns) {
            throw std::runtime_error("csv line " + std::to_string(line_no) + ": expected " +
                                     std::to_string(kNumColumns) + " fields, got " + std::to_string(fields.size()));
        }
        BenchRecord rec;
        rec.matrix = fields[0];
        rec.precision = parse_precision(fields[1]);
        rec.r = parse_number<unsigned>(fields[2], line_no, "r");
        rec.vs = parse_number<unsigned>(fields[3], line_no, "vs");
        rec.strategy = parse_strategy(fields[4]);
        rec.reduction = parse_reduction(fields[5]);
        rec.x_load = parse_xload(fields[6]);
        rec.workers = parse_number<unsigned>(fields[7], line_no, "workers");
        rec.reps = parse_number<unsigned>(fields[8], line_no, "reps");
        rec.nnz = parse_number<std::uint64_t>(fields[9], line_no, "nnz");
        rec.median_seconds = parse_number<double>(fields[10], line_no, "median_seconds");
        rec.gflops = parse_number<double>(fields[11], line_no, "gflops");
        rec.filling = parse_number<double>(fields[12], line_no, "filling");
        rec.num_blocks = parse_number<std::uint64_t>(fields[13], line_no, "num_blocks");
        rec.avg_nnz_per_block = parse_number<double>(fields[14], line_no, "avg_nnz_per_block");
        rec.fma = fields[15];
        records.push_back(std::move(rec));
    }
    if (!have_header) throw std::runtime_error("csv: missing header line");
    return records;
}

void write_scatter_csv(std::ostream& out, const std::vector<BenchRecord>& records) {
    out << "# x: average NNZ per block, y: GFlop/s\n";
    out << "matrix,precision,r,strategy,avg_nnz_per_block,gflops\n";
    for (const auto& rec : records) {
        if (rec.r == 0) continue;
        out << quote(rec.matrix) << ',' << to_string(rec.precision) << ',' << rec.r << ','
            << to_string(rec.strategy) << ',' << fmt_double(rec.avg_nnz_per_block) << ',' << fmt_double(rec.gflops)
            << '\n';
    }
}

// ------------------------------------------------------------ statistics

std::optional<double> StatsRow::filling(unsigned r, Precision p) const {
    for (const auto& c : cells) {
        if (c.r == r && c.precision == p) return c.filling;
    }
    return std::nullopt;
}

template <Real T>
StatsRow compute_stats(const std::string& name, const CsrMatrix<T>& m, const std::vector<Precision>& precisions,
                       const std::vector<unsigned>& rs, unsigned vs_override) {
    StatsRow row;
    row.name = name;
    row.num_rows = m.num_rows;
    row.num_cols = m.num_cols;
    row.nnz = m.nnz();
    row.nnz_per_row = m.num_rows ? double(m.nnz()) / m.num_rows : 0.0;
    for (unsigned r : rs) {
        for (Precision p : precisions) {
            FillingCell cell;
            cell.r = r;
            cell.vs = vs_override ? vs_override : default_lane_count(p);
            cell.precision = p;
            cell.num_blocks = count_blocks(m, r, cell.vs);
            cell.filling = cell.num_blocks ? double(m.nnz()) / (double(cell.num_blocks) * r * cell.vs) : 0.0;
            row.cells.push_back(cell);
        }
    }
    return row;
}

void print_stats_table(std::ostream& out, const std::vector<StatsRow>& rows, int decimals) {
    if (rows.empty()) return;
    out << "Name Dim NNZ NNZ/row";
    std::vector<unsigned> rs;
    for (const auto& c : rows.front().cells) {
        if (std::find(rs.begin(), rs.end(), c.r) == rs.end()) rs.push_back(c.r);
    }
    for (unsigned r : rs) {
        out << " b(" << r << ",VS)";
    }
    out << '\n';
    for (const auto& row : rows) {
        out << row.name << ' ' << row.num_rows << ' ' << row.nnz << ' ' << std::defaultfloat
            << std::setprecision(6) << row.nnz_per_row;
        for (unsigned r : rs) {
            out << ' ';
            bool first = true;
            for (const auto& c : row.cells) {
                if (c.r != r) continue;
                out << (first ? "" : "|") << std::fixed << std::setprecision(decimals) << 100.0 * c.filling << '%';
                first = false;
            }
        }
        out << std::defaultfloat << '\n';
    }
}

// ----------------------------------------------------------------- verify

std::vector<GridPoint> expand_grid(const GridSpec& grid, Precision precision) {
    std::vector<GridPoint> points;
    const unsigned vs = grid.vs ? grid.vs : default_lane_count(precision);
    if (grid.include_csr) {
        GridPoint p;
        p.shape = {0, 0};
        p.cfg.strategy = Strategy::scalar;
        p.cfg.precision = precision;
        points.push_back(p);
    }
    for (unsigned r : grid.rs) {
        for (Strategy s : grid.strategies) {
            for (Reduction red : grid.reductions) {
                for (XLoad xl : grid.x_loads) {
                    GridPoint p;
                    p.shape = {r, vs};
                    p.cfg = {s, red, xl, precision, vs};
                    points.push_back(p);
                }
            }
        }
    }
    return points;
}

template <Real T>
std::optional<Index> inject_mask_fault(Spc5Matrix<T>& m) {
    for (Index panel = 0; panel < m.num_panels(); ++panel) {
        for (Index b = m.block_rowptr[panel]; b < m.block_rowptr[panel + 1]; ++b) {
            for (unsigned i = 0; i < m.r; ++i) {
                BlockMask& mask = m.block_masks[std::size_t(b) * m.r + i];
                if (mask == 0) continue;
                for (unsigned k = 0; k < m.vs; ++k) {
                    if ((mask & (1u << k)) == 0 && std::uint64_t(m.block_colidx[b]) + k < m.num_cols) {
                        const BlockMask lowest = BlockMask(mask & (~mask + 1u));
                        mask = BlockMask((mask & ~lowest) | (1u << k));
                        return panel * m.r + i;
                    }
                }
            }
        }
    }
    return std::nullopt;
}

template <Real T>
std::vector<VerifyOutcome> run_verify(const CsrMatrix<T>& m, const GridSpec& grid, std::size_t trials,
                                      std::uint64_t seed, FaultInjection fault) {
    std::vector<VerifyOutcome> outcomes;
    std::map<std::pair<unsigned, unsigned>, Spc5Matrix<T>> converted;
    for (const GridPoint& point : expand_grid(grid, precision_of<T>())) {
        VerifyOutcome outcome{point, {}};
        if (point.shape.r == 0) {
            std::mt19937_64 rng(seed);
            std::uniform_real_distribution<double> dist(-1.0, 1.0);
            std::vector<T> x(m.num_cols), y(m.num_rows);
            for (std::size_t t = 0; t < trials; ++t) {
                for (auto& v : x) v = T(dist(rng));
                std::fill(y.begin(), y.end(), T(0));
                spmv_csr<T>(m, x, y);
                auto one = compare_with_oracle<T>(m, x, y);
                outcome.report.trials = t + 1;
                outcome.report.max_scaled_error = std::max(outcome.report.max_scaled_error, one.max_scaled_error);
                if (!one.passed && outcome.report.passed) {
                    outcome.report = one;
                    outcome.report.first_bad_trial = t;
                }
            }
        } else {
            const auto key = std::make_pair(point.shape.r, point.shape.vs);
            auto it = converted.find(key);
            if (it == converted.end()) {
                Spc5Matrix<T> blocked = csr_to_spc5(m, point.shape.r, point.shape.vs);
                if (fault == FaultInjection::move_mask_bit) inject_mask_fault(blocked);
                it = converted.emplace(key, std::move(blocked)).first;
            }
            outcome.report = verify_against_oracle(m, it->second, point.cfg, trials, seed);
        }
        outcomes.push_back(std::move(outcome));
    }
    return outcomes;
}

// ----------------------------------------------------------------- timing

double median(std::vector<double> samples) {
    if (samples.empty()) throw std::invalid_argument("median of an empty sample");
    std::sort(samples.begin(), samples.end());
    const std::size_t n = samples.size();
    return n % 2 ? samples[n / 2] : 0.5 * (samples[n / 2 - 1] + samples[n / 2]);
}

template <Real T>
BenchOutcome run_bench(const std::string& name, const CsrMatrix<T>& m, const GridSpec& grid,
                       const TimingOptions& opts) {
    if (opts.reps == 0) throw std::invalid_argument("run_bench: reps must be at least 1");
    BenchOutcome outcome;
    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<T> x(m.num_cols);
    for (auto& v : x) v = T(dist(rng));
    std::vector<T> y(m.num_rows);

    std::map<std::pair<unsigned, unsigned>, std::pair<Spc5Matrix<T>, Partition>> converted;
    for (const GridPoint& point : expand_grid(grid, precision_of<T>())) {
        BenchRecord rec;
        rec.matrix = name;
        rec.precision = precision_of<T>();
        rec.r = point.shape.r;
        rec.vs = point.shape.vs;
        rec.strategy = point.cfg.strategy;
        rec.reduction = point.cfg.reduction;
        rec.x_load = point.cfg.x_load;
        rec.workers = rec.r == 0 ? 1 : opts.workers;
        rec.reps = opts.reps;
        rec.nnz = m.nnz();
        rec.fma = vlane::kFmaMode;

        std::function<void()> run;
        if (rec.r == 0) {
            auto check = compare_with_oracle<T>(m, x, [&] {
                std::vector<T> tmp(m.num_rows, T(0));
                spmv_csr<T>(m, x, tmp);
                return tmp;
            }());
            if (!check.passed) {
                outcome.skipped.push_back(name + " csr: " + check.diagnostic);
                continue;
            }
            run = [&] { spmv_csr<T>(m, x, y); };
        } else {
            const auto key = std::make_pair(point.shape.r, point.shape.vs);
            auto it = converted.find(key);
            if (it == converted.end()) {
                auto blocked = csr_to_spc5(m, point.shape.r, point.shape.vs);
                auto part = partition_by_nnz(blocked, opts.workers);
                it = converted.emplace(key, std::make_pair(std::move(blocked), std::move(part))).first;
            }
            const auto& [blocked, part] = it->second;
            const VerifyReport check =
                verify_against_oracle(m, blocked, point.cfg, opts.verify_trials, opts.seed + 1);
            if (!check.passed) {
                outcome.skipped.push_back(name + " b(" + std::to_string(rec.r) + "," + std::to_string(rec.vs) +
                                          ") " + describe(point.cfg) + ": " + check.diagnostic);
                continue;
            }
            const FillingStats stats = filling_stats(blocked);
            rec.filling = stats.filling;
            rec.num_blocks = stats.num_blocks;
            rec.avg_nnz_per_block = stats.avg_nnz_per_block;
            const KernelConfig cfg = point.cfg;
            run = [&, cfg] { spmv_parallel<T>(blocked, x, y, cfg, part); };
        }

        for (unsigned w = 0; w < opts.warmup; ++w) run();
        std::vector<double> samples;
        samples.reserve(opts.reps);
        for (unsigned rep = 0; rep < opts.reps; ++rep) {
            std::fill(y.begin(), y.end(), T(0));
            const auto start = std::chrono::steady_clock::now();
            run();
            samples.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
        }
        rec.median_seconds = median(samples);
        rec.gflops = gflops_for(rec.nnz, rec.median_seconds);
        outcome.records.push_back(std::move(rec));
    }
    return outcome;
}

// ------------------------------------------------------------- cost model

std::map<CostModelKey, CostModelFit> fit_cost_model(const std::vector<BenchRecord>& records) {
    std::map<CostModelKey, std::vector<const BenchRecord*>> groups;
    for (const auto& rec : records) {
        if (rec.r == 0) continue;
        CostModelKey key{rec.r, rec.vs, rec.precision, rec.strategy, rec.reduction, rec.x_load, rec.workers};
        groups[key].push_back(&rec);
    }
    if (groups.empty()) throw InsufficientData("insufficient data: no blocked records to fit");

    std::map<CostModelKey, CostModelFit> fits;
    for (const auto& [key, group] : groups) {
        if (group.size() < kMinFitSamples) {
            throw InsufficientData("insufficient data: b(" + std::to_string(key.r) + "," + std::to_string(key.vs) +
                                   ") " + std::string(to_string(key.precision)) + " " +
                                   std::string(to_string(key.strategy)) + " has " + std::to_string(group.size()) +
                                   " records, need " + std::to_string(kMinFitSamples));
        }
        double sxy = 0, sxx = 0, mean_t = 0;
        for (const auto* rec : group) {
            const double b = double(rec->num_blocks);
            sxy += b * rec->median_seconds;
            sxx += b * b;
            mean_t += rec->median_seconds;
        }
        mean_t /= double(group.size());
        CostModelFit fit;
        fit.samples = group.size();
        fit.cost_per_block_seconds = sxx > 0 ? sxy / sxx : 0.0;
        double ss_res = 0, ss_tot = 0;
        for (const auto* rec : group) {
            const double predicted = fit.cost_per_block_seconds * double(rec->num_blocks);
            ss_res += (rec->median_seconds - predicted) * (rec->median_seconds - predicted);
            ss_tot += (rec->median_seconds - mean_t) * (rec->median_seconds - mean_t);
        }
        fit.r_squared = ss_tot > 0 ? 1.0 - ss_res / ss_tot : (ss_res == 0 ? 1.0 : 0.0);
        fit.constant_cost = fit.r_squared >= kConstantCostR2;
        fits.emplace(key, fit);
    }
    return fits;
}

namespace {

std::vector<double> average_ranks(const std::vector<double>& v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(v.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
        const double rank = 0.5 * double(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
        i = j + 1;
    }
    return ranks;
}

}  // namespace

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.size() < 2) {
        throw std::invalid_argument("spearman: need two samples of equal size >= 2");
    }
    const auto ra = average_ranks(a);
    const auto rb = average_ranks(b);
    const double n = double(a.size());
    const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
    const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
    double cov = 0, va = 0, vb = 0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        cov += (ra[i] - ma) * (rb[i] - mb);
        va += (ra[i] - ma) * (ra[i] - ma);
        vb += (rb[i] - mb) * (rb[i] - mb);
    }
    if (va == 0 || vb == 0) return 0.0;
    return cov / std::sqrt(va * vb);
}

#define SPC5_BENCH_INSTANTIATE(T)                                                                               \
    template StatsRow compute_stats<T>(const std::string&, const CsrMatrix<T>&, const std::vector<Precision>&, \
                                       const std::vector<unsigned>&, unsigned);                                \
    template std::optional<Index> inject_mask_fault<T>(Spc5Matrix<T>&);                                         \
    template std::vector<VerifyOutcome> run_verify<T>(const CsrMatrix<T>&, const GridSpec&, std::size_t,      \
                                                      std::uint64_t, FaultInjection);                          \
    template BenchOutcome run_bench<T>(const std::string&, const CsrMatrix<T>&, const GridSpec&,              \
                                       const TimingOptions&);
SPC5_BENCH_INSTANTIATE(float)
SPC5_BENCH_INSTANTIATE(double)

}  // namespace spc5::bench
