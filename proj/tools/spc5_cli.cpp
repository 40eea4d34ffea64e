// spc5-cli: fetch matrices, print block-filling tables, verify kernels
// against the oracle, time them and fit the per-block cost model.

#include <charconv>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "spc5/bench.hpp"
#include "spc5/generators.hpp"
#include "spc5/matrix_market.hpp"
#include "spc5/parallel.hpp"
#include "spc5/suitesparse.hpp"
#include "spc5/vlane.hpp"

using namespace spc5;

namespace {

constexpr int kExitFailure = 1;

struct Common {
    std::vector<std::string> matrices;
    std::vector<std::string> precisions{"f64"};
    std::vector<std::string> formats{"b1", "b2", "b4", "b8"};
    unsigned vs = 0;
    std::string cache_dir;
    std::string base_url;

    std::filesystem::path cache() const { return cache_dir.empty() ? default_cache_dir() : std::filesystem::path(cache_dir); }
    std::string url() const { return base_url.empty() ? default_base_url() : base_url; }
};

void add_common(CLI::App* cmd, Common& c, bool formats_with_csr) {
    cmd->add_option("-m,--matrix", c.matrices,
                    "Matrix: .mtx path, Group/Name, dense:N, identity:N or random:ROWS:COLS:K:CLUSTER:SEED")
        ->required()
        ->delimiter(',');
    cmd->add_option("-p,--precision", c.precisions, "f64, f32 or both (comma separated)")
        ->delimiter(',')
        ->check(CLI::IsMember({"f32", "f64"}));
    cmd->add_option("-f,--format", c.formats,
                    formats_with_csr ? "Block formats b1,b2,b4,b8 and csr" : "Block formats b1,b2,b4,b8")
        ->delimiter(',')
        ->check(formats_with_csr ? CLI::IsMember({"b1", "b2", "b4", "b8", "csr"})
                                 : CLI::IsMember({"b1", "b2", "b4", "b8"}));
    cmd->add_option("--vs", c.vs, "Block width (default 8 for f64, 16 for f32)")->check(CLI::IsMember({4, 8, 16}));
    cmd->add_option("--cache-dir", c.cache_dir, std::string("Download cache (default $") + kCacheDirEnv + ")");
    cmd->add_option("--base-url", c.base_url, "Mirror of the SuiteSparse MM tree");
}

std::vector<unsigned> rows_per_block(const std::vector<std::string>& formats) {
    std::vector<unsigned> rs;
    for (const auto& f : formats) {
        if (f != "csr") rs.push_back(unsigned(std::stoul(f.substr(1))));
    }
    return rs;
}

bool wants_csr(const std::vector<std::string>& formats) {
    return std::find(formats.begin(), formats.end(), "csr") != formats.end();
}

std::vector<Precision> precisions_of(const std::vector<std::string>& names) {
    std::vector<Precision> out;
    for (const auto& n : names) out.push_back(parse_precision(n));
    return out;
}

template <class N>
N number(const std::string& text, const char* what) {
    N value{};
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        throw std::invalid_argument(std::string("bad ") + what + " '" + text + "'");
    }
    return value;
}

template <Real T>
CsrMatrix<T> synthetic(const MatrixSource& src) {
    const auto& p = src.params;
    if ((src.name == "dense" || src.name == "identity") && (p.size() == 1 || p.size() == 2)) {
        const Index n = number<Index>(p[0], "size");
        if (src.name == "identity") return make_identity<T>(n);
        return make_dense<T>(n, p.size() == 2 ? number<std::uint64_t>(p[1], "seed") : kDefaultDenseSeed);
    }
    if (src.name == "random" && p.size() == 5) {
        return make_random<T>(number<Index>(p[0], "rows"), number<Index>(p[1], "columns"),
                              number<Index>(p[2], "nnz per row"), number<double>(p[3], "clustering"),
                              number<std::uint64_t>(p[4], "seed"));
    }
    throw std::invalid_argument("unknown synthetic matrix '" + src.name +
                                "' (expected dense:N[:SEED], identity:N or random:ROWS:COLS:K:CLUSTER:SEED)");
}

template <Real T>
CsrMatrix<T> load(const MatrixSource& src, const Common& c) {
    switch (src.origin) {
        case MatrixSource::Origin::synthetic: return synthetic<T>(src);
        case MatrixSource::Origin::local_file: return coo_to_csr(read_matrix_market<T>(src.path));
        case MatrixSource::Origin::suitesparse: {
            const auto path = fetch_suitesparse(src.group, src.name, c.cache(), c.url());
            return coo_to_csr(read_matrix_market<T>(path));
        }
    }
    throw std::logic_error("unreachable");
}

bench::GridSpec kernel_grid(const std::vector<std::string>& strategies, const std::vector<std::string>& reductions,
                            const std::vector<std::string>& x_loads, const Common& c) {
    bench::GridSpec grid;
    grid.rs = rows_per_block(c.formats);
    grid.vs = c.vs;
    grid.include_csr = wants_csr(c.formats);
    grid.strategies.clear();
    grid.reductions.clear();
    grid.x_loads.clear();
    for (const auto& s : strategies) grid.strategies.push_back(parse_strategy(s));
    for (const auto& r : reductions) grid.reductions.push_back(parse_reduction(r));
    for (const auto& x : x_loads) grid.x_loads.push_back(parse_xload(x));
    return grid;
}

// ------------------------------------------------------------------ stats

int cmd_stats(const Common& c, int digits) {
    std::vector<bench::StatsRow> rows;
    for (const auto& spec : c.matrices) {
        const auto src = MatrixSource::parse(spec);
        // Filling only depends on the pattern, so one load serves both precisions.
        const auto m = load<double>(src, c);
        rows.push_back(bench::compute_stats(src.display_name(), m, precisions_of(c.precisions),
                                            rows_per_block(c.formats), c.vs));
    }
    std::cout << "# filling per b(r,VS), precisions " << [&] {
        std::string s;
        for (const auto& p : c.precisions) s += (s.empty() ? "" : "|") + p;
        return s;
    }() << '\n';
    bench::print_stats_table(std::cout, rows, digits);
    return 0;
}

// ----------------------------------------------------------------- verify

template <Real T>
bool verify_one(const std::string& name, const CsrMatrix<T>& m, const bench::GridSpec& grid, std::size_t trials,
                std::uint64_t seed, bool inject) {
    const auto fault = inject ? bench::FaultInjection::move_mask_bit : bench::FaultInjection::none;
    bool all_passed = true;
    for (const auto& o : bench::run_verify(m, grid, trials, seed, fault)) {
        const std::string format =
            o.point.shape.r == 0 ? "csr" : "b(" + std::to_string(o.point.shape.r) + "," +
                                               std::to_string(o.point.shape.vs) + ")";
        std::ostringstream line;
        line << (o.report.passed ? "PASS " : "FAIL ") << name << ' ' << format << ' ' << describe(o.point.cfg)
             << " max_err=" << std::setprecision(3) << o.report.max_scaled_error << "eps";
        if (!o.report.passed) {
            if (o.report.first_bad_row) line << " first_bad_row=" << *o.report.first_bad_row;
            line << " (" << o.report.diagnostic << ")";
            all_passed = false;
        }
        std::cout << line.str() << '\n';
    }
    return all_passed;
}

int cmd_verify(const Common& c, const bench::GridSpec& grid, std::size_t trials, std::uint64_t seed, bool inject) {
    bool ok = true;
    for (const auto& spec : c.matrices) {
        const auto src = MatrixSource::parse(spec);
        for (Precision p : precisions_of(c.precisions)) {
            if (p == Precision::f64) {
                ok &= verify_one(src.display_name(), load<double>(src, c), grid, trials, seed, inject);
            } else {
                ok &= verify_one(src.display_name(), load<float>(src, c), grid, trials, seed, inject);
            }
        }
    }
    std::cout << (ok ? "verify: all configurations passed\n" : "verify: FAILED\n");
    return ok ? 0 : kExitFailure;
}

// ------------------------------------------------------------------ bench

int cmd_bench(const Common& c, const bench::GridSpec& grid, const bench::TimingOptions& opts,
              const std::string& out_path, const std::string& scatter_path) {
    std::vector<bench::BenchRecord> records;
    std::vector<std::string> skipped;
    for (const auto& spec : c.matrices) {
        const auto src = MatrixSource::parse(spec);
        for (Precision p : precisions_of(c.precisions)) {
            auto outcome = p == Precision::f64 ? bench::run_bench(src.display_name(), load<double>(src, c), grid, opts)
                                               : bench::run_bench(src.display_name(), load<float>(src, c), grid, opts);
            records.insert(records.end(), outcome.records.begin(), outcome.records.end());
            skipped.insert(skipped.end(), outcome.skipped.begin(), outcome.skipped.end());
        }
    }
    if (out_path.empty() || out_path == "-") {
        bench::write_csv(std::cout, records);
    } else {
        std::ofstream out(out_path);
        if (!out) throw std::runtime_error("cannot write " + out_path);
        bench::write_csv(out, records);
        std::cerr << "wrote " << records.size() << " records to " << out_path << '\n';
    }
    if (!scatter_path.empty()) {
        std::ofstream out(scatter_path);
        if (!out) throw std::runtime_error("cannot write " + scatter_path);
        bench::write_scatter_csv(out, records);
    }
    for (const auto& s : skipped) std::cerr << "skipped (failed validation): " << s << '\n';
    return skipped.empty() ? 0 : kExitFailure;
}

// -------------------------------------------------------------------- fit

int cmd_fit(const std::vector<std::string>& csv_paths) {
    std::vector<bench::BenchRecord> records;
    for (const auto& path : csv_paths) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open " + path);
        auto part = bench::read_csv(in);
        records.insert(records.end(), part.begin(), part.end());
    }
    const auto fits = bench::fit_cost_model(records);

    std::cout << "r,vs,precision,strategy,reduction,x_load,workers,samples,cost_per_block_ns,r_squared,"
                 "spearman_time_blocks,constant_cost\n";
    for (const auto& [key, fit] : fits) {
        std::vector<double> blocks, times;
        for (const auto& rec : records) {
            const bench::CostModelKey k{rec.r, rec.vs, rec.precision, rec.strategy, rec.reduction, rec.x_load,
                                        rec.workers};
            if (rec.r != 0 && k == key) {
                blocks.push_back(double(rec.num_blocks));
                times.push_back(rec.median_seconds);
            }
        }
        std::cout << key.r << ',' << key.vs << ',' << to_string(key.precision) << ',' << to_string(key.strategy)
                  << ',' << to_string(key.reduction) << ',' << to_string(key.x_load) << ',' << key.workers << ','
                  << fit.samples << ',' << std::setprecision(6) << fit.cost_per_block_seconds * 1e9 << ','
                  << fit.r_squared << ',' << bench::spearman(blocks, times) << ','
                  << (fit.constant_cost ? "yes" : "no (R2 < 0.9)") << '\n';
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"SPC5 block sparse kernels: fetch, stats, verify, bench, fit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "spc5-cli 1.0 (" + std::string(vlane::kFmaMode) + " multiply-add)");

    auto* fetch = app.add_subcommand("fetch", "Download Group/Name from SuiteSparse into the cache");
    std::vector<std::string> fetch_names;
    Common fetch_opts;
    fetch->add_option("matrix", fetch_names, "Group/Name, e.g. ND/nd6k")->required();
    fetch->add_option("--cache-dir", fetch_opts.cache_dir, "Download cache");
    fetch->add_option("--base-url", fetch_opts.base_url, "Mirror of the SuiteSparse MM tree");

    auto* stats = app.add_subcommand("stats", "Table of dimensions, NNZ and block filling");
    Common stats_opts;
    stats_opts.precisions = {"f64", "f32"};
    int digits = 0;
    add_common(stats, stats_opts, false);
    stats->add_option("--digits", digits, "Decimals in filling percentages")->check(CLI::Range(0, 6));

    std::vector<std::string> strategies{"scalar", "expand", "compact"};
    std::vector<std::string> reductions{"hsum", "multi"};
    std::vector<std::string> x_loads{"partial", "single"};
    auto add_kernel_flags = [&](CLI::App* cmd) {
        cmd->add_option("--strategy", strategies, "scalar, expand, compact")
            ->delimiter(',')
            ->check(CLI::IsMember({"scalar", "expand", "compact"}));
        cmd->add_option("--reduction", reductions, "hsum, multi")->delimiter(',')->check(CLI::IsMember({"hsum", "multi"}));
        cmd->add_option("--xload", x_loads, "partial, single")
            ->delimiter(',')
            ->check(CLI::IsMember({"partial", "single"}));
    };

    auto* verify = app.add_subcommand("verify", "Check every kernel configuration against the oracle");
    Common verify_opts;
    verify_opts.precisions = {"f64", "f32"};
    std::size_t trials = 3;
    std::uint64_t seed = 1;
    bool inject = false;
    add_common(verify, verify_opts, true);
    add_kernel_flags(verify);
    verify->add_option("--trials", trials, "Random x vectors per configuration");
    verify->add_option("--seed", seed, "Seed for the random x vectors");
    verify->add_flag("--inject-fault", inject, "Move one mask bit after conversion (the run must fail)");

    auto* bench_cmd = app.add_subcommand("bench", "Time kernels and write BenchRecord CSV");
    Common bench_opts;
    bench_opts.formats = {"b1", "b2", "b4", "b8", "csr"};
    bench::TimingOptions timing;
    timing.workers = default_worker_count();
    std::string out_path, scatter_path;
    add_common(bench_cmd, bench_opts, true);
    add_kernel_flags(bench_cmd);
    bench_cmd->add_option("-t,--threads", timing.workers, "Workers (default $SPC5_NUM_THREADS or all cores)")
        ->check(CLI::PositiveNumber);
    bench_cmd->add_option("--reps", timing.reps, "Timed runs per configuration")->check(CLI::PositiveNumber);
    bench_cmd->add_option("--warmup", timing.warmup, "Untimed runs before timing");
    bench_cmd->add_option("-o,--out", out_path, "CSV output (default stdout)");
    bench_cmd->add_option("--scatter", scatter_path, "Also write (avg NNZ per block, GFlop/s) CSV here");

    auto* fit = app.add_subcommand("fit", "Fit time = alpha * num_blocks per configuration");
    std::vector<std::string> csv_paths;
    fit->add_option("csv", csv_paths, "BenchRecord CSV files")->required()->check(CLI::ExistingFile);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*fetch) {
            for (const auto& spec : fetch_names) {
                const auto src = MatrixSource::parse(spec);
                if (src.origin != MatrixSource::Origin::suitesparse) {
                    throw std::invalid_argument("fetch expects Group/Name, got '" + spec + "'");
                }
                std::cout << fetch_suitesparse(src.group, src.name, fetch_opts.cache(), fetch_opts.url()).string()
                          << '\n';
            }
            return 0;
        }
        if (*stats) return cmd_stats(stats_opts, digits);
        if (*verify) {
            return cmd_verify(verify_opts, kernel_grid(strategies, reductions, x_loads, verify_opts), trials, seed,
                              inject);
        }
        if (*bench_cmd) {
            return cmd_bench(bench_opts, kernel_grid(strategies, reductions, x_loads, bench_opts), timing, out_path,
                             scatter_path);
        }
        if (*fit) return cmd_fit(csv_paths);
    } catch (const bench::InsufficientData& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFailure;
    } catch (const HttpError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    return 0;
}
