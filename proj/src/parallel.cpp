#include "spc5/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <exception>
#include <stdexcept>
#include <string>
#include <thread>

namespace spc5 {

unsigned default_worker_count() {
    if (const char* env = std::getenv("SPC5_NUM_THREADS"); env && *env) {
        try {
            const long n = std::stol(env);
            if (n >= 1) return unsigned(n);
        } catch (const std::exception&) {
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

template <Real T>
Partition partition_by_nnz(const Spc5Matrix<T>& m, unsigned workers) {
    if (workers == 0) throw std::invalid_argument("partition_by_nnz: need at least one worker");
    const Index panels = m.num_panels();

    // prefix[p] = number of values stored before panel p.
    std::vector<std::size_t> prefix(std::size_t(panels) + 1, 0);
    for (Index p = 0; p < panels; ++p) {
        std::size_t count = 0;
        for (std::size_t k = std::size_t(m.block_rowptr[p]) * m.r; k < std::size_t(m.block_rowptr[p + 1]) * m.r; ++k) {
            count += popcount(m.block_masks[k]);
        }
        prefix[p + 1] = prefix[p] + count;
    }
    const std::size_t total = prefix.back();

    std::vector<Index> bounds(workers + 1, 0);
    bounds[workers] = panels;
    for (unsigned k = 1; k < workers; ++k) {
        const long double target = static_cast<long double>(total) * k / workers;
        // First edge at or past the target, then step back if the previous edge is closer.
        auto it = std::lower_bound(prefix.begin(), prefix.end(), target,
                                   [](std::size_t v, long double t) { return static_cast<long double>(v) < t; });
        Index edge = Index(it - prefix.begin());
        if (edge > 0 && target - prefix[edge - 1] <= static_cast<long double>(prefix[edge]) - target) {
            edge -= 1;
        }
        bounds[k] = std::clamp(edge, bounds[k - 1], panels);
    }

    Partition part;
    part.ranges.reserve(workers);
    for (unsigned k = 0; k < workers; ++k) {
        part.ranges.push_back({bounds[k], bounds[k + 1], prefix[bounds[k]]});
    }
    return part;
}

template <Real T>
SpmvResult spmv_parallel(const Spc5Matrix<T>& m, std::span<const T> x, std::span<T> y, const KernelConfig& cfg,
                         const Partition& partition) {
    const auto start = std::chrono::steady_clock::now();
    if (partition.ranges.size() <= 1) {
        if (!partition.ranges.empty()) spmv_range(m, x, y, cfg, partition.ranges.front());
    } else {
        std::vector<std::exception_ptr> errors(partition.ranges.size());
        {
            std::vector<std::jthread> threads;
            threads.reserve(partition.ranges.size() - 1);
            for (std::size_t w = 1; w < partition.ranges.size(); ++w) {
                if (partition.ranges[w].empty()) continue;
                threads.emplace_back([&, w] {
                    try {
                        spmv_range(m, x, y, cfg, partition.ranges[w]);
                    } catch (...) {
                        errors[w] = std::current_exception();
                    }
                });
            }
            try {
                if (!partition.ranges[0].empty()) spmv_range(m, x, y, cfg, partition.ranges[0]);
            } catch (...) {
                errors[0] = std::current_exception();
            }
        }
        for (auto& e : errors) {
            if (e) std::rethrow_exception(e);
        }
    }
    SpmvResult result;
    result.flops = 2 * std::uint64_t(m.nnz());
    result.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

template <Real T>
SpmvResult spmv_parallel(const Spc5Matrix<T>& m, std::span<const T> x, std::span<T> y, const KernelConfig& cfg,
                         unsigned workers) {
    return spmv_parallel(m, x, y, cfg, partition_by_nnz(m, workers));
}

#define SPC5_PARALLEL_INSTANTIATE(T)                                                              \
    template Partition partition_by_nnz<T>(const Spc5Matrix<T>&, unsigned);                      \
    template SpmvResult spmv_parallel<T>(const Spc5Matrix<T>&, std::span<const T>, std::span<T>, \
                                         const KernelConfig&, const Partition&);                 \
    template SpmvResult spmv_parallel<T>(const Spc5Matrix<T>&, std::span<const T>, std::span<T>, \
                                         const KernelConfig&, unsigned);
SPC5_PARALLEL_INSTANTIATE(float)
SPC5_PARALLEL_INSTANTIATE(double)

}  // namespace spc5
