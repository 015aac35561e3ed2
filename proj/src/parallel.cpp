#include "svs/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <thread>
#include <vector>

namespace svs {

namespace {
std::atomic<int> g_threads{1};
}

void set_num_threads(int n) {
    if (n <= 0) n = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    g_threads.store(n);
}

int num_threads() { return g_threads.load(); }

void parallel_rows(Eigen::Index rows, const std::function<void(Eigen::Index)>& fn) {
    const Eigen::Index workers = std::min<Eigen::Index>(num_threads(), rows);
    if (workers <= 1) {
        for (Eigen::Index r = 0; r < rows; ++r) fn(r);
        return;
    }
    const Eigen::Index chunk = (rows + workers - 1) / workers;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (Eigen::Index w = 0; w < workers; ++w) {
        const Eigen::Index begin = w * chunk;
        const Eigen::Index end = std::min(rows, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&fn, begin, end] {
            for (Eigen::Index r = begin; r < end; ++r) fn(r);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace svs
