#include "helix/util.hpp"

#include <atomic>
#include <cstdlib>
#include <thread>

namespace helix {

int thread_count() {
    static int cached = [] {
        if (const char* env = std::getenv("HELIX_THREADS")) {
            int n = std::atoi(env);
            if (n > 0) return n;
        }
        unsigned hw = std::thread::hardware_concurrency();
        return hw > 0 ? static_cast<int>(hw) : 1;
    }();
    return cached;
}

void parallel_for(std::int64_t n, const std::function<void(std::int64_t)>& body) {
    int nt = thread_count();
    if (nt <= 1 || n < 2) {
        for (std::int64_t i = 0; i < n; ++i) body(i);
        return;
    }
    if (nt > n) nt = static_cast<int>(n);
    std::atomic<std::int64_t> next(0);
    auto worker = [&] {
        for (;;) {
            std::int64_t i = next.fetch_add(1);
            if (i >= n) break;
            body(i);
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(nt - 1);
    for (int t = 1; t < nt; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
}

}  // namespace helix
