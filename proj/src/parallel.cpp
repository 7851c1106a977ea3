#include "bsdekit/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace bsdekit {

namespace {
std::atomic<int> g_threads{0};

int resolve_default() {
    if (const char* env = std::getenv("BSDEKIT_THREADS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end != env && v > 0 && v < 1024) return static_cast<int>(v);
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}
} // namespace

int thread_count() {
    int v = g_threads.load(std::memory_order_relaxed);
    return v > 0 ? v : resolve_default();
}

void set_thread_count(int n) {
    g_threads.store(n > 0 ? n : 0, std::memory_order_relaxed);
}

void parallel_for(std::size_t n,
                  const std::function<void(std::size_t, std::size_t)>& fn) {
    if (n == 0) return;
    const int workers = thread_count();
    // Thread spawn costs dwarf small slices; run those inline.
    if (workers <= 1 || n < 8192) {
        fn(0, n);
        return;
    }
    const std::size_t w = static_cast<std::size_t>(workers);
    const std::size_t chunk = (n + w - 1) / w;
    std::vector<std::thread> pool;
    pool.reserve(w);
    for (std::size_t k = 0; k < w; ++k) {
        std::size_t b = k * chunk;
        if (b >= n) break;
        std::size_t e = std::min(n, b + chunk);
        pool.emplace_back([&fn, b, e] { fn(b, e); });
    }
    for (auto& t : pool) t.join();
}

} // namespace bsdekit
