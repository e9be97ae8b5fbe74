#include "proattn/threads.hpp"

#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace proattn {

std::size_t thread_cap() {
    std::size_t cap = 0;
    if (const char* env = std::getenv("PROTATTN_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end && *end == '\0' && v >= 0) cap = static_cast<std::size_t>(v);
    }
    if (cap == 0) {
        const unsigned hw = std::thread::hardware_concurrency();
        cap = hw == 0 ? 1 : hw;
    }
    return cap;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    const std::size_t workers = std::min(thread_cap(), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t lo = n * w / workers;
        const std::size_t hi = n * (w + 1) / workers;
        pool.emplace_back([lo, hi, &fn] {
            for (std::size_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

} // namespace proattn
