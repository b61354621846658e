#include "bsde/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace bsde {

namespace {

std::atomic<std::size_t>& thread_setting() {
    static std::atomic<std::size_t> n{std::max<std::size_t>(1, std::thread::hardware_concurrency())};
    return n;
}

}  // namespace

std::size_t thread_count() { return thread_setting().load(); }

void set_thread_count(std::size_t n) { thread_setting().store(std::max<std::size_t>(1, n)); }

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body) {
    if (n == 0) return;
    // Small ranges are not worth a thread launch.
    constexpr std::size_t min_chunk = 1024;
    const std::size_t workers = std::min(thread_count(), (n + min_chunk - 1) / min_chunk);
    if (workers <= 1) {
        body(0, n);
        return;
    }

    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto run = [&](std::size_t w) {
        const std::size_t begin = n * w / workers;
        const std::size_t end = n * (w + 1) / workers;
        try {
            body(begin, end);
        } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
        }
    };
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(run, w);
    run(0);
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace bsde
