#include "czvar/common.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace czvar {

namespace {
std::atomic<unsigned> g_workers{1};
thread_local bool t_inside_pool = false;
}  // namespace

void set_worker_count(unsigned jobs) { g_workers = std::max(1u, jobs); }

unsigned worker_count() { return g_workers; }

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) {
    const unsigned jobs = std::min<std::size_t>(g_workers.load(), count);
    // Nested loops run serially inside the outer loop's workers.
    if (jobs <= 1 || t_inside_pool) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (unsigned w = 0; w < jobs; ++w) {
        pool.emplace_back([&] {
            t_inside_pool = true;
            try {
                for (std::size_t i = next++; i < count; i = next++) body(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                next = count;
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace czvar
