#include "fakeres/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

#include "fakeres/errors.hpp"

namespace fakeres {

int default_thread_count() {
    if (const char* env = std::getenv("FAKERES_THREADS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0)
            return static_cast<int>(std::min(v, 1024l));
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

int resolve_threads(int requested) {
    if (requested < 0)
        throw parameter_error("thread count must be >= 0, got " + std::to_string(requested));
    return requested == 0 ? default_thread_count() : requested;
}

void parallel_for(std::int64_t count, int threads,
                  const std::function<void(std::int64_t, std::int64_t)>& fn) {
    if (count <= 0)
        return;
    int n = resolve_threads(threads);
    n = static_cast<int>(std::min<std::int64_t>(n, count));
    if (n <= 1) {
        fn(0, count);
        return;
    }

    // Static partition: chunk c covers [c*q + min(c,r), ...) where
    // q = count/n, r = count%n. Independent of scheduling.
    std::int64_t q = count / n;
    std::int64_t r = count % n;
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
    pool.reserve(static_cast<std::size_t>(n));
    for (int c = 0; c < n; ++c) {
        std::int64_t begin = c * q + std::min<std::int64_t>(c, r);
        std::int64_t end = begin + q + (c < r ? 1 : 0);
        pool.emplace_back([&, c, begin, end] {
            try {
                fn(begin, end);
            } catch (...) {
                errors[static_cast<std::size_t>(c)] = std::current_exception();
            }
        });
    }
    for (auto& t : pool)
        t.join();
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);
}

} // namespace fakeres
