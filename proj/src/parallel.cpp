#include "mfb/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace mfb {

namespace {

std::atomic<std::size_t> g_override{0};

std::size_t env_workers() {
    const char* env = std::getenv("MFB_THREADS");
    if (env == nullptr) return 0;
    try {
        const long v = std::stol(env);
        return v > 0 ? static_cast<std::size_t>(v) : 0;
    } catch (...) {
        return 0;
    }
}

// Below this many items per extra worker, threading costs more than it saves.
constexpr std::size_t kMinChunk = 64;

}  // namespace

std::size_t worker_count() {
    if (const std::size_t w = g_override.load(); w > 0) return w;
    if (const std::size_t w = env_workers(); w > 0) return w;
    return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

void set_worker_count(std::size_t workers) { g_override.store(workers); }

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body) {
    if (n == 0) return;
    const std::size_t workers = std::min(worker_count(), std::max<std::size_t>(1, n / kMinChunk));
    if (workers <= 1) {
        body(0, n);
        return;
    }
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> threads;
    threads.reserve(workers - 1);
    const std::size_t chunk = n / workers;
    const std::size_t extra = n % workers;
    auto bounds = [&](std::size_t w) {
        const std::size_t begin = w * chunk + std::min(w, extra);
        return std::pair{begin, begin + chunk + (w < extra ? 1 : 0)};
    };
    auto run = [&](std::size_t w) {
        try {
            const auto [begin, end] = bounds(w);
            body(begin, end);
        } catch (...) {
            errors[w] = std::current_exception();
        }
    };
    for (std::size_t w = 1; w < workers; ++w) threads.emplace_back(run, w);
    run(0);
    for (auto& t : threads) t.join();
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

}  // namespace mfb
