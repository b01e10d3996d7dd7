#pragma once

#include <algorithm>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace icf {

/// Worker count: ICF_THREADS if set and positive, else the hardware concurrency.
inline int worker_count() {
    if (const char* env = std::getenv("ICF_THREADS")) {
        try {
            const int n = std::stoi(env);
            if (n > 0) return n;
        } catch (...) {
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Calls body(k) for k in [begin, end), split into contiguous chunks.
/// The body must only write to disjoint data.
template <class Body>
void parallel_for(int begin, int end, Body&& body) {
    const int count = end - begin;
    const int workers = std::min(worker_count(), count);
    if (workers <= 1) {
        for (int k = begin; k < end; ++k) body(k);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        const int lo = begin + count * w / workers;
        const int hi = begin + count * (w + 1) / workers;
        pool.emplace_back([lo, hi, &body] {
            for (int k = lo; k < hi; ++k) body(k);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace icf
