#include "embedev/util.hpp"

#include <algorithm>
#include <thread>
#include <vector>

namespace embedev {

std::int64_t gcd64(std::int64_t a, std::int64_t b) {
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b != 0) {
        std::int64_t t = a % b;
        a = b;
        b = t;
    }
    return a;
}

std::int64_t mod_inverse(std::int64_t a, std::int64_t m) {
    std::int64_t t = 0, new_t = 1;
    std::int64_t r = m, new_r = ((a % m) + m) % m;
    while (new_r != 0) {
        std::int64_t quot = r / new_r;
        std::int64_t tmp = t - quot * new_t;
        t = new_t;
        new_t = tmp;
        tmp = r - quot * new_r;
        r = new_r;
        new_r = tmp;
    }
    if (r != 1) return 0;  // not invertible
    return ((t % m) + m) % m;
}

void parallel_for(std::int64_t n, const std::function<void(std::int64_t)>& fn,
                  unsigned max_threads) {
    if (n <= 0) return;
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    if (max_threads != 0) hw = std::min(hw, max_threads);
    unsigned workers = static_cast<unsigned>(std::min<std::int64_t>(n, hw));
    if (workers <= 1) {
        for (std::int64_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w]() {
            for (std::int64_t i = w; i < n; i += workers) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace embedev
