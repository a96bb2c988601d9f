#include "smdp/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>

namespace smdp {

int resolve_threads(int requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
    const int workers = std::min<std::size_t>(resolve_threads(threads), n);
    if (workers <= 1) {
        for (std::size_t k = 0; k < n; ++k) fn(k);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::atomic<bool> failed{false};
    auto run = [&]() {
        while (true) {
            const std::size_t k = next.fetch_add(1);
            if (k >= n || failed.load()) return;
            try {
                fn(k);
            } catch (...) {
                if (!failed.exchange(true)) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int t = 0; t < workers; ++t) pool.emplace_back(run);
    for (auto& t : pool) t.join();
    if (failed.load()) std::rethrow_exception(error);
}

double pairwise_sum(const std::vector<double>& xs) {
    // recursive halving over [lo, lo+len)
    struct Impl {
        static double sum(const double* p, std::size_t len) {
            if (len <= 8) {
                double s = 0;
                for (std::size_t k = 0; k < len; ++k) s += p[k];
                return s;
            }
            const std::size_t half = len / 2;
            return sum(p, half) + sum(p + half, len - half);
        }
    };
    return Impl::sum(xs.data(), xs.size());
}

} // namespace smdp
