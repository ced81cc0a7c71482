#pragma once

#include <cstddef>

namespace kduo {

// Pairwise (cascade) summation: deterministic for a fixed length regardless
// of thread count, with O(log n) error growth. f(i) supplies term i.
template <typename F>
double pairwise_sum(std::size_t lo, std::size_t hi, F&& f) {
    const std::size_t n = hi - lo;
    if (n <= 8) {
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += f(i);
        return s;
    }
    const std::size_t mid = lo + n / 2;
    return pairwise_sum(lo, mid, f) + pairwise_sum(mid, hi, f);
}

template <typename F>
double pairwise_sum(std::size_t n, F&& f) {
    return pairwise_sum<F>(0, n, static_cast<F&&>(f));
}

}  // namespace kduo
