#pragma once

#include <cstddef>
#include <thread>
#include <utility>
#include <vector>

namespace primeforms {

// Streaming pairwise (cascade) summation.  The result depends only on the order of
// the added terms.
class PairwiseSum {
public:
    void add(double x) {
        stack_.push_back({x, 1});
        while (stack_.size() >= 2 && stack_[stack_.size() - 1].second == stack_[stack_.size() - 2].second) {
            auto top = stack_.back();
            stack_.pop_back();
            stack_.back().first += top.first;
            stack_.back().second += top.second;
        }
    }
    double value() const {
        double s = 0;
        for (auto it = stack_.rbegin(); it != stack_.rend(); ++it) s += it->first;
        return s;
    }

private:
    std::vector<std::pair<double, std::size_t>> stack_;
};

inline double pairwise_total(const std::vector<double>& xs) {
    PairwiseSum s;
    for (double x : xs) s.add(x);
    return s.value();
}

// Runs fn(chunk) for chunk in [0, chunks) on up to `threads` workers.  Results are
// indexed by chunk, so any reduction over them is independent of the thread count.
template <class T, class Fn>
std::vector<T> map_chunks(std::size_t chunks, unsigned threads, Fn fn) {
    std::vector<T> out(chunks);
    if (threads <= 1 || chunks <= 1) {
        for (std::size_t c = 0; c < chunks; ++c) out[c] = fn(c);
        return out;
    }
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w)
        pool.emplace_back([&, w] {
            for (std::size_t c = w; c < chunks; c += threads) out[c] = fn(c);
        });
    for (auto& th : pool) th.join();
    return out;
}

}  // namespace primeforms
