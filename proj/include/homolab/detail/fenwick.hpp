#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace homolab::detail {

// Binary indexed tree over non-negative integer weights. Supports point
// updates and "find the slot holding cumulative weight r" in O(log n).
class FenwickTree {
public:
    FenwickTree() = default;
    explicit FenwickTree(std::size_t size) : tree_(size + 1, 0), weights_(size, 0) {
        top_bit_ = 1;
        while (top_bit_ * 2 <= size) top_bit_ *= 2;
    }

    std::size_t size() const noexcept { return weights_.size(); }
    std::int64_t total() const noexcept { return total_; }
    std::int64_t weight(std::size_t i) const { return weights_[i]; }

    void set(std::size_t i, std::int64_t w) { add(i, w - weights_[i]); }

    void add(std::size_t i, std::int64_t delta) {
        weights_[i] += delta;
        total_ += delta;
        for (std::size_t k = i + 1; k < tree_.size(); k += k & (~k + 1)) tree_[k] += delta;
    }

    // Smallest index i such that sum(weights[0..i]) > r. Requires 0 <= r < total().
    std::size_t find(std::int64_t r) const {
        std::size_t pos = 0;
        for (std::size_t step = top_bit_; step > 0; step >>= 1) {
            const std::size_t next = pos + step;
            if (next < tree_.size() && tree_[next] <= r) {
                pos = next;
                r -= tree_[next];
            }
        }
        return pos;
    }

private:
    std::vector<std::int64_t> tree_;
    std::vector<std::int64_t> weights_;
    std::int64_t total_{0};
    std::size_t top_bit_{1};
};

} // namespace homolab::detail
