#include "falcon/sorter.hpp"

namespace falcon {

std::uint64_t Chain::append(Block block) {
    slots_.push_back(std::move(block));
    return slots_.size();
}

Digest Chain::digest() const {
    Bytes all;
    all.reserve(slots_.size() * 32);
    for (const auto& b : slots_) all.insert(all.end(), b.digest.bytes.begin(), b.digest.bytes.end());
    return sha256(all);
}

Sorter::Sorter(std::uint32_t n, SortMode mode, bool instance_gate) : n_(n), mode_(mode), instance_gate_(instance_gate) {}

std::uint32_t Sorter::cursor(std::uint64_t k) const {
    if (finished(k)) return n_;
    auto it = idx_.find(k);
    return it == idx_.end() ? 0 : it->second;
}

Commit Sorter::commit_block(std::uint64_t k, std::uint32_t index, const Block& block) {
    return Commit{chain_.append(block), k, index, block};
}

std::vector<Commit> Sorter::partial_sort(std::uint64_t k, std::span<const std::optional<Block>> m,
                                         const std::set<std::uint32_t>& excluded) {
    std::vector<Commit> out;
    if (finished(k)) return out;
    if (instance_gate_ && done_ != k - 1) return out;

    auto decided = [&](std::uint32_t i) { return m[i - 1].has_value() || excluded.contains(i); };
    if (mode_ == SortMode::integral) {
        for (std::uint32_t i = 1; i <= n_; ++i) {
            if (!decided(i)) return out;
        }
    }

    auto& idx = idx_[k];
    while (idx < n_ && decided(idx + 1)) {
        if (m[idx]) out.push_back(commit_block(k, idx + 1, *m[idx]));
        ++idx;
    }
    if (idx == n_) {
        idx_.erase(k);
        if (k == done_ + 1) {
            done_ = k;
            while (finished_.erase(done_ + 1)) ++done_;
        } else {
            finished_.insert(k);
        }
    }
    return out;
}

}  // namespace falcon
