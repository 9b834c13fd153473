#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "falcon/types.hpp"

namespace falcon {

/// Append-only ledger of committed blocks.
class Chain {
public:
    /// Returns the 1-based slot the block was written to.
    std::uint64_t append(Block block);

    const std::vector<Block>& slots() const { return slots_; }
    std::uint64_t size() const { return slots_.size(); }
    /// sha256 over the concatenated block digests.
    Digest digest() const;

private:
    std::vector<Block> slots_;
};

enum class SortMode { partial, integral };

struct Commit {
    std::uint64_t slot = 0;
    std::uint64_t instance = 0;
    std::uint32_t index = 0;
    Block block;
};

/// Moves decided blocks of each instance into the chain in index order.
///
/// Partial mode commits the longest decided prefix as soon as it grows.
/// Integral mode waits until every index of the instance is decided. With the
/// instance gate on, instance k sorts only after instance k - 1 finished.
class Sorter {
public:
    explicit Sorter(std::uint32_t n, SortMode mode = SortMode::partial, bool instance_gate = true);

    /// `m` holds the included blocks (slot i is index i + 1); `excluded` holds excluded indices.
    /// Returns the blocks committed by this call, possibly none when deferred.
    std::vector<Commit> partial_sort(std::uint64_t k, std::span<const std::optional<Block>> m,
                                     const std::set<std::uint32_t>& excluded);

    Commit commit_block(std::uint64_t k, std::uint32_t index, const Block& block);

    std::uint64_t done_instance() const { return done_; }
    bool finished(std::uint64_t k) const { return k <= done_ || finished_.contains(k); }
    /// Number of indices of instance k already sorted.
    std::uint32_t cursor(std::uint64_t k) const;
    const Chain& chain() const { return chain_; }
    SortMode mode() const { return mode_; }

private:
    std::uint32_t n_;
    SortMode mode_;
    bool instance_gate_;
    Chain chain_;
    std::uint64_t done_ = 0;
    std::map<std::uint64_t, std::uint32_t> idx_;
    std::set<std::uint64_t> finished_;
};

}  // namespace falcon
