#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace falcon {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

/// 1-based node identity.
struct NodeId {
    std::uint32_t index = 0;

    auto operator<=>(const NodeId&) const = default;
};

/// n nodes, up to f of them faulty, n >= 3f + 1.
struct SystemParams {
    std::uint32_t n = 4;
    std::uint32_t f = 1;

    std::uint32_t quorum() const { return n - f; }
    std::uint32_t small_quorum() const { return f + 1; }
    bool contains(NodeId id) const { return id.index >= 1 && id.index <= n; }

    /// Throws std::invalid_argument unless n >= 3f + 1 and n >= 1.
    void validate() const;
};

struct Digest {
    std::array<std::uint8_t, 32> bytes{};

    std::string hex() const;
    /// First 8 bytes as hex, for logs.
    std::string short_hex() const;

    auto operator<=>(const Digest&) const = default;
};

Digest sha256(ByteView data);

struct Transaction {
    Bytes payload;
    Digest id;

    static Transaction from_payload(Bytes payload);
    bool operator==(const Transaction& other) const { return id == other.id && payload == other.payload; }
};

/// A proposal for one ACSQ instance. The digest is derived, never transmitted.
struct Block {
    NodeId creator;
    std::uint64_t instance = 0;
    std::vector<Transaction> txs;
    Digest digest;

    bool operator==(const Block& other) const { return digest == other.digest; }
};

/// Builds a block and fills in its digest.
Block make_block(NodeId creator, std::uint64_t instance, std::vector<Transaction> txs);

/// Length-prefixed, big-endian encoding of creator, instance and transactions.
Bytes canonical_encode(const Block& block);

Digest block_digest(const Block& block);

enum class SubProtocol : std::uint8_t { gbc = 1, aaba = 2 };

/// Names exactly one sub-protocol instance: GBC(j) or AABA(j) inside ACSQ instance k.
struct InstanceAddr {
    std::uint64_t acsq_id = 0;
    SubProtocol sub = SubProtocol::gbc;
    NodeId index;

    auto operator<=>(const InstanceAddr&) const = default;
};

std::string to_string(const InstanceAddr& addr);

/// Message that threshold signatures in GBC(k, j) are computed over.
Bytes gbc_vote_message(std::uint64_t acsq_id, NodeId broadcaster, const Digest& block_digest);

}  // namespace falcon
