#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "falcon/types.hpp"

namespace falcon {

/// Partial threshold signature: a per-signer MAC over digest(message || tag).
struct PartialSig {
    NodeId signer;
    Digest tagged_digest;
    Digest mac;

    bool operator==(const PartialSig&) const = default;
};

/// Combined signature. Valid only with >= n - f distinct signers on one tagged digest.
/// Partials are kept sorted by signer so combining is order-insensitive.
struct ThresholdSig {
    Digest tagged_digest;
    std::vector<PartialSig> partials;

    std::uint32_t signer_set_size() const { return static_cast<std::uint32_t>(partials.size()); }
    bool operator==(const ThresholdSig&) const = default;
};

Digest tagged_digest(ByteView message, std::uint8_t tag);

enum class CombineErrorKind { too_few_partials, mixed_messages, duplicate_signer, invalid_partial };

class CombineError : public std::runtime_error {
public:
    CombineError(CombineErrorKind kind, const char* what) : std::runtime_error(what), kind_(kind) {}
    CombineErrorKind kind() const { return kind_; }

private:
    CombineErrorKind kind_;
};

/// One node's key share. Only the owning node (or the adversary, for its own
/// nodes) ever holds a Signer.
class Signer {
public:
    Signer(NodeId id, Bytes key) : id_(id), key_(std::move(key)) {}

    NodeId id() const { return id_; }
    PartialSig partial_sign(ByteView message, std::uint8_t tag) const;
    /// Signs an already-tagged digest; used by adversary plugins that vote on arbitrary values.
    PartialSig sign_tagged(const Digest& tagged) const;

private:
    NodeId id_;
    Bytes key_;
};

/// Mock threshold-signature scheme: per-node HMAC keys derived from a shared
/// registry secret. The registry is the verifier; it hands out Signers.
class KeyRegistry {
public:
    KeyRegistry(SystemParams params, Bytes secret);

    const SystemParams& params() const { return params_; }
    Signer signer_for(NodeId id) const;

    bool verify_partial(const PartialSig& partial) const;
    bool verify_partial(const PartialSig& partial, ByteView message, std::uint8_t tag) const;

    /// Throws CombineError on fewer than n - f partials, mixed digests, repeated signers
    /// or partials that do not verify.
    ThresholdSig combine(std::span<const PartialSig> partials) const;

    bool verify_threshold(const ThresholdSig& sig) const;
    bool verify_threshold(const ThresholdSig& sig, ByteView message, std::uint8_t tag) const;

private:
    Bytes key_of(NodeId id) const;

    SystemParams params_;
    Bytes secret_;
};

struct CoinSeed {
    Bytes shared_secret;
    InstanceAddr scope;
    std::uint32_t round = 0;
};

/// Low bit of digest(shared_secret || scope || round).
bool coin(const CoinSeed& seed);

/// The common coin as seen by one ABA instance.
class CommonCoin {
public:
    explicit CommonCoin(Bytes secret) : secret_(std::move(secret)) {}

    bool flip(const InstanceAddr& scope, std::uint32_t round) const { return coin({secret_, scope, round}); }
    const Bytes& secret() const { return secret_; }

private:
    Bytes secret_;
};

}  // namespace falcon
