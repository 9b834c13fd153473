#include "falcon/crypto.hpp"

#include <algorithm>

#include <openssl/evp.h>
#include <openssl/hmac.h>

#include "falcon/codec.hpp"

namespace falcon {

namespace {

Digest hmac_sha256(ByteView key, ByteView data) {
    Digest out;
    unsigned int len = 0;
    HMAC(EVP_sha256(), key.data(), static_cast<int>(key.size()), data.data(), data.size(), out.bytes.data(), &len);
    return out;
}

}  // namespace

Digest tagged_digest(ByteView message, std::uint8_t tag) {
    ByteWriter w;
    w.blob(message);
    w.u8(tag);
    return sha256(w.bytes());
}

PartialSig Signer::partial_sign(ByteView message, std::uint8_t tag) const {
    return sign_tagged(tagged_digest(message, tag));
}

PartialSig Signer::sign_tagged(const Digest& tagged) const {
    return PartialSig{id_, tagged, hmac_sha256(key_, tagged.bytes)};
}

KeyRegistry::KeyRegistry(SystemParams params, Bytes secret) : params_(params), secret_(std::move(secret)) {
    params_.validate();
}

Bytes KeyRegistry::key_of(NodeId id) const {
    ByteWriter w;
    w.blob(secret_);
    w.u32(id.index);
    auto d = sha256(w.bytes());
    return Bytes(d.bytes.begin(), d.bytes.end());
}

Signer KeyRegistry::signer_for(NodeId id) const {
    if (!params_.contains(id)) throw std::out_of_range("no key share for node");
    return Signer(id, key_of(id));
}

bool KeyRegistry::verify_partial(const PartialSig& partial) const {
    if (!params_.contains(partial.signer)) return false;
    return hmac_sha256(key_of(partial.signer), partial.tagged_digest.bytes) == partial.mac;
}

bool KeyRegistry::verify_partial(const PartialSig& partial, ByteView message, std::uint8_t tag) const {
    return partial.tagged_digest == tagged_digest(message, tag) && verify_partial(partial);
}

ThresholdSig KeyRegistry::combine(std::span<const PartialSig> partials) const {
    if (partials.size() < params_.quorum())
        throw CombineError(CombineErrorKind::too_few_partials, "fewer than n - f partials");
    for (const auto& p : partials) {
        if (p.tagged_digest != partials.front().tagged_digest)
            throw CombineError(CombineErrorKind::mixed_messages, "partials over different messages");
    }
    ThresholdSig sig{partials.front().tagged_digest, {partials.begin(), partials.end()}};
    std::sort(sig.partials.begin(), sig.partials.end(),
              [](const PartialSig& a, const PartialSig& b) { return a.signer < b.signer; });
    auto dup = std::adjacent_find(sig.partials.begin(), sig.partials.end(),
                                  [](const PartialSig& a, const PartialSig& b) { return a.signer == b.signer; });
    if (dup != sig.partials.end()) throw CombineError(CombineErrorKind::duplicate_signer, "repeated signer");
    for (const auto& p : sig.partials) {
        if (!verify_partial(p)) throw CombineError(CombineErrorKind::invalid_partial, "partial does not verify");
    }
    return sig;
}

bool KeyRegistry::verify_threshold(const ThresholdSig& sig) const {
    if (sig.partials.size() < params_.quorum()) return false;
    std::vector<std::uint32_t> seen;
    seen.reserve(sig.partials.size());
    for (const auto& p : sig.partials) {
        if (p.tagged_digest != sig.tagged_digest) return false;
        if (std::find(seen.begin(), seen.end(), p.signer.index) != seen.end()) return false;
        seen.push_back(p.signer.index);
        if (!verify_partial(p)) return false;
    }
    return true;
}

bool KeyRegistry::verify_threshold(const ThresholdSig& sig, ByteView message, std::uint8_t tag) const {
    return sig.tagged_digest == tagged_digest(message, tag) && verify_threshold(sig);
}

bool coin(const CoinSeed& seed) {
    ByteWriter w;
    w.blob(seed.shared_secret);
    w.u64(seed.scope.acsq_id);
    w.u8(static_cast<std::uint8_t>(seed.scope.sub));
    w.u32(seed.scope.index.index);
    w.u32(seed.round);
    return (sha256(w.bytes()).bytes.back() & 1) != 0;
}

}  // namespace falcon
