#pragma once

#include <map>
#include <optional>
#include <vector>

#include "falcon/crypto.hpp"
#include "falcon/messages.hpp"

namespace falcon {

struct GbcStep {
    Outbox out;
    std::optional<GradedDelivery> grade1;
    std::optional<GradedDelivery> grade2;
    /// Digests of block bodies this node holds for the first time.
    std::vector<Digest> received;
};

/// Graded broadcast for one broadcaster inside one ACSQ instance.
///
/// Receivers echo a tag-1 partial on the first proposal they see, deliver with
/// grade 1 at n - f matching tag-1 partials, then echo a tag-2 partial and
/// deliver with grade 2 at n - f matching tag-2 partials. Emission can be
/// switched off (passive pre-activation) or muted for good (agreement stage);
/// neither stops local deliveries from already-received partials.
class GbcInstance {
public:
    struct Options {
        bool emitting = true;
        /// Mutation switch: echo the tag-2 partial without waiting for grade-1 delivery.
        bool echo2_without_grade1 = false;
    };

    GbcInstance(InstanceAddr addr, const KeyRegistry& registry, Signer signer, Options options);

    /// PROPOSE to all n nodes. Throws ProtocolError if not the broadcaster or already started.
    GbcStep start_broadcast(Block block);

    GbcStep on_propose(NodeId from, const Block& block);
    GbcStep on_echo1(NodeId from, const PartialSig& partial);
    GbcStep on_echo2(NodeId from, const PartialSig& partial);
    /// Body learned outside the broadcast (ASSIST or QUERY-RESP).
    GbcStep adopt_body(const Block& block);

    /// Leaves passive mode; emits any echoes that were held back.
    GbcStep enable_emission();
    void mute() { muted_ = true; }

    const InstanceAddr& addr() const { return addr_; }
    bool started() const { return started_; }
    bool muted() const { return muted_; }
    bool echoed1() const { return echoed1_; }
    bool echoed2() const { return echoed2_; }
    const std::optional<Block>& received_block() const { return received_block_; }
    const std::optional<GradedDelivery>& delivered1() const { return delivered1_; }
    const std::optional<GradedDelivery>& delivered2() const { return delivered2_; }
    const Block* body(const Digest& digest) const;
    std::size_t pool1_size(const Digest& block_digest) const;
    std::size_t pool2_size(const Digest& block_digest) const;

    /// Drops echo pools once both deliveries happened or emission is muted.
    void compact();

private:
    using Pool = std::map<Digest, std::map<NodeId, PartialSig>>;

    bool can_emit() const { return options_.emitting && !muted_; }
    bool valid_block(const Block& block) const;
    Digest vote_digest(const Digest& block_digest, std::uint8_t tag) const;
    bool hold(const Block& block, GbcStep& step);
    void progress(GbcStep& step);
    std::optional<GradedDelivery> try_deliver(const Pool& pool, std::uint8_t tag) const;

    InstanceAddr addr_;
    const KeyRegistry* registry_;
    Signer signer_;
    Options options_;

    bool started_ = false;
    bool muted_ = false;
    bool echoed1_ = false;
    bool echoed2_ = false;
    std::optional<Block> received_block_;
    std::map<Digest, Block> bodies_;
    Pool pool1_;
    Pool pool2_;
    std::optional<GradedDelivery> delivered1_;
    std::optional<GradedDelivery> delivered2_;
};

/// True iff the proof is a quorum threshold signature over the block's vote message and grade.
bool verify_delivery(const GradedDelivery& gd, const KeyRegistry& registry);

/// True iff the certificate proves `value` for GBC(acsq_id, broadcaster).
bool verify_certificate(const Certificate& cert, std::uint64_t acsq_id, NodeId broadcaster,
                        const KeyRegistry& registry);

}  // namespace falcon
