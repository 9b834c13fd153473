#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

#include "falcon/crypto.hpp"
#include "falcon/types.hpp"

namespace falcon {

inline constexpr std::uint8_t kGrade1Tag = 1;
inline constexpr std::uint8_t kGrade2Tag = 2;

/// <B, g, sigma>: a block delivered by GBC with its grade and quorum proof.
struct GradedDelivery {
    Block block;
    std::uint8_t grade = 1;
    ThresholdSig proof;
};

/// AABA input: bit 0, or <1, v, sigma> where sigma certifies v with grade 1.
struct AabaInput {
    bool one = false;
    Digest value;
    ThresholdSig proof;

    static AabaInput zero() { return {}; }
    static AabaInput one_of(const Digest& value, ThresholdSig proof) { return {true, value, std::move(proof)}; }
};

/// A certified value for GBC(k, j): digest plus grade-1 or grade-2 proof.
struct Certificate {
    Digest value;
    std::uint8_t grade = 1;
    ThresholdSig proof;
};

// GBC traffic.
struct Propose { Block block; };
struct Echo1 { PartialSig partial; };
struct Echo2 { PartialSig partial; };

// AABA traffic, including the inner ABA rounds.
struct Amp { AabaInput input; };
struct Sho1 { bool bit = false; };
struct Sho2 { bool bit = false; };
struct Stop {};
struct Bval { std::uint32_t round = 1; bool bit = false; };
struct Aux { std::uint32_t round = 1; bool bit = false; };

// ACSQ-level recovery traffic, addressed to GBC(j).
struct Assist { GradedDelivery delivery; };
struct Query { std::optional<Digest> digest; };
struct QueryResp {
    std::optional<Block> block;
    std::optional<Certificate> cert;
};

using Body = std::variant<Propose, Echo1, Echo2, Amp, Sho1, Sho2, Stop, Bval, Aux, Assist, Query, QueryResp>;

std::string_view body_name(const Body& body);
/// The sub-protocol a body kind belongs to.
SubProtocol body_sub_protocol(const Body& body);

struct Envelope {
    NodeId from;
    NodeId to;
    InstanceAddr addr;
    Body body;
};

/// Output of a sub-protocol step, before sender/address are attached.
/// An empty `to` means broadcast to all n nodes, sender included.
struct Outgoing {
    std::optional<NodeId> to;
    Body body;
};
using Outbox = std::vector<Outgoing>;

/// Outgoing traffic of a node, already addressed.
struct Emission {
    std::optional<NodeId> to;
    InstanceAddr addr;
    Body body;
};

Bytes encode(const Envelope& env);
/// Throws DecodeError on malformed input or when the body does not belong to addr.sub.
Envelope decode(ByteView bytes);

bool operator==(const GradedDelivery& a, const GradedDelivery& b);
bool operator==(const AabaInput& a, const AabaInput& b);
bool operator==(const Certificate& a, const Certificate& b);
bool operator==(const Envelope& a, const Envelope& b);

}  // namespace falcon
