#include "falcon/types.hpp"

#include <openssl/sha.h>

#include "falcon/codec.hpp"

namespace falcon {

void SystemParams::validate() const {
    if (n == 0) throw std::invalid_argument("n must be positive");
    if (n < 3 * f + 1) throw std::invalid_argument("n must be at least 3f + 1");
}

std::string Digest::hex() const { return to_hex(bytes); }

std::string Digest::short_hex() const { return to_hex(ByteView(bytes).first(8)); }

Digest sha256(ByteView data) {
    Digest d;
    SHA256(data.data(), data.size(), d.bytes.data());
    return d;
}

Transaction Transaction::from_payload(Bytes payload) {
    Transaction tx;
    tx.id = sha256(payload);
    tx.payload = std::move(payload);
    return tx;
}

Bytes canonical_encode(const Block& block) {
    ByteWriter w;
    w.u32(block.creator.index);
    w.u64(block.instance);
    w.u32(static_cast<std::uint32_t>(block.txs.size()));
    for (const auto& tx : block.txs) w.blob(tx.payload);
    return w.take();
}

Digest block_digest(const Block& block) { return sha256(canonical_encode(block)); }

Block make_block(NodeId creator, std::uint64_t instance, std::vector<Transaction> txs) {
    Block b{creator, instance, std::move(txs), {}};
    b.digest = block_digest(b);
    return b;
}

std::string to_string(const InstanceAddr& addr) {
    return std::to_string(addr.acsq_id) + (addr.sub == SubProtocol::gbc ? "/GBC(" : "/AABA(") +
           std::to_string(addr.index.index) + ")";
}

Bytes gbc_vote_message(std::uint64_t acsq_id, NodeId broadcaster, const Digest& block_digest) {
    ByteWriter w;
    w.u64(acsq_id);
    w.u32(broadcaster.index);
    w.digest(block_digest);
    return w.take();
}

}  // namespace falcon
