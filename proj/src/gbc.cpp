#include "falcon/gbc.hpp"

#include "falcon/errors.hpp"

namespace falcon {

GbcInstance::GbcInstance(InstanceAddr addr, const KeyRegistry& registry, Signer signer, Options options)
    : addr_(addr), registry_(&registry), signer_(std::move(signer)), options_(options) {}

GbcStep GbcInstance::start_broadcast(Block block) {
    if (signer_.id() != addr_.index)
        throw ProtocolError(ProtocolErrorKind::not_broadcaster, "only the broadcaster starts GBC");
    if (started_) throw ProtocolError(ProtocolErrorKind::already_started, "GBC already started");
    if (block.creator != addr_.index || block.instance != addr_.acsq_id)
        throw ProtocolError(ProtocolErrorKind::wrong_instance, "block does not belong to this GBC instance");
    started_ = true;
    GbcStep step;
    step.out.push_back({std::nullopt, Propose{std::move(block)}});
    return step;
}

bool GbcInstance::valid_block(const Block& block) const {
    return block.creator == addr_.index && block.instance == addr_.acsq_id && block.digest == block_digest(block);
}

Digest GbcInstance::vote_digest(const Digest& block_digest, std::uint8_t tag) const {
    return tagged_digest(gbc_vote_message(addr_.acsq_id, addr_.index, block_digest), tag);
}

bool GbcInstance::hold(const Block& block, GbcStep& step) {
    auto [it, inserted] = bodies_.try_emplace(block.digest, block);
    if (inserted) step.received.push_back(block.digest);
    return inserted;
}

GbcStep GbcInstance::on_propose(NodeId from, const Block& block) {
    GbcStep step;
    if (from != addr_.index || !valid_block(block)) return step;
    if (received_block_) return step;  // first proposal wins
    received_block_ = block;
    hold(block, step);
    progress(step);
    return step;
}

GbcStep GbcInstance::on_echo1(NodeId from, const PartialSig& partial) {
    GbcStep step;
    if (delivered1_ || from != partial.signer || !registry_->verify_partial(partial)) return step;
    pool1_[partial.tagged_digest].try_emplace(partial.signer, partial);
    progress(step);
    return step;
}

GbcStep GbcInstance::on_echo2(NodeId from, const PartialSig& partial) {
    GbcStep step;
    if (delivered2_ || from != partial.signer || !registry_->verify_partial(partial)) return step;
    pool2_[partial.tagged_digest].try_emplace(partial.signer, partial);
    progress(step);
    return step;
}

GbcStep GbcInstance::adopt_body(const Block& block) {
    GbcStep step;
    if (!valid_block(block)) return step;
    if (hold(block, step)) progress(step);
    return step;
}

GbcStep GbcInstance::enable_emission() {
    GbcStep step;
    options_.emitting = true;
    progress(step);
    return step;
}

const Block* GbcInstance::body(const Digest& digest) const {
    auto it = bodies_.find(digest);
    return it == bodies_.end() ? nullptr : &it->second;
}

std::size_t GbcInstance::pool1_size(const Digest& block_digest) const {
    auto it = pool1_.find(vote_digest(block_digest, kGrade1Tag));
    return it == pool1_.end() ? 0 : it->second.size();
}

std::size_t GbcInstance::pool2_size(const Digest& block_digest) const {
    auto it = pool2_.find(vote_digest(block_digest, kGrade2Tag));
    return it == pool2_.end() ? 0 : it->second.size();
}

void GbcInstance::compact() {
    if ((delivered1_ && delivered2_) || muted_) {
        pool1_.clear();
        pool2_.clear();
    }
}

std::optional<GradedDelivery> GbcInstance::try_deliver(const Pool& pool, std::uint8_t tag) const {
    for (const auto& [digest, block] : bodies_) {
        auto it = pool.find(vote_digest(digest, tag));
        if (it == pool.end() || it->second.size() < registry_->params().quorum()) continue;
        std::vector<PartialSig> partials;
        partials.reserve(it->second.size());
        for (const auto& [signer, p] : it->second) partials.push_back(p);
        return GradedDelivery{block, tag, registry_->combine(partials)};
    }
    return std::nullopt;
}

void GbcInstance::progress(GbcStep& step) {
    if (received_block_ && !echoed1_ && can_emit()) {
        echoed1_ = true;
        auto message = gbc_vote_message(addr_.acsq_id, addr_.index, received_block_->digest);
        step.out.push_back({std::nullopt, Echo1{signer_.partial_sign(message, kGrade1Tag)}});
        if (options_.echo2_without_grade1 && !echoed2_) {
            echoed2_ = true;
            step.out.push_back({std::nullopt, Echo2{signer_.partial_sign(message, kGrade2Tag)}});
        }
    }
    if (!delivered1_) {
        if (auto gd = try_deliver(pool1_, kGrade1Tag)) {
            delivered1_ = gd;
            step.grade1 = std::move(gd);
        }
    }
    if (delivered1_ && !echoed2_ && can_emit()) {
        echoed2_ = true;
        auto message = gbc_vote_message(addr_.acsq_id, addr_.index, delivered1_->block.digest);
        step.out.push_back({std::nullopt, Echo2{signer_.partial_sign(message, kGrade2Tag)}});
    }
    if (!delivered2_) {
        if (auto gd = try_deliver(pool2_, kGrade2Tag)) {
            delivered2_ = gd;
            step.grade2 = std::move(gd);
        }
    }
}

bool verify_delivery(const GradedDelivery& gd, const KeyRegistry& registry) {
    if (gd.grade != kGrade1Tag && gd.grade != kGrade2Tag) return false;
    if (gd.block.digest != block_digest(gd.block)) return false;
    auto message = gbc_vote_message(gd.block.instance, gd.block.creator, gd.block.digest);
    return registry.verify_threshold(gd.proof, message, gd.grade);
}

bool verify_certificate(const Certificate& cert, std::uint64_t acsq_id, NodeId broadcaster,
                        const KeyRegistry& registry) {
    if (cert.grade != kGrade1Tag && cert.grade != kGrade2Tag) return false;
    return registry.verify_threshold(cert.proof, gbc_vote_message(acsq_id, broadcaster, cert.value), cert.grade);
}

}  // namespace falcon
