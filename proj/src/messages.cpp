#include "falcon/messages.hpp"

#include "falcon/codec.hpp"

namespace falcon {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void put_block(ByteWriter& w, const Block& b) { w.blob(canonical_encode(b)); }

Block get_block(ByteReader& r) {
    auto raw = r.blob();
    ByteReader br(raw);
    Block b;
    b.creator.index = br.u32();
    b.instance = br.u64();
    auto count = br.u32();
    if (count > raw.size()) throw DecodeError("implausible transaction count");
    b.txs.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) b.txs.push_back(Transaction::from_payload(br.blob()));
    br.expect_done();
    b.digest = block_digest(b);
    return b;
}

void put_partial(ByteWriter& w, const PartialSig& p) {
    w.u32(p.signer.index);
    w.digest(p.tagged_digest);
    w.digest(p.mac);
}

PartialSig get_partial(ByteReader& r) {
    PartialSig p;
    p.signer.index = r.u32();
    p.tagged_digest = r.digest();
    p.mac = r.digest();
    return p;
}

void put_threshold(ByteWriter& w, const ThresholdSig& s) {
    w.digest(s.tagged_digest);
    w.u32(static_cast<std::uint32_t>(s.partials.size()));
    for (const auto& p : s.partials) put_partial(w, p);
}

ThresholdSig get_threshold(ByteReader& r) {
    ThresholdSig s;
    s.tagged_digest = r.digest();
    auto count = r.u32();
    if (count > 4096) throw DecodeError("implausible signer count");
    for (std::uint32_t i = 0; i < count; ++i) s.partials.push_back(get_partial(r));
    return s;
}

bool get_bit(ByteReader& r) {
    auto v = r.u8();
    if (v > 1) throw DecodeError("bit out of range");
    return v == 1;
}

std::uint8_t get_grade(ByteReader& r) {
    auto g = r.u8();
    if (g != 1 && g != 2) throw DecodeError("grade out of range");
    return g;
}

}  // namespace

std::string_view body_name(const Body& body) {
    static constexpr std::string_view names[] = {"PROPOSE", "ECHO1", "ECHO2", "AMP",    "SHO1",  "SHO2",
                                                 "STOP",    "BVAL",  "AUX",   "ASSIST", "QUERY", "QUERY-RESP"};
    return names[body.index()];
}

SubProtocol body_sub_protocol(const Body& body) {
    switch (body.index()) {
        case 3: case 4: case 5: case 6: case 7: case 8:
            return SubProtocol::aaba;
        default:
            return SubProtocol::gbc;
    }
}

Bytes encode(const Envelope& env) {
    ByteWriter w;
    w.u32(env.from.index);
    w.u32(env.to.index);
    w.u64(env.addr.acsq_id);
    w.u8(static_cast<std::uint8_t>(env.addr.sub));
    w.u32(env.addr.index.index);
    w.u8(static_cast<std::uint8_t>(env.body.index()));
    std::visit(overloaded{
                   [&](const Propose& m) { put_block(w, m.block); },
                   [&](const Echo1& m) { put_partial(w, m.partial); },
                   [&](const Echo2& m) { put_partial(w, m.partial); },
                   [&](const Amp& m) {
                       w.u8(m.input.one ? 1 : 0);
                       if (m.input.one) {
                           w.digest(m.input.value);
                           put_threshold(w, m.input.proof);
                       }
                   },
                   [&](const Sho1& m) { w.u8(m.bit ? 1 : 0); },
                   [&](const Sho2& m) { w.u8(m.bit ? 1 : 0); },
                   [&](const Stop&) {},
                   [&](const Bval& m) {
                       w.u32(m.round);
                       w.u8(m.bit ? 1 : 0);
                   },
                   [&](const Aux& m) {
                       w.u32(m.round);
                       w.u8(m.bit ? 1 : 0);
                   },
                   [&](const Assist& m) {
                       put_block(w, m.delivery.block);
                       w.u8(m.delivery.grade);
                       put_threshold(w, m.delivery.proof);
                   },
                   [&](const Query& m) {
                       w.u8(m.digest ? 1 : 0);
                       if (m.digest) w.digest(*m.digest);
                   },
                   [&](const QueryResp& m) {
                       w.u8(m.block ? 1 : 0);
                       if (m.block) put_block(w, *m.block);
                       w.u8(m.cert ? 1 : 0);
                       if (m.cert) {
                           w.digest(m.cert->value);
                           w.u8(m.cert->grade);
                           put_threshold(w, m.cert->proof);
                       }
                   },
               },
               env.body);
    return w.take();
}

Envelope decode(ByteView bytes) {
    ByteReader r(bytes);
    Envelope env;
    env.from.index = r.u32();
    env.to.index = r.u32();
    env.addr.acsq_id = r.u64();
    auto sub = r.u8();
    if (sub != 1 && sub != 2) throw DecodeError("unknown sub-protocol");
    env.addr.sub = static_cast<SubProtocol>(sub);
    env.addr.index.index = r.u32();
    switch (r.u8()) {
        case 0: env.body = Propose{get_block(r)}; break;
        case 1: env.body = Echo1{get_partial(r)}; break;
        case 2: env.body = Echo2{get_partial(r)}; break;
        case 3: {
            Amp m;
            m.input.one = get_bit(r);
            if (m.input.one) {
                m.input.value = r.digest();
                m.input.proof = get_threshold(r);
            }
            env.body = std::move(m);
            break;
        }
        case 4: env.body = Sho1{get_bit(r)}; break;
        case 5: env.body = Sho2{get_bit(r)}; break;
        case 6: env.body = Stop{}; break;
        case 7: {
            Bval m;
            m.round = r.u32();
            m.bit = get_bit(r);
            env.body = m;
            break;
        }
        case 8: {
            Aux m;
            m.round = r.u32();
            m.bit = get_bit(r);
            env.body = m;
            break;
        }
        case 9: {
            Assist m;
            m.delivery.block = get_block(r);
            m.delivery.grade = get_grade(r);
            m.delivery.proof = get_threshold(r);
            env.body = std::move(m);
            break;
        }
        case 10: {
            Query m;
            if (get_bit(r)) m.digest = r.digest();
            env.body = m;
            break;
        }
        case 11: {
            QueryResp m;
            if (get_bit(r)) m.block = get_block(r);
            if (get_bit(r)) {
                Certificate c;
                c.value = r.digest();
                c.grade = get_grade(r);
                c.proof = get_threshold(r);
                m.cert = std::move(c);
            }
            env.body = std::move(m);
            break;
        }
        default:
            throw DecodeError("unknown body kind");
    }
    r.expect_done();
    if (body_sub_protocol(env.body) != env.addr.sub) throw DecodeError("body does not match sub-protocol");
    return env;
}

bool operator==(const GradedDelivery& a, const GradedDelivery& b) {
    return a.block == b.block && a.grade == b.grade && a.proof == b.proof;
}

bool operator==(const AabaInput& a, const AabaInput& b) {
    if (a.one != b.one) return false;
    return !a.one || (a.value == b.value && a.proof == b.proof);
}

bool operator==(const Certificate& a, const Certificate& b) {
    return a.value == b.value && a.grade == b.grade && a.proof == b.proof;
}

bool operator==(const Envelope& a, const Envelope& b) {
    if (!(a.from == b.from && a.to == b.to && a.addr == b.addr && a.body.index() == b.body.index())) return false;
    // Wire bytes are canonical, so comparing encodings compares every field.
    return encode(a) == encode(b);
}

}  // namespace falcon
