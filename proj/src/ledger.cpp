#include "ledger.hpp"

namespace opssc::ledger {

static constexpr char dump_magic[8] = {'O', 'P', 'S', 'S', 'C', 'D', 'M', 'P'};
static constexpr std::uint32_t dump_version = 1;

std::vector<std::uint8_t> signed_transaction::id_preimage() const {
    byte_writer w;
    w.u8(static_cast<std::uint8_t>(kind));
    w.lp(sc_name);
    w.lp(function);
    w.u32(static_cast<std::uint32_t>(args.size()));
    for (const auto& a : args) w.lp(a);
    w.lp(proposer_org);
    w.u64(logical_time);
    return w.take();
}

digest32 signed_transaction::compute_id() const {
    return sha256(std::span<const std::uint8_t>(id_preimage()));
}

void signed_transaction::encode(byte_writer& w) const {
    w.dig(tx_id);
    w.u8(static_cast<std::uint8_t>(kind));
    w.lp(sc_name);
    w.lp(function);
    w.u32(static_cast<std::uint32_t>(args.size()));
    for (const auto& a : args) w.lp(a);
    w.lp(proposer_org);
    w.u64(logical_time);
    w.u32(static_cast<std::uint32_t>(endorsements.size()));
    for (const auto& [org, d] : endorsements) {
        w.lp(org);
        w.dig(d);
    }
}

signed_transaction signed_transaction::decode(byte_reader& r) {
    signed_transaction tx;
    tx.tx_id = r.dig();
    std::uint8_t k = r.u8();
    if (k > 1) throw encoding_error("unknown tx kind");
    tx.kind = static_cast<tx_kind>(k);
    tx.sc_name = r.lp();
    tx.function = r.lp();
    std::uint32_t argc = r.u32();
    tx.args.reserve(std::min<std::uint32_t>(argc, 1024));
    for (std::uint32_t i = 0; i < argc; ++i) tx.args.push_back(r.lp());
    tx.proposer_org = r.lp();
    tx.logical_time = r.u64();
    std::uint32_t endc = r.u32();
    for (std::uint32_t i = 0; i < endc; ++i) {
        std::string org = r.lp();
        digest32 d = r.dig();
        if (!tx.endorsements.emplace(std::move(org), d).second)
            throw encoding_error("duplicate endorsement org in tx record");
    }
    return tx;
}

void block::encode(byte_writer& w) const {
    w.u64(index);
    w.dig(prev_hash);
    w.u32(static_cast<std::uint32_t>(txs.size()));
    for (const auto& tx : txs) tx.encode(w);
    w.dig(block_hash);
}

block block::decode(byte_reader& r) {
    block b;
    b.index = r.u64();
    b.prev_hash = r.dig();
    std::uint32_t n = r.u32();
    b.txs.reserve(std::min<std::uint32_t>(n, 4096));
    for (std::uint32_t i = 0; i < n; ++i) b.txs.push_back(signed_transaction::decode(r));
    b.block_hash = r.dig();
    return b;
}

digest32 compute_block_hash(std::uint64_t index, const digest32& prev_hash,
                            const std::vector<signed_transaction>& txs) {
    byte_writer w;
    w.u64(index);
    w.dig(prev_hash);
    for (const auto& tx : txs) w.dig(tx.tx_id);
    return sha256(std::span<const std::uint8_t>(w.data()));
}

block make_genesis() {
    block g;
    g.index = 0;
    g.prev_hash = digest32{};
    g.block_hash = compute_block_hash(0, g.prev_hash, {});
    return g;
}

block make_block(const block& tip, std::vector<signed_transaction> txs) {
    if (txs.empty()) throw chain_error("non-genesis block must contain at least one tx");
    block b;
    b.index = tip.index + 1;
    b.prev_hash = tip.block_hash;
    b.txs = std::move(txs);
    b.block_hash = compute_block_hash(b.index, b.prev_hash, b.txs);
    return b;
}

std::optional<std::string> world_state::get(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second.value;
}

std::uint64_t world_state::version_of(const std::string& key) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? 0 : it->second.version;
}

void world_state::put(const std::string& key, std::string value) {
    auto& e = entries_[key];
    e.value = std::move(value);
    e.version += 1;
}

std::vector<std::uint8_t> world_state::canonical_bytes() const {
    byte_writer w;
    w.u32(static_cast<std::uint32_t>(entries_.size()));
    for (const auto& [k, e] : entries_) {
        w.lp(k);
        w.lp(e.value);
        w.u64(e.version);
    }
    return w.take();
}

digest32 world_state::state_digest() const {
    return sha256(std::span<const std::uint8_t>(canonical_bytes()));
}

ledger_replica ledger_replica::create(std::string owner_node) {
    ledger_replica r;
    r.owner_node_ = std::move(owner_node);
    r.chain_.push_back(make_genesis());
    return r;
}

static void validate_block_content(const block& b) {
    if (b.index > 0 && b.txs.empty()) throw chain_error("empty non-genesis block");
    for (const auto& tx : b.txs)
        if (tx.compute_id() != tx.tx_id) throw chain_error("tx_id does not recompute");
    if (compute_block_hash(b.index, b.prev_hash, b.txs) != b.block_hash)
        throw chain_error("block hash does not recompute");
}

void ledger_replica::append_block(const block& b, const tx_executor& exec) {
    const block& t = tip();
    if (b.index != t.index + 1)
        throw chain_error("index gap: expected " + std::to_string(t.index + 1) + ", got " +
                          std::to_string(b.index));
    if (b.prev_hash != t.block_hash) throw chain_error("prev_hash does not match tip");
    validate_block_content(b);

    // Past this point the block is accepted; apply tx writes in order, each
    // tx seeing its predecessors' writes.
    chain_.push_back(b);
    for (const auto& tx : b.txs) {
        auto writes = exec(tx, state_);
        for (auto& wop : writes) state_.put(wop.key, std::move(wop.value));
    }
}

bool verify_chain(const std::vector<block>& chain) {
    if (chain.empty()) return false;
    const block& g = chain.front();
    if (g.index != 0 || !g.prev_hash.is_zero() || !g.txs.empty()) return false;
    for (size_t i = 0; i < chain.size(); ++i) {
        const block& b = chain[i];
        try {
            validate_block_content(b);
        } catch (const chain_error&) {
            return false;
        }
        if (i > 0) {
            if (b.index != chain[i - 1].index + 1) return false;
            if (b.prev_hash != chain[i - 1].block_hash) return false;
        }
    }
    return true;
}

std::vector<std::uint8_t> encode_chain_dump(const std::vector<block>& chain) {
    byte_writer w;
    w.raw(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(dump_magic), 8));
    w.u32(dump_version);
    w.u64(chain.size());
    for (const auto& b : chain) {
        byte_writer rec;
        b.encode(rec);
        digest32 rec_digest = sha256(std::span<const std::uint8_t>(rec.data()));
        w.raw(std::span<const std::uint8_t>(rec.data()));
        w.dig(rec_digest);
    }
    return w.take();
}

std::vector<block> decode_chain_dump(std::span<const std::uint8_t> bytes) {
    byte_reader r(bytes);
    auto magic = r.raw(8);
    if (!std::equal(magic.begin(), magic.end(), dump_magic))
        throw encoding_error("bad dump magic");
    if (r.u32() != dump_version) throw encoding_error("unsupported dump format version");
    std::uint64_t count = r.u64();
    std::vector<block> chain;
    chain.reserve(std::min<std::uint64_t>(count, 1 << 20));
    for (std::uint64_t i = 0; i < count; ++i) {
        byte_writer rec;
        block b = block::decode(r);
        b.encode(rec);
        digest32 expect = r.dig();
        if (sha256(std::span<const std::uint8_t>(rec.data())) != expect)
            throw encoding_error("block record digest mismatch in dump");
        chain.push_back(std::move(b));
    }
    r.expect_end();
    return chain;
}

bool verify_chain_dump(std::span<const std::uint8_t> bytes, std::string* why) {
    std::vector<block> chain;
    try {
        chain = decode_chain_dump(bytes);
    } catch (const std::exception& e) {
        if (why) *why = e.what();
        return false;
    }
    if (!verify_chain(chain)) {
        if (why) *why = "hash chain verification failed";
        return false;
    }
    // Committed txs always carry a quorum-validated endorsement set, so the
    // endorsement digests within a tx are pairwise equal.
    for (const auto& b : chain) {
        for (const auto& tx : b.txs) {
            if (tx.endorsements.empty()) {
                if (why) *why = "committed tx without endorsements";
                return false;
            }
            const digest32& first = tx.endorsements.begin()->second;
            for (const auto& [org, d] : tx.endorsements) {
                if (d != first) {
                    if (why) *why = "divergent endorsement digests in committed tx";
                    return false;
                }
            }
        }
    }
    return true;
}

} // namespace opssc::ledger
