#pragma once

#include "digest.hpp"
#include "encoding.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace opssc::ledger {

// Chain-integrity violation: bad linkage, hash mismatch, or malformed block.
struct chain_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class tx_kind : std::uint8_t { invoke = 0, deploy = 1 };

// A transaction as it sits in a committed block. tx_id is the digest of the
// canonical encoding of every field except the endorsements (which are
// attached after the proposal content is fixed). Endorsement digests stand
// in for signatures; at most one endorsement per org.
struct signed_transaction {
    digest32 tx_id;
    tx_kind kind = tx_kind::invoke;
    std::string sc_name;
    std::string function;
    std::vector<std::string> args;
    std::string proposer_org;
    std::map<std::string, digest32> endorsements; // org_id -> rw digest
    std::uint64_t logical_time = 0;

    std::vector<std::uint8_t> id_preimage() const;
    digest32 compute_id() const;
    void seal() { tx_id = compute_id(); }

    void encode(byte_writer& w) const; // full record, incl. tx_id and endorsements
    static signed_transaction decode(byte_reader& r);
};

struct block {
    std::uint64_t index = 0;
    digest32 prev_hash;
    std::vector<signed_transaction> txs;
    digest32 block_hash;

    void encode(byte_writer& w) const;
    static block decode(byte_reader& r);
};

// block hash preimage: u64le(index) || prev_hash || tx_id_1 || ... || tx_id_n
digest32 compute_block_hash(std::uint64_t index, const digest32& prev_hash,
                            const std::vector<signed_transaction>& txs);

block make_genesis();

// Builds the successor of `tip`. Empty blocks are forbidden except genesis.
block make_block(const block& tip, std::vector<signed_transaction> txs);

// Versioned key-value world state. Versions start at 1 on first write and
// bump by exactly 1 per write; reads never mutate.
class world_state {
public:
    struct entry {
        std::string value;
        std::uint64_t version = 0;
    };

    std::optional<std::string> get(const std::string& key) const;
    std::uint64_t version_of(const std::string& key) const; // 0 when absent
    void put(const std::string& key, std::string value);

    const std::map<std::string, entry>& entries() const { return entries_; }
    std::vector<std::uint8_t> canonical_bytes() const;
    digest32 state_digest() const;

private:
    std::map<std::string, entry> entries_;
};

struct write_op {
    std::string key;
    std::string value;
};

// Produces the writes of one transaction given the state it executes against.
// The consensus layer plugs in smart-contract execution here; ledger-level
// tests pass precomputed write lists.
using tx_executor = std::function<std::vector<write_op>(const signed_transaction&, const world_state&)>;

// Append-only replicated chain plus the world state it replays to.
// Single-writer: only the owning node's commit loop mutates a replica.
class ledger_replica {
public:
    static ledger_replica create(std::string owner_node);

    const std::string& owner_node() const { return owner_node_; }
    const std::vector<block>& chain() const { return chain_; }
    const block& tip() const { return chain_.back(); }
    const world_state& state() const { return state_; }

    // Validates linkage and hashes before touching state; on error the
    // replica is unchanged. Applies each tx's writes in order.
    void append_block(const block& b, const tx_executor& exec);

private:
    std::string owner_node_;
    std::vector<block> chain_;
    world_state state_;
};

// True iff every block's tx_ids and block hash recompute and the chain links
// from a well-formed genesis. Total and side-effect free.
bool verify_chain(const std::vector<block>& chain);

// Chain dump container: magic, format version, then one record per block
// (canonical block bytes followed by a digest over those bytes). The record
// digest covers every committed byte, endorsements included, so any
// single-bit corruption of a dump is detectable. Layout in docs/encoding.md.
std::vector<std::uint8_t> encode_chain_dump(const std::vector<block>& chain);
std::vector<block> decode_chain_dump(std::span<const std::uint8_t> bytes);

// Full dump check: container digests, per-tx ids, hash chain, and committed
// endorsement well-formedness (pairwise-equal rw digests within a tx).
bool verify_chain_dump(std::span<const std::uint8_t> bytes, std::string* why = nullptr);

} // namespace opssc::ledger
