#pragma once

#include "consensus_policy.hpp"
#include "engine_types.hpp"
#include "ledger.hpp"

#include <chrono>
#include <condition_variable>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <set>
#include <shared_mutex>
#include <string>
#include <thread>
#include <vector>

namespace opssc::net {

enum class node_role : std::uint8_t { endorser, committer, orderer };

// A peer's local context: roles, sandbox paths, and the node-local registry
// of installed contracts (install is a node act, not a ledger write).
struct node_info {
    std::string node_id;
    std::string org_id;
    std::set<node_role> roles;
    std::filesystem::path workdir;       // cleaned by the "clean" verb
    std::filesystem::path registry_file; // survives workdir cleaning
    std::map<std::pair<std::string, std::string>, digest32> installed; // (name, ver) -> payload digest

    bool has_role(node_role r) const { return roles.contains(r); }
    void load_registry();
    void save_registry() const;
};

struct organization {
    std::string org_id;
    std::vector<std::string> node_ids;
    bool has_agent = true;
};

struct endorsement {
    std::string org_id;
    digest32 rw_digest;
};

// Rejection reason raised by smart-contract code; becomes the tx_result
// reject reason verbatim.
struct sc_error {
    std::string code;
    std::string detail;
};

struct sc_exception : std::runtime_error {
    sc_error err;
    explicit sc_exception(sc_error e)
        : std::runtime_error(e.code + (e.detail.empty() ? "" : ": " + e.detail)), err(std::move(e)) {}
};

class network;

// Read-only view of the static topology plus node-local install registries,
// available to contract code. Identical on every node by construction.
class topology_view {
public:
    explicit topology_view(const network& net) : net_(net) {}
    std::vector<std::string> org_ids() const;
    std::vector<std::string> org_node_ids(const std::string& org_id) const;
    bool is_installed(const std::string& node_id, const std::string& sc_name,
                      const std::string& version) const;

private:
    const network& net_;
};

// Execution context handed to contract handlers. Reads hit the snapshot (or
// the handler's own buffered writes); writes and events are buffered into
// the simulated read/write set.
class sc_context {
public:
    sc_context(const ledger::world_state& snapshot, const ledger::signed_transaction& tx,
               const topology_view& topo, bool replaying);

    std::optional<std::string> get_state(const std::string& key);
    void put_state(const std::string& key, std::string value);
    void emit_event(engine::operational_event ev);

    const std::vector<std::string>& args() const { return tx_.args; }
    const std::string& function() const { return tx_.function; }
    const std::string& proposer_org() const { return tx_.proposer_org; }
    std::uint64_t logical_time() const { return tx_.logical_time; }
    const topology_view& topology() const { return topo_; }
    bool replaying() const { return replaying_; }

    void set_response(std::string r) { response_ = std::move(r); }

    // rw set accessors (used to form the endorsement digest and commit writes)
    const std::map<std::string, std::uint64_t>& reads() const { return reads_; }
    const std::map<std::string, std::string>& writes() const { return writes_; }
    const std::vector<engine::operational_event>& events() const { return events_; }
    const std::string& response() const { return response_; }

    digest32 rw_digest() const; // over reads, writes, events, and response

private:
    const ledger::world_state& snapshot_;
    const ledger::signed_transaction& tx_;
    const topology_view& topo_;
    bool replaying_;
    std::map<std::string, std::uint64_t> reads_; // key -> version at snapshot
    std::map<std::string, std::string> writes_;  // buffered, read-your-writes
    std::vector<engine::operational_event> events_;
    std::string response_;
};

// A contract handler mutates only its context; rejections are thrown as
// sc_exception. Handlers must be pure functions of (snapshot, tx, topology).
using sc_handler = std::function<void(sc_context&)>;

struct tx_result {
    bool committed = false;
    std::uint64_t block_index = 0;
    std::string tx_id;
    std::string response;
    std::vector<engine::operational_event> events;
    std::string reject_reason;

    static tx_result rejected(std::string reason) {
        tx_result r;
        r.reject_reason = std::move(reason);
        return r;
    }
};

// An endorsed proposal waiting for the ordering service.
struct pending_tx {
    ledger::signed_transaction tx;
    std::string response; // from the endorsing execution
};

enum class scheduler_mode : std::uint8_t { deterministic, threads };

struct topology {
    std::vector<organization> orgs;       // in declaration order
    std::vector<node_info> nodes;         // in declaration order
    consensus_policy default_policy;
    std::uint32_t max_txs_per_block = 10;
    scheduler_mode mode = scheduler_mode::deterministic;
    std::uint64_t seed = 0;
    std::filesystem::path shared_repo_root;

    void validate() const; // unique ids, >=1 orderer, roles sane

    const node_info* find_node(const std::string& node_id) const;
    const organization* find_org(const std::string& org_id) const;
};

// Event sink registered by an agent; delivery is at-least-once, agents
// deduplicate by event_id.
using event_sink = std::function<void(const engine::operational_event&)>;

// Endorse -> order -> commit pipeline over per-committing-node replicas.
//
// Deterministic mode runs everything on the caller's thread as a logical
// event loop. Threads mode (bench) starts an orderer thread and delivers
// events to agent sinks on per-org dispatcher threads; state is guarded by
// a single reader/writer lock (endorsements and queries share, commits
// exclude).
class network {
public:
    explicit network(topology topo);
    ~network();

    network(const network&) = delete;
    network& operator=(const network&) = delete;

    const topology& topo() const { return topo_; }
    topology_view view() const { return topology_view(*this); }

    void register_system_sc(const std::string& name, sc_handler handler);
    bool has_system_sc(const std::string& name) const;

    // --- client API ---------------------------------------------------

    // Endorse + validate + enqueue for ordering. Returns the queued tx id
    // or a rejection; never mutates committed state.
    struct enqueue_result {
        bool accepted = false;
        std::string tx_id;
        std::string response;
        std::string reject_reason;
    };
    enqueue_result enqueue_tx(const std::string& client_org, const std::string& sc_name,
                              const std::string& function, std::vector<std::string> args,
                              const consensus_policy& policy,
                              ledger::tx_kind kind = ledger::tx_kind::invoke);

    // Synchronous convenience: enqueue, then (deterministic mode) drive the
    // pipeline to quiescence; reports this tx's outcome.
    tx_result submit_tx(const std::string& client_org, const std::string& sc_name,
                        const std::string& function, std::vector<std::string> args,
                        const consensus_policy& policy,
                        ledger::tx_kind kind = ledger::tx_kind::invoke);

    // Read-only contract execution against committed state; no tx, no
    // mutation. Throws sc_exception on handler rejection.
    std::string query(const std::string& sc_name, const std::string& function,
                      std::vector<std::string> args) const;

    // Deterministic mode: process pending blocks, event deliveries, and any
    // work agents enqueue, until nothing is left.
    void run_until_quiescent();

    // Orders the given endorsed txs FIFO into blocks of at most
    // max_txs_per_block and commits each; returns the cut blocks.
    std::vector<ledger::block> order_and_commit(std::vector<pending_tx> txs);

    // --- endorsement internals (exposed per module contract) -----------

    // Read-only simulated execution on one endorsing node. Callers in
    // threads mode must hold the state read lock.
    struct endorse_outcome {
        std::optional<endorsement> ok;
        std::optional<sc_error> refusal;
        std::string response; // from the endorsing execution
    };
    endorse_outcome endorse(const std::string& node_id, const ledger::signed_transaction& tx) const;

    // True iff >= quorum distinct required orgs endorsed with pairwise-equal
    // rw digests (the largest equal-digest group decides).
    static bool validate_endorsements(const consensus_policy& policy,
                                      const std::vector<endorsement>& endorsements);

    // --- agents ---------------------------------------------------------

    // Replaces any previous subscription for the org. Undelivered backlog
    // (events committed before subscription) is delivered on the next drain.
    void subscribe(const std::string& org_id, event_sink sink);
    void set_org_offline(const std::string& org_id, bool offline); // endorsement withheld
    void set_agent_enabled(const std::string& org_id, bool enabled); // delivery paused
    bool agent_enabled(const std::string& org_id) const;

    // Test harness hook: at-least-once redelivery of an already-delivered
    // event to its target orgs.
    void inject_redelivery(const engine::operational_event& ev);

    // --- inspection -----------------------------------------------------

    const std::vector<ledger::ledger_replica>& replicas() const { return replicas_; }
    node_info* mutable_node(const std::string& node_id);
    const node_info* find_node(const std::string& node_id) const { return topo_.find_node(node_id); }

    // All committing replicas verify and are pairwise state-equal.
    bool verify_all(std::string* why = nullptr) const;

    const ledger::world_state& committed_state() const; // first replica's state
    std::vector<std::uint8_t> dump_chain() const;

    // Rebuilds replicas by re-executing a dumped chain (replay flag set so
    // node-local preconditions are not re-checked). Historical events are
    // not redelivered.
    void restore_chain(std::span<const std::uint8_t> dump_bytes);

    // wall-clock commit instants per tx (threads mode bench bookkeeping)
    std::optional<std::chrono::steady_clock::time_point> commit_time(const std::string& tx_id) const;

    // events a committed tx emitted (rebuilt on replay; audit trail source)
    std::vector<engine::operational_event> tx_events(const std::string& tx_id) const;
    std::vector<engine::operational_event> tx_events_for_exec(const std::string& exec_id) const;

    // threads mode lifecycle
    void start_threads();
    void stop_threads();
    bool wait_committed(const std::string& tx_id, std::chrono::milliseconds timeout);

    std::uint64_t next_logical_time();

private:
    friend class topology_view;

    struct agent_slot {
        event_sink sink;
        bool enabled = true;
        std::deque<engine::operational_event> outbox;
    };

    ledger::signed_transaction build_tx(const std::string& client_org, const std::string& sc_name,
                                        const std::string& function, std::vector<std::string> args,
                                        ledger::tx_kind kind);
    const sc_handler* find_handler(const std::string& sc_name) const;
    void execute_into(sc_context& ctx, const ledger::signed_transaction& tx) const;
    std::vector<std::string> pick_endorsers(const consensus_policy& policy) const;
    void commit_block(const std::vector<pending_tx>& batch);
    bool drain_outboxes_once();
    void orderer_loop();
    void dispatcher_loop(const std::string& org_id);

    struct commit_info {
        std::uint64_t block_index = 0;
        std::chrono::steady_clock::time_point when;
        bool valid = true;
        std::string invalid_reason;
    };

    topology topo_;
    std::map<std::string, sc_handler> system_scs_;
    std::vector<ledger::ledger_replica> replicas_; // one per committing node, topology order
    std::map<std::string, size_t> replica_by_node_;
    std::map<std::string, agent_slot> agents_; // org -> slot
    std::set<std::string> offline_orgs_;
    std::uint64_t logical_clock_ = 0;
    bool replaying_ = false;
    mutable std::mt19937_64 rng_;

    std::deque<pending_tx> pending_;
    std::map<std::string, commit_info> committed_;
    std::map<std::string, std::vector<engine::operational_event>> tx_events_;

    // threads mode machinery
    mutable std::shared_mutex state_mtx_;
    mutable std::mutex queue_mtx_;
    std::condition_variable queue_cv_;
    std::condition_variable commit_cv_;
    std::vector<std::thread> workers_;
    bool stop_ = false;
    bool threads_running_ = false;
};

} // namespace opssc::net
