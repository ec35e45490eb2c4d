#include "consensus.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <fstream>

namespace opssc::net {

using nlohmann::json;

// ---------------------------------------------------------------- node_info

void node_info::load_registry() {
    installed.clear();
    std::ifstream in(registry_file);
    if (!in) return; // fresh node
    json j = json::parse(in);
    if (j.value("format", "") != "opssc-installed/1")
        throw std::runtime_error("node registry " + registry_file.string() + ": unknown format");
    for (const auto& e : j.at("installed")) {
        installed[{e.at("name").get<std::string>(), e.at("version").get<std::string>()}] =
            digest32::from_hex(e.at("digest").get<std::string>());
    }
}

void node_info::save_registry() const {
    json arr = json::array();
    for (const auto& [key, dig] : installed) {
        arr.push_back({{"name", key.first}, {"version", key.second}, {"digest", dig.hex()}});
    }
    json j;
    j["format"] = "opssc-installed/1";
    j["installed"] = std::move(arr);
    std::ofstream out(registry_file, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write node registry " + registry_file.string());
    out << j.dump(2) << '\n';
}

// ---------------------------------------------------------------- topology

void topology::validate() const {
    if (orgs.empty()) throw std::invalid_argument("topology needs at least one org");
    std::set<std::string> org_ids, node_ids;
    std::set<std::string> workdirs;
    for (const auto& org : orgs) {
        if (org.org_id.empty()) throw std::invalid_argument("org with empty id");
        if (!org_ids.insert(org.org_id).second)
            throw std::invalid_argument("duplicate org id '" + org.org_id + "'");
        if (org.node_ids.empty())
            throw std::invalid_argument("org '" + org.org_id + "' has no nodes");
    }
    bool any_orderer = false, any_committer = false;
    for (const auto& node : nodes) {
        if (!node_ids.insert(node.node_id).second)
            throw std::invalid_argument("duplicate node id '" + node.node_id + "'");
        if (!org_ids.contains(node.org_id))
            throw std::invalid_argument("node '" + node.node_id + "' references unknown org");
        if (node.roles.empty())
            throw std::invalid_argument("node '" + node.node_id + "' has no roles");
        if (!workdirs.insert(node.workdir.string()).second)
            throw std::invalid_argument("node workdirs must be disjoint");
        any_orderer = any_orderer || node.has_role(node_role::orderer);
        any_committer = any_committer || node.has_role(node_role::committer);
    }
    for (const auto& org : orgs)
        for (const auto& nid : org.node_ids) {
            auto* n = find_node(nid);
            if (!n || n->org_id != org.org_id)
                throw std::invalid_argument("org '" + org.org_id + "' lists foreign node '" + nid + "'");
        }
    if (!any_orderer) throw std::invalid_argument("topology needs at least one orderer node");
    if (!any_committer) throw std::invalid_argument("topology needs at least one committing node");
    default_policy.validate();
    for (const auto& o : default_policy.required_orgs)
        if (!org_ids.contains(o))
            throw std::invalid_argument("consensus policy references unknown org '" + o + "'");
    if (max_txs_per_block < 1) throw std::invalid_argument("max_txs_per_block must be >= 1");
}

const node_info* topology::find_node(const std::string& node_id) const {
    for (const auto& n : nodes)
        if (n.node_id == node_id) return &n;
    return nullptr;
}

const organization* topology::find_org(const std::string& org_id) const {
    for (const auto& o : orgs)
        if (o.org_id == org_id) return &o;
    return nullptr;
}

// ------------------------------------------------------------ topology_view

std::vector<std::string> topology_view::org_ids() const {
    std::vector<std::string> out;
    for (const auto& o : net_.topo_.orgs) out.push_back(o.org_id);
    return out;
}

std::vector<std::string> topology_view::org_node_ids(const std::string& org_id) const {
    const organization* o = net_.topo_.find_org(org_id);
    if (!o) return {};
    return o->node_ids;
}

bool topology_view::is_installed(const std::string& node_id, const std::string& sc_name,
                                 const std::string& version) const {
    const node_info* n = net_.topo_.find_node(node_id);
    return n && n->installed.contains({sc_name, version});
}

// --------------------------------------------------------------- sc_context

sc_context::sc_context(const ledger::world_state& snapshot, const ledger::signed_transaction& tx,
                       const topology_view& topo, bool replaying)
    : snapshot_(snapshot), tx_(tx), topo_(topo), replaying_(replaying) {}

std::optional<std::string> sc_context::get_state(const std::string& key) {
    auto w = writes_.find(key);
    if (w != writes_.end()) return w->second; // read-your-writes
    reads_.emplace(key, snapshot_.version_of(key));
    return snapshot_.get(key);
}

void sc_context::put_state(const std::string& key, std::string value) {
    writes_[key] = std::move(value);
}

void sc_context::emit_event(engine::operational_event ev) {
    ev.seal();
    events_.push_back(std::move(ev));
}

digest32 sc_context::rw_digest() const {
    byte_writer w;
    w.u32(static_cast<std::uint32_t>(reads_.size()));
    for (const auto& [key, ver] : reads_) {
        w.lp(key);
        w.u64(ver);
    }
    w.u32(static_cast<std::uint32_t>(writes_.size()));
    for (const auto& [key, value] : writes_) {
        w.lp(key);
        w.lp(value);
    }
    w.u32(static_cast<std::uint32_t>(events_.size()));
    for (const auto& ev : events_) {
        auto pre = ev.id_preimage();
        w.u32(static_cast<std::uint32_t>(pre.size()));
        w.raw(std::span<const std::uint8_t>(pre));
    }
    w.lp(response_);
    return sha256(std::span<const std::uint8_t>(w.data()));
}

// ------------------------------------------------------------------ network

network::network(topology topo) : topo_(std::move(topo)) {
    topo_.validate();
    rng_.seed(topo_.seed);
    for (const auto& node : topo_.nodes) {
        if (!node.has_role(node_role::committer)) continue;
        replica_by_node_[node.node_id] = replicas_.size();
        replicas_.push_back(ledger::ledger_replica::create(node.node_id));
    }
    for (const auto& org : topo_.orgs) agents_[org.org_id]; // outbox slots
}

network::~network() { stop_threads(); }

void network::register_system_sc(const std::string& name, sc_handler handler) {
    system_scs_[name] = std::move(handler);
}

bool network::has_system_sc(const std::string& name) const { return system_scs_.contains(name); }

const sc_handler* network::find_handler(const std::string& sc_name) const {
    auto it = system_scs_.find(sc_name);
    return it == system_scs_.end() ? nullptr : &it->second;
}

std::uint64_t network::next_logical_time() {
    std::lock_guard lk(queue_mtx_);
    return ++logical_clock_;
}

ledger::signed_transaction network::build_tx(const std::string& client_org,
                                             const std::string& sc_name,
                                             const std::string& function,
                                             std::vector<std::string> args, ledger::tx_kind kind) {
    ledger::signed_transaction tx;
    tx.kind = kind;
    tx.sc_name = sc_name;
    tx.function = function;
    tx.args = std::move(args);
    tx.proposer_org = client_org;
    tx.logical_time = next_logical_time();
    tx.seal();
    return tx;
}

void network::execute_into(sc_context& ctx, const ledger::signed_transaction& tx) const {
    const sc_handler* handler = find_handler(tx.sc_name);
    if (!handler) throw sc_exception({"no_such_sc", tx.sc_name});
    (*handler)(ctx);
}

network::endorse_outcome network::endorse(const std::string& node_id,
                                          const ledger::signed_transaction& tx) const {
    endorse_outcome out;
    const node_info* node = topo_.find_node(node_id);
    if (!node || !node->has_role(node_role::endorser)) {
        out.refusal = sc_error{"not_an_endorser", node_id};
        return out;
    }
    // Endorse against the node's own replica when it commits, else any
    // committed snapshot (all replicas are state-equal at quiescence).
    const ledger::world_state* snapshot = nullptr;
    auto it = replica_by_node_.find(node_id);
    if (it != replica_by_node_.end()) {
        snapshot = &replicas_[it->second].state();
    } else if (!replicas_.empty()) {
        snapshot = &replicas_.front().state();
    } else {
        out.refusal = sc_error{"no_committed_state", node_id};
        return out;
    }
    topology_view topo(*this);
    sc_context ctx(*snapshot, tx, topo, /*replaying=*/false);
    try {
        execute_into(ctx, tx);
    } catch (const sc_exception& e) {
        out.refusal = e.err;
        return out;
    } catch (const std::exception& e) {
        out.refusal = sc_error{"sc_execution_error", e.what()};
        return out;
    }
    out.ok = endorsement{node->org_id, ctx.rw_digest()};
    out.response = ctx.response();
    return out;
}

bool network::validate_endorsements(const consensus_policy& policy,
                                    const std::vector<endorsement>& endorsements) {
    policy.validate();
    // Largest group of pairwise-equal digests, counting each required org once.
    std::map<digest32, std::set<std::string>> groups;
    for (const auto& e : endorsements)
        if (policy.required_orgs.contains(e.org_id)) groups[e.rw_digest].insert(e.org_id);
    size_t best = 0;
    for (const auto& [dig, orgs] : groups) best = std::max(best, orgs.size());
    return best >= policy.quorum;
}

std::vector<std::string> network::pick_endorsers(const consensus_policy& policy) const {
    std::vector<std::string> picked;
    for (const auto& org_id : policy.required_orgs) {
        if (offline_orgs_.contains(org_id)) continue;
        const organization* org = topo_.find_org(org_id);
        if (!org) continue;
        std::vector<std::string> candidates;
        for (const auto& nid : org->node_ids) {
            const node_info* n = topo_.find_node(nid);
            if (n && n->has_role(node_role::endorser)) candidates.push_back(nid);
        }
        if (candidates.empty()) continue;
        std::uint64_t draw;
        {
            std::lock_guard lk(queue_mtx_); // rng shared across submitting threads
            draw = rng_();
        }
        picked.push_back(candidates[draw % candidates.size()]);
    }
    return picked;
}

network::enqueue_result network::enqueue_tx(const std::string& client_org,
                                            const std::string& sc_name,
                                            const std::string& function,
                                            std::vector<std::string> args,
                                            const consensus_policy& policy,
                                            ledger::tx_kind kind) {
    enqueue_result res;
    try {
        policy.validate();
    } catch (const std::exception& e) {
        res.reject_reason = std::string("invalid_policy: ") + e.what();
        return res;
    }
    if (!topo_.find_org(client_org)) {
        res.reject_reason = "unknown_client_org";
        return res;
    }
    ledger::signed_transaction tx = build_tx(client_org, sc_name, function, std::move(args), kind);

    std::vector<endorsement> endorsed;
    std::vector<sc_error> refusals;
    std::map<digest32, std::string> responses; // digest -> endorsing response
    {
        std::shared_lock lk(state_mtx_);
        for (const auto& node_id : pick_endorsers(policy)) {
            endorse_outcome out = endorse(node_id, tx);
            if (out.ok) {
                responses.emplace(out.ok->rw_digest, out.response);
                endorsed.push_back(std::move(*out.ok));
            } else {
                refusals.push_back(std::move(*out.refusal));
            }
        }
    }

    std::map<digest32, std::set<std::string>> groups;
    std::set<std::string> distinct_orgs;
    for (const auto& e : endorsed)
        if (policy.required_orgs.contains(e.org_id)) {
            groups[e.rw_digest].insert(e.org_id);
            distinct_orgs.insert(e.org_id);
        }
    const std::pair<const digest32, std::set<std::string>>* winner = nullptr;
    for (const auto& g : groups)
        if (!winner || g.second.size() > winner->second.size()) winner = &g;

    if (winner && winner->second.size() >= policy.quorum) {
        for (const auto& org : winner->second) tx.endorsements[org] = winner->first;
        res.accepted = true;
        res.tx_id = tx.tx_id.hex();
        res.response = responses[winner->first];
        {
            std::lock_guard lk(queue_mtx_);
            pending_.push_back(pending_tx{std::move(tx), res.response});
        }
        queue_cv_.notify_all();
        return res;
    }
    if (distinct_orgs.size() >= policy.quorum) {
        res.reject_reason = "non_deterministic";
        return res;
    }
    if (!refusals.empty()) {
        // surface the most common contract-level refusal
        std::map<std::string, int> counts;
        for (const auto& r : refusals) counts[r.code]++;
        auto best = std::max_element(counts.begin(), counts.end(),
                                     [](auto& a, auto& b) { return a.second < b.second; });
        res.reject_reason = best->first;
        return res;
    }
    res.reject_reason = "endorsement_policy";
    return res;
}

tx_result network::submit_tx(const std::string& client_org, const std::string& sc_name,
                             const std::string& function, std::vector<std::string> args,
                             const consensus_policy& policy, ledger::tx_kind kind) {
    enqueue_result queued = enqueue_tx(client_org, sc_name, function, std::move(args), policy, kind);
    if (!queued.accepted) return tx_result::rejected(queued.reject_reason);

    if (topo_.mode == scheduler_mode::deterministic) {
        run_until_quiescent();
    } else {
        if (!wait_committed(queued.tx_id, std::chrono::seconds(30)))
            return tx_result::rejected("commit_timeout");
    }

    std::lock_guard lk(queue_mtx_);
    auto it = committed_.find(queued.tx_id);
    if (it == committed_.end()) return tx_result::rejected("not_committed");
    if (!it->second.valid) return tx_result::rejected(it->second.invalid_reason);
    tx_result res;
    res.committed = true;
    res.block_index = it->second.block_index;
    res.tx_id = queued.tx_id;
    res.response = queued.response;
    auto ev = tx_events_.find(queued.tx_id);
    if (ev != tx_events_.end()) res.events = ev->second;
    return res;
}

std::string network::query(const std::string& sc_name, const std::string& function,
                           std::vector<std::string> args) const {
    std::shared_lock lk(state_mtx_);
    if (replicas_.empty()) throw sc_exception({"no_committed_state", ""});
    ledger::signed_transaction tx;
    tx.sc_name = sc_name;
    tx.function = function;
    tx.args = std::move(args);
    tx.logical_time = logical_clock_;
    topology_view topo(*this);
    sc_context ctx(replicas_.front().state(), tx, topo, false);
    execute_into(ctx, tx);
    if (!ctx.writes().empty() || !ctx.events().empty())
        throw sc_exception({"query_mutation", function + " attempted to write during a query"});
    return ctx.response();
}

void network::commit_block(const std::vector<pending_tx>& batch) {
    if (batch.empty()) return;
    std::unique_lock lk(state_mtx_);

    std::vector<ledger::signed_transaction> txs;
    txs.reserve(batch.size());
    for (const auto& p : batch) txs.push_back(p.tx);
    ledger::block b = ledger::make_block(replicas_.front().tip(), std::move(txs));

    // Execute on every replica; capture writes/events once (execution is
    // deterministic, so every replica agrees). A tx whose commit-time
    // re-execution rejects (e.g. a conflicting tx ordered earlier in the
    // same block changed its inputs) is committed as invalid: it occupies
    // its slot in the block but produces no writes and no events.
    std::vector<std::vector<engine::operational_event>> captured(b.txs.size());
    std::vector<std::pair<bool, std::string>> validity(b.txs.size(), {true, ""});
    topology_view topo(*this);
    bool first_replica = true;
    for (auto& replica : replicas_) {
        size_t tx_index = 0;
        bool capture = first_replica;
        replica.append_block(b, [&](const ledger::signed_transaction& tx,
                                    const ledger::world_state& state) {
            size_t i = tx_index++;
            sc_context ctx(state, tx, topo, replaying_);
            std::vector<ledger::write_op> writes;
            try {
                execute_into(ctx, tx);
                for (const auto& [k, v] : ctx.writes()) writes.push_back({k, v});
                if (capture) captured[i] = ctx.events();
            } catch (const sc_exception& e) {
                if (capture) validity[i] = {false, e.err.code};
            } catch (const std::exception& e) {
                if (capture) validity[i] = {false, std::string("sc_execution_error")};
            }
            return writes;
        });
        first_replica = false;
    }

    auto now = std::chrono::steady_clock::now();
    {
        std::lock_guard qlk(queue_mtx_);
        for (size_t i = 0; i < b.txs.size(); ++i) {
            const std::string id = b.txs[i].tx_id.hex();
            committed_[id] = commit_info{b.index, now, validity[i].first, validity[i].second};
            if (validity[i].first && !captured[i].empty()) tx_events_[id] = captured[i];
        }
        // Deliver after commit: each org's agent outbox receives the events
        // targeting that org, in org declaration order.
        for (const auto& org : topo_.orgs) {
            auto slot = agents_.find(org.org_id);
            if (slot == agents_.end()) continue;
            for (size_t i = 0; i < b.txs.size(); ++i) {
                if (!validity[i].first) continue;
                for (const auto& ev : captured[i])
                    if (ev.target_nodes.contains(org.org_id)) slot->second.outbox.push_back(ev);
            }
        }
    }
    lk.unlock();
    commit_cv_.notify_all();
    queue_cv_.notify_all();
}

bool network::drain_outboxes_once() {
    engine::operational_event ev;
    event_sink sink;
    {
        std::lock_guard lk(queue_mtx_);
        for (const auto& org : topo_.orgs) {
            auto it = agents_.find(org.org_id);
            if (it == agents_.end()) continue;
            agent_slot& slot = it->second;
            if (!slot.enabled || !slot.sink || slot.outbox.empty()) continue;
            ev = std::move(slot.outbox.front());
            slot.outbox.pop_front();
            sink = slot.sink;
            break;
        }
    }
    if (!sink) return false;
    sink(ev); // runs the agent inline; it may enqueue follow-up txs
    return true;
}

void network::run_until_quiescent() {
    if (topo_.mode != scheduler_mode::deterministic)
        throw std::logic_error("run_until_quiescent is a deterministic-mode operation");
    for (;;) {
        if (drain_outboxes_once()) continue;
        std::vector<pending_tx> batch;
        {
            std::lock_guard lk(queue_mtx_);
            if (pending_.empty()) break;
            size_t n = std::min<size_t>(pending_.size(), topo_.max_txs_per_block);
            for (size_t i = 0; i < n; ++i) {
                batch.push_back(std::move(pending_.front()));
                pending_.pop_front();
            }
        }
        commit_block(batch);
    }
}

std::vector<ledger::block> network::order_and_commit(std::vector<pending_tx> txs) {
    std::vector<ledger::block> blocks;
    size_t pos = 0;
    while (pos < txs.size()) {
        size_t n = std::min<size_t>(txs.size() - pos, topo_.max_txs_per_block);
        std::vector<pending_tx> batch(std::make_move_iterator(txs.begin() + pos),
                                      std::make_move_iterator(txs.begin() + pos + n));
        pos += n;
        commit_block(batch);
        std::shared_lock lk(state_mtx_);
        blocks.push_back(replicas_.front().tip());
    }
    return blocks;
}

void network::subscribe(const std::string& org_id, event_sink sink) {
    if (!topo_.find_org(org_id)) throw std::invalid_argument("unknown org '" + org_id + "'");
    std::lock_guard lk(queue_mtx_);
    agents_[org_id].sink = std::move(sink); // duplicate subscription replaces
}

void network::set_org_offline(const std::string& org_id, bool offline) {
    if (offline)
        offline_orgs_.insert(org_id);
    else
        offline_orgs_.erase(org_id);
}

void network::set_agent_enabled(const std::string& org_id, bool enabled) {
    {
        std::lock_guard lk(queue_mtx_);
        agents_[org_id].enabled = enabled;
    }
    queue_cv_.notify_all();
}

bool network::agent_enabled(const std::string& org_id) const {
    std::lock_guard lk(queue_mtx_);
    auto it = agents_.find(org_id);
    return it != agents_.end() && it->second.enabled;
}

void network::inject_redelivery(const engine::operational_event& ev) {
    {
        std::lock_guard lk(queue_mtx_);
        for (const auto& [org, nodes] : ev.target_nodes) {
            auto it = agents_.find(org);
            if (it != agents_.end()) it->second.outbox.push_back(ev);
        }
    }
    queue_cv_.notify_all();
}

node_info* network::mutable_node(const std::string& node_id) {
    for (auto& n : topo_.nodes)
        if (n.node_id == node_id) return &n;
    return nullptr;
}

bool network::verify_all(std::string* why) const {
    std::shared_lock lk(state_mtx_);
    if (replicas_.empty()) {
        if (why) *why = "no replicas";
        return false;
    }
    for (const auto& r : replicas_) {
        if (!ledger::verify_chain(r.chain())) {
            if (why) *why = "chain verification failed on " + r.owner_node();
            return false;
        }
    }
    const auto reference_chain = replicas_.front().chain().back().block_hash;
    const auto reference_state = replicas_.front().state().canonical_bytes();
    for (const auto& r : replicas_) {
        if (r.chain().back().block_hash != reference_chain ||
            r.chain().size() != replicas_.front().chain().size()) {
            if (why) *why = "replica chains diverge at " + r.owner_node();
            return false;
        }
        if (r.state().canonical_bytes() != reference_state) {
            if (why) *why = "replica states diverge at " + r.owner_node();
            return false;
        }
    }
    return true;
}

const ledger::world_state& network::committed_state() const { return replicas_.front().state(); }

std::vector<std::uint8_t> network::dump_chain() const {
    std::shared_lock lk(state_mtx_);
    return ledger::encode_chain_dump(replicas_.front().chain());
}

void network::restore_chain(std::span<const std::uint8_t> dump_bytes) {
    auto chain = ledger::decode_chain_dump(dump_bytes);
    if (!ledger::verify_chain(chain)) throw ledger::chain_error("dump fails chain verification");
    std::unique_lock lk(state_mtx_);
    for (auto& r : replicas_) r = ledger::ledger_replica::create(r.owner_node());
    committed_.clear();
    tx_events_.clear();
    replaying_ = true;
    lk.unlock();
    std::uint64_t max_time = 0;
    for (size_t i = 1; i < chain.size(); ++i) {
        std::vector<pending_tx> batch;
        for (const auto& tx : chain[i].txs) {
            max_time = std::max(max_time, tx.logical_time);
            batch.push_back(pending_tx{tx, ""});
        }
        commit_block(batch); // re-execution rebuilds state and the event trace
    }
    {
        std::lock_guard qlk(queue_mtx_);
        logical_clock_ = std::max(logical_clock_, max_time);
        // Historical events were already handled in the run that produced
        // the dump; drop them instead of redelivering.
        for (auto& [org, slot] : agents_) slot.outbox.clear();
    }
    replaying_ = false;
}

std::optional<std::chrono::steady_clock::time_point>
network::commit_time(const std::string& tx_id) const {
    std::lock_guard lk(queue_mtx_);
    auto it = committed_.find(tx_id);
    if (it == committed_.end()) return std::nullopt;
    return it->second.when;
}

std::vector<engine::operational_event> network::tx_events(const std::string& tx_id) const {
    std::lock_guard lk(queue_mtx_);
    auto it = tx_events_.find(tx_id);
    if (it == tx_events_.end()) return {};
    return it->second;
}

std::vector<engine::operational_event>
network::tx_events_for_exec(const std::string& exec_id) const {
    std::lock_guard lk(queue_mtx_);
    std::vector<engine::operational_event> out;
    for (const auto& [tx_id, events] : tx_events_)
        for (const auto& ev : events)
            if (ev.exec_id == exec_id) out.push_back(ev);
    return out;
}

bool network::wait_committed(const std::string& tx_id, std::chrono::milliseconds timeout) {
    std::unique_lock lk(queue_mtx_);
    return commit_cv_.wait_for(lk, timeout, [&] { return committed_.contains(tx_id); });
}

void network::start_threads() {
    if (topo_.mode != scheduler_mode::threads)
        throw std::logic_error("start_threads requires threads scheduler mode");
    if (threads_running_) return;
    stop_ = false;
    threads_running_ = true;
    workers_.emplace_back([this] { orderer_loop(); });
    for (const auto& org : topo_.orgs)
        if (org.has_agent) workers_.emplace_back([this, id = org.org_id] { dispatcher_loop(id); });
}

void network::stop_threads() {
    {
        std::lock_guard lk(queue_mtx_);
        if (!threads_running_) return;
        stop_ = true;
    }
    queue_cv_.notify_all();
    commit_cv_.notify_all();
    for (auto& t : workers_) t.join();
    workers_.clear();
    threads_running_ = false;
}

void network::orderer_loop() {
    constexpr auto batch_timeout = std::chrono::milliseconds(2);
    for (;;) {
        std::vector<pending_tx> batch;
        {
            std::unique_lock lk(queue_mtx_);
            queue_cv_.wait_for(lk, batch_timeout, [&] { return stop_ || !pending_.empty(); });
            if (stop_) return;
            size_t n = std::min<size_t>(pending_.size(), topo_.max_txs_per_block);
            for (size_t i = 0; i < n; ++i) {
                batch.push_back(std::move(pending_.front()));
                pending_.pop_front();
            }
        }
        if (!batch.empty()) commit_block(batch);
    }
}

void network::dispatcher_loop(const std::string& org_id) {
    for (;;) {
        engine::operational_event ev;
        event_sink sink;
        {
            std::unique_lock lk(queue_mtx_);
            queue_cv_.wait(lk, [&] {
                auto& slot = agents_[org_id];
                return stop_ || (slot.enabled && slot.sink && !slot.outbox.empty());
            });
            if (stop_) return;
            auto& slot = agents_[org_id];
            ev = std::move(slot.outbox.front());
            slot.outbox.pop_front();
            sink = slot.sink;
        }
        sink(ev);
    }
}

} // namespace opssc::net
