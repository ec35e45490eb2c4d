#include "sim.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <ostream>
#include <thread>

namespace opssc::sim {

namespace fs = std::filesystem;
using nlohmann::json;

static std::string read_text_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + p.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

static void write_bytes(const fs::path& p, std::span<const std::uint8_t> bytes) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
}

void simulation::build(const std::string& config_text, const fs::path& run_root) {
    run_root_ = run_root;
    config_text_ = config_text;
    net::topology topo = parse_topology(config_text, run_root, &agent_cfg_);

    fs::create_directories(run_root);
    for (auto& node : topo.nodes) {
        fs::create_directories(node.workdir);
        node.load_registry(); // picks up installs from a previous run
    }
    repo_ = std::make_unique<catalog::shared_repo>(topo.shared_repo_root);

    net_ = std::make_unique<net::network>(std::move(topo));
    engine::install_opssc(*net_);
    catalog::install_lifecycle(*net_);

    for (const auto& org : net_->topo().orgs) {
        if (!org.has_agent) continue;
        auto a = std::make_shared<agent::ops_agent>(org.org_id, org.node_ids, agent_cfg_,
                                                    net_->topo().shared_repo_root, *net_);
        agent::subscribe(a, *net_);
        agents_.push_back(std::move(a));
    }
    if (net_->topo().mode == net::scheduler_mode::threads) net_->start_threads();
}

std::unique_ptr<simulation> simulation::create(const std::string& config_text,
                                               const fs::path& run_root) {
    const fs::path manifest = run_root / "manifest.json";
    if (fs::exists(manifest))
        throw std::invalid_argument(run_root.string() +
                                    " is already initialized (manifest.json present)");
    auto sim = std::unique_ptr<simulation>(new simulation());
    sim->build(config_text, run_root);
    json m;
    m["format"] = "opssc-run/1";
    m["config"] = config_text;
    std::ofstream out(manifest, std::ios::trunc);
    out << m.dump(2) << '\n';
    sim->save();
    return sim;
}

std::unique_ptr<simulation> simulation::load(const fs::path& run_root) {
    const fs::path manifest = run_root / "manifest.json";
    if (!fs::exists(manifest))
        throw std::invalid_argument(run_root.string() + " has no manifest.json");
    json m = json::parse(read_text_file(manifest));
    if (m.value("format", "") != "opssc-run/1")
        throw std::invalid_argument("manifest format is not opssc-run/1");
    auto sim = std::unique_ptr<simulation>(new simulation());
    sim->build(m.at("config").get<std::string>(), run_root);
    const fs::path dump = run_root / "chain.dump";
    if (fs::exists(dump)) {
        std::string bytes = read_text_file(dump);
        sim->net_->restore_chain(std::span<const std::uint8_t>(
            reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()));
    }
    return sim;
}

void simulation::save() {
    write_bytes(run_root_ / "chain.dump", std::span<const std::uint8_t>(net_->dump_chain()));
}

std::shared_ptr<agent::ops_agent> simulation::agent_for(const std::string& org_id) const {
    for (const auto& a : agents_)
        if (a->org_id() == org_id) return a;
    return nullptr;
}

net::tx_result simulation::register_policy_text(const std::string& policy_json, std::string as_org) {
    engine::operational_policy policy = engine::policy_from_json(policy_json);
    if (as_org.empty()) as_org = default_client_org();
    return engine::register_policy(*net_, as_org, policy);
}

net::tx_result simulation::register_builtin_policy(const std::string& which, std::string as_org) {
    if (which != catalog::sc_install_op_id)
        throw std::invalid_argument("unknown builtin policy '" + which + "'");
    if (as_org.empty()) as_org = default_client_org();
    return engine::register_policy(*net_, as_org,
                                   catalog::build_sc_install_policy(net_->topo().default_policy));
}

simulation::op_outcome simulation::run_op(const std::string& op_id,
                                          const engine::param_map& params, std::string as_org) {
    if (as_org.empty()) as_org = default_client_org();
    op_outcome out;
    net::tx_result res = engine::execute_operation(*net_, as_org, op_id, params);
    if (!res.committed) {
        out.reject_reason = res.reject_reason;
        return out;
    }
    out.exec_id = res.response;
    if (net_->topo().mode == net::scheduler_mode::threads) {
        // wait for the history reports to land
        const auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(30);
        while (std::chrono::steady_clock::now() < deadline) {
            auto st = status(out.exec_id);
            if (st.phase == engine::exec_phase::complete || st.phase == engine::exec_phase::failed)
                break;
            std::this_thread::sleep_for(std::chrono::milliseconds(1));
        }
    }
    out.phase = status(out.exec_id).phase;
    return out;
}

std::vector<simulation::op_outcome> simulation::run_ticks(std::uint64_t ticks) {
    std::vector<op_outcome> issued;
    json ids = json::parse(net_->query(engine::opssc_sc_name, "list_policies", {}));
    for (std::uint64_t t = 0; t < ticks; ++t) {
        ++tick_;
        for (const auto& id : ids) {
            engine::operational_policy p = engine::get_policy(*net_, id.get<std::string>());
            if (p.timing.kind != engine::timing_kind::periodic) continue;
            if (tick_ % p.timing.interval_ticks == 0) issued.push_back(run_op(p.op_id, {}));
        }
    }
    return issued;
}

engine::execution_status simulation::status(const std::string& exec_id) const {
    return engine::get_execution_status(*net_, exec_id);
}

net::tx_result simulation::deploy(const std::string& sc_name, const std::string& version,
                                  std::string as_org) {
    if (as_org.empty()) as_org = default_client_org();
    return catalog::deploy_or_upgrade(*net_, as_org, sc_name, version,
                                      net_->topo().default_policy);
}

bool simulation::verify(std::string* why) const { return net_->verify_all(why); }

std::string simulation::history_json(const std::string& exec_id) const {
    json out;
    out["exec_id"] = exec_id;
    out["status"] = json::parse(net_->query(engine::opssc_sc_name, "get_execution_status", {exec_id}));

    // evidence records straight from committed state
    json records = json::object();
    const std::string prefix = "hist/" + exec_id + "/";
    for (const auto& [key, entry] : net_->committed_state().entries()) {
        if (key.rfind(prefix, 0) != 0) continue;
        records[key.substr(prefix.size())] = json::parse(entry.value);
    }
    out["records"] = std::move(records);

    // locate the execute tx and the history txs on the chain
    json history_txs = json::array();
    json execute_tx;
    for (const auto& b : net_->replicas().front().chain()) {
        for (const auto& tx : b.txs) {
            const std::string id = tx.tx_id.hex();
            if (tx.sc_name == engine::opssc_sc_name && tx.function == "register_history" &&
                !tx.args.empty() && tx.args[0] == exec_id) {
                history_txs.push_back({{"tx_id", id},
                                       {"org", tx.args.size() > 1 ? tx.args[1] : ""},
                                       {"block", b.index}});
            } else if (tx.sc_name == engine::opssc_sc_name && tx.function == "execute_operation") {
                for (const auto& ev : net_->tx_events(id))
                    if (ev.exec_id == exec_id)
                        execute_tx = {{"tx_id", id}, {"block", b.index}, {"op_id", ev.op_id}};
            }
        }
    }
    out["execute_tx"] = execute_tx.is_null() ? json::object() : execute_tx;
    out["history_txs"] = std::move(history_txs);
    return out.dump(2);
}

std::string simulation::chain_summary_json() const {
    json blocks = json::array();
    for (const auto& b : net_->replicas().front().chain()) {
        json jb;
        jb["index"] = b.index;
        jb["hash"] = b.block_hash.hex();
        jb["prev_hash"] = b.prev_hash.hex();
        json txs = json::array();
        for (const auto& tx : b.txs) {
            json jt;
            jt["tx_id"] = tx.tx_id.hex();
            jt["sc"] = tx.sc_name;
            jt["fn"] = tx.function;
            jt["proposer"] = tx.proposer_org;
            jt["logical_time"] = tx.logical_time;
            json orgs = json::array();
            for (const auto& [org, dig] : tx.endorsements) orgs.push_back(org);
            jt["endorsing_orgs"] = std::move(orgs);
            txs.push_back(std::move(jt));
        }
        jb["txs"] = std::move(txs);
        blocks.push_back(std::move(jb));
    }
    json out;
    out["blocks"] = std::move(blocks);
    out["state_digest"] = net_->committed_state().state_digest().hex();
    return out.dump(2);
}

void simulation::dump_chain_to(const fs::path& path) const {
    write_bytes(path, std::span<const std::uint8_t>(net_->dump_chain()));
}

void simulation::drain() {
    if (net_->topo().mode == net::scheduler_mode::deterministic) net_->run_until_quiescent();
}

// ------------------------------------------------------------------- bench

static double ms_between(std::chrono::steady_clock::time_point a,
                         std::chrono::steady_clock::time_point b) {
    return std::chrono::duration<double, std::milli>(b - a).count();
}

bench_summary run_bench(const std::string& config_text, const fs::path& run_root,
                        const bench_options& opts, std::ostream& csv) {
    auto sim = simulation::create(config_text, run_root);
    net::network& net = sim->network();
    if (net.topo().mode != net::scheduler_mode::threads)
        throw std::invalid_argument(
            "bench requires scheduler mode 'threads'; wall-clock metrics are meaningless "
            "under the deterministic scheduler");

    const std::string client = sim->default_client_org();
    const std::string name = "bench-app", version = "1.0";
    if (!sim->repo().has(name, version)) {
        const std::string payload = "bench payload for " + name + " " + version + "\n";
        sim->repo().publish(name, version,
                            std::span<const std::uint8_t>(
                                reinterpret_cast<const std::uint8_t*>(payload.data()),
                                payload.size()));
    }
    auto reg = sim->register_builtin_policy(catalog::sc_install_op_id);
    if (!reg.committed) throw std::runtime_error("bench setup: " + reg.reject_reason);

    std::vector<std::string> org_order;
    for (const auto& org : net.topo().orgs) org_order.push_back(org.org_id);

    std::string header = "exec_id,submit_to_commit_ms";
    for (const auto& org : org_order) header += "," + org + "_event_to_history_ms";
    header += ",completion_gap_ms";
    csv << header << '\n';

    bench_summary summary;
    summary.csv_header = header;
    double total_commit_ms = 0.0;

    const std::uint32_t total = opts.warmup + opts.repetitions;
    for (std::uint32_t rep = 0; rep < total; ++rep) {
        const bool measured = rep >= opts.warmup;
        const auto t0 = std::chrono::steady_clock::now();
        net::tx_result res = engine::execute_operation(net, client, catalog::sc_install_op_id,
                                                       {{"name", name}, {"version", version}});
        if (!res.committed) throw std::runtime_error("bench execute rejected: " + res.reject_reason);
        auto commit_at = net.commit_time(res.tx_id);
        if (!commit_at) throw std::runtime_error("bench: commit time missing");
        const double submit_to_commit = ms_between(t0, *commit_at);
        const std::string exec_id = res.response;

        const auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(15);
        engine::exec_phase phase = engine::exec_phase::issued;
        while (std::chrono::steady_clock::now() < deadline) {
            phase = engine::get_execution_status(net, exec_id).phase;
            if (phase == engine::exec_phase::complete || phase == engine::exec_phase::failed) break;
            std::this_thread::sleep_for(std::chrono::microseconds(200));
        }
        if (phase != engine::exec_phase::complete)
            throw std::runtime_error("bench execution did not complete: " + exec_id);
        if (!measured) continue;

        // gap = spread of per-node completion instants across every org
        std::optional<std::chrono::steady_clock::time_point> first_done, last_done;
        std::string row = exec_id + "," + std::to_string(submit_to_commit);
        for (const auto& org : org_order) {
            auto a = sim->agent_for(org);
            std::optional<agent::ops_agent::exec_timing> timing;
            if (a) timing = a->timing_for(exec_id);
            double hist_ms = -1.0;
            if (timing && !timing->history_tx_id.empty()) {
                if (auto hc = net.commit_time(timing->history_tx_id))
                    hist_ms = ms_between(timing->event_received, *hc);
            }
            if (timing) {
                for (const auto& [node, done] : timing->node_completed) {
                    if (!first_done || done < *first_done) first_done = done;
                    if (!last_done || done > *last_done) last_done = done;
                }
            }
            row += "," + std::to_string(hist_ms);
        }
        const double gap =
            (first_done && last_done) ? ms_between(*first_done, *last_done) : 0.0;
        row += "," + std::to_string(gap);
        csv << row << '\n';
        csv.flush(); // streaming: bounded memory at any repetition count

        ++summary.rows;
        total_commit_ms += submit_to_commit;
        summary.max_submit_to_commit_ms = std::max(summary.max_submit_to_commit_ms, submit_to_commit);
        summary.max_completion_gap_ms = std::max(summary.max_completion_gap_ms, gap);
    }
    if (summary.rows > 0) summary.mean_submit_to_commit_ms = total_commit_ms / summary.rows;
    sim->save();
    return summary;
}

} // namespace opssc::sim
