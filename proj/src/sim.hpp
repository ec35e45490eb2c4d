#pragma once

#include "agent.hpp"
#include "catalog.hpp"
#include "consensus.hpp"
#include "engine.hpp"
#include "topology.hpp"

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace opssc::sim {

// A run directory holds everything one simulated network owns:
//   manifest.json   config copy + format version
//   chain.dump      canonical chain (maintained by save())
//   sandboxes/<org>/<node>/{work/, installed.json}
//   repo/           shared artifact repository (default location)
class simulation {
public:
    // network init: fresh genesis, sandboxes created, agents subscribed.
    static std::unique_ptr<simulation> create(const std::string& config_text,
                                              const std::filesystem::path& run_root);
    // Rebuilds a saved run by replaying its chain dump.
    static std::unique_ptr<simulation> load(const std::filesystem::path& run_root);

    void save(); // writes chain.dump

    net::network& network() { return *net_; }
    const net::network& network() const { return *net_; }
    const std::filesystem::path& run_root() const { return run_root_; }
    catalog::shared_repo& repo() { return *repo_; }
    std::shared_ptr<agent::ops_agent> agent_for(const std::string& org_id) const;

    // Policy ingestion; returns the committed op_id. Throws on validation
    // problems, returns the rejection via tx_result otherwise.
    net::tx_result register_policy_text(const std::string& policy_json, std::string as_org = "");
    net::tx_result register_builtin_policy(const std::string& which, std::string as_org = "");

    struct op_outcome {
        std::string exec_id;
        engine::exec_phase phase = engine::exec_phase::issued;
        std::string reject_reason; // set when the execute tx was rejected
        bool rejected() const { return !reject_reason.empty(); }
    };
    op_outcome run_op(const std::string& op_id, const engine::param_map& params,
                      std::string as_org = "");

    // Advances the periodic scheduler; policies with periodic timing are
    // executed (with their defaults) whenever their interval divides the
    // tick. Returns the outcome of each issued execution.
    std::vector<op_outcome> run_ticks(std::uint64_t ticks);
    std::uint64_t current_tick() const { return tick_; }

    engine::execution_status status(const std::string& exec_id) const;
    net::tx_result deploy(const std::string& sc_name, const std::string& version,
                          std::string as_org = "");

    bool verify(std::string* why = nullptr) const;
    std::string history_json(const std::string& exec_id) const; // audit from chain + state
    std::string chain_summary_json() const;
    void dump_chain_to(const std::filesystem::path& path) const;

    // deterministic-mode drains (used after re-enabling an agent)
    void drain();

    std::string default_client_org() const { return net_->topo().orgs.front().org_id; }

private:
    simulation() = default;
    void build(const std::string& config_text, const std::filesystem::path& run_root);

    std::filesystem::path run_root_;
    std::string config_text_;
    std::unique_ptr<net::network> net_;
    std::unique_ptr<catalog::shared_repo> repo_;
    std::vector<std::shared_ptr<agent::ops_agent>> agents_;
    agent::runner_config agent_cfg_;
    std::uint64_t tick_ = 0;
};

// --- bench -----------------------------------------------------------------

struct bench_options {
    std::uint32_t repetitions = 100;
    std::uint32_t warmup = 3;
};

struct bench_summary {
    std::uint32_t rows = 0;
    double mean_submit_to_commit_ms = 0.0;
    double max_submit_to_commit_ms = 0.0;
    double max_completion_gap_ms = 0.0;
    std::string csv_header;
};

// Runs the installation operation `repetitions` times after `warmup`
// discarded trials on a threads-mode network built from config_text,
// streaming one CSV row per execution. Refuses deterministic-mode configs.
bench_summary run_bench(const std::string& config_text, const std::filesystem::path& run_root,
                        const bench_options& opts, std::ostream& csv);

} // namespace opssc::sim
