#pragma once

#include "catalog.hpp"
#include "consensus.hpp"
#include "engine_types.hpp"

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <vector>

namespace opssc::agent {

enum class runner_mode : std::uint8_t { builtin_verbs, real_shell };

struct runner_config {
    runner_mode mode = runner_mode::builtin_verbs;
    std::chrono::milliseconds step_timeout{5000};
    std::uint32_t retry_budget = 3; // history submission attempts
    bool parallel_nodes = false;
    std::set<std::string> shell_allowlist; // verbs a real_shell policy may run
};

// Executes one command step against one node's sandbox. Builtin mode
// resolves everything inside the workdir; real_shell spawns `/bin/sh -c`
// with cwd = workdir and the configured timeout, but only for allowlisted
// verbs that are not builtin.
class command_runner {
public:
    command_runner(runner_config cfg, std::filesystem::path repo_root);

    engine::step_result run_step(net::node_info& node, const engine::command_step& step,
                                 std::uint32_t step_index,
                                 const std::optional<engine::payload_spec>& payload) const;

    const runner_config& config() const { return cfg_; }

    // side-effect counters for the exactly-once tests: node_id -> steps run
    std::map<std::string, std::uint64_t> executed_steps() const;

private:
    engine::step_result run_shell(net::node_info& node, const engine::command_step& step,
                                  std::uint32_t step_index) const;

    runner_config cfg_;
    std::filesystem::path repo_root_;
    mutable std::mutex stats_mtx_;
    mutable std::map<std::string, std::uint64_t> executed_;
};

// Submits an endorsed tx; returns the rejection reason on failure.
using history_submit_fn = std::function<net::network::enqueue_result(
    const std::string& org_id, const std::string& exec_id, const std::string& op_id,
    const std::vector<engine::execution_record>& records)>;

// Per-organization event listener. Runs each event's command sequence on
// the org's responsible nodes and registers the evidence on-ledger.
// Processes each event_id at most once.
class ops_agent {
public:
    ops_agent(std::string org_id, std::vector<std::string> responsible_nodes,
              runner_config runner_cfg, std::filesystem::path repo_root, net::network& net);

    const std::string& org_id() const { return org_id_; }
    const command_runner& runner() const { return runner_; }

    // Event callback: executes steps per node (abort at first failure unless
    // the step says continue), submits one register_history tx for the
    // org's record batch, retrying up to the budget.
    void on_event(const engine::operational_event& ev);

    // Runs the command sequence and builds records without touching the
    // network (exposed for the agent-level tests).
    std::vector<engine::execution_record> execute_event(const engine::operational_event& ev);

    void set_history_submit(history_submit_fn fn) { submit_ = std::move(fn); }

    std::uint64_t processed_count() const;
    std::uint64_t duplicate_drops() const;
    const std::vector<std::string>& errors() const { return errors_; }

    // bench bookkeeping (threads mode): wall-clock marks per exec
    struct exec_timing {
        std::chrono::steady_clock::time_point event_received;
        std::map<std::string, std::chrono::steady_clock::time_point> node_completed;
        std::string history_tx_id;
    };
    std::optional<exec_timing> timing_for(const std::string& exec_id) const;

private:
    std::string org_id_;
    std::vector<std::string> responsible_nodes_;
    command_runner runner_;
    net::network& net_;
    history_submit_fn submit_;
    mutable std::mutex mtx_;
    std::set<std::string> processed_; // event ids, dedup
    std::uint64_t duplicates_ = 0;
    std::vector<std::string> errors_;
    std::map<std::string, exec_timing> timings_;
};

// Wires the agent's sink into the network's per-org event stream.
void subscribe(std::shared_ptr<ops_agent> agent, net::network& net);

} // namespace opssc::agent
