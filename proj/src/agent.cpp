#include "agent.hpp"

#include "engine.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <future>
#include <sstream>

namespace opssc::agent {

using engine::command_step;
using engine::execution_record;
using engine::operational_event;
using engine::step_result;

command_runner::command_runner(runner_config cfg, std::filesystem::path repo_root)
    : cfg_(std::move(cfg)), repo_root_(std::move(repo_root)) {}

std::map<std::string, std::uint64_t> command_runner::executed_steps() const {
    std::lock_guard lk(stats_mtx_);
    return executed_;
}

step_result command_runner::run_step(net::node_info& node, const command_step& step,
                                     std::uint32_t step_index,
                                     const std::optional<engine::payload_spec>& payload) const {
    {
        std::lock_guard lk(stats_mtx_);
        executed_[node.node_id]++;
    }
    if (catalog::is_builtin_verb(step.verb)) {
        catalog::verb_env env{&node, repo_root_, payload};
        catalog::verb_result r = catalog::run_builtin_verb(env, step);
        step_result out;
        out.step_index = step_index;
        out.exit_code = r.exit_code;
        out.output_digest = sha256(r.output);
        out.note = r.note;
        return out;
    }
    if (cfg_.mode == runner_mode::real_shell && cfg_.shell_allowlist.contains(step.verb))
        return run_shell(node, step, step_index);
    step_result out;
    out.step_index = step_index;
    out.exit_code = 127;
    out.output_digest = sha256(std::string("unknown verb: ") + step.verb);
    out.note = "unknown_verb";
    return out;
}

// Spawns /bin/sh -c "<verb> <args...>" with cwd = workdir, collects stdout
// and stderr, and kills the child at the timeout.
step_result command_runner::run_shell(net::node_info& node, const command_step& step,
                                      std::uint32_t step_index) const {
    step_result out;
    out.step_index = step_index;

    std::string cmdline = step.verb;
    for (const auto& a : step.args) cmdline += " " + a;

    int pipefd[2];
    if (pipe(pipefd) != 0) {
        out.exit_code = 126;
        out.note = "spawn_failure";
        out.output_digest = sha256(std::string("pipe failed"));
        return out;
    }
    std::filesystem::create_directories(node.workdir);
    pid_t pid = fork();
    if (pid < 0) {
        close(pipefd[0]);
        close(pipefd[1]);
        out.exit_code = 126;
        out.note = "spawn_failure";
        out.output_digest = sha256(std::string("fork failed"));
        return out;
    }
    if (pid == 0) {
        close(pipefd[0]);
        dup2(pipefd[1], STDOUT_FILENO);
        dup2(pipefd[1], STDERR_FILENO);
        close(pipefd[1]);
        if (chdir(node.workdir.c_str()) != 0) _exit(126);
        execl("/bin/sh", "sh", "-c", cmdline.c_str(), static_cast<char*>(nullptr));
        _exit(127);
    }
    close(pipefd[1]);

    std::string output;
    const auto deadline = std::chrono::steady_clock::now() + cfg_.step_timeout;
    bool timed_out = false;
    char buf[4096];
    for (;;) {
        auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
            deadline - std::chrono::steady_clock::now());
        if (left.count() <= 0) {
            timed_out = true;
            break;
        }
        pollfd pfd{pipefd[0], POLLIN, 0};
        int pr = poll(&pfd, 1, static_cast<int>(left.count()));
        if (pr <= 0) {
            if (pr == 0) timed_out = true;
            break;
        }
        ssize_t n = read(pipefd[0], buf, sizeof buf);
        if (n <= 0) break; // child closed its end
        output.append(buf, static_cast<size_t>(n));
    }
    if (timed_out) kill(pid, SIGKILL);
    close(pipefd[0]);
    int wstatus = 0;
    waitpid(pid, &wstatus, 0);

    if (timed_out) {
        out.exit_code = 124;
        out.note = "timeout";
    } else if (WIFEXITED(wstatus)) {
        out.exit_code = WEXITSTATUS(wstatus);
    } else {
        out.exit_code = 128 + (WIFSIGNALED(wstatus) ? WTERMSIG(wstatus) : 0);
        out.note = "killed";
    }
    out.output_digest = sha256(output);
    return out;
}

// ---------------------------------------------------------------- ops_agent

ops_agent::ops_agent(std::string org_id, std::vector<std::string> responsible_nodes,
                     runner_config runner_cfg, std::filesystem::path repo_root, net::network& net)
    : org_id_(std::move(org_id)), responsible_nodes_(std::move(responsible_nodes)),
      runner_(std::move(runner_cfg), std::move(repo_root)), net_(net) {
    submit_ = [this](const std::string& org, const std::string& exec_id, const std::string& op_id,
                     const std::vector<execution_record>& records) {
        // history txs run under the same consensus policy as the operation
        net::consensus_policy cp;
        try {
            cp = engine::get_policy(net_, op_id).consensus;
        } catch (...) {
            cp = net_.topo().default_policy;
        }
        return net_.enqueue_tx(org, engine::opssc_sc_name, "register_history",
                               {exec_id, org, engine::records_to_json(records)}, cp);
    };
}

std::vector<execution_record> ops_agent::execute_event(const operational_event& ev) {
    auto targets = ev.target_nodes.find(org_id_);
    std::vector<std::string> nodes;
    if (targets != ev.target_nodes.end())
        for (const auto& nid : targets->second)
            for (const auto& mine : responsible_nodes_)
                if (nid == mine) nodes.push_back(nid);

    auto run_one = [&](const std::string& node_id) {
        execution_record rec;
        rec.exec_id = ev.exec_id;
        rec.org_id = org_id_;
        rec.node_id = node_id;
        rec.success = true;
        net::node_info* node = net_.mutable_node(node_id);
        if (!node) {
            rec.success = false;
            rec.failed_step = 0;
            rec.seal_evidence();
            return rec;
        }
        for (std::uint32_t i = 0; i < ev.resolved_commands.size(); ++i) {
            const command_step& step = ev.resolved_commands[i];
            step_result r = runner_.run_step(*node, step, i, ev.payload);
            bool failed = r.exit_code != 0;
            rec.results.push_back(std::move(r));
            if (failed) {
                if (rec.success) {
                    rec.success = false;
                    rec.failed_step = i;
                }
                if (step.on_failure == engine::failure_mode::abort) break;
            }
        }
        rec.seal_evidence();
        {
            std::lock_guard lk(mtx_);
            timings_[ev.exec_id].node_completed[node_id] = std::chrono::steady_clock::now();
        }
        return rec;
    };

    std::vector<execution_record> records;
    if (runner_.config().parallel_nodes && nodes.size() > 1) {
        std::vector<std::future<execution_record>> futs;
        for (const auto& nid : nodes)
            futs.push_back(std::async(std::launch::async, run_one, nid));
        for (auto& f : futs) records.push_back(f.get());
    } else {
        for (const auto& nid : nodes) records.push_back(run_one(nid));
    }
    return records;
}

void ops_agent::on_event(const operational_event& ev) {
    const std::string key = ev.event_id.hex();
    {
        std::lock_guard lk(mtx_);
        if (processed_.contains(key)) {
            ++duplicates_;
            return; // redelivery of an already-handled event
        }
        processed_.insert(key);
        timings_[ev.exec_id].event_received = std::chrono::steady_clock::now();
    }

    std::vector<execution_record> records = execute_event(ev);
    if (records.empty()) return;

    // one register_history tx per org-wide record batch
    std::string last_reject;
    for (std::uint32_t attempt = 0; attempt < runner_.config().retry_budget; ++attempt) {
        auto res = submit_(org_id_, ev.exec_id, ev.op_id, records);
        if (res.accepted) {
            std::lock_guard lk(mtx_);
            timings_[ev.exec_id].history_tx_id = res.tx_id;
            return;
        }
        last_reject = res.reject_reason;
        if (res.reject_reason == "duplicate_report") return; // already on-ledger
    }
    std::lock_guard lk(mtx_);
    errors_.push_back("history registration failed for " + ev.exec_id + ": " + last_reject);
}

std::uint64_t ops_agent::processed_count() const {
    std::lock_guard lk(mtx_);
    return processed_.size();
}

std::uint64_t ops_agent::duplicate_drops() const {
    std::lock_guard lk(mtx_);
    return duplicates_;
}

std::optional<ops_agent::exec_timing> ops_agent::timing_for(const std::string& exec_id) const {
    std::lock_guard lk(mtx_);
    auto it = timings_.find(exec_id);
    if (it == timings_.end()) return std::nullopt;
    return it->second;
}

void subscribe(std::shared_ptr<ops_agent> agent, net::network& net) {
    const std::string org = agent->org_id();
    net.subscribe(org, [agent](const operational_event& ev) { agent->on_event(ev); });
}

} // namespace opssc::agent
