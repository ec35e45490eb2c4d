// Acceptance suite: one criterion per function, one PASS/FAIL line each,
// nonzero exit if anything failed. Criteria run against both the C++ core
// and the shared-library C API (the external surface).

#include <opssc/opssc.h>

#include "catalog.hpp"
#include "cost.hpp"
#include "engine.hpp"
#include "ledger.hpp"
#include "sim.hpp"
#include "support/temp_dir.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

using namespace opssc;
using nlohmann::json;
using testsupport::temp_dir;

namespace {

int failures = 0;

void criterion(int num, const std::string& name, const std::function<void()>& body) {
    try {
        body();
        std::printf("[PASS] criterion %d: %s\n", num, name.c_str());
    } catch (const std::exception& e) {
        ++failures;
        std::printf("[FAIL] criterion %d: %s\n        %s\n", num, name.c_str(), e.what());
    }
    std::fflush(stdout);
}

void require(bool cond, const std::string& what) {
    if (!cond) throw std::runtime_error(what);
}

std::string topo_json(int orgs, int nodes, const std::string& mode, std::uint64_t seed) {
    json j;
    j["format"] = "opssc-topology/1";
    json jorgs = json::array();
    json required = json::array();
    for (int o = 1; o <= orgs; ++o) {
        std::string org = "org" + std::to_string(o);
        required.push_back(org);
        json jnodes = json::array();
        for (int n = 0; n < nodes; ++n) {
            json jn;
            jn["node_id"] = org + "-peer" + std::to_string(n);
            jn["roles"] = json::array({"committer"});
            if (n == 0) jn["roles"].push_back("endorser");
            if (o == 1 && n == 0) jn["roles"].push_back("orderer");
            jnodes.push_back(std::move(jn));
        }
        jorgs.push_back({{"org_id", org}, {"nodes", jnodes}});
    }
    j["orgs"] = std::move(jorgs);
    j["consensus_policy"] = {{"required_orgs", required}, {"quorum", orgs}};
    j["max_txs_per_block"] = 10;
    j["scheduler"] = mode == "deterministic"
                         ? json{{"mode", "deterministic"}, {"seed", seed}}
                         : json{{"mode", "threads"}};
    j["shared_repo"] = "repo";
    return j.dump();
}

const char* table3_params = R"({
  "format": "opssc-cost-params/1",
  "n_org": 7, "n_node": 2, "a": 0.95,
  "c_plc_prop_unit": 79.0, "c_plc_appr_unit": 5.6,
  "c_ops_prop_unit": 13.0, "c_ops_appr_unit": 2.4,
  "c_exec_unit": 6.7, "c_trigger_unit": 0.8, "c_dev_sc": 32.9
})";

cost::cost_params table3() {
    cost::cost_params p;
    p.n_org = 7;
    p.n_node = 2;
    p.c_plc_prop_unit = 79.0;
    p.c_plc_appr_unit = 5.6;
    p.c_ops_prop_unit = 13.0;
    p.c_ops_appr_unit = 2.4;
    p.c_exec_unit = 6.7;
    p.c_trigger_unit = 0.8;
    p.c_dev_sc = 32.9;
    p.improvement_ratio = 0.95;
    return p;
}

// independent brute-force evaluation (explicit k-loop, no shared code path)
double brute_total(const cost::cost_params& p, bool proposed, std::uint64_t n) {
    double total = p.c_plc_prop_unit + double(p.n_org - 1) * p.c_plc_appr_unit;
    if (proposed) total += p.c_dev_sc;
    for (std::uint64_t k = 1; k <= n; ++k) {
        double per = proposed ? p.c_trigger_unit
                              : (p.c_ops_prop_unit + double(p.n_org - 1) * p.c_ops_appr_unit +
                                 double(p.n_org) * double(p.n_node) * p.c_exec_unit);
        total += per * std::pow(p.improvement_ratio, double(k - 1));
    }
    return total;
}

std::unique_ptr<sim::simulation> installed_sim(const std::filesystem::path& root, int orgs,
                                               int nodes, std::uint64_t seed = 42) {
    auto s = sim::simulation::create(topo_json(orgs, nodes, "deterministic", seed), root);
    const std::string payload = "smart contract source bundle\n";
    s->repo().publish("mycc", "1.1",
                      std::span<const std::uint8_t>(
                          reinterpret_cast<const std::uint8_t*>(payload.data()), payload.size()));
    auto reg = s->register_builtin_policy(catalog::sc_install_op_id);
    require(reg.committed, "setup: policy registration failed: " + reg.reject_reason);
    return s;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    require(bool(in), "cannot read " + p.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

constexpr auto m2 = cost::adjustment_model::model2_proposer_approver;

// ---------------------------------------------------------------- criteria

void c1_cost_headline() {
    auto t0 = std::chrono::steady_clock::now();
    auto p = table3();

    double conv = cost::total_cost(p, cost::cost_method::conventional, 4, m2);
    double prop = cost::total_cost(p, cost::cost_method::proposed, 4, m2);
    double conv_ref = brute_total(p, false, 4);
    double prop_ref = brute_total(p, true, 4);
    require(std::abs(conv - conv_ref) <= 1e-6 * conv_ref, "conventional drifts from brute force");
    require(std::abs(prop - prop_ref) <= 1e-6 * prop_ref, "proposed drifts from brute force");
    require(std::abs(conv - 562.24) < 0.005, "conventional raw MM != 562.24");
    require(std::abs(prop - 148.47) < 0.005, "proposed raw MM != 148.47");

    // the external surface reports the rounded headline
    double conv_mh = 0, prop_mh = 0;
    int pct = 0;
    require(opssc_cost_headline(table3_params, 4, 2, &conv_mh, &prop_mh, &pct) == OPSSC_OK,
            std::string("headline API failed: ") + opssc_last_error());
    require(conv_mh == 9.4, "conventional != 9.4 man-hours after rounding");
    require(prop_mh == 2.5, "proposed != 2.5 man-hours after rounding");
    require(pct == 74, "reduction != 74 percent");

    auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0);
    require(ms.count() < 1000.0, "cost evaluation took too long");
}

void c2_cost_properties() {
    for (double a : {0.5, 0.95, 1.0}) {
        for (std::uint64_t n : {std::uint64_t(0), std::uint64_t(1), std::uint64_t(10),
                                std::uint64_t(1000)}) {
            double it = 0.0, d = 1.0;
            for (std::uint64_t k = 1; k <= n; ++k) {
                it += d;
                d *= a;
            }
            double closed = (a == 1.0) ? double(n) : (1.0 - std::pow(a, double(n))) / (1.0 - a);
            require(std::abs(it - closed) <= 1e-9 * std::max(1.0, closed),
                    "geometric sum mismatch at a=" + std::to_string(a));
        }
    }

    std::mt19937_64 rng(1234);
    std::uniform_real_distribution<double> unit(0.0, 100.0);
    std::uniform_real_distribution<double> ratio(0.05, 1.0);
    for (int i = 0; i < 1000; ++i) {
        cost::cost_params p;
        p.n_org = 1 + rng() % 10;
        p.n_node = 1 + rng() % 5;
        p.c_plc_prop_unit = unit(rng);
        p.c_plc_appr_unit = unit(rng);
        p.c_ops_prop_unit = unit(rng);
        p.c_ops_appr_unit = unit(rng);
        p.c_exec_unit = unit(rng);
        p.c_trigger_unit = unit(rng);
        p.c_dev_sc = unit(rng);
        p.improvement_ratio = ratio(rng);
        std::uint64_t n = rng() % 30;

        for (bool proposed : {false, true}) {
            auto m = proposed ? cost::cost_method::proposed : cost::cost_method::conventional;
            double base = cost::total_cost(p, m, n, m2);
            require(cost::total_cost(p, m, n + 1, m2) >= base - 1e-12, "not monotone in n");

            // monotone in every unit cost
            auto bump = [&](double cost::cost_params::*field) {
                cost::cost_params q = p;
                q.*field += unit(rng) + 0.01;
                require(cost::total_cost(q, m, n, m2) >= base - 1e-12,
                        "not monotone in a unit cost");
            };
            bump(&cost::cost_params::c_plc_prop_unit);
            bump(&cost::cost_params::c_plc_appr_unit);
            bump(&cost::cost_params::c_ops_prop_unit);
            bump(&cost::cost_params::c_ops_appr_unit);
            bump(&cost::cost_params::c_exec_unit);
            bump(&cost::cost_params::c_trigger_unit);
            bump(&cost::cost_params::c_dev_sc);

            if (!proposed) {
                cost::cost_params q = p;
                q.n_org += 1;
                require(cost::total_cost(q, m, n, m2) >= base - 1e-12, "not monotone in n_org");
                q = p;
                q.n_node += 1;
                require(cost::total_cost(q, m, n, m2) >= base - 1e-12, "not monotone in n_node");
            }
        }
    }
}

void c3_end_to_end_install() {
    auto t0 = std::chrono::steady_clock::now();
    temp_dir tmp("acc3");
    auto s = installed_sim(tmp.path / "run", 7, 2);

    auto outcome = s->run_op(catalog::sc_install_op_id, {{"name", "mycc"}, {"version", "1.1"}});
    require(!outcome.rejected(), "execute rejected: " + outcome.reject_reason);
    require(outcome.phase == engine::exec_phase::complete, "phase is not complete");

    int listing = 0;
    for (const auto& node : s->network().topo().nodes)
        if (node.installed.contains({"mycc", "1.1"})) ++listing;
    require(listing == 14, "expected all 14 nodes to list (mycc, 1.1), got " +
                               std::to_string(listing));

    int execute_txs = 0, history_txs = 0;
    for (const auto& b : s->network().replicas().front().chain()) {
        for (const auto& tx : b.txs) {
            if (tx.function == "register_history" && !tx.args.empty() &&
                tx.args[0] == outcome.exec_id)
                ++history_txs;
            if (tx.function == "execute_operation")
                for (const auto& ev : s->network().tx_events(tx.tx_id.hex()))
                    if (ev.exec_id == outcome.exec_id) ++execute_txs;
        }
    }
    require(execute_txs == 1, "expected exactly 1 execute tx, got " + std::to_string(execute_txs));
    require(history_txs == 7, "expected exactly 7 history txs, got " + std::to_string(history_txs));

    std::string why;
    require(s->verify(&why), "ledger verify failed: " + why);

    // the CLI-visible surface agrees: dump verifies as a file
    s->save();
    require(opssc_dump_verify_file((tmp.path / "run/chain.dump").string().c_str()) == OPSSC_OK,
            std::string("dump verify failed: ") + opssc_last_error());

    auto secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    require(secs < 10.0, "scenario exceeded 10 seconds: " + std::to_string(secs));
}

void c4_deploy_precondition() {
    temp_dir tmp("acc4");
    auto s = installed_sim(tmp.path / "run", 3, 2);

    // suppress org3's install by pausing its agent
    s->network().set_agent_enabled("org3", false);
    auto partial = s->run_op(catalog::sc_install_op_id, {{"name", "mycc"}, {"version", "1.1"}});
    require(partial.phase == engine::exec_phase::partially_reported,
            "suppressed run should be partially reported");

    auto rejected = s->deploy("mycc", "1.1");
    require(!rejected.committed, "deploy must not commit with a missing install");
    require(rejected.reject_reason == "not_installed_everywhere",
            "expected not_installed_everywhere, got " + rejected.reject_reason);

    // complete the install, then the deploy commits
    s->network().set_agent_enabled("org3", true);
    s->drain();
    require(s->status(partial.exec_id).phase == engine::exec_phase::complete,
            "install did not complete after re-enabling the agent");
    auto committed = s->deploy("mycc", "1.1");
    require(committed.committed, "deploy rejected after full install: " + committed.reject_reason);
}

void c5_consensus_enforcement() {
    temp_dir tmp("acc5");
    auto s = installed_sim(tmp.path / "run", 3, 2);

    std::vector<std::vector<std::uint8_t>> before;
    for (const auto& r : s->network().replicas()) before.push_back(r.state().canonical_bytes());
    const size_t chain_len = s->network().replicas().front().chain().size();

    s->network().set_org_offline("org3", true); // endorsement withheld
    auto res = s->run_op(catalog::sc_install_op_id, {{"name", "mycc"}, {"version", "1.1"}});
    require(res.rejected(), "tx must be rejected under all-of policy with org3 withheld");
    require(res.reject_reason == "endorsement_policy",
            "expected endorsement_policy, got " + res.reject_reason);

    const auto& replicas = s->network().replicas();
    for (size_t i = 0; i < replicas.size(); ++i) {
        require(replicas[i].state().canonical_bytes() == before[i],
                "replica state changed after a rejected tx");
        require(replicas[i].chain().size() == chain_len, "chain grew after a rejected tx");
    }
}

void c6_ledger_integrity() {
    temp_dir tmp("acc6");
    auto s = installed_sim(tmp.path / "run", 3, 2);

    // scenario corpus: a summarizing run, a failing run, a deploy
    auto ok = s->run_op(catalog::sc_install_op_id, {{"name", "mycc"}, {"version", "1.1"}});
    require(ok.phase == engine::exec_phase::complete, "setup run failed");
    auto failing = s->run_op(catalog::sc_install_op_id, {{"name", "ghost"}, {"version", "9"}});
    require(failing.phase == engine::exec_phase::failed, "failing run should fail");
    require(s->deploy("mycc", "1.1").committed, "deploy failed");
    std::string why;
    require(s->verify(&why), "replicas diverged after scenario corpus: " + why);

    auto dump = s->network().dump_chain();
    require(ledger::verify_chain_dump(dump), "pristine dump must verify");

    std::mt19937_64 rng(987654);
    for (int i = 0; i < 120; ++i) {
        auto mutated = dump;
        size_t byte = rng() % mutated.size();
        int bit = static_cast<int>(rng() % 8);
        mutated[byte] ^= static_cast<std::uint8_t>(1u << bit);
        require(!ledger::verify_chain_dump(mutated),
                "single-bit mutation went undetected at byte " + std::to_string(byte) +
                    " bit " + std::to_string(bit));
    }
}

void c7_exactly_once_write_once() {
    temp_dir tmp("acc7");
    auto s = installed_sim(tmp.path / "run", 3, 2);

    auto outcome = s->run_op(catalog::sc_install_op_id, {{"name", "mycc"}, {"version", "1.1"}});
    require(outcome.phase == engine::exec_phase::complete, "install did not complete");

    // each node executed the 5-step sequence exactly once
    auto count_steps = [&] {
        std::map<std::string, std::uint64_t> all;
        for (const auto& org : s->network().topo().orgs) {
            auto a = s->agent_for(org.org_id);
            for (const auto& [node, steps] : a->runner().executed_steps()) all[node] += steps;
        }
        return all;
    };
    auto before = count_steps();
    require(before.size() == 6, "expected step counters on 6 nodes");
    for (const auto& [node, steps] : before)
        require(steps == 5, node + " executed " + std::to_string(steps) + " steps, expected 5");

    // inject at-least-once redelivery, several times
    auto events = s->network().tx_events_for_exec(outcome.exec_id);
    require(!events.empty(), "no event recorded for the execution");
    for (int i = 0; i < 3; ++i) s->network().inject_redelivery(events.front());
    s->drain();

    require(count_steps() == before, "redelivery re-executed steps on some node");

    // write-once: exactly one history record key per (exec, org)
    int hist_keys = 0;
    for (const auto& [key, entry] : s->network().committed_state().entries())
        if (key.rfind("hist/" + outcome.exec_id + "/", 0) == 0) ++hist_keys;
    require(hist_keys == 3, "expected 3 history keys, got " + std::to_string(hist_keys));
    require(s->status(outcome.exec_id).phase == engine::exec_phase::complete,
            "phase regressed after redelivery");
}

void c8_determinism() {
    auto scenario = [](const std::filesystem::path& root) {
        auto s = installed_sim(root, 7, 2, 42);
        auto outcome = s->run_op(catalog::sc_install_op_id,
                                 {{"name", "mycc"}, {"version", "1.1"}});
        require(outcome.phase == engine::exec_phase::complete, "run did not complete");
        s->save();
        return slurp(root / "chain.dump");
    };
    temp_dir t1("acc8a"), t2("acc8b");
    auto d1 = scenario(t1.path / "run");
    auto d2 = scenario(t2.path / "run");
    require(d1 == d2, "same-seed runs produced different chain dumps");
}

void c9_bench() {
    temp_dir tmp("acc9");
    const std::string csv_path = (tmp.path / "bench.csv").string();
    char* summary_raw = nullptr;
    auto st = opssc_bench_run(topo_json(3, 2, "threads", 0).c_str(),
                              (tmp.path / "run").string().c_str(), 100, 3, csv_path.c_str(),
                              &summary_raw);
    require(st == OPSSC_OK, std::string("bench failed: ") + opssc_last_error());
    std::string summary_json = summary_raw ? summary_raw : "{}";
    opssc_string_free(summary_raw);

    std::ifstream csv(csv_path);
    std::string header;
    std::getline(csv, header);
    require(header.rfind("exec_id,submit_to_commit_ms,", 0) == 0, "unexpected CSV header");
    int rows = 0;
    std::string line;
    while (std::getline(csv, line)) {
        if (line.empty()) continue;
        ++rows;
        std::vector<std::string> cols;
        std::stringstream ss(line);
        std::string col;
        while (std::getline(ss, col, ',')) cols.push_back(col);
        require(cols.size() == 6, "expected 6 CSV columns"); // exec, commit, 3 orgs, gap
        double submit_commit = std::stod(cols[1]);
        double gap = std::stod(cols.back());
        require(submit_commit >= 0.0, "negative latency");
        require(submit_commit < 1000.0,
                "submit->commit exceeded 1s: " + std::to_string(submit_commit) + "ms");
        require(gap >= 0.0, "negative completion gap");
        for (size_t i = 2; i + 1 < cols.size(); ++i)
            require(std::stod(cols[i]) >= 0.0, "missing per-org history latency");
    }
    require(rows == 100, "expected 100 measured rows, got " + std::to_string(rows));

    auto summary = json::parse(summary_json);
    std::printf("        bench over %d reps: mean submit->commit %.2fms, max %.2fms, "
                "max completion gap %.2fms (re-measured analogues, not the Fabric numbers)\n",
                rows, summary["mean_submit_to_commit_ms"].get<double>(),
                summary["max_submit_to_commit_ms"].get<double>(),
                summary["max_completion_gap_ms"].get<double>());
}

} // namespace

int main() {
    std::printf("opssc acceptance suite\n");
    criterion(1, "cost headline reproduction (9.4h / 2.5h / 74%)", c1_cost_headline);
    criterion(2, "cost-model properties (geometric sums, monotonicity)", c2_cost_properties);
    criterion(3, "end-to-end installation on 7 orgs x 2 nodes", c3_end_to_end_install);
    criterion(4, "deploy requires the install on every consenting org", c4_deploy_precondition);
    criterion(5, "consensus policy enforcement leaves state untouched", c5_consensus_enforcement);
    criterion(6, "ledger integrity under single-bit mutations", c6_ledger_integrity);
    criterion(7, "exactly-once execution and write-once history", c7_exactly_once_write_once);
    criterion(8, "determinism: same seed, byte-identical dumps", c8_determinism);
    criterion(9, "bench analogues recorded on a threads-mode network", c9_bench);
    if (failures == 0) {
        std::printf("all 9 criteria passed\n");
        return 0;
    }
    std::printf("%d criteria FAILED\n", failures);
    return 1;
}
