// Command-line front end over the opssc shared library (C API only).
//
// Exit codes: 0 success, 2 validation/config, 3 rejection or operation
// failure, 4 ledger integrity, 5 not found, 1 internal.

#include <opssc/opssc.h>

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

using nlohmann::json;

namespace {

int exit_code_for(opssc_status st) {
    switch (st) {
    case OPSSC_OK: return 0;
    case OPSSC_ERR_INVALID_ARG: return 2;
    case OPSSC_ERR_VALIDATION: return 2;
    case OPSSC_ERR_REJECTED: return 3;
    case OPSSC_ERR_INTEGRITY: return 4;
    case OPSSC_ERR_NOT_FOUND: return 5;
    case OPSSC_ERR_IO: return 2;
    case OPSSC_ERR_INTERNAL: return 1;
    }
    return 1;
}

int report(opssc_status st) {
    if (st != OPSSC_OK) std::cerr << "error: " << opssc_last_error() << "\n";
    return exit_code_for(st);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CLI::ValidationError("cannot read file: " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

// RAII for C-API strings
struct api_string {
    char* ptr = nullptr;
    ~api_string() { opssc_string_free(ptr); }
    std::string str() const { return ptr ? ptr : ""; }
};

struct network_handle {
    opssc_network* net = nullptr;
    ~network_handle() { opssc_network_destroy(net); }
};

// Relative payload directories in a policy file are meant relative to the
// file itself; resolve them before submission.
std::string load_policy_text(const std::string& path) {
    std::string text = read_file(path);
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.contains("payload")) return text;
    std::filesystem::path dir = j["payload"].value("dir", "");
    if (dir.is_absolute()) return text;
    j["payload"]["dir"] =
        (std::filesystem::absolute(path).parent_path() / dir).lexically_normal().string();
    return j.dump();
}

std::string params_to_json(const std::vector<std::string>& kvs) {
    json j = json::object();
    for (const auto& kv : kvs) {
        auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw CLI::ValidationError("--param expects key=value, got '" + kv + "'");
        j[kv.substr(0, eq)] = kv.substr(eq + 1);
    }
    return j.dump();
}

const char* table3_defaults = R"({
  "format": "opssc-cost-params/1",
  "n_org": 7, "n_node": 2, "a": 0.95,
  "c_plc_prop_unit": 79.0, "c_plc_appr_unit": 5.6,
  "c_ops_prop_unit": 13.0, "c_ops_appr_unit": 2.4,
  "c_exec_unit": 6.7, "c_trigger_unit": 0.8, "c_dev_sc": 32.9
})";

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"opssc — smart-contract-driven system operations simulator"};
    app.require_subcommand(1);

    std::string run_dir = "run";
    std::string config_path;
    if (const char* env = std::getenv("OPSSC_CONFIG")) config_path = env;

    // network init
    auto* net_cmd = app.add_subcommand("network", "network lifecycle");
    auto* net_init = net_cmd->add_subcommand("init", "build a network from a topology config");
    net_init->add_option("--config", config_path, "topology config file (default $OPSSC_CONFIG)");
    net_init->add_option("--run", run_dir, "run directory to create");

    // policy register
    auto* policy_cmd = app.add_subcommand("policy", "operational policies");
    auto* policy_reg = policy_cmd->add_subcommand("register", "register a policy on the ledger");
    std::string policy_file, builtin_name;
    policy_reg->add_option("--file", policy_file, "policy file (opssc-policy/1)");
    policy_reg->add_option("--builtin", builtin_name, "builtin policy name (sc-install)");
    policy_reg->add_option("--run", run_dir, "run directory");

    // repo publish
    auto* repo_cmd = app.add_subcommand("repo", "shared artifact repository");
    auto* repo_pub = repo_cmd->add_subcommand("publish", "publish an artifact");
    std::string art_name, art_version, art_file;
    repo_pub->add_option("--name", art_name, "artifact name")->required();
    repo_pub->add_option("--version", art_version, "artifact version")->required();
    repo_pub->add_option("--file", art_file, "payload file")->required();
    repo_pub->add_option("--run", run_dir, "run directory");

    // op run
    auto* op_cmd = app.add_subcommand("op", "operations");
    auto* op_run = op_cmd->add_subcommand("run", "execute an operation");
    std::string op_id;
    std::vector<std::string> op_params;
    std::uint64_t ticks = 0;
    op_run->add_option("--op", op_id, "operational policy id")->required();
    op_run->add_option("--param", op_params, "dynamic parameter key=value (repeatable)");
    op_run->add_option("--ticks", ticks, "advance the periodic scheduler instead of running once");
    op_run->add_option("--run", run_dir, "run directory");

    // status
    auto* status_cmd = app.add_subcommand("status", "execution status");
    std::string exec_id;
    status_cmd->add_option("--exec", exec_id, "execution id")->required();
    status_cmd->add_option("--run", run_dir, "run directory");

    // ledger
    auto* ledger_cmd = app.add_subcommand("ledger", "ledger inspection");
    auto* ledger_verify = ledger_cmd->add_subcommand("verify", "verify chain integrity");
    std::string dump_file;
    ledger_verify->add_option("--run", run_dir, "run directory");
    ledger_verify->add_option("--dump", dump_file, "verify a dump file instead of a run");
    auto* ledger_history = ledger_cmd->add_subcommand("history", "execution history and evidence");
    ledger_history->add_option("--exec", exec_id, "execution id")->required();
    ledger_history->add_option("--run", run_dir, "run directory");
    auto* ledger_dump = ledger_cmd->add_subcommand("dump", "write or print the chain");
    std::string dump_out;
    bool dump_text = false;
    ledger_dump->add_option("--run", run_dir, "run directory");
    ledger_dump->add_option("--out", dump_out, "write the binary dump here");
    ledger_dump->add_flag("--text", dump_text, "print a human-readable chain summary");

    // bench
    auto* bench_cmd = app.add_subcommand("bench", "performance measurement (threads mode)");
    std::uint32_t reps = 100, warmup = 3;
    std::string bench_csv = "bench.csv";
    bench_cmd->add_option("--config", config_path, "topology config file (threads mode)");
    bench_cmd->add_option("--run", run_dir, "run directory to create");
    bench_cmd->add_option("--repetitions", reps, "measured repetitions");
    bench_cmd->add_option("--warmup", warmup, "warm-up trials excluded from the CSV");
    bench_cmd->add_option("--out", bench_csv, "CSV output path");

    // cost estimate
    auto* cost_cmd = app.add_subcommand("cost", "operational cost model");
    auto* cost_est = cost_cmd->add_subcommand("estimate", "evaluate the cost model");
    std::string params_file, method = "both", cost_out;
    int model = 2;
    std::uint64_t n_from = 1, n_to = 4;
    cost_est->add_option("--params", params_file, "cost parameter file (default: built-in values)");
    cost_est->add_option("--method", method, "conventional|proposed|both");
    cost_est->add_option("--model", model, "adjustment model: 1 pairwise, 2 proposer-approver");
    cost_est->add_option("--n-from", n_from, "first execution count");
    cost_est->add_option("--n-to", n_to, "last execution count");
    cost_est->add_option("--out", cost_out, "write the CSV here instead of stdout");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*net_init) {
            if (config_path.empty())
                throw CLI::ValidationError("--config (or $OPSSC_CONFIG) is required");
            network_handle h;
            opssc_status st = opssc_network_create(read_file(config_path).c_str(),
                                                   run_dir.c_str(), &h.net);
            if (st != OPSSC_OK) return report(st);
            std::cout << "initialized " << run_dir << "\n";
            return 0;
        }

        if (*policy_reg) {
            if (policy_file.empty() == builtin_name.empty())
                throw CLI::ValidationError("exactly one of --file or --builtin is required");
            network_handle h;
            opssc_status st = opssc_network_load(run_dir.c_str(), &h.net);
            if (st != OPSSC_OK) return report(st);
            api_string op;
            st = policy_file.empty()
                     ? opssc_policy_register_builtin(h.net, builtin_name.c_str(), &op.ptr)
                     : opssc_policy_register_json(h.net, load_policy_text(policy_file).c_str(),
                                                  &op.ptr);
            if (st != OPSSC_OK) return report(st);
            std::cout << "registered policy " << op.str() << "\n";
            return 0;
        }

        if (*repo_pub) {
            network_handle h;
            opssc_status st = opssc_network_load(run_dir.c_str(), &h.net);
            if (st != OPSSC_OK) return report(st);
            std::string payload = read_file(art_file);
            st = opssc_repo_publish(h.net, art_name.c_str(), art_version.c_str(),
                                    payload.data(), payload.size());
            if (st != OPSSC_OK) return report(st);
            std::cout << "published " << art_name << "-" << art_version << "\n";
            return 0;
        }

        if (*op_run) {
            network_handle h;
            opssc_status st = opssc_network_load(run_dir.c_str(), &h.net);
            if (st != OPSSC_OK) return report(st);
            if (ticks > 0) {
                api_string execs;
                st = opssc_run_ticks(h.net, ticks, &execs.ptr);
                if (st != OPSSC_OK) return report(st);
                std::cout << execs.str() << "\n";
                return 0;
            }
            api_string exec, phase;
            st = opssc_op_run(h.net, op_id.c_str(), params_to_json(op_params).c_str(),
                              &exec.ptr, &phase.ptr);
            if (st != OPSSC_OK) return report(st);
            std::cout << "exec_id: " << exec.str() << "\nphase: " << phase.str() << "\n";
            if (phase.str() != "complete") {
                api_string status_json;
                if (opssc_execution_status(h.net, exec.str().c_str(), &status_json.ptr) ==
                    OPSSC_OK) {
                    json s = json::parse(status_json.str());
                    for (const auto& [org, r] : s["reported"].items())
                        if (!r.value("success", true))
                            std::cout << org << " failed at step "
                                      << r.value("failed_step", 0u) + 1 << "\n";
                }
                return 3;
            }
            return 0;
        }

        if (*status_cmd) {
            network_handle h;
            opssc_status st = opssc_network_load(run_dir.c_str(), &h.net);
            if (st != OPSSC_OK) return report(st);
            api_string out;
            st = opssc_execution_status(h.net, exec_id.c_str(), &out.ptr);
            if (st != OPSSC_OK) return report(st);
            std::cout << json::parse(out.str()).dump(2) << "\n";
            return 0;
        }

        if (*ledger_verify) {
            if (!dump_file.empty()) {
                opssc_status st = opssc_dump_verify_file(dump_file.c_str());
                if (st != OPSSC_OK) return report(st);
                std::cout << "dump verified: " << dump_file << "\n";
                return 0;
            }
            network_handle h;
            opssc_status st = opssc_network_load(run_dir.c_str(), &h.net);
            if (st != OPSSC_OK) return report(st);
            st = opssc_ledger_verify(h.net);
            if (st != OPSSC_OK) return report(st);
            std::cout << "ledger verified: all replicas consistent\n";
            return 0;
        }

        if (*ledger_history) {
            network_handle h;
            opssc_status st = opssc_network_load(run_dir.c_str(), &h.net);
            if (st != OPSSC_OK) return report(st);
            api_string out;
            st = opssc_ledger_history(h.net, exec_id.c_str(), &out.ptr);
            if (st != OPSSC_OK) return report(st);
            std::cout << out.str() << "\n";
            return 0;
        }

        if (*ledger_dump) {
            network_handle h;
            opssc_status st = opssc_network_load(run_dir.c_str(), &h.net);
            if (st != OPSSC_OK) return report(st);
            if (dump_text) {
                api_string out;
                st = opssc_chain_summary(h.net, &out.ptr);
                if (st != OPSSC_OK) return report(st);
                std::cout << out.str() << "\n";
            }
            if (!dump_out.empty()) {
                st = opssc_ledger_dump(h.net, dump_out.c_str());
                if (st != OPSSC_OK) return report(st);
                std::cout << "dump written: " << dump_out << "\n";
            }
            if (!dump_text && dump_out.empty())
                throw CLI::ValidationError("ledger dump needs --out and/or --text");
            return 0;
        }

        if (*bench_cmd) {
            if (config_path.empty())
                throw CLI::ValidationError("--config (or $OPSSC_CONFIG) is required");
            api_string summary;
            opssc_status st = opssc_bench_run(read_file(config_path).c_str(), run_dir.c_str(),
                                              reps, warmup, bench_csv.c_str(), &summary.ptr);
            if (st != OPSSC_OK) return report(st);
            std::cout << summary.str() << "\n";
            return 0;
        }

        if (*cost_est) {
            std::string params = params_file.empty() ? table3_defaults : read_file(params_file);
            api_string csv;
            opssc_status st = opssc_cost_estimate_csv(params.c_str(), method.c_str(), model,
                                                      n_from, n_to, &csv.ptr);
            if (st != OPSSC_OK) return report(st);
            double conv = 0, prop = 0;
            int pct = 0;
            st = opssc_cost_headline(params.c_str(), n_to, model, &conv, &prop, &pct);
            if (st != OPSSC_OK) return report(st);
            char headline[160];
            std::snprintf(headline, sizeof headline,
                          "n=%llu: conventional %.1f man-hours, proposed %.1f man-hours, "
                          "reduction %d%%",
                          static_cast<unsigned long long>(n_to), conv, prop, pct);
            if (cost_out.empty()) {
                std::cout << csv.str();
                std::cout << "# " << headline << "\n";
            } else {
                std::ofstream out(cost_out, std::ios::trunc);
                if (!out) throw CLI::ValidationError("cannot write " + cost_out);
                out << csv.str();
                std::cout << headline << "\n";
            }
            return 0;
        }
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
