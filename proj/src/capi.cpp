#include "opssc/opssc.h"

#include "cost.hpp"
#include "engine.hpp"
#include "ledger.hpp"
#include "sim.hpp"

#include <json.hpp>

#include <cstring>
#include <fstream>
#include <sstream>

using nlohmann::json;

struct opssc_network {
    std::unique_ptr<opssc::sim::simulation> sim;
};

namespace {

thread_local std::string g_last_error = "ok";

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out) std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

void set_out(char** slot, const std::string& value) {
    if (slot) *slot = dup_string(value);
}

opssc_status fail(opssc_status st, const std::string& msg) {
    g_last_error = msg;
    return st;
}

// Runs `fn`, mapping exceptions onto status codes at the API boundary.
template <typename Fn> opssc_status guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const opssc::net::sc_exception& e) {
        const std::string& code = e.err.code;
        opssc_status st = OPSSC_ERR_REJECTED;
        if (code == "no_such_execution" || code == "no_such_policy") st = OPSSC_ERR_NOT_FOUND;
        return fail(st, e.what());
    } catch (const opssc::ledger::chain_error& e) {
        return fail(OPSSC_ERR_INTEGRITY, e.what());
    } catch (const opssc::encoding_error& e) {
        return fail(OPSSC_ERR_INTEGRITY, e.what());
    } catch (const std::invalid_argument& e) {
        return fail(OPSSC_ERR_VALIDATION, e.what());
    } catch (const std::exception& e) {
        return fail(OPSSC_ERR_INTERNAL, e.what());
    }
}

// Distinguishes rejection classes for CLI exit codes.
opssc_status reject_status(const std::string& reason) {
    if (reason == "no_such_policy" || reason == "no_such_execution") return OPSSC_ERR_NOT_FOUND;
    return OPSSC_ERR_REJECTED;
}

opssc::cost::cost_params params_from_json(const char* params_json) {
    json j = json::parse(params_json);
    if (j.value("format", "") != "opssc-cost-params/1")
        throw std::invalid_argument("cost params must declare format 'opssc-cost-params/1'");
    opssc::cost::cost_params p;
    p.n_org = j.value("n_org", p.n_org);
    p.n_node = j.value("n_node", p.n_node);
    p.c_plc_prop_unit = j.value("c_plc_prop_unit", p.c_plc_prop_unit);
    p.c_plc_appr_unit = j.value("c_plc_appr_unit", p.c_plc_appr_unit);
    p.c_ops_prop_unit = j.value("c_ops_prop_unit", p.c_ops_prop_unit);
    p.c_ops_appr_unit = j.value("c_ops_appr_unit", p.c_ops_appr_unit);
    p.c_exec_unit = j.value("c_exec_unit", p.c_exec_unit);
    p.c_trigger_unit = j.value("c_trigger_unit", p.c_trigger_unit);
    p.c_dev_sc = j.value("c_dev_sc", p.c_dev_sc);
    p.improvement_ratio = j.value("a", p.improvement_ratio);
    p.c_pair_unit = j.value("c_pair_unit", p.c_pair_unit);
    p.validate();
    return p;
}

opssc::cost::adjustment_model model_from_int(int model) {
    if (model == 1) return opssc::cost::adjustment_model::model1_pairwise;
    if (model == 2) return opssc::cost::adjustment_model::model2_proposer_approver;
    throw std::invalid_argument("model must be 1 (pairwise) or 2 (proposer-approver)");
}

} // namespace

extern "C" {

const char* opssc_version(void) { return "opssc 1.0.0"; }

const char* opssc_last_error(void) { return g_last_error.c_str(); }

void opssc_string_free(char* s) { std::free(s); }

opssc_status opssc_network_create(const char* config_json, const char* run_root,
                                  opssc_network** out) {
    if (!config_json || !run_root || !out) return fail(OPSSC_ERR_INVALID_ARG, "null argument");
    return guarded([&]() -> opssc_status {
        auto handle = std::make_unique<opssc_network>();
        handle->sim = opssc::sim::simulation::create(config_json, run_root);
        *out = handle.release();
        return OPSSC_OK;
    });
}

opssc_status opssc_network_load(const char* run_root, opssc_network** out) {
    if (!run_root || !out) return fail(OPSSC_ERR_INVALID_ARG, "null argument");
    return guarded([&]() -> opssc_status {
        auto handle = std::make_unique<opssc_network>();
        handle->sim = opssc::sim::simulation::load(run_root);
        *out = handle.release();
        return OPSSC_OK;
    });
}

opssc_status opssc_network_save(opssc_network* net) {
    if (!net) return fail(OPSSC_ERR_INVALID_ARG, "null network");
    return guarded([&]() -> opssc_status {
        net->sim->save();
        return OPSSC_OK;
    });
}

void opssc_network_destroy(opssc_network* net) { delete net; }

opssc_status opssc_policy_register_json(opssc_network* net, const char* policy_json,
                                        char** op_id_out) {
    if (!net || !policy_json) return fail(OPSSC_ERR_INVALID_ARG, "null argument");
    return guarded([&]() -> opssc_status {
        auto res = net->sim->register_policy_text(policy_json);
        if (!res.committed) return fail(reject_status(res.reject_reason), res.reject_reason);
        net->sim->save();
        set_out(op_id_out, res.response);
        return OPSSC_OK;
    });
}

opssc_status opssc_policy_register_builtin(opssc_network* net, const char* which,
                                           char** op_id_out) {
    if (!net || !which) return fail(OPSSC_ERR_INVALID_ARG, "null argument");
    return guarded([&]() -> opssc_status {
        auto res = net->sim->register_builtin_policy(which);
        if (!res.committed) return fail(reject_status(res.reject_reason), res.reject_reason);
        net->sim->save();
        set_out(op_id_out, res.response);
        return OPSSC_OK;
    });
}

opssc_status opssc_repo_publish(opssc_network* net, const char* name, const char* version,
                                const void* payload, size_t payload_len) {
    if (!net || !name || !version || (!payload && payload_len > 0))
        return fail(OPSSC_ERR_INVALID_ARG, "null argument");
    return guarded([&]() -> opssc_status {
        net->sim->repo().publish(name, version,
                                 std::span<const std::uint8_t>(
                                     static_cast<const std::uint8_t*>(payload), payload_len));
        return OPSSC_OK;
    });
}

opssc_status opssc_op_run(opssc_network* net, const char* op_id, const char* params_json,
                          char** exec_id_out, char** phase_out) {
    if (!net || !op_id) return fail(OPSSC_ERR_INVALID_ARG, "null argument");
    return guarded([&]() -> opssc_status {
        opssc::engine::param_map params;
        if (params_json && *params_json)
            params = json::parse(params_json).get<opssc::engine::param_map>();
        auto outcome = net->sim->run_op(op_id, params);
        if (outcome.rejected())
            return fail(reject_status(outcome.reject_reason), outcome.reject_reason);
        net->sim->save();
        set_out(exec_id_out, outcome.exec_id);
        set_out(phase_out, opssc::engine::to_string(outcome.phase));
        return OPSSC_OK;
    });
}

opssc_status opssc_run_ticks(opssc_network* net, uint64_t ticks, char** execs_json_out) {
    if (!net) return fail(OPSSC_ERR_INVALID_ARG, "null network");
    return guarded([&]() -> opssc_status {
        auto outcomes = net->sim->run_ticks(ticks);
        net->sim->save();
        json arr = json::array();
        for (const auto& o : outcomes) {
            json row;
            row["exec_id"] = o.exec_id;
            row["phase"] = o.rejected() ? ("rejected: " + o.reject_reason)
                                        : opssc::engine::to_string(o.phase);
            arr.push_back(std::move(row));
        }
        set_out(execs_json_out, arr.dump());
        return OPSSC_OK;
    });
}

opssc_status opssc_execution_status(opssc_network* net, const char* exec_id,
                                    char** status_json_out) {
    if (!net || !exec_id) return fail(OPSSC_ERR_INVALID_ARG, "null argument");
    return guarded([&]() -> opssc_status {
        auto status = net->sim->status(exec_id);
        set_out(status_json_out, opssc::engine::status_to_json(status));
        return OPSSC_OK;
    });
}

opssc_status opssc_deploy(opssc_network* net, const char* sc_name, const char* version,
                          char** result_out) {
    if (!net || !sc_name || !version) return fail(OPSSC_ERR_INVALID_ARG, "null argument");
    return guarded([&]() -> opssc_status {
        auto res = net->sim->deploy(sc_name, version);
        if (!res.committed) return fail(reject_status(res.reject_reason), res.reject_reason);
        net->sim->save();
        set_out(result_out, res.response);
        return OPSSC_OK;
    });
}

opssc_status opssc_ledger_verify(opssc_network* net) {
    if (!net) return fail(OPSSC_ERR_INVALID_ARG, "null network");
    return guarded([&]() -> opssc_status {
        std::string why;
        if (!net->sim->verify(&why)) return fail(OPSSC_ERR_INTEGRITY, why);
        return OPSSC_OK;
    });
}

opssc_status opssc_dump_verify_file(const char* path) {
    if (!path) return fail(OPSSC_ERR_INVALID_ARG, "null path");
    return guarded([&]() -> opssc_status {
        std::ifstream in(path, std::ios::binary);
        if (!in) return fail(OPSSC_ERR_IO, std::string("cannot read ") + path);
        std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in),
                                        std::istreambuf_iterator<char>()};
        std::string why;
        if (!opssc::ledger::verify_chain_dump(bytes, &why))
            return fail(OPSSC_ERR_INTEGRITY, why);
        return OPSSC_OK;
    });
}

opssc_status opssc_ledger_history(opssc_network* net, const char* exec_id, char** json_out) {
    if (!net || !exec_id) return fail(OPSSC_ERR_INVALID_ARG, "null argument");
    return guarded([&]() -> opssc_status {
        set_out(json_out, net->sim->history_json(exec_id));
        return OPSSC_OK;
    });
}

opssc_status opssc_ledger_dump(opssc_network* net, const char* path) {
    if (!net || !path) return fail(OPSSC_ERR_INVALID_ARG, "null argument");
    return guarded([&]() -> opssc_status {
        net->sim->dump_chain_to(path);
        return OPSSC_OK;
    });
}

opssc_status opssc_chain_summary(opssc_network* net, char** json_out) {
    if (!net) return fail(OPSSC_ERR_INVALID_ARG, "null network");
    return guarded([&]() -> opssc_status {
        set_out(json_out, net->sim->chain_summary_json());
        return OPSSC_OK;
    });
}

opssc_status opssc_set_org_offline(opssc_network* net, const char* org_id, int offline) {
    if (!net || !org_id) return fail(OPSSC_ERR_INVALID_ARG, "null argument");
    return guarded([&]() -> opssc_status {
        net->sim->network().set_org_offline(org_id, offline != 0);
        return OPSSC_OK;
    });
}

opssc_status opssc_set_agent_enabled(opssc_network* net, const char* org_id, int enabled) {
    if (!net || !org_id) return fail(OPSSC_ERR_INVALID_ARG, "null argument");
    return guarded([&]() -> opssc_status {
        net->sim->network().set_agent_enabled(org_id, enabled != 0);
        if (enabled) net->sim->drain(); // deliver the backlog
        net->sim->save();
        return OPSSC_OK;
    });
}

opssc_status opssc_bench_run(const char* config_json, const char* run_root,
                             uint32_t repetitions, uint32_t warmup, const char* csv_path,
                             char** summary_json_out) {
    if (!config_json || !run_root || !csv_path)
        return fail(OPSSC_ERR_INVALID_ARG, "null argument");
    return guarded([&]() -> opssc_status {
        std::ofstream csv(csv_path, std::ios::trunc);
        if (!csv) return fail(OPSSC_ERR_IO, std::string("cannot write ") + csv_path);
        opssc::sim::bench_options opts;
        opts.repetitions = repetitions;
        opts.warmup = warmup;
        auto summary = opssc::sim::run_bench(config_json, run_root, opts, csv);
        json j;
        j["rows"] = summary.rows;
        j["mean_submit_to_commit_ms"] = summary.mean_submit_to_commit_ms;
        j["max_submit_to_commit_ms"] = summary.max_submit_to_commit_ms;
        j["max_completion_gap_ms"] = summary.max_completion_gap_ms;
        set_out(summary_json_out, j.dump());
        return OPSSC_OK;
    });
}

opssc_status opssc_cost_estimate_csv(const char* params_json, const char* method, int model,
                                     uint64_t n_from, uint64_t n_to, char** csv_out) {
    if (!params_json || !method || !csv_out) return fail(OPSSC_ERR_INVALID_ARG, "null argument");
    return guarded([&]() -> opssc_status {
        const std::string m = method;
        if (m != "conventional" && m != "proposed" && m != "both")
            return fail(OPSSC_ERR_VALIDATION, "method must be conventional|proposed|both");
        auto p = params_from_json(params_json);
        auto rows = opssc::cost::sweep(p, n_from, n_to, model_from_int(model));
        if (m == "both") {
            set_out(csv_out, opssc::cost::sweep_csv(rows));
            return OPSSC_OK;
        }
        std::ostringstream os;
        os << "n," << m << "_mm," << m << "_mh\n";
        os.setf(std::ios::fixed);
        os.precision(6);
        for (const auto& r : rows) {
            double mm = (m == "conventional") ? r.conventional_mm : r.proposed_mm;
            os << r.n << ',' << mm << ',' << mm / 60.0 << '\n';
        }
        set_out(csv_out, os.str());
        return OPSSC_OK;
    });
}

opssc_status opssc_cost_headline(const char* params_json, uint64_t n, int model,
                                 double* conventional_mh, double* proposed_mh,
                                 int* reduction_pct) {
    if (!params_json) return fail(OPSSC_ERR_INVALID_ARG, "null params");
    return guarded([&]() -> opssc_status {
        auto p = params_from_json(params_json);
        auto m = model_from_int(model);
        double conv = opssc::cost::total_cost(p, opssc::cost::cost_method::conventional, n, m);
        double prop = opssc::cost::total_cost(p, opssc::cost::cost_method::proposed, n, m);
        if (conventional_mh) *conventional_mh = opssc::cost::round_man_hours(conv);
        if (proposed_mh) *proposed_mh = opssc::cost::round_man_hours(prop);
        if (reduction_pct)
            *reduction_pct = opssc::cost::round_percent(opssc::cost::reduction_ratio(p, n, m));
        return OPSSC_OK;
    });
}

} // extern "C"
