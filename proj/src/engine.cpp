#include "engine.hpp"

#include <json.hpp>

namespace opssc::engine {

using net::sc_context;
using net::sc_error;
using net::sc_exception;
using nlohmann::json;

std::string policy_key(const std::string& op_id) { return "policy/" + op_id; }
std::string status_key(const std::string& exec_id) { return "exec/" + exec_id + "/status"; }
std::string history_key(const std::string& exec_id, const std::string& org_id) {
    return "hist/" + exec_id + "/" + org_id;
}

void validate_policy(const operational_policy& p) { p.validate(); }

static const std::string& arg_at(sc_context& ctx, size_t i, const char* what) {
    if (ctx.args().size() <= i) throw sc_exception({"bad_args", std::string("missing ") + what});
    return ctx.args()[i];
}

static void sc_register_policy(sc_context& ctx) {
    operational_policy policy;
    try {
        policy = policy_from_json(arg_at(ctx, 0, "policy json"));
    } catch (const sc_exception&) {
        throw;
    } catch (const std::exception& e) {
        throw sc_exception({"invalid_policy", e.what()});
    }
    const std::string key = policy_key(policy.op_id);
    if (ctx.get_state(key)) throw sc_exception({"duplicate_policy", policy.op_id});
    ctx.put_state(key, policy_to_json(policy)); // canonical re-encoding
    ctx.set_response(policy.op_id);
}

static operational_policy load_policy(sc_context& ctx, const std::string& op_id) {
    auto stored = ctx.get_state(policy_key(op_id));
    if (!stored) throw sc_exception({"no_such_policy", op_id});
    return policy_from_json(*stored);
}

static void sc_execute_operation(sc_context& ctx) {
    const std::string& op_id = arg_at(ctx, 0, "op_id");
    operational_policy policy = load_policy(ctx, op_id);

    param_map params;
    if (ctx.args().size() > 1 && !ctx.args()[1].empty()) {
        try {
            params = json::parse(ctx.args()[1]).get<param_map>();
        } catch (const std::exception& e) {
            throw sc_exception({"bad_args", std::string("params: ") + e.what()});
        }
    }
    for (const auto& [k, v] : params)
        if (!policy.required_params.contains(k) && !policy.default_params.contains(k))
            throw sc_exception({"unknown_param", k});

    param_map merged = policy.default_params;
    for (const auto& [k, v] : params) merged[k] = v;
    for (const auto& req : policy.required_params)
        if (!merged.contains(req)) throw sc_exception({"missing_param", req});

    std::vector<command_step> resolved;
    try {
        resolved = resolve_template(policy.command_template, merged);
    } catch (const std::exception& e) {
        throw sc_exception({"missing_param", e.what()});
    }

    operational_event ev;
    ev.op_id = op_id;
    ev.exec_id = make_exec_id(op_id, resolved, ctx.logical_time());
    ev.resolved_commands = std::move(resolved);
    ev.payload = policy.payload;
    const auto& topo = ctx.topology();
    if (policy.target.kind == target_kind::all_nodes) {
        for (const auto& org : topo.org_ids()) ev.target_nodes[org] = topo.org_node_ids(org);
    } else {
        for (const auto& org : topo.org_ids()) {
            std::vector<std::string> filtered;
            for (const auto& nid : topo.org_node_ids(org))
                for (const auto& want : policy.target.node_ids)
                    if (nid == want) filtered.push_back(nid);
            if (!filtered.empty()) ev.target_nodes[org] = std::move(filtered);
        }
    }
    if (ev.target_nodes.empty()) throw sc_exception({"empty_target", op_id});

    execution_status status;
    status.exec_id = ev.exec_id;
    status.op_id = op_id;
    status.issued_at = ctx.logical_time();
    status.expected_orgs = ev.target_orgs();
    status.phase = exec_phase::issued;
    ctx.put_state(status_key(ev.exec_id), status_to_json(status));

    ctx.set_response(ev.exec_id);
    ctx.emit_event(std::move(ev));
}

static void sc_register_history(sc_context& ctx) {
    const std::string& exec_id = arg_at(ctx, 0, "exec_id");
    const std::string& org_id = arg_at(ctx, 1, "org_id");
    const std::string& records_json = arg_at(ctx, 2, "records json");

    auto stored = ctx.get_state(status_key(exec_id));
    if (!stored) throw sc_exception({"no_such_execution", exec_id});
    execution_status status = status_from_json(*stored);
    if (!status.expected_orgs.contains(org_id)) throw sc_exception({"not_a_target", org_id});
    const std::string hkey = history_key(exec_id, org_id);
    if (ctx.get_state(hkey)) throw sc_exception({"duplicate_report", org_id});

    std::vector<execution_record> records;
    try {
        records = records_from_json(records_json);
    } catch (const std::exception& e) {
        throw sc_exception({"bad_args", std::string("records: ") + e.what()});
    }
    if (records.empty()) throw sc_exception({"bad_args", "empty record batch"});
    org_report_summary summary;
    summary.success = true;
    for (const auto& rec : records) {
        if (rec.exec_id != exec_id || rec.org_id != org_id)
            throw sc_exception({"bad_args", "record does not match exec/org"});
        if (rec.compute_evidence_digest() != rec.evidence_digest)
            throw sc_exception({"bad_args", "evidence digest does not recompute"});
        if (!rec.success) {
            summary.success = false;
            summary.failed_step = rec.failed_step;
        }
    }

    ctx.put_state(hkey, records_json); // write-once evidence key
    status.reported[org_id] = summary;
    status.recompute_phase();
    ctx.put_state(status_key(exec_id), status_to_json(status));
    ctx.set_response(to_string(status.phase));
}

static void sc_get_execution_status(sc_context& ctx) {
    const std::string& exec_id = arg_at(ctx, 0, "exec_id");
    auto stored = ctx.get_state(status_key(exec_id));
    if (!stored) throw sc_exception({"no_such_execution", exec_id});
    ctx.set_response(*stored);
}

static void sc_get_policy(sc_context& ctx) {
    const std::string& op_id = arg_at(ctx, 0, "op_id");
    auto stored = ctx.get_state(policy_key(op_id));
    if (!stored) throw sc_exception({"no_such_policy", op_id});
    ctx.set_response(*stored);
}

static void sc_list_policies(sc_context& ctx) {
    // Policies live under a reserved prefix; enumeration goes through the
    // committed entries of the snapshot.
    json out = json::array();
    // The context cannot range-scan, so the registry keeps an index key.
    auto idx = ctx.get_state("policy-index");
    if (idx) out = json::parse(*idx);
    ctx.set_response(out.dump());
}

void install_opssc(net::network& net) {
    net.register_system_sc(opssc_sc_name, [](sc_context& ctx) {
        const std::string& fn = ctx.function();
        if (fn == "register_policy") {
            sc_register_policy(ctx);
            // maintain the op_id index for list_policies
            json idx = json::array();
            if (auto stored = ctx.get_state("policy-index")) idx = json::parse(*stored);
            idx.push_back(ctx.response());
            ctx.put_state("policy-index", idx.dump());
        } else if (fn == "execute_operation") {
            sc_execute_operation(ctx);
        } else if (fn == "register_history") {
            sc_register_history(ctx);
        } else if (fn == "get_execution_status") {
            sc_get_execution_status(ctx);
        } else if (fn == "get_policy") {
            sc_get_policy(ctx);
        } else if (fn == "list_policies") {
            sc_list_policies(ctx);
        } else {
            throw sc_exception({"no_such_function", fn});
        }
    });
}

net::tx_result register_policy(net::network& net, const std::string& client_org,
                               const operational_policy& policy) {
    validate_policy(policy); // fail fast before submission
    return net.submit_tx(client_org, opssc_sc_name, "register_policy",
                         {policy_to_json(policy)}, policy.consensus);
}

net::tx_result execute_operation(net::network& net, const std::string& client_org,
                                 const std::string& op_id, const param_map& params) {
    operational_policy policy;
    try {
        policy = get_policy(net, op_id); // the policy names its own consensus policy
    } catch (const sc_exception& e) {
        return net::tx_result::rejected(e.err.code);
    }
    return net.submit_tx(client_org, opssc_sc_name, "execute_operation",
                         {op_id, json(params).dump()}, policy.consensus);
}

net::tx_result register_history(net::network& net, const std::string& org_id,
                                const std::string& exec_id,
                                const std::vector<execution_record>& records,
                                const net::consensus_policy& policy) {
    return net.submit_tx(org_id, opssc_sc_name, "register_history",
                         {exec_id, org_id, records_to_json(records)}, policy);
}

execution_status get_execution_status(const net::network& net, const std::string& exec_id) {
    return status_from_json(net.query(opssc_sc_name, "get_execution_status", {exec_id}));
}

operational_policy get_policy(const net::network& net, const std::string& op_id) {
    return policy_from_json(net.query(opssc_sc_name, "get_policy", {op_id}));
}

} // namespace opssc::engine
