#include "topology.hpp"

#include <json.hpp>

namespace opssc::sim {

using nlohmann::json;

std::size_t line_of_offset(const std::string& text, std::size_t byte_offset) {
    std::size_t line = 1;
    for (std::size_t i = 0; i < byte_offset && i < text.size(); ++i)
        if (text[i] == '\n') ++line;
    return line;
}

static net::node_role role_from_string(const std::string& s, const std::string& where) {
    if (s == "endorser") return net::node_role::endorser;
    if (s == "committer") return net::node_role::committer;
    if (s == "orderer") return net::node_role::orderer;
    throw std::invalid_argument(where + ": unknown role '" + s +
                                "' (expected endorser|committer|orderer)");
}

net::topology parse_topology(const std::string& config_text, const std::filesystem::path& run_root,
                             agent::runner_config* agent_cfg_out) {
    json j;
    try {
        j = json::parse(config_text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument("line " + std::to_string(line_of_offset(config_text, e.byte)) +
                                    ": " + e.what());
    }
    if (j.value("format", "") != "opssc-topology/1")
        throw std::invalid_argument("format: config must declare \"opssc-topology/1\"");

    net::topology topo;
    if (!j.contains("orgs") || !j["orgs"].is_array() || j["orgs"].empty())
        throw std::invalid_argument("orgs: at least one organization is required");

    size_t oi = 0;
    for (const auto& jo : j["orgs"]) {
        const std::string opath = "orgs[" + std::to_string(oi++) + "]";
        net::organization org;
        if (!jo.contains("org_id")) throw std::invalid_argument(opath + ".org_id: missing");
        org.org_id = jo["org_id"].get<std::string>();
        org.has_agent = jo.value("agent", true);
        if (!jo.contains("nodes") || !jo["nodes"].is_array() || jo["nodes"].empty())
            throw std::invalid_argument(opath + ".nodes: at least one node is required");
        size_t ni = 0;
        for (const auto& jn : jo["nodes"]) {
            const std::string npath = opath + ".nodes[" + std::to_string(ni++) + "]";
            net::node_info node;
            if (!jn.contains("node_id")) throw std::invalid_argument(npath + ".node_id: missing");
            node.node_id = jn["node_id"].get<std::string>();
            node.org_id = org.org_id;
            if (!jn.contains("roles") || !jn["roles"].is_array() || jn["roles"].empty())
                throw std::invalid_argument(npath + ".roles: non-empty role list required");
            for (const auto& r : jn["roles"])
                node.roles.insert(role_from_string(r.get<std::string>(), npath + ".roles"));
            auto sandbox = run_root / "sandboxes" / org.org_id / node.node_id;
            node.workdir = sandbox / "work";
            node.registry_file = sandbox / "installed.json";
            org.node_ids.push_back(node.node_id);
            topo.nodes.push_back(std::move(node));
        }
        topo.orgs.push_back(std::move(org));
    }

    if (!j.contains("consensus_policy"))
        throw std::invalid_argument("consensus_policy: missing");
    topo.default_policy.required_orgs =
        j["consensus_policy"].at("required_orgs").get<std::set<std::string>>();
    topo.default_policy.quorum = j["consensus_policy"].at("quorum").get<std::uint32_t>();

    topo.max_txs_per_block = j.value("max_txs_per_block", 10u);

    if (!j.contains("scheduler")) throw std::invalid_argument("scheduler: missing");
    const std::string mode = j["scheduler"].at("mode").get<std::string>();
    if (mode == "deterministic") {
        topo.mode = net::scheduler_mode::deterministic;
        if (!j["scheduler"].contains("seed"))
            throw std::invalid_argument("scheduler.seed: required in deterministic mode");
        topo.seed = j["scheduler"]["seed"].get<std::uint64_t>();
    } else if (mode == "threads") {
        topo.mode = net::scheduler_mode::threads;
        topo.seed = j["scheduler"].value("seed", 0u);
    } else {
        throw std::invalid_argument("scheduler.mode: expected 'deterministic' or 'threads'");
    }

    std::filesystem::path repo = j.value("shared_repo", "repo");
    topo.shared_repo_root = repo.is_absolute() ? repo : run_root / repo;

    if (agent_cfg_out) {
        agent::runner_config cfg;
        if (j.contains("agents")) {
            const auto& ja = j["agents"];
            const std::string runner = ja.value("runner", "builtin");
            if (runner == "builtin") {
                cfg.mode = agent::runner_mode::builtin_verbs;
            } else if (runner == "real_shell") {
                cfg.mode = agent::runner_mode::real_shell;
            } else {
                throw std::invalid_argument("agents.runner: expected 'builtin' or 'real_shell'");
            }
            cfg.step_timeout = std::chrono::milliseconds(ja.value("step_timeout_ms", 5000u));
            cfg.retry_budget = ja.value("retry_budget", 3u);
            cfg.parallel_nodes = ja.value("parallel_nodes", false);
            if (ja.contains("shell_allowlist"))
                cfg.shell_allowlist = ja["shell_allowlist"].get<std::set<std::string>>();
        }
        *agent_cfg_out = cfg;
    }

    try {
        topo.validate();
    } catch (const std::exception& e) {
        throw std::invalid_argument(std::string("topology: ") + e.what());
    }
    return topo;
}

} // namespace opssc::sim
