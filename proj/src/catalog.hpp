#pragma once

#include "consensus.hpp"
#include "engine_types.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace opssc::catalog {

// On-disk artifact store shared by all orgs. Layout (bit-exact, see
// docs/file-formats.md):
//   <root>/<name>-<version>.tgz     gzip stream of the payload bytes
//   <root>/<name>-<version>.digest  sha-256 hex of the payload + '\n'
class shared_repo {
public:
    explicit shared_repo(std::filesystem::path root);

    const std::filesystem::path& root() const { return root_; }

    // Artifacts are immutable once published.
    digest32 publish(const std::string& name, const std::string& version,
                     std::span<const std::uint8_t> payload);
    bool has(const std::string& name, const std::string& version) const;
    std::optional<digest32> stored_digest(const std::string& name,
                                          const std::string& version) const;
    std::vector<std::string> list() const;

    static std::string artifact_stem(const std::string& name, const std::string& version) {
        return name + "-" + version;
    }

private:
    std::filesystem::path root_;
};

// The five-step installation procedure: clean, fetch, unpack, sc-install,
// sc-list; parameterized by {{name}} and {{version}}.
engine::operational_policy build_sc_install_policy(net::consensus_policy consensus);
inline constexpr const char* sc_install_op_id = "sc-install";

// Execution environment a verb runs in (one node's sandbox).
struct verb_env {
    net::node_info* node = nullptr;
    std::filesystem::path repo_root;
    std::optional<engine::payload_spec> payload;
};

struct verb_result {
    int exit_code = 0;
    std::string output;
    std::string note; // machine-readable failure class, e.g. "sandbox_escape"
};

// Builtin verbs: clean, fetch, unpack, sc-install, sc-list, exec,
// snapshot-copy. Unknown verbs exit 127. Verbs mutate only the node's
// sandbox and registry; path arguments may not escape the workdir.
bool is_builtin_verb(const std::string& verb);
verb_result run_builtin_verb(const verb_env& env, const engine::command_step& step);

// Lifecycle contract: deploy(name, version, required_orgs_json). Commits
// only when (name, version) is installed on every node of every named org.
inline constexpr const char* lifecycle_sc_name = "lifecycle";
void install_lifecycle(net::network& net);

// Deploys or upgrades an installed contract under the given policy.
net::tx_result deploy_or_upgrade(net::network& net, const std::string& client_org,
                                 const std::string& sc_name, const std::string& version,
                                 const net::consensus_policy& policy);

} // namespace opssc::catalog
