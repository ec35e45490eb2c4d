#pragma once

#include "consensus_policy.hpp"
#include "digest.hpp"
#include "encoding.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace opssc::engine {

enum class failure_mode : std::uint8_t { abort = 0, continue_run = 1 };

// One step of an operational procedure: a verb plus argument strings, which
// may contain {{param}} placeholders until resolved.
struct command_step {
    std::string verb;
    std::vector<std::string> args;
    failure_mode on_failure = failure_mode::abort;

    std::string display() const; // "verb arg1 arg2"
    bool operator==(const command_step&) const = default;
};

enum class timing_kind : std::uint8_t { on_demand = 0, periodic = 1 };

struct timing_spec {
    timing_kind kind = timing_kind::on_demand;
    std::uint64_t interval_ticks = 0; // > 0 for periodic
};

enum class target_kind : std::uint8_t { all_nodes = 0, per_org = 1 };

struct target_spec {
    target_kind kind = target_kind::all_nodes;
    std::vector<std::string> node_ids; // per_org: explicit node filter
};

// Digest-pinned external program bundled with a policy; the exec verb runs
// (or, in builtin mode, attests) files listed here.
struct payload_spec {
    std::string dir;
    std::map<std::string, std::string> file_digests; // filename -> sha-256 hex
};

// On-ledger definition of how/when/what to run for one operational item.
struct operational_policy {
    std::string op_id;
    std::string name;
    std::vector<command_step> command_template;
    std::set<std::string> required_params;
    std::map<std::string, std::string> default_params;
    timing_spec timing;
    target_spec target;
    net::consensus_policy consensus;
    std::optional<payload_spec> payload;

    // Checks structural invariants: non-empty template, every placeholder
    // covered by required or default params, valid consensus policy.
    // Throws std::invalid_argument naming the violation.
    void validate() const;
};

using param_map = std::map<std::string, std::string>;

// Scans `text` for {{name}} placeholders.
std::vector<std::string> collect_placeholders(const std::string& text);

// Single-pass substitution: each {{name}} is replaced by its value exactly
// once, left to right; substituted values are never re-expanded. An
// unresolved placeholder raises std::invalid_argument naming it.
std::string resolve_text(const std::string& text, const param_map& params);
std::vector<command_step> resolve_template(const std::vector<command_step>& tmpl,
                                           const param_map& params);

// exec_id = hex digest of (op_id, resolved commands, issue logical time);
// unique per committed execution and reproducible across replicas.
std::string make_exec_id(const std::string& op_id, const std::vector<command_step>& resolved,
                         std::uint64_t logical_time);

// The out-BC trigger delivered to agents at commit: fully resolved commands
// plus execution identity and targets.
struct operational_event {
    digest32 event_id;
    std::string exec_id;
    std::string op_id;
    std::vector<command_step> resolved_commands;
    std::map<std::string, std::vector<std::string>> target_nodes; // org -> node ids
    std::optional<payload_spec> payload;

    std::vector<std::uint8_t> id_preimage() const;
    void seal() { event_id = sha256(std::span<const std::uint8_t>(id_preimage())); }
    std::set<std::string> target_orgs() const;
};

struct step_result {
    std::uint32_t step_index = 0;
    int exit_code = 0;
    digest32 output_digest;
    std::string note; // e.g. "timeout", "sandbox_escape"
};

// Per-node evidence registered back on the ledger.
struct execution_record {
    std::string exec_id;
    std::string org_id;
    std::string node_id;
    std::vector<step_result> results; // prefix of the command list
    bool success = false;
    std::uint32_t failed_step = 0; // meaningful when !success
    digest32 evidence_digest;      // digest over concatenated output digests

    void seal_evidence();
    digest32 compute_evidence_digest() const;
};

enum class exec_phase : std::uint8_t { issued, partially_reported, complete, failed };

std::string to_string(exec_phase p);
exec_phase phase_from_string(const std::string& s);

struct org_report_summary {
    bool success = false;
    std::uint32_t failed_step = 0;
};

struct execution_status {
    std::string exec_id;
    std::string op_id;
    std::uint64_t issued_at = 0;
    std::set<std::string> expected_orgs;
    std::map<std::string, org_report_summary> reported;
    exec_phase phase = exec_phase::issued;

    void recompute_phase();
};

// JSON (de)serialization for the world-state records; canonical (sorted
// keys), so equal values encode to equal bytes.
std::string policy_to_json(const operational_policy& p);
operational_policy policy_from_json(const std::string& text);
std::string status_to_json(const execution_status& s);
execution_status status_from_json(const std::string& text);
std::string records_to_json(const std::vector<execution_record>& records);
std::vector<execution_record> records_from_json(const std::string& text);

} // namespace opssc::engine
