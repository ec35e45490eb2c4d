#pragma once

#include "consensus.hpp"
#include "engine_types.hpp"

#include <string>
#include <vector>

namespace opssc::engine {

// World-state key namespaces owned by the operations contract.
std::string policy_key(const std::string& op_id);
std::string status_key(const std::string& exec_id);
std::string history_key(const std::string& exec_id, const std::string& org_id);

inline constexpr const char* opssc_sc_name = "opssc";

// Registers the operations contract on the network. Functions:
//   register_policy(policy_json)                -> op_id
//   execute_operation(op_id, params_json)       -> exec_id (emits the event)
//   register_history(exec_id, org_id, records)  -> resulting phase
//   get_execution_status(exec_id)               -> status json (query)
//   get_policy(op_id)                           -> policy json (query)
//   list_policies()                             -> json array of op_ids (query)
void install_opssc(net::network& net);

// Client-side validation mirror of register_policy; throws
// std::invalid_argument before anything is submitted.
void validate_policy(const operational_policy& p);

// Convenience wrappers over network txs/queries.
net::tx_result register_policy(net::network& net, const std::string& client_org,
                               const operational_policy& policy);
net::tx_result execute_operation(net::network& net, const std::string& client_org,
                                 const std::string& op_id, const param_map& params);
net::tx_result register_history(net::network& net, const std::string& org_id,
                                const std::string& exec_id,
                                const std::vector<execution_record>& records,
                                const net::consensus_policy& policy);
execution_status get_execution_status(const net::network& net, const std::string& exec_id);
operational_policy get_policy(const net::network& net, const std::string& op_id);

} // namespace opssc::engine
