#pragma once

#include "agent.hpp"
#include "consensus.hpp"

#include <filesystem>
#include <string>

namespace opssc::sim {

// Parses and validates a topology config file (format "opssc-topology/1").
// Node sandbox paths are bound under run_root/sandboxes/<org>/<node>/.
// Parse errors carry "line N:" positions; semantic errors name the offending
// JSON path. Throws std::invalid_argument.
net::topology parse_topology(const std::string& config_text, const std::filesystem::path& run_root,
                             agent::runner_config* agent_cfg_out);

// line number (1-based) of a byte offset in `text`
std::size_t line_of_offset(const std::string& text, std::size_t byte_offset);

} // namespace opssc::sim
