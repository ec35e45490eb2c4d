#include "engine_types.hpp"

#include <json.hpp>

#include <stdexcept>

namespace opssc::engine {

using nlohmann::json;

std::string command_step::display() const {
    std::string out = verb;
    for (const auto& a : args) {
        out.push_back(' ');
        out += a;
    }
    return out;
}

void operational_policy::validate() const {
    if (op_id.empty()) throw std::invalid_argument("policy op_id must be non-empty");
    if (command_template.empty())
        throw std::invalid_argument("policy '" + op_id + "' has an empty command template");
    consensus.validate();
    if (timing.kind == timing_kind::periodic && timing.interval_ticks == 0)
        throw std::invalid_argument("periodic policy '" + op_id + "' needs interval > 0");
    if (target.kind == target_kind::per_org && target.node_ids.empty())
        throw std::invalid_argument("per_org target of '" + op_id + "' needs a node filter");
    for (const auto& step : command_template) {
        if (step.verb.empty()) throw std::invalid_argument("command step with empty verb");
        auto check = [&](const std::string& text) {
            for (const auto& ph : collect_placeholders(text)) {
                if (!required_params.contains(ph) && !default_params.contains(ph))
                    throw std::invalid_argument("placeholder '{{" + ph + "}}' in policy '" +
                                                op_id + "' is covered by no parameter");
            }
        };
        check(step.verb);
        for (const auto& a : step.args) check(a);
    }
}

std::vector<std::string> collect_placeholders(const std::string& text) {
    std::vector<std::string> out;
    size_t pos = 0;
    while (true) {
        size_t open = text.find("{{", pos);
        if (open == std::string::npos) break;
        size_t close = text.find("}}", open + 2);
        if (close == std::string::npos) break;
        out.push_back(text.substr(open + 2, close - open - 2));
        pos = close + 2;
    }
    return out;
}

std::string resolve_text(const std::string& text, const param_map& params) {
    std::string out;
    out.reserve(text.size());
    size_t pos = 0;
    while (pos < text.size()) {
        size_t open = text.find("{{", pos);
        if (open == std::string::npos) {
            out.append(text, pos, std::string::npos);
            break;
        }
        size_t close = text.find("}}", open + 2);
        if (close == std::string::npos) {
            out.append(text, pos, std::string::npos);
            break;
        }
        out.append(text, pos, open - pos);
        std::string name = text.substr(open + 2, close - open - 2);
        auto it = params.find(name);
        if (it == params.end())
            throw std::invalid_argument("unresolved placeholder '{{" + name + "}}'");
        out += it->second; // substituted once; never re-scanned
        pos = close + 2;
    }
    return out;
}

std::vector<command_step> resolve_template(const std::vector<command_step>& tmpl,
                                           const param_map& params) {
    std::vector<command_step> out;
    out.reserve(tmpl.size());
    for (const auto& step : tmpl) {
        command_step r;
        r.verb = resolve_text(step.verb, params);
        r.on_failure = step.on_failure;
        r.args.reserve(step.args.size());
        for (const auto& a : step.args) r.args.push_back(resolve_text(a, params));
        out.push_back(std::move(r));
    }
    return out;
}

static void encode_steps(byte_writer& w, const std::vector<command_step>& steps) {
    w.u32(static_cast<std::uint32_t>(steps.size()));
    for (const auto& s : steps) {
        w.lp(s.verb);
        w.u32(static_cast<std::uint32_t>(s.args.size()));
        for (const auto& a : s.args) w.lp(a);
        w.u8(static_cast<std::uint8_t>(s.on_failure));
    }
}

std::vector<std::uint8_t> operational_event::id_preimage() const {
    byte_writer w;
    w.lp(exec_id);
    w.lp(op_id);
    encode_steps(w, resolved_commands);
    w.u32(static_cast<std::uint32_t>(target_nodes.size()));
    for (const auto& [org, nodes] : target_nodes) {
        w.lp(org);
        w.u32(static_cast<std::uint32_t>(nodes.size()));
        for (const auto& n : nodes) w.lp(n);
    }
    return w.take();
}

std::set<std::string> operational_event::target_orgs() const {
    std::set<std::string> orgs;
    for (const auto& [org, nodes] : target_nodes) orgs.insert(org);
    return orgs;
}

// exec_id preimage: lp(op_id) || steps || u64le(issue logical time)
std::string make_exec_id(const std::string& op_id, const std::vector<command_step>& resolved,
                         std::uint64_t logical_time) {
    byte_writer w;
    w.lp(op_id);
    encode_steps(w, resolved);
    w.u64(logical_time);
    return sha256(std::span<const std::uint8_t>(w.data())).hex();
}

digest32 execution_record::compute_evidence_digest() const {
    byte_writer w;
    for (const auto& r : results) w.dig(r.output_digest);
    return sha256(std::span<const std::uint8_t>(w.data()));
}

void execution_record::seal_evidence() { evidence_digest = compute_evidence_digest(); }

std::string to_string(exec_phase p) {
    switch (p) {
    case exec_phase::issued: return "issued";
    case exec_phase::partially_reported: return "partially_reported";
    case exec_phase::complete: return "complete";
    case exec_phase::failed: return "failed";
    }
    return "unknown";
}

exec_phase phase_from_string(const std::string& s) {
    if (s == "issued") return exec_phase::issued;
    if (s == "partially_reported") return exec_phase::partially_reported;
    if (s == "complete") return exec_phase::complete;
    if (s == "failed") return exec_phase::failed;
    throw std::invalid_argument("unknown phase '" + s + "'");
}

void execution_status::recompute_phase() {
    bool any_failed = false;
    for (const auto& [org, summary] : reported)
        if (!summary.success) any_failed = true;
    if (any_failed) {
        phase = exec_phase::failed;
    } else if (reported.empty()) {
        phase = exec_phase::issued;
    } else if (reported.size() == expected_orgs.size()) {
        phase = exec_phase::complete;
    } else {
        phase = exec_phase::partially_reported;
    }
}

static json steps_to_json(const std::vector<command_step>& steps) {
    json arr = json::array();
    for (const auto& s : steps) {
        json j;
        j["verb"] = s.verb;
        j["args"] = s.args;
        j["on_failure"] = s.on_failure == failure_mode::abort ? "abort" : "continue";
        arr.push_back(std::move(j));
    }
    return arr;
}

static std::vector<command_step> steps_from_json(const json& arr) {
    std::vector<command_step> steps;
    for (const auto& j : arr) {
        command_step s;
        s.verb = j.at("verb").get<std::string>();
        if (j.contains("args")) s.args = j.at("args").get<std::vector<std::string>>();
        std::string mode = j.value("on_failure", "abort");
        if (mode == "abort") {
            s.on_failure = failure_mode::abort;
        } else if (mode == "continue") {
            s.on_failure = failure_mode::continue_run;
        } else {
            throw std::invalid_argument("on_failure must be 'abort' or 'continue'");
        }
        steps.push_back(std::move(s));
    }
    return steps;
}

std::string policy_to_json(const operational_policy& p) {
    json j;
    j["format"] = "opssc-policy/1";
    j["op_id"] = p.op_id;
    j["name"] = p.name;
    j["steps"] = steps_to_json(p.command_template);
    j["required_params"] = p.required_params;
    j["default_params"] = p.default_params;
    if (p.timing.kind == timing_kind::on_demand) {
        j["timing"] = {{"type", "on_demand"}};
    } else {
        j["timing"] = {{"type", "periodic"}, {"interval_ticks", p.timing.interval_ticks}};
    }
    if (p.target.kind == target_kind::all_nodes) {
        j["target"] = {{"type", "all_nodes"}};
    } else {
        j["target"] = {{"type", "per_org"}, {"nodes", p.target.node_ids}};
    }
    j["consensus"] = {{"required_orgs", p.consensus.required_orgs}, {"quorum", p.consensus.quorum}};
    if (p.payload) {
        j["payload"] = {{"dir", p.payload->dir}, {"files", p.payload->file_digests}};
    }
    return j.dump();
}

operational_policy policy_from_json(const std::string& text) {
    json j = json::parse(text);
    if (j.value("format", "") != "opssc-policy/1")
        throw std::invalid_argument("policy file must declare format 'opssc-policy/1'");
    operational_policy p;
    p.op_id = j.at("op_id").get<std::string>();
    p.name = j.value("name", p.op_id);
    p.command_template = steps_from_json(j.at("steps"));
    if (j.contains("required_params"))
        p.required_params = j.at("required_params").get<std::set<std::string>>();
    if (j.contains("default_params"))
        p.default_params = j.at("default_params").get<std::map<std::string, std::string>>();
    if (j.contains("timing")) {
        std::string type = j.at("timing").at("type").get<std::string>();
        if (type == "on_demand") {
            p.timing.kind = timing_kind::on_demand;
        } else if (type == "periodic") {
            p.timing.kind = timing_kind::periodic;
            p.timing.interval_ticks = j.at("timing").at("interval_ticks").get<std::uint64_t>();
        } else {
            throw std::invalid_argument("timing.type must be 'on_demand' or 'periodic'");
        }
    }
    if (j.contains("target")) {
        std::string type = j.at("target").at("type").get<std::string>();
        if (type == "all_nodes") {
            p.target.kind = target_kind::all_nodes;
        } else if (type == "per_org") {
            p.target.kind = target_kind::per_org;
            p.target.node_ids = j.at("target").at("nodes").get<std::vector<std::string>>();
        } else {
            throw std::invalid_argument("target.type must be 'all_nodes' or 'per_org'");
        }
    }
    p.consensus.required_orgs = j.at("consensus").at("required_orgs").get<std::set<std::string>>();
    p.consensus.quorum = j.at("consensus").at("quorum").get<std::uint32_t>();
    if (j.contains("payload")) {
        payload_spec ps;
        ps.dir = j.at("payload").at("dir").get<std::string>();
        ps.file_digests = j.at("payload").at("files").get<std::map<std::string, std::string>>();
        p.payload = std::move(ps);
    }
    p.validate();
    return p;
}

std::string status_to_json(const execution_status& s) {
    json j;
    j["exec_id"] = s.exec_id;
    j["op_id"] = s.op_id;
    j["issued_at"] = s.issued_at;
    j["expected_orgs"] = s.expected_orgs;
    json rep = json::object();
    for (const auto& [org, summary] : s.reported) {
        json r;
        r["success"] = summary.success;
        if (!summary.success) r["failed_step"] = summary.failed_step;
        rep[org] = std::move(r);
    }
    j["reported"] = std::move(rep);
    j["phase"] = to_string(s.phase);
    return j.dump();
}

execution_status status_from_json(const std::string& text) {
    json j = json::parse(text);
    execution_status s;
    s.exec_id = j.at("exec_id").get<std::string>();
    s.op_id = j.at("op_id").get<std::string>();
    s.issued_at = j.at("issued_at").get<std::uint64_t>();
    s.expected_orgs = j.at("expected_orgs").get<std::set<std::string>>();
    for (const auto& [org, r] : j.at("reported").items()) {
        org_report_summary summary;
        summary.success = r.at("success").get<bool>();
        summary.failed_step = r.value("failed_step", 0u);
        s.reported[org] = summary;
    }
    s.phase = phase_from_string(j.at("phase").get<std::string>());
    return s;
}

std::string records_to_json(const std::vector<execution_record>& records) {
    json arr = json::array();
    for (const auto& rec : records) {
        json j;
        j["exec_id"] = rec.exec_id;
        j["org_id"] = rec.org_id;
        j["node_id"] = rec.node_id;
        json results = json::array();
        for (const auto& r : rec.results) {
            json rj;
            rj["step"] = r.step_index;
            rj["exit_code"] = r.exit_code;
            rj["output_digest"] = r.output_digest.hex();
            if (!r.note.empty()) rj["note"] = r.note;
            results.push_back(std::move(rj));
        }
        j["results"] = std::move(results);
        j["success"] = rec.success;
        if (!rec.success) j["failed_step"] = rec.failed_step;
        j["evidence_digest"] = rec.evidence_digest.hex();
        arr.push_back(std::move(j));
    }
    return arr.dump();
}

std::vector<execution_record> records_from_json(const std::string& text) {
    json arr = json::parse(text);
    std::vector<execution_record> records;
    for (const auto& j : arr) {
        execution_record rec;
        rec.exec_id = j.at("exec_id").get<std::string>();
        rec.org_id = j.at("org_id").get<std::string>();
        rec.node_id = j.at("node_id").get<std::string>();
        for (const auto& rj : j.at("results")) {
            step_result r;
            r.step_index = rj.at("step").get<std::uint32_t>();
            r.exit_code = rj.at("exit_code").get<int>();
            r.output_digest = digest32::from_hex(rj.at("output_digest").get<std::string>());
            r.note = rj.value("note", "");
            rec.results.push_back(std::move(r));
        }
        rec.success = j.at("success").get<bool>();
        rec.failed_step = j.value("failed_step", 0u);
        rec.evidence_digest = digest32::from_hex(j.at("evidence_digest").get<std::string>());
        records.push_back(std::move(rec));
    }
    return records;
}

} // namespace opssc::engine
