#include "catalog.hpp"

#include "digest.hpp"
#include "gzip.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace opssc::catalog {

namespace fs = std::filesystem;
using net::sc_exception;
using nlohmann::json;

// ---------------------------------------------------------------- repo

shared_repo::shared_repo(fs::path root) : root_(std::move(root)) {
    fs::create_directories(root_);
}

static std::vector<std::uint8_t> read_file_bytes(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + p.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

static void write_file_bytes(const fs::path& p, std::span<const std::uint8_t> bytes) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
}

digest32 shared_repo::publish(const std::string& name, const std::string& version,
                              std::span<const std::uint8_t> payload) {
    if (name.empty() || version.empty() || name.find('/') != std::string::npos ||
        version.find('/') != std::string::npos)
        throw std::invalid_argument("artifact names and versions must be plain path components");
    const std::string stem = artifact_stem(name, version);
    const fs::path tgz = root_ / (stem + ".tgz");
    const fs::path dig = root_ / (stem + ".digest");
    if (fs::exists(tgz) || fs::exists(dig))
        throw std::runtime_error("artifact " + stem + " already published; artifacts are immutable");
    digest32 d = sha256(payload);
    write_file_bytes(tgz, gzip_compress(payload));
    std::ofstream out(dig, std::ios::trunc);
    out << d.hex() << '\n';
    return d;
}

bool shared_repo::has(const std::string& name, const std::string& version) const {
    const std::string stem = artifact_stem(name, version);
    return fs::exists(root_ / (stem + ".tgz")) && fs::exists(root_ / (stem + ".digest"));
}

std::optional<digest32> shared_repo::stored_digest(const std::string& name,
                                                   const std::string& version) const {
    const fs::path dig = root_ / (artifact_stem(name, version) + ".digest");
    std::ifstream in(dig);
    if (!in) return std::nullopt;
    std::string hex;
    in >> hex;
    return digest32::from_hex(hex);
}

std::vector<std::string> shared_repo::list() const {
    std::vector<std::string> out;
    for (const auto& e : fs::directory_iterator(root_))
        if (e.path().extension() == ".tgz") out.push_back(e.path().stem().string());
    std::sort(out.begin(), out.end());
    return out;
}

// ------------------------------------------------------------ install policy

engine::operational_policy build_sc_install_policy(net::consensus_policy consensus) {
    using engine::command_step;
    engine::operational_policy p;
    p.op_id = sc_install_op_id;
    p.name = "contract installation";
    p.command_template = {
        command_step{"clean", {}},
        command_step{"fetch", {"{{name}}-{{version}}"}},
        command_step{"unpack", {"{{name}}-{{version}}"}},
        command_step{"sc-install", {"{{name}}", "{{version}}"}},
        command_step{"sc-list", {}},
    };
    p.required_params = {"name", "version"};
    p.timing.kind = engine::timing_kind::on_demand;
    p.target.kind = engine::target_kind::all_nodes;
    p.consensus = std::move(consensus);
    p.validate();
    return p;
}

// ------------------------------------------------------------------- verbs

// Joins `arg` onto the workdir and refuses anything that escapes it.
static fs::path sandbox_path(const fs::path& workdir, const std::string& arg, verb_result& res) {
    fs::path p(arg);
    if (p.is_absolute()) {
        res = {1, "refusing absolute path: " + arg, "sandbox_escape"};
        return {};
    }
    fs::path joined = (workdir / p).lexically_normal();
    fs::path base = workdir.lexically_normal();
    auto [bend, jit] = std::mismatch(base.begin(), base.end(), joined.begin(), joined.end());
    if (bend != base.end()) {
        res = {1, "path escapes the node sandbox: " + arg, "sandbox_escape"};
        return {};
    }
    return joined;
}

// Verb outputs feed evidence digests, so they never mention host paths:
// identical runs in different run roots must produce identical evidence.
static verb_result verb_clean(const verb_env& env) {
    std::uintmax_t removed = 0;
    for (const auto& e : fs::directory_iterator(env.node->workdir)) removed += fs::remove_all(e.path());
    return {0, "cleaned workdir (" + std::to_string(removed) + " entries)", ""};
}

// Artifact stems and payload file names are plain names; anything with a
// path separator would let a step write outside its sandbox.
static bool plain_name(const std::string& s) {
    return !s.empty() && s.find('/') == std::string::npos &&
           s.find('\\') == std::string::npos && s != "." && s != "..";
}

static verb_result verb_fetch(const verb_env& env, const std::string& stem) {
    if (!plain_name(stem)) return {1, "artifact name escapes the sandbox: " + stem, "sandbox_escape"};
    const fs::path src_tgz = env.repo_root / (stem + ".tgz");
    const fs::path src_dig = env.repo_root / (stem + ".digest");
    if (!fs::exists(src_tgz) || !fs::exists(src_dig))
        return {1, "artifact " + stem + " not found in shared repository", "missing_artifact"};
    fs::copy_file(src_tgz, env.node->workdir / (stem + ".tgz"), fs::copy_options::overwrite_existing);
    fs::copy_file(src_dig, env.node->workdir / (stem + ".digest"),
                  fs::copy_options::overwrite_existing);
    // download is a copy plus digest check
    std::string hex;
    std::ifstream(env.node->workdir / (stem + ".digest")) >> hex;
    try {
        auto payload = gzip_decompress(read_file_bytes(env.node->workdir / (stem + ".tgz")));
        if (sha256(std::span<const std::uint8_t>(payload)) != digest32::from_hex(hex))
            return {1, "fetched artifact fails digest check: " + stem, "digest_mismatch"};
        return {0, "fetched " + stem + " (" + std::to_string(payload.size()) + " bytes)", ""};
    } catch (const std::exception& e) {
        return {1, std::string("fetched artifact unreadable: ") + e.what(), "digest_mismatch"};
    }
}

static verb_result verb_unpack(const verb_env& env, const std::string& stem) {
    if (!plain_name(stem)) return {1, "artifact name escapes the sandbox: " + stem, "sandbox_escape"};
    const fs::path tgz = env.node->workdir / (stem + ".tgz");
    if (!fs::exists(tgz)) return {1, "nothing to unpack: " + stem + ".tgz missing", "missing_artifact"};
    try {
        auto payload = gzip_decompress(read_file_bytes(tgz));
        write_file_bytes(env.node->workdir / (stem + ".src"), payload);
        return {0, "unpacked " + stem + " (" + std::to_string(payload.size()) + " bytes)", ""};
    } catch (const std::exception& e) {
        return {1, std::string("unpack failed: ") + e.what(), "corrupt_artifact"};
    }
}

static verb_result verb_sc_install(const verb_env& env, const std::string& name,
                                   const std::string& version) {
    if (!plain_name(name) || !plain_name(version))
        return {1, "contract name/version escapes the sandbox", "sandbox_escape"};
    const std::string stem = shared_repo::artifact_stem(name, version);
    if (env.node->installed.contains({name, version}))
        return {0, "already installed: " + name + " " + version, ""};
    const fs::path src = env.node->workdir / (stem + ".src");
    const fs::path dig = env.node->workdir / (stem + ".digest");
    if (!fs::exists(src) || !fs::exists(dig))
        return {1, "no unpacked payload for " + stem + " in workdir", "missing_payload"};
    std::string hex;
    std::ifstream(dig) >> hex;
    digest32 expect;
    try {
        expect = digest32::from_hex(hex);
    } catch (const std::exception&) {
        return {1, "unreadable digest file for " + stem, "digest_mismatch"};
    }
    digest32 actual = sha256(std::span<const std::uint8_t>(read_file_bytes(src)));
    if (actual != expect)
        return {1, "payload digest mismatch for " + stem, "digest_mismatch"};
    env.node->installed[{name, version}] = actual;
    env.node->save_registry();
    return {0, "installed " + name + " " + version, ""};
}

static verb_result verb_sc_list(const verb_env& env) {
    std::ostringstream os;
    for (const auto& [key, dig] : env.node->installed) // map: sorted by (name, version)
        os << key.first << ' ' << key.second << '\n';
    return {0, os.str(), ""};
}

static verb_result verb_exec(const verb_env& env, const engine::command_step& step) {
    if (step.args.empty()) return {1, "exec needs a payload file name", "bad_step"};
    const std::string& file = step.args[0];
    if (!plain_name(file)) return {1, "payload name escapes the sandbox: " + file, "sandbox_escape"};
    if (!env.payload || !env.payload->file_digests.contains(file))
        return {1, "payload file not pinned by policy: " + file, "unpinned_payload"};
    const fs::path p = fs::path(env.payload->dir) / file;
    std::vector<std::uint8_t> bytes;
    try {
        bytes = read_file_bytes(p);
    } catch (const std::exception&) {
        return {1, "payload file missing: " + p.string(), "missing_payload"};
    }
    digest32 actual = sha256(std::span<const std::uint8_t>(bytes));
    if (actual.hex() != env.payload->file_digests.at(file))
        return {1, "payload digest mismatch for " + file, "digest_mismatch"};
    // builtin mode attests the pinned program instead of spawning it
    std::string out = "exec " + file;
    for (size_t i = 1; i < step.args.size(); ++i) out += " " + step.args[i];
    out += " ok " + actual.hex();
    return {0, out, ""};
}

static verb_result verb_snapshot_copy(const verb_env& env, const std::string& src,
                                      const std::string& dst) {
    verb_result err;
    fs::path from = sandbox_path(env.node->workdir, src, err);
    if (from.empty()) return err;
    fs::path to = sandbox_path(env.node->workdir, dst, err);
    if (to.empty()) return err;
    if (!fs::exists(from)) return {1, "snapshot source missing: " + src, "missing_source"};
    fs::create_directories(to.parent_path());
    fs::copy_file(from, to, fs::copy_options::overwrite_existing);
    return {0, "copied " + src + " -> " + dst, ""};
}

bool is_builtin_verb(const std::string& verb) {
    static const std::set<std::string> verbs = {"clean",   "fetch",    "unpack",
                                                "sc-install", "sc-list", "exec",
                                                "snapshot-copy"};
    return verbs.contains(verb);
}

verb_result run_builtin_verb(const verb_env& env, const engine::command_step& step) {
    if (!env.node) return {1, "verb has no node context", "bad_step"};
    fs::create_directories(env.node->workdir);
    const auto& a = step.args;
    if (step.verb == "clean") return verb_clean(env);
    if (step.verb == "fetch")
        return a.size() == 1 ? verb_fetch(env, a[0]) : verb_result{1, "fetch <artifact>", "bad_step"};
    if (step.verb == "unpack")
        return a.size() == 1 ? verb_unpack(env, a[0]) : verb_result{1, "unpack <artifact>", "bad_step"};
    if (step.verb == "sc-install")
        return a.size() == 2 ? verb_sc_install(env, a[0], a[1])
                             : verb_result{1, "sc-install <name> <version>", "bad_step"};
    if (step.verb == "sc-list") return verb_sc_list(env);
    if (step.verb == "exec") return verb_exec(env, step);
    if (step.verb == "snapshot-copy")
        return a.size() == 2 ? verb_snapshot_copy(env, a[0], a[1])
                             : verb_result{1, "snapshot-copy <src> <dst>", "bad_step"};
    return {127, "unknown verb: " + step.verb, "unknown_verb"};
}

// ---------------------------------------------------------------- lifecycle

void install_lifecycle(net::network& net) {
    net.register_system_sc(lifecycle_sc_name, [](net::sc_context& ctx) {
        if (ctx.function() != "deploy")
            throw sc_exception({"no_such_function", ctx.function()});
        if (ctx.args().size() != 3) throw sc_exception({"bad_args", "deploy(name, version, orgs)"});
        const std::string& name = ctx.args()[0];
        const std::string& version = ctx.args()[1];
        std::vector<std::string> orgs;
        try {
            orgs = json::parse(ctx.args()[2]).get<std::vector<std::string>>();
        } catch (const std::exception& e) {
            throw sc_exception({"bad_args", std::string("orgs: ") + e.what()});
        }
        const std::string key = "sc/deployed/" + name;
        auto current = ctx.get_state(key);
        if (current && *current == version) throw sc_exception({"same_version", name + " " + version});
        // The install registry is node-local context, checked live at
        // endorsement/commit; replay trusts the historically committed tx.
        if (!ctx.replaying()) {
            for (const auto& org : orgs)
                for (const auto& node_id : ctx.topology().org_node_ids(org))
                    if (!ctx.topology().is_installed(node_id, name, version))
                        throw sc_exception({"not_installed_everywhere", org + "/" + node_id});
        }
        ctx.put_state(key, version);
        ctx.set_response("deployed " + name + " " + version);
    });
}

net::tx_result deploy_or_upgrade(net::network& net, const std::string& client_org,
                                 const std::string& sc_name, const std::string& version,
                                 const net::consensus_policy& policy) {
    json orgs = json::array();
    for (const auto& o : policy.required_orgs) orgs.push_back(o);
    return net.submit_tx(client_org, lifecycle_sc_name, "deploy",
                         {sc_name, version, orgs.dump()}, policy, ledger::tx_kind::deploy);
}

} // namespace opssc::catalog
