#include <doctest.h>

#include "support/test_network.hpp"

using namespace opssc;
using namespace opssc::net;
using testsupport::install_kv;
using testsupport::small_topology;
using testsupport::temp_dir;

namespace {

consensus_policy all_of_abc() {
    return consensus_policy::all_of({"org1", "org2", "org3"});
}

consensus_policy two_of_three() {
    consensus_policy p;
    p.required_orgs = {"org1", "org2", "org3"};
    p.quorum = 2;
    return p;
}

} // namespace

TEST_CASE("validate_endorsements counts distinct orgs with equal digests") {
    digest32 d1 = sha256(std::string_view("rw1"));
    digest32 d2 = sha256(std::string_view("rw2"));

    CHECK(network::validate_endorsements(all_of_abc(),
                                         {{"org1", d1}, {"org2", d1}, {"org3", d1}}));
    CHECK_FALSE(network::validate_endorsements(all_of_abc(), {{"org1", d1}, {"org2", d1}}));
    CHECK(network::validate_endorsements(two_of_three(), {{"org1", d1}, {"org3", d1}}));
    // duplicate endorsements from the same org count once
    CHECK_FALSE(network::validate_endorsements(two_of_three(), {{"org1", d1}, {"org1", d1}}));
    // divergent digests never combine
    CHECK_FALSE(network::validate_endorsements(two_of_three(), {{"org1", d1}, {"org2", d2}}));
    // an org outside the required set does not help
    CHECK_FALSE(network::validate_endorsements(two_of_three(), {{"org1", d1}, {"org9", d1}}));
}

TEST_CASE("consensus policy invariants") {
    consensus_policy p;
    p.quorum = 1;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument); // empty org set
    p.required_orgs = {"a", "b"};
    p.quorum = 0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p.quorum = 3;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p.quorum = 2;
    CHECK_NOTHROW(p.validate());
}

TEST_CASE("submit_tx commits when every required org endorses identically") {
    temp_dir tmp("net");
    network net(small_topology(tmp.path));
    install_kv(net);

    auto res = net.submit_tx("org1", "kv", "put", {"greeting", "hello"}, all_of_abc());
    REQUIRE(res.committed);
    CHECK(res.block_index == 1);
    CHECK(res.response == "ok");
    for (const auto& replica : net.replicas())
        CHECK(replica.state().get("greeting") == "hello");
    CHECK(net.verify_all());
}

TEST_CASE("all-of policy rejects when one org is offline; 2-of-3 tolerates it") {
    temp_dir tmp("net");
    network net(small_topology(tmp.path));
    install_kv(net);
    net.set_org_offline("org3", true);

    auto rejected = net.submit_tx("org1", "kv", "put", {"k", "v"}, all_of_abc());
    CHECK_FALSE(rejected.committed);
    CHECK(rejected.reject_reason == "endorsement_policy");

    auto committed = net.submit_tx("org1", "kv", "put", {"k", "v"}, two_of_three());
    CHECK(committed.committed);
}

TEST_CASE("rejected txs leave every replica state-equal to the snapshot") {
    temp_dir tmp("net");
    network net(small_topology(tmp.path));
    install_kv(net);
    net.submit_tx("org1", "kv", "put", {"k", "v0"}, all_of_abc());

    std::vector<std::vector<std::uint8_t>> before;
    for (const auto& r : net.replicas()) before.push_back(r.state().canonical_bytes());
    const size_t chain_len = net.replicas().front().chain().size();

    net.set_org_offline("org2", true);
    auto res = net.submit_tx("org1", "kv", "put", {"k", "v1"}, all_of_abc());
    CHECK_FALSE(res.committed);

    for (size_t i = 0; i < net.replicas().size(); ++i) {
        CHECK(net.replicas()[i].state().canonical_bytes() == before[i]);
        CHECK(net.replicas()[i].chain().size() == chain_len);
    }
}

TEST_CASE("unknown contract and throwing contract surface distinct rejections") {
    temp_dir tmp("net");
    network net(small_topology(tmp.path));
    install_kv(net);

    auto unknown = net.submit_tx("org1", "ghostcc", "fn", {}, all_of_abc());
    CHECK_FALSE(unknown.committed);
    CHECK(unknown.reject_reason == "no_such_sc");

    auto thrown = net.submit_tx("org1", "kv", "boom", {}, all_of_abc());
    CHECK_FALSE(thrown.committed);
    CHECK(thrown.reject_reason == "sc_execution_error");
}

TEST_CASE("endorsement is deterministic for a fixed snapshot") {
    temp_dir tmp("net");
    network net(small_topology(tmp.path));
    install_kv(net);

    ledger::signed_transaction tx;
    tx.sc_name = "kv";
    tx.function = "put";
    tx.args = {"a", "b"};
    tx.proposer_org = "org1";
    tx.logical_time = 42;
    tx.seal();

    auto e1 = net.endorse("org1-peer0", tx);
    auto e2 = net.endorse("org2-peer0", tx);
    REQUIRE(e1.ok);
    REQUIRE(e2.ok);
    CHECK(e1.ok->rw_digest == e2.ok->rw_digest); // same snapshot, same args
    CHECK(e1.ok->org_id == "org1");

    auto refusal = net.endorse("org1-peer1", tx); // committer only
    CHECK_FALSE(refusal.ok);
    CHECK(refusal.refusal->code == "not_an_endorser");
}

TEST_CASE("divergent endorsements are rejected as non-deterministic") {
    temp_dir tmp("net");
    network net(small_topology(tmp.path));
    install_kv(net);

    auto res = net.submit_tx("org1", "kv", "nondet", {}, all_of_abc());
    CHECK_FALSE(res.committed);
    CHECK(res.reject_reason == "non_deterministic");
}

TEST_CASE("ordering cuts FIFO blocks at the configured size") {
    temp_dir tmp("net");
    auto topo = small_topology(tmp.path);
    topo.max_txs_per_block = 2;
    network net(std::move(topo));
    install_kv(net);

    auto bundle = [&](int i) {
        auto q = net.enqueue_tx("org1", "kv", "put", {"k" + std::to_string(i), "v"}, all_of_abc());
        REQUIRE(q.accepted);
    };

    SUBCASE("3 txs, max 2 per block -> sizes [2, 1]") {
        std::vector<pending_tx> staged;
        for (int i = 0; i < 3; ++i) {
            ledger::signed_transaction tx;
            tx.sc_name = "kv";
            tx.function = "put";
            tx.args = {"s" + std::to_string(i), "v"};
            tx.proposer_org = "org1";
            tx.logical_time = 100 + static_cast<std::uint64_t>(i);
            tx.endorsements["org1"] = sha256(std::string_view("e"));
            tx.seal();
            staged.push_back(pending_tx{tx, ""});
        }
        auto blocks = net.order_and_commit(std::move(staged));
        REQUIRE(blocks.size() == 2);
        CHECK(blocks[0].txs.size() == 2);
        CHECK(blocks[1].txs.size() == 1);
        CHECK(blocks[1].prev_hash == blocks[0].block_hash);
    }
    SUBCASE("no pending txs -> no blocks") {
        CHECK(net.order_and_commit({}).empty());
    }
    SUBCASE("queued submissions batch the same way") {
        bundle(0);
        bundle(1);
        bundle(2);
        net.run_until_quiescent();
        const auto& chain = net.replicas().front().chain();
        REQUIRE(chain.size() == 3); // genesis + [2] + [1]
        CHECK(chain[1].txs.size() == 2);
        CHECK(chain[2].txs.size() == 1);
    }
}

TEST_CASE("an identical schedule replays to identical block boundaries and bytes") {
    auto run_once = [](const std::filesystem::path& root) {
        auto topo = small_topology(root);
        topo.max_txs_per_block = 2;
        network net(std::move(topo));
        install_kv(net);
        for (int i = 0; i < 5; ++i)
            net.enqueue_tx("org1", "kv", "put", {"k" + std::to_string(i), "v"},
                           consensus_policy::all_of({"org1", "org2", "org3"}));
        net.run_until_quiescent();
        return net.dump_chain();
    };
    temp_dir t1("netA"), t2("netB");
    CHECK(run_once(t1.path) == run_once(t2.path));
}

TEST_CASE("queries read committed state without mutating anything") {
    temp_dir tmp("net");
    network net(small_topology(tmp.path));
    install_kv(net);
    net.submit_tx("org1", "kv", "put", {"color", "teal"}, all_of_abc());

    auto before = net.replicas().front().state().canonical_bytes();
    CHECK(net.query("kv", "get", {"color"}) == "teal");
    CHECK(net.query("kv", "get", {"missing"}) == "");
    CHECK(net.replicas().front().state().canonical_bytes() == before);

    // a contract that writes during a query is an error
    CHECK_THROWS_AS(net.query("kv", "put", {"x", "y"}), sc_exception);
}

TEST_CASE("restore_chain rebuilds replicas by re-execution") {
    temp_dir tmp("net");
    auto build = [&] {
        network net(small_topology(tmp.path));
        install_kv(net);
        net.submit_tx("org1", "kv", "put", {"a", "1"}, all_of_abc());
        net.submit_tx("org2", "kv", "put", {"b", "2"}, all_of_abc());
        return net.dump_chain();
    };
    auto dump = build();

    network restored(small_topology(tmp.path));
    install_kv(restored);
    restored.restore_chain(dump);
    CHECK(restored.verify_all());
    CHECK(restored.committed_state().get("a") == "1");
    CHECK(restored.committed_state().get("b") == "2");
    CHECK(restored.dump_chain() == dump); // canonical round trip

    // a fresh tx continues the chain after restore
    auto res = restored.submit_tx("org3", "kv", "put", {"c", "3"}, all_of_abc());
    CHECK(res.committed);
}

TEST_CASE("topology validation rejects broken configs") {
    temp_dir tmp("net");

    SUBCASE("no orderer") {
        auto topo = small_topology(tmp.path);
        for (auto& n : topo.nodes) n.roles.erase(node_role::orderer);
        CHECK_THROWS_WITH_AS(network{std::move(topo)},
                             doctest::Contains("orderer"), std::invalid_argument);
    }
    SUBCASE("duplicate node ids") {
        auto topo = small_topology(tmp.path);
        topo.nodes[1].node_id = topo.nodes[0].node_id;
        CHECK_THROWS_AS(network{std::move(topo)}, std::invalid_argument);
    }
    SUBCASE("policy referencing an unknown org") {
        auto topo = small_topology(tmp.path);
        topo.default_policy.required_orgs.insert("org99");
        topo.default_policy.quorum = 1;
        CHECK_THROWS_AS(network{std::move(topo)}, std::invalid_argument);
    }
}
