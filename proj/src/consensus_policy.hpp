#pragma once

#include <cstdint>
#include <set>
#include <stdexcept>
#include <string>

namespace opssc::net {

// m-of-n endorsement requirement over a fixed org set.
struct consensus_policy {
    std::set<std::string> required_orgs;
    std::uint32_t quorum = 0;

    void validate() const {
        if (required_orgs.empty())
            throw std::invalid_argument("consensus policy requires a non-empty org set");
        if (quorum < 1 || quorum > required_orgs.size())
            throw std::invalid_argument("consensus quorum must satisfy 1 <= m <= |orgs|");
    }

    static consensus_policy all_of(std::set<std::string> orgs) {
        consensus_policy p;
        p.quorum = static_cast<std::uint32_t>(orgs.size());
        p.required_orgs = std::move(orgs);
        p.validate();
        return p;
    }
};

} // namespace opssc::net
