#pragma once

#include <string>
#include <vector>

#include "countchain/hash.hpp"
#include "countchain/protocol.hpp"

namespace countchain::testing {

inline SystemConfig small_config(int nodes, int verifiers, std::uint64_t seed = 1) {
    SystemConfig cfg;
    cfg.total_nodes = nodes;
    cfg.num_verifiers = verifiers;
    cfg.rng_seed = seed;
    return cfg;
}

inline Host make_host(const SystemConfig& cfg, StakeUnits stake = 100) {
    Host host(cfg);
    for (int i = 0; i < cfg.total_nodes; ++i) host.register_player(PlayerId{static_cast<std::uint32_t>(i)}, stake);
    return host;
}

inline PropositionRequest request_for(PlayerId submitter, const std::string& input_id, SimTime ts) {
    return {submitter, input_id, ts, hash_input_id(input_id)};
}

inline Vote true_vote(PlayerId v, const std::string& preimage, SimTime at) {
    return {v, VoteValue::True, preimage, at};
}

inline Vote false_vote(PlayerId v, SimTime at) { return {v, VoteValue::False, std::nullopt, at}; }

}  // namespace countchain::testing
