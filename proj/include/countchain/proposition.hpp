#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "countchain/types.hpp"

namespace countchain {

struct EventRecord {
    std::string input_id;
    SimTime timestamp;
};

struct PropositionRequest {
    PlayerId submitter_id;
    std::string input_id;
    SimTime timestamp;
    Digest digest;
};

enum class VoteValue { True, False };

struct Vote {
    PlayerId verifier_id;
    VoteValue value = VoteValue::False;
    std::optional<std::string> claimed_input_id;  // required for True
    SimTime received_at;
};

// How an accepted (or penalised) vote counts at resolution time.
enum class Tally { True, False, InvalidProof };

struct RecordedVote {
    Tally tally = Tally::False;
    StakeUnits escrowed = 0;
    SimTime received_at;
};

enum class PropositionStatus { Open, ResolvedTrue, ResolvedFalse };

// The host-side proposition. Only the digest of the event is kept; the raw
// input ID never enters this structure.
struct Proposition {
    PropId id;
    Digest digest{};
    SimTime t_a;
    SimTime t_b;
    SimTime deadline;
    PlayerId submitter_id;
    StakeUnits submitter_escrow = 0;
    std::vector<PlayerId> verifier_ids;
    std::map<PlayerId, RecordedVote> votes;
    PropositionStatus status = PropositionStatus::Open;

    SimTime midpoint() const { return t_a + (t_b - t_a) / 2; }
    bool is_verifier(PlayerId p) const;
};

struct Outcome {
    PropId prop_id;
    bool decided = false;
    int true_count = 0;
    int false_count = 0;  // explicit False, invalid proofs and silence
    bool tie_broken_by_submitter = false;
};

}  // namespace countchain
