#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "countchain/protocol.hpp"
#include "test_support.hpp"

using namespace countchain;
using namespace countchain::testing;
using namespace std::chrono_literals;

namespace {

PlayerId pid(std::uint32_t v) { return PlayerId{v}; }

// Host with 15 players, n = 14: every non-submitter is a verifier.
struct FullCommittee {
    FullCommittee() : host(make_host(small_config(15, 14, 7))) {
        auto res = host.submit_request(request_for(pid(0), "ev-1", at_seconds(10)), at_seconds(10));
        EXPECT_TRUE(res.accepted());
        id = *res.prop_id;
    }
    const Proposition& prop() const { return host.proposition(id); }
    void vote_true(int count) {
        for (int i = 0; i < count; ++i)
            EXPECT_EQ(host.cast_vote(id, true_vote(prop().verifier_ids[i], "ev-1", at_seconds(10.5)), at_seconds(10.5)),
                      VoteStatus::Accepted);
    }
    void vote_false(int from, int count) {
        for (int i = from; i < from + count; ++i)
            EXPECT_EQ(host.cast_vote(id, false_vote(prop().verifier_ids[i], at_seconds(10.5)), at_seconds(10.5)),
                      VoteStatus::Accepted);
    }
    Host host;
    PropId id;
};

}  // namespace

TEST(CreateProposition, WindowCentredOnTimestamp) {
    SystemConfig cfg;
    const auto req = request_for(pid(1), "x", at_seconds(100));
    const auto p = create_proposition(req, cfg, at_seconds(100), PropId{1});
    EXPECT_EQ(p.t_a, at_seconds(99));
    EXPECT_EQ(p.t_b, at_seconds(101));
    EXPECT_EQ(p.midpoint(), at_seconds(100));
    EXPECT_EQ(p.deadline, at_seconds(102));
    EXPECT_EQ(p.digest, hash_input_id("x"));
    EXPECT_EQ(p.status, PropositionStatus::Open);
}

TEST(CreateProposition, HalfSecondWindow) {
    SystemConfig cfg;
    cfg.window_half_width = 500ms;
    const auto p = create_proposition(request_for(pid(1), "x", at_seconds(7.25)), cfg, at_seconds(8), PropId{1});
    EXPECT_EQ(p.t_a, at_seconds(6.75));
    EXPECT_EQ(p.t_b, at_seconds(7.75));
}

TEST(AssignVerifiers, FourteenDistinctFromTwoHundred) {
    std::vector<PlayerId> active;
    for (std::uint32_t i = 0; i < 200; ++i) active.push_back(pid(i));
    Rng rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        const auto v = assign_verifiers(active, pid(17), 14, rng);
        ASSERT_EQ(v.size(), 14u);
        std::set<PlayerId> uniq(v.begin(), v.end());
        EXPECT_EQ(uniq.size(), 14u);
        EXPECT_FALSE(uniq.contains(pid(17)));
    }
}

TEST(AssignVerifiers, ForcedSelection) {
    const std::vector<PlayerId> active{pid(1), pid(2)};
    Rng rng(0);
    EXPECT_EQ(assign_verifiers(active, pid(1), 1, rng), std::vector<PlayerId>{pid(2)});
}

TEST(AssignVerifiers, ThrowsWhenTooFewCandidates) {
    const std::vector<PlayerId> active{pid(1), pid(2), pid(3)};
    Rng rng(0);
    EXPECT_THROW(assign_verifiers(active, pid(1), 3, rng), CountChainError);
}

TEST(AssignVerifiers, SameRngStateSameSelection) {
    std::vector<PlayerId> active;
    for (std::uint32_t i = 0; i < 50; ++i) active.push_back(pid(i));
    Rng a(11), b(11);
    EXPECT_EQ(assign_verifiers(active, pid(0), 10, a), assign_verifiers(active, pid(0), 10, b));
}

// Each of the 199 candidates should be picked 1e5 * 14/199 times; chi-square
// against that flat expectation. The counts are slightly negatively correlated
// (fixed total), which only shrinks the statistic.
TEST(AssignVerifiers, SelectionFrequencyUniform) {
    std::vector<PlayerId> active;
    for (std::uint32_t i = 0; i < 200; ++i) active.push_back(pid(i));
    Rng rng(123456);
    std::vector<long> hits(200, 0);
    const int draws = 100'000;
    for (int i = 0; i < draws; ++i)
        for (PlayerId p : assign_verifiers(active, pid(0), 14, rng)) ++hits[p.value];
    EXPECT_EQ(hits[0], 0);
    const double expected = draws * 14.0 / 199.0;
    double chi2 = 0;
    for (std::uint32_t i = 1; i < 200; ++i) chi2 += std::pow(hits[i] - expected, 2) / expected;
    const double df = 198;
    EXPECT_LT(chi2, df + 3 * std::sqrt(2 * df));
}

TEST(SubmitRequest, AcceptsFreshEventAndEscrowsPrice) {
    Host host = make_host(small_config(20, 5));
    const auto res = host.submit_request(request_for(pid(3), "ad-1", at_seconds(1)), at_seconds(1));
    ASSERT_TRUE(res.accepted());
    EXPECT_EQ(host.propositions().size(), 1u);
    EXPECT_EQ(host.ledger().account(pid(3)).stake_balance, 99);
    EXPECT_EQ(host.ledger().account(pid(3)).escrowed, 1);
    const auto& p = host.proposition(*res.prop_id);
    EXPECT_EQ(p.verifier_ids.size(), 5u);
    EXPECT_FALSE(p.is_verifier(pid(3)));
}

TEST(SubmitRequest, InvalidDigestPenalised) {
    Host host = make_host(small_config(20, 5));
    auto req = request_for(pid(3), "ad-1", at_seconds(1));
    req.digest = hash_input_id("something else");
    const auto res = host.submit_request(req, at_seconds(1));
    EXPECT_EQ(res.status, SubmitStatus::InvalidDigest);
    EXPECT_TRUE(host.propositions().empty());
    const auto& acct = host.ledger().account(pid(3));
    EXPECT_EQ(acct.points, -2);
    EXPECT_EQ(acct.stake_balance, 99);
    EXPECT_EQ(acct.escrowed, 0);
    EXPECT_EQ(host.ledger().pool().balance, 1);
}

TEST(SubmitRequest, DuplicateRefunded) {
    Host host = make_host(small_config(20, 5));
    ASSERT_TRUE(host.submit_request(request_for(pid(3), "ad-1", at_seconds(1)), at_seconds(1)).accepted());
    const auto dup = host.submit_request(request_for(pid(4), "ad-1", at_seconds(1.2)), at_seconds(1.2));
    EXPECT_EQ(dup.status, SubmitStatus::Duplicate);
    EXPECT_EQ(host.propositions().size(), 1u);
    EXPECT_EQ(host.ledger().account(pid(4)).stake_balance, 100);
    EXPECT_EQ(host.ledger().account(pid(4)).points, 0);
}

TEST(SubmitRequest, SameDigestOutsideWindowIsNotDuplicate) {
    Host host = make_host(small_config(20, 5));
    ASSERT_TRUE(host.submit_request(request_for(pid(3), "ad-1", at_seconds(1)), at_seconds(1)).accepted());
    host.resolve_all();
    EXPECT_TRUE(host.submit_request(request_for(pid(4), "ad-1", at_seconds(3.5)), at_seconds(3.5)).accepted());
}

TEST(SubmitRequest, DuplicateAgainstResolvedProposition) {
    Host host = make_host(small_config(20, 5));
    ASSERT_TRUE(host.submit_request(request_for(pid(3), "ad-1", at_seconds(1)), at_seconds(1)).accepted());
    host.resolve_all();
    EXPECT_EQ(host.submit_request(request_for(pid(4), "ad-1", at_seconds(2.5)), at_seconds(4)).status,
              SubmitStatus::Duplicate);
}

TEST(SubmitRequest, BannedAndInsufficientStake) {
    auto cfg = small_config(20, 5);
    cfg.ban_threshold = -2;
    Host host(cfg);
    for (std::uint32_t i = 0; i < 20; ++i) host.register_player(pid(i), i == 9 ? 0 : 100);
    EXPECT_EQ(host.submit_request(request_for(pid(9), "a", at_seconds(1)), at_seconds(1)).status,
              SubmitStatus::InsufficientStake);

    auto bad = request_for(pid(3), "b", at_seconds(1));
    bad.digest = hash_input_id("c");
    EXPECT_EQ(host.submit_request(bad, at_seconds(1)).status, SubmitStatus::InvalidDigest);
    EXPECT_FALSE(host.is_active(pid(3)));
    EXPECT_EQ(host.submit_request(request_for(pid(3), "d", at_seconds(1)), at_seconds(1)).status,
              SubmitStatus::BannedSubmitter);
}

TEST(SubmitRequest, InsufficientActivePlayers) {
    auto cfg = small_config(6, 5);
    cfg.ban_threshold = -2;
    Host host(cfg);
    for (std::uint32_t i = 0; i < 6; ++i) host.register_player(pid(i), 10);
    EXPECT_TRUE(host.submit_request(request_for(pid(0), "w", at_seconds(1)), at_seconds(1)).accepted());

    // Banning one player leaves four candidates for a committee of five.
    auto bad = request_for(pid(5), "x", at_seconds(1));
    bad.digest = hash_input_id("y");
    host.submit_request(bad, at_seconds(1));
    const auto res = host.submit_request(request_for(pid(0), "z", at_seconds(1)), at_seconds(1));
    EXPECT_EQ(res.status, SubmitStatus::InsufficientActivePlayers);
    EXPECT_EQ(host.ledger().account(pid(0)).stake_balance, 9);
    EXPECT_EQ(host.ledger().account(pid(0)).escrowed, 1);
}

TEST(CastVote, StatusCodes) {
    FullCommittee fc;
    const PlayerId v0 = fc.prop().verifier_ids[0];
    const PlayerId v1 = fc.prop().verifier_ids[1];
    const PlayerId v2 = fc.prop().verifier_ids[2];
    EXPECT_EQ(fc.host.cast_vote(fc.id, true_vote(v0, "ev-1", at_seconds(11)), at_seconds(11)), VoteStatus::Accepted);
    EXPECT_EQ(fc.host.cast_vote(fc.id, false_vote(v0, at_seconds(11)), at_seconds(11)), VoteStatus::AlreadyVoted);
    EXPECT_EQ(fc.host.cast_vote(fc.id, false_vote(pid(0), at_seconds(11)), at_seconds(11)), VoteStatus::NotAssigned);
    EXPECT_EQ(fc.host.cast_vote(fc.id, false_vote(v1, at_seconds(12)), at_seconds(12)), VoteStatus::Accepted);
    EXPECT_EQ(fc.host.cast_vote(fc.id, false_vote(v2, at_seconds(12.1)), at_seconds(12.1)), VoteStatus::Late);
    fc.host.resolve_all();
    EXPECT_EQ(fc.host.cast_vote(fc.id, false_vote(v2, at_seconds(11)), at_seconds(11)),
              VoteStatus::ClosedProposition);
}

TEST(CastVote, WrongPreimageIsInvalidProof) {
    FullCommittee fc;
    const PlayerId v = fc.prop().verifier_ids[0];
    EXPECT_EQ(fc.host.cast_vote(fc.id, true_vote(v, "ev-2", at_seconds(11)), at_seconds(11)), VoteStatus::InvalidProof);
    EXPECT_EQ(fc.host.ledger().account(v).points, -2);
    EXPECT_EQ(fc.host.ledger().account(v).stake_balance, 99);
    EXPECT_EQ(fc.host.ledger().account(v).escrowed, 0);
    EXPECT_EQ(fc.host.ledger().pool().balance, 1);
    const Vote no_proof{fc.prop().verifier_ids[1], VoteValue::True, std::nullopt, at_seconds(11)};
    EXPECT_EQ(fc.host.cast_vote(fc.id, no_proof, at_seconds(11)), VoteStatus::InvalidProof);

    for (int i = 2; i < 14; ++i)
        fc.host.cast_vote(fc.id, true_vote(fc.prop().verifier_ids[i], "ev-1", at_seconds(11)), at_seconds(11));
    const auto out = fc.host.resolve_proposition(fc.id, at_seconds(12));
    EXPECT_EQ(out.true_count, 12);
    EXPECT_EQ(out.false_count, 2);
    // Already charged at vote time; nothing more at resolution.
    EXPECT_EQ(fc.host.ledger().account(v).points, -2);
}

TEST(CastVote, InsufficientStake) {
    auto cfg = small_config(3, 2);
    Host host(cfg);
    host.register_player(pid(0), 5);
    host.register_player(pid(1), 0);
    host.register_player(pid(2), 5);
    const auto res = host.submit_request(request_for(pid(0), "e", at_seconds(1)), at_seconds(1));
    ASSERT_TRUE(res.accepted());
    EXPECT_EQ(host.cast_vote(*res.prop_id, false_vote(pid(1), at_seconds(1)), at_seconds(1)),
              VoteStatus::InsufficientStake);
}

TEST(ResolveProposition, StrictMajorityTrue) {
    FullCommittee fc;
    fc.vote_true(8);
    fc.vote_false(8, 6);
    const auto out = fc.host.resolve_proposition(fc.id, at_seconds(12));
    EXPECT_TRUE(out.decided);
    EXPECT_FALSE(out.tie_broken_by_submitter);
    EXPECT_EQ(out.true_count + out.false_count, 14);
    EXPECT_EQ(fc.host.counter(), 1u);
    EXPECT_EQ(fc.prop().status, PropositionStatus::ResolvedTrue);
}

TEST(ResolveProposition, TieGoesTrue) {
    FullCommittee fc;
    fc.vote_true(7);
    fc.vote_false(7, 7);
    const auto out = fc.host.resolve_proposition(fc.id, at_seconds(12));
    EXPECT_TRUE(out.decided);
    EXPECT_TRUE(out.tie_broken_by_submitter);
    EXPECT_EQ(fc.host.counter(), 1u);
}

TEST(ResolveProposition, SilenceCountsFalse) {
    FullCommittee fc;
    fc.vote_true(6);
    fc.vote_false(6, 5);
    const auto out = fc.host.resolve_proposition(fc.id, at_seconds(12));
    EXPECT_EQ(out.true_count, 6);
    EXPECT_EQ(out.false_count, 8);
    EXPECT_FALSE(out.decided);
    EXPECT_EQ(fc.prop().status, PropositionStatus::ResolvedFalse);
    EXPECT_EQ(fc.host.counter(), 0u);
}

TEST(ResolveProposition, Errors) {
    FullCommittee fc;
    EXPECT_THROW(fc.host.resolve_proposition(fc.id, at_seconds(11.9)), CountChainError);
    fc.host.resolve_proposition(fc.id, at_seconds(12));
    EXPECT_THROW(fc.host.resolve_proposition(fc.id, at_seconds(13)), CountChainError);
    EXPECT_THROW(fc.host.resolve_proposition(PropId{99}, at_seconds(13)), CountChainError);
}

TEST(ResolveDue, ResolvesOnlyExpiredInDeadlineOrder) {
    Host host = make_host(small_config(20, 3));
    host.submit_request(request_for(pid(0), "a", at_seconds(1)), at_seconds(1));
    host.submit_request(request_for(pid(1), "b", at_seconds(5)), at_seconds(2));
    host.submit_request(request_for(pid(2), "c", at_seconds(9)), at_seconds(9));
    const auto outs = host.resolve_due(at_seconds(4));
    ASSERT_EQ(outs.size(), 2u);
    EXPECT_EQ(outs[0].prop_id, PropId{1});
    EXPECT_EQ(outs[1].prop_id, PropId{2});
    EXPECT_EQ(host.open_count(), 1u);
}

TEST(Host, BannedPlayersNeverAssigned) {
    auto cfg = small_config(10, 3);
    cfg.ban_threshold = -2;
    Host host(cfg);
    for (std::uint32_t i = 0; i < 10; ++i) host.register_player(pid(i), 100);
    auto bad = request_for(pid(4), "x", at_seconds(1));
    bad.digest = hash_input_id("y");
    host.submit_request(bad, at_seconds(1));
    for (int i = 0; i < 200; ++i) {
        const auto res = host.submit_request(
            request_for(pid(i % 3), "ev" + std::to_string(i), at_seconds(10.0 * i)), at_seconds(10.0 * i));
        ASSERT_TRUE(res.accepted());
        EXPECT_FALSE(host.proposition(*res.prop_id).is_verifier(pid(4)));
    }
}

TEST(Host, RejectsBadConfig) {
    EXPECT_THROW(Host(small_config(100, 200)), CountChainError);
    auto cfg = small_config(10, 3);
    cfg.proposition_deadline = 0s;
    EXPECT_THROW(Host{cfg}, CountChainError);
}

namespace {

// Random command stream; checks the protocol invariants after every step and
// returns a digest of the final state for replay comparison.
std::string drive_random(std::uint64_t seed) {
    auto cfg = small_config(30, 6, seed);
    cfg.ban_threshold = -6;
    Host host(cfg);
    for (std::uint32_t i = 0; i < 30; ++i) host.register_player(pid(i), 50);
    Rng rng(seed);
    SimTime now = at_seconds(0);
    std::vector<std::string> seen;
    for (int step = 0; step < 3000; ++step) {
        now += SimDuration{static_cast<std::int64_t>(rng.uniform_index(400'000))};
        host.resolve_due(now);
        const auto op = rng.uniform_index(10);
        if (op < 3) {
            std::string input = "in" + std::to_string(rng.uniform_index(40));
            auto req = request_for(pid(static_cast<std::uint32_t>(rng.uniform_index(30))), input, now);
            if (rng.bernoulli(0.05)) req.digest = hash_input_id(input + "!");
            if (host.is_active(req.submitter_id) || rng.bernoulli(0.2)) host.submit_request(req, now);
            seen.push_back(input);
        } else if (!host.propositions().empty()) {
            const PropId id{1 + rng.uniform_index(host.propositions().size())};
            const auto& p = host.proposition(id);
            const PlayerId voter = rng.bernoulli(0.9) && !p.verifier_ids.empty()
                                       ? p.verifier_ids[rng.uniform_index(p.verifier_ids.size())]
                                       : pid(static_cast<std::uint32_t>(rng.uniform_index(30)));
            Vote v{voter, VoteValue::False, std::nullopt, now};
            if (rng.bernoulli(0.6) && !seen.empty()) {
                v.value = VoteValue::True;
                v.claimed_input_id = seen[rng.uniform_index(seen.size())];
            }
            host.cast_vote(id, v, now);
        }

        std::uint64_t resolved_true = 0;
        for (const auto& p : host.propositions()) {
            if (p.status == PropositionStatus::ResolvedTrue) ++resolved_true;
            EXPECT_FALSE(p.is_verifier(p.submitter_id));
            std::set<PlayerId> uniq(p.verifier_ids.begin(), p.verifier_ids.end());
            EXPECT_EQ(uniq.size(), p.verifier_ids.size());
        }
        EXPECT_EQ(host.counter(), resolved_true);
        EXPECT_TRUE(host.ledger().stake_conserved());
    }
    host.resolve_all();
    for (const auto& p : host.propositions()) {
        for (const auto& [voter, rec] : p.votes) EXPECT_TRUE(p.is_verifier(voter));
    }
    std::ostringstream os;
    host.ledger().write_csv(os);
    os << host.counter() << ' ' << host.ledger().pool().balance << '\n';
    for (const auto& p : host.propositions()) {
        os << p.id.value << ':' << static_cast<int>(p.status);
        for (PlayerId v : p.verifier_ids) os << ',' << v.value;
        os << '\n';
    }
    return os.str();
}

}  // namespace

TEST(HostProperty, RandomCommandsKeepInvariantsAndReplayExactly) {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const std::string first = drive_random(seed);
        EXPECT_EQ(first, drive_random(seed));
    }
}
