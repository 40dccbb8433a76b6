#include "cbb84/protocol.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

using namespace cbb84;

namespace {

std::shared_ptr<const CssPair> steane() {
    static const auto pair = std::make_shared<const CssPair>(make_steane_pair());
    return pair;
}

ProtocolConfig config_for(std::shared_ptr<const CssPair> p1, std::shared_ptr<const CssPair> p2,
                          std::uint64_t seed) {
    ProtocolConfig c;
    c.stage1_pair = std::move(p1);
    c.stage2_pair = std::move(p2);
    c.seed = seed;
    return c;
}

// Check positions and stage-1 blocks partition the selected code-or-check set,
// and every masked word has its block length.
void check_structure(const ProtocolConfig& config, const Transcript& t) {
    REQUIRE(t.check_positions);
    REQUIRE(t.kept_positions);
    const std::set<std::size_t> kept(t.kept_positions->begin(), t.kept_positions->end());
    std::set<std::size_t> seen(t.check_positions->begin(), t.check_positions->end());
    CHECK(seen.size() == config.check_count());
    std::size_t total = seen.size();
    for (const auto* b : t.stage_blocks(1)) {
        CHECK(b->masked_word.size() == config.n1());
        for (auto p : b->positions) {
            CHECK(kept.count(p) == 1);
            seen.insert(p);
            ++total;
        }
    }
    CHECK(seen.size() == total);
    CHECK(total == 2 * config.check_count());
    std::set<std::size_t> stage1_indices;
    for (const auto* b : t.stage_blocks(2)) {
        CHECK(b->masked_word.size() == config.n2());
        stage1_indices.insert(b->positions.begin(), b->positions.end());
    }
    CHECK(stage1_indices.size() == config.key_width1() * config.n2());
}

// A [7,3,4] over [7,1] pair: not perfect, so the decoder can fail.
std::shared_ptr<const CssPair> simplex_pair() {
    const auto c1 = make_hamming_7_4_dual();
    const auto c2 = LinearCode::from_generator(4, BitMatrix::from_rows({c1.generator().row(0)}));
    return std::make_shared<const CssPair>(c1, c2, "simplex");
}

}  // namespace

TEST_CASE("configuration") {
    const auto c = steane_config(0);
    CHECK(c.check_count() == 49);
    CHECK(c.qubit_count() == 215);  // floor(4 * 49 * 1.1)
    CHECK(c.final_key_length() == 1);
    auto bad = c;
    bad.delta = 0.0;
    CHECK_THROWS_AS(validate(bad), std::invalid_argument);
    bad = c;
    bad.abort_threshold = 1.5;
    CHECK_THROWS_AS(validate(bad), std::invalid_argument);
    bad = c;
    bad.stage2_pair.reset();
    CHECK_THROWS_AS(validate(bad), std::invalid_argument);
    auto golay = config_for(std::make_shared<const CssPair>(make_golay_pair()), steane(), 0);
    CHECK(golay.qubit_count() == 708);
}

TEST_CASE("alice_prepare") {
    const auto config = steane_config(0);
    Rng rng(1);
    std::size_t ones = 0, total = 0;
    while (total < 100000) {
        const auto prep = alice_prepare(config, rng);
        CHECK(prep.qubits.size() == 215);
        for (std::size_t i = 0; i < prep.qubits.size(); ++i) {
            CHECK(prep.qubits[i].prep_basis == basis_from_bit(prep.state.bases.get(i)));
            CHECK(prep.qubits[i].prep_bit == prep.state.bits.get(i));
            CHECK_FALSE(prep.qubits[i].flipped_in_prep_basis);
        }
        ones += prep.state.bits.weight();
        total += prep.qubits.size();
    }
    const double freq = static_cast<double>(ones) / static_cast<double>(total);
    CHECK(std::abs(freq - 0.5) <= 3 * std::sqrt(0.25 / static_cast<double>(total)));
}

TEST_CASE("sift") {
    const auto config = steane_config(0);
    Rng rng(2);
    const auto prep = alice_prepare(config, rng);
    Transcript t;

    CHECK_THROWS_AS(sift(prep.state, prep.state.bases, config, t, rng), ProtocolDesyncError);
    t.basis_string = prep.state.bases;

    SUBCASE("equal bases keep everything") {
        const auto sel = sift(prep.state, prep.state.bases, config, t, rng);
        REQUIRE(sel);
        CHECK(sel->kept.size() == 215);
        CHECK(sel->check_positions.size() == 49);
        CHECK(sel->code_positions.size() == 49);
        CHECK(t.kept_positions->size() == 215);
    }
    SUBCASE("opposite bases keep nothing") {
        BitVector opposite = prep.state.bases;
        for (std::size_t i = 0; i < opposite.size(); ++i) opposite.flip(i);
        CHECK_FALSE(sift(prep.state, opposite, config, t, rng));
        CHECK(t.kept_positions->empty());
        CHECK_FALSE(t.check_positions);
    }
    SUBCASE("kept count is half the transmission on average") {
        const std::size_t trials = 10000;
        double sum = 0;
        for (std::size_t i = 0; i < trials; ++i) {
            const auto p = alice_prepare(config, rng);
            const auto bob = bob_measure(p.qubits, rng);
            sum += static_cast<double>(matching_positions(p.state.bases, bob.bases).size());
        }
        const double mean = sum / trials;
        CHECK(std::abs(mean - 107.5) <= 3 * std::sqrt(215 * 0.25 / trials));
    }
}

TEST_CASE("check_and_decide") {
    const auto config = steane_config(0);
    const auto a = BitVector::from_string("0110100111");
    auto d = check_and_decide(a, a, config);
    CHECK(d.error_rate == 0.0);
    CHECK_FALSE(d.abort);
    BitVector comp = a;
    for (std::size_t i = 0; i < comp.size(); ++i) comp.flip(i);
    d = check_and_decide(a, comp, config);
    CHECK(d.error_rate == 1.0);
    CHECK(d.abort);

    BitVector x(49), y(49);
    for (std::size_t i = 0; i < 7; ++i) y.set(i * 7, true);
    d = check_and_decide(x, y, config);
    CHECK(d.error_rate == doctest::Approx(1.0 / 7.0));
    CHECK(d.abort);
    y.set(0, false);  // 6/49 = 0.1224 stays below 0.124
    CHECK_FALSE(check_and_decide(x, y, config).abort);

    CHECK_THROWS_AS(check_and_decide(BitVector(3), BitVector(4), config), ProtocolDesyncError);
}

TEST_CASE("stage_correct_and_amplify on the Steane pair") {
    const auto pair = make_steane_pair();
    const auto words = pair.outer().codewords();
    Rng rng(3);

    auto one_block = [&](const BitVector& u, const BitVector& e) {
        const BitVector v = BitVector::from_bits(std::vector<int>{1, 0, 0, 1, 1, 0, 1});
        const auto r = stage_correct_and_amplify(pair, {v + e}, {u + v});
        return r.key;
    };

    SUBCASE("clean and single-error blocks agree, exhaustively") {
        for (const auto& u : words) {
            CHECK(one_block(u, BitVector(7)) == pair.coset_label(u));
            for (std::size_t i = 0; i < 7; ++i) CHECK(one_block(u, BitVector::unit(7, i)) == pair.coset_label(u));
        }
    }
    SUBCASE("weight-2 mismatch fixture") {
        std::size_t mismatches = 0, oracle_mismatches = 0, patterns = 0;
        for (const auto& u : words) {
            for (std::size_t i = 0; i < 7; ++i) {
                for (std::size_t j = i + 1; j < 7; ++j) {
                    const auto e = BitVector::unit(7, i) + BitVector::unit(7, j);
                    ++patterns;
                    if (one_block(u, e) != pair.coset_label(u)) ++mismatches;
                    const auto nearest =
                        oracle::nearest_codewords(pair.outer().generator(), oracle::bits_of(u + e));
                    REQUIRE(nearest.size() == 1);
                    if (!oracle::same_coset(pair.inner().generator(), nearest[0], oracle::bits_of(u))) {
                        ++oracle_mismatches;
                    }
                }
            }
        }
        CHECK(patterns == 336);
        CHECK(mismatches == oracle_mismatches);
        // Frozen: every weight-2 error lands in the other coset.
        CHECK(mismatches == 336);
    }
    CHECK_THROWS_AS(stage_correct_and_amplify(pair, {BitVector(7)}, {}), ProtocolDesyncError);
}

TEST_CASE("attack-free runs agree") {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const auto config = steane_config(seed);
        const auto run = run_protocol(config, NoAttack{});
        const auto& o = run.outcome;
        REQUIRE_FALSE(o.aborted);
        CHECK(o.observed_check_error_rate == 0.0);
        CHECK(o.keys_equal());
        CHECK(o.alice_final_key->size() == 1);
        CHECK(o.decode_failures() == 0);
        CHECK(o.alice_stage1_key == o.bob_stage1_key);
        CHECK(o.transmitted_count == 215);
        check_structure(config, run.transcript);
    }
}

TEST_CASE("bitflip(0) with threshold 0 never aborts") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        auto config = steane_config(seed);
        config.abort_threshold = 0.0;
        const auto o = run_protocol(config, BitFlipAttack{0.0}).outcome;
        CHECK_FALSE(o.aborted);
        CHECK(o.keys_equal());
    }
}

TEST_CASE("intercept-resend abort rate matches the binomial oracle") {
    // abort iff more than 6 of 49 check bits disagree
    const double p_abort = oracle::binomial_upper_tail(49, 7, 0.25);
    const std::size_t trials = 2000;
    std::size_t aborts = 0;
    for (std::uint64_t seed = 0; seed < trials; ++seed) {
        const auto o = run_protocol(steane_config(seed), InterceptResendAttack{1.0}).outcome;
        if (o.aborted) {
            CHECK(o.abort_reason == AbortReason::Security);
            CHECK_FALSE(o.alice_final_key);
            CHECK_FALSE(o.bob_final_key);
            ++aborts;
        }
    }
    const double rate = static_cast<double>(aborts) / trials;
    CHECK(std::abs(rate - p_abort) <= 4 * std::sqrt(p_abort * (1 - p_abort) / trials));
}

TEST_CASE("errors within the correction radius are corrected") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        auto config = steane_config(seed);
        Rng where(seed * 7919 + 1);
        std::vector<std::size_t> picks;
        for (int i = 0; i < 14; ++i) picks.push_back(uniform_index(where, 7));
        config.bob_tamper = [picks](int stage, std::size_t block, BitVector& w) {
            w.flip(picks[(stage - 1) * 7 + block]);
        };
        const auto o = run_protocol(config, NoAttack{}).outcome;
        REQUIRE_FALSE(o.aborted);
        CHECK(o.keys_equal());
        CHECK(o.alice_stage1_key == o.bob_stage1_key);
    }
}

TEST_CASE("Bob's key is a function of his record and the transcript") {
    const std::vector<AttackModel> attacks{NoAttack{}, BitFlipAttack{0.05}, InterceptResendAttack{0.3}};
    for (std::uint64_t seed = 0; seed < 60; ++seed) {
        const auto config = steane_config(seed);
        const auto run = run_protocol(config, attacks[seed % attacks.size()]);
        const auto replay = bob_process(run.bob_record, parse_transcript(dump_transcript(run.transcript)), config);
        CHECK(replay.aborted == run.outcome.aborted);
        CHECK(replay.final_key == run.outcome.bob_final_key);

        std::stringstream file;
        write_bob_file(file, {run.bob_record, run.outcome.bob_final_key});
        const auto back = read_bob_file(file);
        CHECK(back.record == run.bob_record);
        CHECK(back.final_key == run.outcome.bob_final_key);
    }
}

TEST_CASE("bob_process rejects incomplete or inconsistent transcripts") {
    const auto config = steane_config(5);
    const auto run = run_protocol(config, NoAttack{});
    REQUIRE_FALSE(run.outcome.aborted);

    auto t = run.transcript;
    t.check_positions.reset();
    try {
        bob_process(run.bob_record, t, config);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("CHECKPOS") != std::string::npos);
    }

    t = run.transcript;
    t.blocks.pop_back();
    CHECK_THROWS_AS(bob_process(run.bob_record, t, config), ParseError);

    t = run.transcript;
    t.bob_check_values->flip(0);
    CHECK_THROWS_AS(bob_process(run.bob_record, t, config), ProtocolDesyncError);

    t = run.transcript;
    t.blocks[1].positions[0] = t.blocks[0].positions[0];
    CHECK_THROWS_AS(bob_process(run.bob_record, t, config), ProtocolDesyncError);
}

TEST_CASE("session steps must run in order") {
    const auto config = steane_config(1);
    ProtocolSession s(config, NoAttack{});
    CHECK_THROWS_AS(s.transmit(), ProtocolDesyncError);
    s.alice_prepare();
    s.transmit();
    CHECK_THROWS_AS(s.alice_announce_bases(), ProtocolDesyncError);
    s.bob_receive();
    CHECK_THROWS_AS(s.check(), ProtocolDesyncError);
    s.alice_announce_bases();
    CHECK_THROWS_AS(s.alice_prepare(), ProtocolDesyncError);
    if (s.sift()) {
        CHECK_THROWS_AS(s.stage2_announce(), ProtocolDesyncError);
        REQUIRE(s.check());
        s.stage1_announce();
        CHECK_THROWS_AS(s.finish(), ProtocolDesyncError);
        s.stage2_announce();
        s.finish();
        CHECK(s.phase() == ProtocolSession::Phase::Finished);
        CHECK(s.outcome().keys_equal());
    }
}

TEST_CASE("insufficient sift") {
    auto config = steane_config(0);
    config.delta = 0.001;  // 196 qubits for 98 needed
    config.max_restarts = 0;
    std::size_t aborted = 0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        config.seed = seed;
        const auto run = run_protocol(config, NoAttack{});
        if (run.outcome.aborted) {
            CHECK(run.outcome.abort_reason == AbortReason::InsufficientSift);
            CHECK_FALSE(run.transcript.check_positions);
            const auto bob = bob_process(run.bob_record, run.transcript, config);
            CHECK(bob.abort_reason == AbortReason::InsufficientSift);
            ++aborted;
        }
    }
    CHECK(aborted > 0);

    config.max_restarts = 64;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        config.seed = seed;
        const auto o = run_protocol(config, NoAttack{}).outcome;
        CHECK_FALSE(o.aborted);
        CHECK(o.keys_equal());
    }
}

TEST_CASE("flips confined to check positions leave the code bits clean") {
    std::size_t runs = 0;
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        const auto config = steane_config(seed);
        const auto dry = run_protocol(config, NoAttack{});
        const auto& checks = *dry.transcript.check_positions;
        const std::vector<std::size_t> targets{checks[0], checks[10], checks[20]};
        const auto attacked = run_protocol(config, CorrelatedPositionsAttack{targets, 1.0});
        const auto& o = attacked.outcome;
        REQUIRE_FALSE(o.aborted);
        CHECK(*o.observed_check_error_rate == doctest::Approx(3.0 / 49.0));
        CHECK(o.alice_stage1_key == o.bob_stage1_key);
        CHECK(o.keys_equal());
        ++runs;
    }
    CHECK(runs == 40);
}

TEST_CASE("Golay configurations") {
    const auto golay = std::make_shared<const CssPair>(make_golay_pair());
    for (const auto& [p1, p2] : {std::pair{golay, steane()}, std::pair{steane(), golay}, std::pair{golay, golay}}) {
        const auto config = config_for(p1, p2, 11);
        const auto run = run_protocol(config, NoAttack{});
        REQUIRE_FALSE(run.outcome.aborted);
        CHECK(run.outcome.keys_equal());
        CHECK(run.outcome.alice_final_key->size() == 1);
        check_structure(config, run.transcript);
    }
    // Golay corrects three errors per block.
    auto config = config_for(golay, steane(), 12);
    config.bob_tamper = [](int stage, std::size_t block, BitVector& w) {
        if (stage == 1) {
            for (std::size_t i = 0; i < 3; ++i) w.flip((block + 5 * i) % 23);
        }
    };
    CHECK(run_protocol(config, NoAttack{}).outcome.keys_equal());
}

TEST_CASE("decode-failure policy") {
    const auto pair = simplex_pair();
    CHECK(pair->key_width() == 2);
    BitVector undecodable(7);
    for (std::size_t i = 0; i < 7 && undecodable.is_zero(); ++i) {
        for (std::size_t j = i + 1; j < 7; ++j) {
            const auto e = BitVector::unit(7, i) + BitVector::unit(7, j);
            if (!pair->decoder().decode(e)) {
                undecodable = e;
                break;
            }
        }
    }
    REQUIRE_FALSE(undecodable.is_zero());

    auto config = config_for(pair, steane(), 3);
    CHECK(config.final_key_length() == 2);
    config.bob_tamper = [undecodable](int stage, std::size_t block, BitVector& w) {
        if (stage == 1 && block == 0) w += undecodable;
    };

    const auto flagged = run_protocol(config, NoAttack{}).outcome;
    CHECK_FALSE(flagged.aborted);
    CHECK(flagged.stage1_decode_failures == 1);
    CHECK(flagged.bob_final_key->size() == 2);

    config.decode_policy = DecodeFailurePolicy::Strict;
    const auto strict = run_protocol(config, NoAttack{}).outcome;
    CHECK(strict.aborted);
    CHECK(strict.abort_reason == AbortReason::DecodeFailure);
    CHECK_FALSE(strict.bob_final_key);
    CHECK_FALSE(strict.alice_final_key);

    config.bob_tamper = nullptr;
    CHECK(run_protocol(config, NoAttack{}).outcome.keys_equal());
}

TEST_CASE("runs are reproducible from the seed") {
    const auto a = run_protocol(steane_config(77), BitFlipAttack{0.05});
    const auto b = run_protocol(steane_config(77), BitFlipAttack{0.05});
    CHECK(a.transcript == b.transcript);
    CHECK(a.bob_record == b.bob_record);
    CHECK(a.outcome.bob_final_key == b.outcome.bob_final_key);
}
