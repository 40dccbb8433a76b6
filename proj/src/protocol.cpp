#include "cbb84/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

namespace cbb84 {

const char* to_string(AbortReason reason) {
    switch (reason) {
        case AbortReason::None: return "none";
        case AbortReason::InsufficientSift: return "insufficient_sift";
        case AbortReason::Security: return "security";
        case AbortReason::DecodeFailure: return "decode_failure";
    }
    return "unknown";
}

const char* to_string(DecodeFailurePolicy policy) {
    return policy == DecodeFailurePolicy::Strict ? "strict" : "flag";
}

std::size_t ProtocolConfig::qubit_count() const {
    const double exact = 4.0 * static_cast<double>(check_count()) * (1.0 + delta);
    // The epsilon keeps products such as 4 * 25 * 1.2 from rounding below an integer.
    return static_cast<std::size_t>(std::floor(exact + 1e-9));
}

void validate(const ProtocolConfig& config) {
    if (!config.stage1_pair || !config.stage2_pair) {
        throw std::invalid_argument("both stage code pairs must be set");
    }
    if (!(config.delta > 0.0)) {
        throw std::invalid_argument("delta must be positive");
    }
    if (!(config.abort_threshold >= 0.0 && config.abort_threshold <= 1.0)) {
        throw std::invalid_argument("abort threshold must be in [0, 1]");
    }
}

ProtocolConfig steane_config(std::uint64_t seed) {
    auto pair = std::make_shared<const CssPair>(make_steane_pair());
    ProtocolConfig config;
    config.stage1_pair = pair;
    config.stage2_pair = pair;
    config.seed = seed;
    return config;
}

Preparation alice_prepare(const ProtocolConfig& config, Rng& rng) {
    const std::size_t count = config.qubit_count();
    Preparation prep;
    prep.state.bits = BitVector(count);
    prep.state.bases = BitVector(count);
    prep.qubits.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        const bool bit = random_bit(rng);
        const bool basis = random_bit(rng);
        prep.state.bits.set(i, bit);
        prep.state.bases.set(i, basis);
        prep.qubits[i].prep_bit = bit;
        prep.qubits[i].prep_basis = basis_from_bit(basis);
    }
    return prep;
}

BobRecord bob_measure(std::span<const QubitRecord> received, Rng& rng) {
    BobRecord rec{BitVector(received.size()), BitVector(received.size())};
    for (std::size_t i = 0; i < received.size(); ++i) {
        rec.bases.set(i, random_bit(rng));
    }
    for (std::size_t i = 0; i < received.size(); ++i) {
        rec.results.set(i, measure(received[i], basis_from_bit(rec.bases.get(i)), rng));
    }
    return rec;
}

std::vector<std::size_t> matching_positions(const BitVector& alice_bases, const BitVector& bob_bases) {
    if (alice_bases.size() != bob_bases.size()) {
        throw ProtocolDesyncError("basis strings have lengths " + std::to_string(alice_bases.size()) + " and " +
                                  std::to_string(bob_bases.size()));
    }
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < alice_bases.size(); ++i) {
        if (alice_bases.get(i) == bob_bases.get(i)) out.push_back(i);
    }
    return out;
}

std::optional<Selection> sift(const AlicePrivate& alice, const BitVector& bob_bases, const ProtocolConfig& config,
                              Transcript& transcript, Rng& alice_rng) {
    if (!transcript.basis_string) {
        throw ProtocolDesyncError("sift before Alice announced her bases");
    }
    Selection sel;
    sel.kept = matching_positions(alice.bases, bob_bases);
    transcript.kept_positions = sel.kept;
    const std::size_t half = config.check_count();
    if (sel.kept.size() < 2 * half) {
        return std::nullopt;
    }
    const auto selected = sample_subset(sel.kept, 2 * half, alice_rng);
    sel.check_positions = sample_subset(selected, half, alice_rng);
    std::set_difference(selected.begin(), selected.end(), sel.check_positions.begin(), sel.check_positions.end(),
                        std::back_inserter(sel.code_positions));
    transcript.check_positions = sel.check_positions;
    return sel;
}

CheckDecision check_and_decide(const BitVector& alice_check, const BitVector& bob_check,
                               const ProtocolConfig& config) {
    if (alice_check.size() != bob_check.size()) {
        throw ProtocolDesyncError("check strings have lengths " + std::to_string(alice_check.size()) + " and " +
                                  std::to_string(bob_check.size()));
    }
    CheckDecision d;
    if (alice_check.empty()) {
        d.abort = true;
        return d;
    }
    d.error_rate = static_cast<double>((alice_check + bob_check).weight()) / static_cast<double>(alice_check.size());
    d.abort = d.error_rate > config.abort_threshold;
    return d;
}

StageResult stage_correct_and_amplify(const CssPair& pair, const std::vector<BitVector>& blocks,
                                      const std::vector<BitVector>& announcements) {
    if (blocks.size() != announcements.size()) {
        throw ProtocolDesyncError(std::to_string(blocks.size()) + " blocks but " +
                                  std::to_string(announcements.size()) + " announcements");
    }
    StageResult result;
    result.key = BitVector(0);
    result.block_failed.assign(blocks.size(), false);
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        if (blocks[b].size() != pair.n() || announcements[b].size() != pair.n()) {
            throw ProtocolDesyncError("block " + std::to_string(b) + " length differs from n = " +
                                      std::to_string(pair.n()));
        }
        // (v + e) + (u + v) = u + e
        const BitVector noisy_codeword = blocks[b] + announcements[b];
        BitVector label;
        if (auto decoded = pair.decoder().decode(noisy_codeword)) {
            label = pair.coset_label(decoded->codeword);
        } else {
            label = pair.project_label(noisy_codeword);
            result.block_failed[b] = true;
            ++result.decode_failures;
        }
        result.key = result.key.concat(label);
    }
    return result;
}

namespace {

ParseError missing(const char* tag) { return ParseError(0, std::string("transcript missing tag ") + tag); }

void check_positions_within(const std::vector<std::size_t>& positions, std::size_t limit, const char* what) {
    for (auto p : positions) {
        if (p >= limit) {
            throw ProtocolDesyncError(std::string(what) + " position " + std::to_string(p) + " out of range");
        }
    }
}

// Validates the per-stage announcements and returns Bob's blocks and masks.
void collect_stage(const Transcript& t, int stage, std::size_t expected_blocks, std::size_t block_length,
                   std::size_t domain, std::vector<std::vector<std::size_t>>& positions,
                   std::vector<BitVector>& masks) {
    const auto blocks = t.stage_blocks(stage);
    const char* tag = stage == 1 ? "BLK1" : "BLK2";
    if (blocks.empty()) throw missing(tag);
    if (blocks.size() != expected_blocks) {
        throw ParseError(0, std::string("transcript has ") + std::to_string(blocks.size()) + " " + tag +
                                " records, expected " + std::to_string(expected_blocks) + " (missing tag " + tag +
                                ")");
    }
    for (const auto* b : blocks) {
        if (b->positions.size() != block_length) {
            throw ProtocolDesyncError(std::string(tag) + " block has " + std::to_string(b->positions.size()) +
                                      " positions, expected " + std::to_string(block_length));
        }
        check_positions_within(b->positions, domain, tag);
        positions.push_back(b->positions);
        masks.push_back(b->masked_word);
    }
}

}  // namespace

BobResult bob_process(const BobRecord& bob, const Transcript& t, const ProtocolConfig& config) {
    validate(config);
    BobResult out;
    if (bob.bases.size() != bob.results.size()) {
        throw ProtocolDesyncError("Bob's bases and results differ in length");
    }
    if (!t.basis_string) throw missing("B");
    if (!t.kept_positions) throw missing("KEEP");
    if (matching_positions(*t.basis_string, bob.bases) != *t.kept_positions) {
        throw ProtocolDesyncError("KEEP does not match Bob's basis comparison");
    }
    const std::size_t half = config.check_count();
    if (t.kept_positions->size() < 2 * half) {
        out.aborted = true;
        out.abort_reason = AbortReason::InsufficientSift;
        return out;
    }
    if (!t.check_positions) throw missing("CHECKPOS");
    if (!t.alice_check_values) throw missing("ACHK");
    if (!t.bob_check_values) throw missing("BCHK");
    const std::set<std::size_t> kept(t.kept_positions->begin(), t.kept_positions->end());
    const std::set<std::size_t> checks(t.check_positions->begin(), t.check_positions->end());
    if (checks.size() != half || t.check_positions->size() != half) {
        throw ProtocolDesyncError("CHECKPOS must list " + std::to_string(half) + " distinct positions");
    }
    for (auto p : checks) {
        if (!kept.count(p)) throw ProtocolDesyncError("check position " + std::to_string(p) + " was not kept");
    }
    if (bob.results.gather(*t.check_positions) != *t.bob_check_values) {
        throw ProtocolDesyncError("BCHK differs from Bob's measured check bits");
    }
    const auto decision = check_and_decide(*t.alice_check_values, *t.bob_check_values, config);
    out.observed_check_error_rate = decision.error_rate;
    if (decision.abort) {
        out.aborted = true;
        out.abort_reason = AbortReason::Security;
        return out;
    }

    // Stage 1: blocks of n1 transmission positions.
    const CssPair& pair1 = *config.stage1_pair;
    const CssPair& pair2 = *config.stage2_pair;
    std::vector<std::vector<std::size_t>> pos1;
    std::vector<BitVector> masks1;
    collect_stage(t, 1, config.n2(), config.n1(), bob.results.size(), pos1, masks1);
    std::set<std::size_t> used = checks;
    for (const auto& block : pos1) {
        for (auto p : block) {
            if (!kept.count(p)) throw ProtocolDesyncError("code position " + std::to_string(p) + " was not kept");
            if (!used.insert(p).second) {
                throw ProtocolDesyncError("position " + std::to_string(p) + " used twice");
            }
        }
    }
    std::vector<BitVector> words1;
    for (std::size_t b = 0; b < pos1.size(); ++b) {
        BitVector w = bob.results.gather(pos1[b]);
        if (config.bob_tamper) config.bob_tamper(1, b, w);
        words1.push_back(std::move(w));
    }
    auto stage1 = stage_correct_and_amplify(pair1, words1, masks1);
    out.stage1_decode_failures = stage1.decode_failures;
    out.stage1_key = stage1.key;
    if (config.decode_policy == DecodeFailurePolicy::Strict && stage1.decode_failures > 0) {
        out.aborted = true;
        out.abort_reason = AbortReason::DecodeFailure;
        out.stage1_key.reset();
        return out;
    }

    // Stage 2: blocks of n2 positions within the stage-1 key.
    const std::size_t stage1_len = config.key_width1() * config.n2();
    std::vector<std::vector<std::size_t>> pos2;
    std::vector<BitVector> masks2;
    collect_stage(t, 2, config.key_width1(), config.n2(), stage1_len, pos2, masks2);
    std::set<std::size_t> used2;
    for (const auto& block : pos2) {
        for (auto p : block) {
            if (!used2.insert(p).second) {
                throw ProtocolDesyncError("stage-1 key position " + std::to_string(p) + " used twice");
            }
        }
    }
    std::vector<BitVector> words2;
    for (std::size_t b = 0; b < pos2.size(); ++b) {
        BitVector w = stage1.key.gather(pos2[b]);
        if (config.bob_tamper) config.bob_tamper(2, b, w);
        words2.push_back(std::move(w));
    }
    auto stage2 = stage_correct_and_amplify(pair2, words2, masks2);
    out.stage2_decode_failures = stage2.decode_failures;
    if (config.decode_policy == DecodeFailurePolicy::Strict && stage2.decode_failures > 0) {
        out.aborted = true;
        out.abort_reason = AbortReason::DecodeFailure;
        out.stage1_key.reset();
        return out;
    }
    out.final_key = stage2.key;
    return out;
}

ProtocolSession::ProtocolSession(const ProtocolConfig& config, const AttackModel& attack, std::size_t attempt)
    : config_(config),
      attack_(attack),
      alice_rng_(make_stream(config.seed, Stream::Alice, attempt)),
      bob_rng_(make_stream(config.seed, Stream::Bob, attempt)),
      channel_rng_(make_stream(config.seed, Stream::Channel, attempt)) {
    validate(config_);
    validate_attack(attack_, config_.qubit_count());
    outcome_.restarts = attempt;
}

void ProtocolSession::require(Phase expected, const char* step) const {
    if (phase_ != expected) {
        throw ProtocolDesyncError(std::string(step) + " called out of order");
    }
}

void ProtocolSession::abort(AbortReason reason) {
    outcome_.aborted = true;
    outcome_.abort_reason = reason;
    phase_ = Phase::Aborted;
}

void ProtocolSession::alice_prepare() {
    require(Phase::Start, "alice_prepare");
    prep_ = cbb84::alice_prepare(config_, alice_rng_);
    outcome_.transmitted_count = prep_.qubits.size();
    phase_ = Phase::Prepared;
}

void ProtocolSession::transmit() {
    require(Phase::Prepared, "transmit");
    in_flight_ = cbb84::transmit(prep_.qubits, attack_, channel_rng_);
    phase_ = Phase::Transmitted;
}

void ProtocolSession::bob_receive() {
    require(Phase::Transmitted, "bob_receive");
    bob_ = bob_measure(in_flight_, bob_rng_);
    phase_ = Phase::Received;
}

void ProtocolSession::alice_announce_bases() {
    require(Phase::Received, "alice_announce_bases (Bob has not acknowledged receipt)");
    transcript_.basis_string = prep_.state.bases;
    phase_ = Phase::BasesAnnounced;
}

bool ProtocolSession::sift() {
    require(Phase::BasesAnnounced, "sift");
    auto sel = cbb84::sift(prep_.state, bob_.bases, config_, transcript_, alice_rng_);
    outcome_.sifted_count = transcript_.kept_positions->size();
    if (!sel) {
        abort(AbortReason::InsufficientSift);
        return false;
    }
    selection_ = std::move(*sel);
    phase_ = Phase::Sifted;
    return true;
}

bool ProtocolSession::check() {
    require(Phase::Sifted, "check");
    transcript_.alice_check_values = prep_.state.bits.gather(selection_.check_positions);
    transcript_.bob_check_values = bob_.results.gather(selection_.check_positions);
    const auto d = check_and_decide(*transcript_.alice_check_values, *transcript_.bob_check_values, config_);
    outcome_.observed_check_error_rate = d.error_rate;
    if (d.abort) {
        abort(AbortReason::Security);
        return false;
    }
    phase_ = Phase::Checked;
    return true;
}

namespace {

std::vector<std::vector<std::size_t>> assign_blocks(std::vector<std::size_t> positions, std::size_t block_length,
                                                    bool randomize, Rng& rng) {
    if (randomize) shuffle(positions, rng);
    std::vector<std::vector<std::size_t>> blocks;
    for (std::size_t start = 0; start < positions.size(); start += block_length) {
        blocks.emplace_back(positions.begin() + static_cast<std::ptrdiff_t>(start),
                            positions.begin() + static_cast<std::ptrdiff_t>(start + block_length));
    }
    return blocks;
}

}  // namespace

void ProtocolSession::stage1_announce() {
    require(Phase::Checked, "stage1_announce");
    const CssPair& pair = *config_.stage1_pair;
    const auto blocks = assign_blocks(selection_.code_positions, pair.n(), config_.randomize_blocks, alice_rng_);
    alice_stage1_key_ = BitVector(0);
    for (const auto& positions : blocks) {
        const BitVector u = random_codeword(pair.outer(), alice_rng_);
        const BitVector v = prep_.state.bits.gather(positions);
        transcript_.blocks.push_back({1, positions, u + v});
        alice_stage1_key_ = alice_stage1_key_.concat(pair.coset_label(u));
    }
    phase_ = Phase::Stage1Announced;
}

void ProtocolSession::stage2_announce() {
    require(Phase::Stage1Announced, "stage2_announce");
    const CssPair& pair = *config_.stage2_pair;
    std::vector<std::size_t> indices(alice_stage1_key_.size());
    for (std::size_t i = 0; i < indices.size(); ++i) indices[i] = i;
    const auto blocks = assign_blocks(std::move(indices), pair.n(), config_.randomize_blocks, alice_rng_);
    alice_final_key_ = BitVector(0);
    for (const auto& positions : blocks) {
        const BitVector u = random_codeword(pair.outer(), alice_rng_);
        const BitVector v = alice_stage1_key_.gather(positions);
        transcript_.blocks.push_back({2, positions, u + v});
        alice_final_key_ = alice_final_key_.concat(pair.coset_label(u));
    }
    phase_ = Phase::Stage2Announced;
}

void ProtocolSession::finish() {
    require(Phase::Stage2Announced, "finish");
    const BobResult bob = bob_process(bob_, transcript_, config_);
    outcome_.stage1_decode_failures = bob.stage1_decode_failures;
    outcome_.stage2_decode_failures = bob.stage2_decode_failures;
    if (bob.aborted) {
        abort(bob.abort_reason);
        return;
    }
    outcome_.alice_stage1_key = alice_stage1_key_;
    outcome_.bob_stage1_key = bob.stage1_key;
    outcome_.alice_final_key = alice_final_key_;
    outcome_.bob_final_key = bob.final_key;
    phase_ = Phase::Finished;
}

RunResult run_protocol(const ProtocolConfig& config, const AttackModel& attack) {
    for (std::size_t attempt = 0;; ++attempt) {
        ProtocolSession session(config, attack, attempt);
        session.alice_prepare();
        session.transmit();
        session.bob_receive();
        session.alice_announce_bases();
        if (!session.sift()) {
            if (attempt < config.max_restarts) continue;
            return {session.outcome(), session.transcript(), session.bob_record()};
        }
        if (session.check()) {
            session.stage1_announce();
            session.stage2_announce();
            session.finish();
        }
        return {session.outcome(), session.transcript(), session.bob_record()};
    }
}

void write_bob_file(std::ostream& os, const BobFile& file) {
    os << "BOBBASES bits=" << file.record.bases.to_string() << '\n';
    os << "BOBBITS bits=" << file.record.results.to_string() << '\n';
    if (file.final_key) {
        os << "KEY bits=" << file.final_key->to_string() << '\n';
    } else {
        os << "KEY status=aborted\n";
    }
}

BobFile read_bob_file(std::istream& is) {
    BobFile file;
    bool have_bases = false, have_bits = false, have_key = false;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string tag, token;
        ls >> tag >> token;
        const auto eq = token.find('=');
        if (eq == std::string::npos) throw ParseError(lineno, "expected field=value after " + tag);
        const std::string key = token.substr(0, eq);
        const std::string value = token.substr(eq + 1);
        try {
            if (tag == "BOBBASES" && key == "bits") {
                file.record.bases = BitVector::from_string(value);
                have_bases = true;
            } else if (tag == "BOBBITS" && key == "bits") {
                file.record.results = BitVector::from_string(value);
                have_bits = true;
            } else if (tag == "KEY" && key == "bits") {
                file.final_key = BitVector::from_string(value);
                have_key = true;
            } else if (tag == "KEY" && key == "status" && value == "aborted") {
                have_key = true;
            } else {
                throw ParseError(lineno, "unexpected record '" + line + "'");
            }
        } catch (const std::invalid_argument& e) {
            throw ParseError(lineno, tag + ": " + e.what());
        }
    }
    if (!have_bases) throw ParseError(0, "Bob file missing tag BOBBASES");
    if (!have_bits) throw ParseError(0, "Bob file missing tag BOBBITS");
    if (!have_key) throw ParseError(0, "Bob file missing tag KEY");
    if (file.record.bases.size() != file.record.results.size()) {
        throw ParseError(0, "BOBBASES and BOBBITS differ in length");
    }
    return file;
}

}  // namespace cbb84
