#pragma once

#include "cbb84/channel.hpp"
#include "cbb84/codes.hpp"
#include "cbb84/gf2.hpp"
#include "cbb84/random.hpp"
#include "cbb84/transcript.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cbb84 {

/// Messages arrived out of order or the parties' views disagree structurally.
class ProtocolDesyncError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

enum class DecodeFailurePolicy {
    /// Emit the label projected from the uncorrected word and count the block.
    FlagAndContinue,
    /// Abort the run on the first decode failure.
    Strict,
};

enum class AbortReason { None, InsufficientSift, Security, DecodeFailure };

const char* to_string(AbortReason reason);
const char* to_string(DecodeFailurePolicy policy);

/// Test hook: lets a test corrupt Bob's raw block word (stage 1: his
/// measured code bits; stage 2: his stage-1 key bits) before unmasking.
using BobTamperHook = std::function<void(int stage, std::size_t block, BitVector& word)>;

struct ProtocolConfig {
    std::shared_ptr<const CssPair> stage1_pair;
    std::shared_ptr<const CssPair> stage2_pair;
    double delta = 0.1;
    double abort_threshold = 0.124;
    std::uint64_t seed = 0;
    DecodeFailurePolicy decode_policy = DecodeFailurePolicy::FlagAndContinue;
    /// Fresh transmissions allowed after an insufficient sift before the run gives up.
    std::size_t max_restarts = 16;
    /// Test hook: false assigns code bits to blocks in ascending position order.
    bool randomize_blocks = true;
    BobTamperHook bob_tamper;

    std::size_t n1() const { return stage1_pair->n(); }
    std::size_t n2() const { return stage2_pair->n(); }
    std::size_t key_width1() const { return stage1_pair->key_width(); }
    std::size_t key_width2() const { return stage2_pair->key_width(); }
    /// n1 * n2: number of check bits, and of code bits.
    std::size_t check_count() const { return n1() * n2(); }
    /// floor(4 n1 n2 (1 + delta)).
    std::size_t qubit_count() const;
    std::size_t final_key_length() const { return key_width1() * key_width2(); }
};

/// Throws std::invalid_argument describing the first violated constraint.
void validate(const ProtocolConfig& config);

/// Steane pair at both stages.
ProtocolConfig steane_config(std::uint64_t seed = 0);

/// Alice's secrets from preparation: bit values and basis string b (1 = X).
struct AlicePrivate {
    BitVector bits;
    BitVector bases;
};

struct Preparation {
    std::vector<QubitRecord> qubits;
    AlicePrivate state;
};

/// Steps 1-2: random bits and random basis string, one record per qubit.
Preparation alice_prepare(const ProtocolConfig& config, Rng& rng);

/// Bob's private record: his random bases (1 = X) and measured bits.
struct BobRecord {
    BitVector bases;
    BitVector results;

    friend bool operator==(const BobRecord&, const BobRecord&) = default;
};

/// Step 4: Bob draws all bases first, then measures each record.
BobRecord bob_measure(std::span<const QubitRecord> received, Rng& rng);

/// Indices where Alice's and Bob's bases coincide.
std::vector<std::size_t> matching_positions(const BitVector& alice_bases, const BitVector& bob_bases);

struct Selection {
    std::vector<std::size_t> kept;            ///< all matching positions
    std::vector<std::size_t> check_positions;  ///< n1 n2, ascending
    std::vector<std::size_t> code_positions;   ///< n1 n2, ascending
};

/// Step 6. Requires B in the transcript. Records KEEP and CHECKPOS. Returns
/// nullopt when fewer than 2 n1 n2 positions survive sifting.
std::optional<Selection> sift(const AlicePrivate& alice, const BitVector& bob_bases, const ProtocolConfig& config,
                              Transcript& transcript, Rng& alice_rng);

struct CheckDecision {
    double error_rate = 0.0;
    bool abort = false;
};

/// Step 7. Throws ProtocolDesyncError on length mismatch.
CheckDecision check_and_decide(const BitVector& alice_check, const BitVector& bob_check,
                               const ProtocolConfig& config);

struct StageResult {
    BitVector key;  ///< concatenated per-block labels
    std::vector<bool> block_failed;
    std::size_t decode_failures = 0;
};

/// Bob's half of one stage: unmask each block, decode to C1, label the coset.
/// A block that fails to decode gets the label projected from its
/// uncorrected word and is flagged; the caller applies the failure policy.
StageResult stage_correct_and_amplify(const CssPair& pair, const std::vector<BitVector>& blocks,
                                      const std::vector<BitVector>& announcements);

struct RunOutcome {
    bool aborted = false;
    AbortReason abort_reason = AbortReason::None;
    std::optional<double> observed_check_error_rate;
    std::optional<BitVector> alice_final_key;
    std::optional<BitVector> bob_final_key;
    std::optional<BitVector> alice_stage1_key;
    std::optional<BitVector> bob_stage1_key;
    std::size_t stage1_decode_failures = 0;
    std::size_t stage2_decode_failures = 0;
    std::size_t transmitted_count = 0;
    std::size_t sifted_count = 0;
    std::size_t restarts = 0;

    bool keys_equal() const { return alice_final_key && bob_final_key && *alice_final_key == *bob_final_key; }
    std::size_t decode_failures() const { return stage1_decode_failures + stage2_decode_failures; }
};

/// Everything Bob computes from his record plus the public transcript.
struct BobResult {
    bool aborted = false;
    AbortReason abort_reason = AbortReason::None;
    std::optional<double> observed_check_error_rate;
    std::optional<BitVector> stage1_key;
    std::optional<BitVector> final_key;
    std::size_t stage1_decode_failures = 0;
    std::size_t stage2_decode_failures = 0;
};

/// Bob's post-processing as a pure function of (record, transcript, config).
/// Throws ParseError when a required record is missing or malformed, and
/// ProtocolDesyncError when the transcript contradicts Bob's record.
BobResult bob_process(const BobRecord& bob, const Transcript& transcript, const ProtocolConfig& config);

/// One run as a message-ordered exchange between Alice and Bob.
///
/// Each step checks that the previous one happened; calling out of order
/// throws ProtocolDesyncError. run_protocol() drives the steps and handles
/// restarts after an insufficient sift.
class ProtocolSession {
public:
    enum class Phase {
        Start,
        Prepared,
        Transmitted,
        Received,
        BasesAnnounced,
        Sifted,
        Checked,
        Stage1Announced,
        Stage2Announced,
        Finished,
        Aborted,
    };

    /// `attempt` selects an independent continuation of the run's streams.
    ProtocolSession(const ProtocolConfig& config, const AttackModel& attack, std::size_t attempt = 0);

    Phase phase() const noexcept { return phase_; }

    void alice_prepare();
    void transmit();
    /// Bob measures and acknowledges receipt.
    void bob_receive();
    /// Fails unless Bob has acknowledged receipt.
    void alice_announce_bases();
    /// False on insufficient sift.
    bool sift();
    /// Both parties announce check values. False if the run aborts.
    bool check();
    void stage1_announce();
    void stage2_announce();
    /// Bob's error correction and privacy amplification for both stages.
    void finish();

    const Transcript& transcript() const noexcept { return transcript_; }
    const BobRecord& bob_record() const noexcept { return bob_; }
    const RunOutcome& outcome() const noexcept { return outcome_; }

private:
    void require(Phase expected, const char* step) const;
    void abort(AbortReason reason);

    ProtocolConfig config_;
    AttackModel attack_;
    Rng alice_rng_;
    Rng bob_rng_;
    Rng channel_rng_;
    Phase phase_ = Phase::Start;

    Preparation prep_;
    std::vector<QubitRecord> in_flight_;
    BobRecord bob_;
    Selection selection_;
    Transcript transcript_;
    std::vector<BitVector> stage1_u_;
    BitVector alice_stage1_key_;
    BitVector alice_final_key_;
    RunOutcome outcome_;
};

struct RunResult {
    RunOutcome outcome;
    Transcript transcript;
    BobRecord bob_record;
};

/// Full two-stage run; deterministic in (config.seed, attack).
RunResult run_protocol(const ProtocolConfig& config, const AttackModel& attack);

/// Bob's private file: BOBBASES, BOBBITS, and the KEY he obtained.
struct BobFile {
    BobRecord record;
    std::optional<BitVector> final_key;  ///< absent when the run aborted
};

void write_bob_file(std::ostream& os, const BobFile& file);
BobFile read_bob_file(std::istream& is);

}  // namespace cbb84
