#pragma once

#include "cbb84/channel.hpp"
#include "cbb84/protocol.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cbb84 {

/// A configuration value is missing, malformed, or out of range.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct ExperimentSpec {
    ProtocolConfig protocol;
    AttackModel attack = NoAttack{};
    std::size_t trials = 1;
    std::filesystem::path out_dir = ".";
    bool dump_transcripts = false;
    /// 0 picks std::thread::hardware_concurrency().
    std::size_t threads = 0;
};

using Settings = std::map<std::string, std::string>;

/// Flat `key = value` lines; `#` starts a comment. Throws ParseError.
Settings read_settings(std::istream& is);

/// Recognized keys: stage1, stage2, delta, threshold, seed, trials, attack,
/// noise_p, positions, policy, max_restarts, out_dir, dump_transcripts,
/// threads. Unknown keys and bad values throw ConfigError.
ExperimentSpec spec_from_settings(const Settings& settings);

/// "none" | "bitflip" | "intercept" | "correlated"; `p` is the flip
/// probability, intercepted fraction, or per-position flip probability.
AttackModel make_attack(const std::string& kind, double p, const std::vector<std::size_t>& positions = {});

struct TrialRow {
    std::size_t trial = 0;
    std::uint64_t seed = 0;
    RunOutcome outcome;
};

struct Summary {
    std::size_t trials = 0;
    std::size_t aborted = 0;
    std::size_t insufficient_sift = 0;
    std::size_t security_aborts = 0;
    std::size_t checked = 0;  ///< runs that reached the check-bit comparison
    std::size_t completed = 0;
    std::size_t key_agreements = 0;
    double abort_fraction = 0.0;
    std::optional<double> mean_check_error;
    std::optional<double> stddev_check_error;  ///< sample standard deviation
    std::optional<double> key_agreement_fraction;
};

/// Trial i runs with seed = base seed + i. Results come back in trial order
/// whatever the thread count.
std::vector<RunResult> run_trials(const ExperimentSpec& spec);

std::vector<TrialRow> to_rows(const ExperimentSpec& spec, const std::vector<RunResult>& results);
Summary summarize(const std::vector<TrialRow>& rows);

void write_trials_csv(std::ostream& os, const std::vector<TrialRow>& rows);
void write_summary_csv(std::ostream& os, const Summary& summary);

/// Reads a per-trial CSV written by write_trials_csv back into rows
/// (the fields summarize() uses).
std::vector<TrialRow> read_trials_csv(std::istream& is);

/// Runs the trials and writes trials.csv, summary.csv and, when requested,
/// transcripts/trial_<i>.txt with Bob's records in bob/trial_<i>.txt.
/// Throws std::ios_base::failure on I/O errors.
Summary run_experiment(const ExperimentSpec& spec);

std::string transcript_filename(std::size_t trial);

}  // namespace cbb84
