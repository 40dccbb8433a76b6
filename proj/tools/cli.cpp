#include "cli.hpp"

#include "cbb84/code_io.hpp"
#include "cbb84/experiment.hpp"
#include "cbb84/protocol.hpp"
#include "cbb84/stats.hpp"
#include "cbb84/transcript.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

namespace cbb84::cli {

namespace {

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

// Run-configuration flags shared by `run` and `replay`; each overrides the
// same key from --config.
struct RunFlags {
    std::string config_path;
    std::map<std::string, std::string> overrides;

    void attach(CLI::App& app, bool experiment) {
        app.add_option("--config", config_path, "key=value configuration file");
        add(app, "--seed", "seed", "base random seed");
        add(app, "--threshold", "threshold", "abort threshold on the check-bit error rate");
        add(app, "--delta", "delta", "qubit surplus: 4 n1 n2 (1 + delta) qubits are sent");
        add(app, "--stage1", "stage1", "stage-1 code pair: steane, golay, or a pair file");
        add(app, "--stage2", "stage2", "stage-2 code pair: steane, golay, or a pair file");
        add(app, "--policy", "policy", "decode-failure policy: flag or strict");
        add(app, "--max-restarts", "max_restarts", "retransmissions allowed after an insufficient sift");
        if (!experiment) return;
        add(app, "--trials", "trials", "number of runs");
        add(app, "--attack", "attack", "none, bitflip, intercept, or correlated");
        add(app, "--noise-p", "noise_p", "attack probability parameter");
        add(app, "--positions", "positions", "comma-separated transmission indices for the correlated attack");
        add(app, "--out-dir", "out_dir", "directory for CSV output");
        add(app, "--threads", "threads", "worker threads (0 = all cores)");
        app.add_flag_callback(
            "--dump-transcripts", [this] { overrides["dump_transcripts"] = "true"; },
            "write one transcript (and Bob record) per trial");
    }

    void add(CLI::App& app, const std::string& flag, const std::string& key, const std::string& help) {
        app.add_option_function<std::string>(flag, [this, key](const std::string& v) { overrides[key] = v; }, help);
    }

    Settings settings() const {
        Settings s;
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) throw std::ios_base::failure("cannot open config file '" + config_path + "'");
            s = read_settings(in);
        }
        for (const auto& [k, v] : overrides) s[k] = v;
        return s;
    }
};

int cmd_run(const RunFlags& flags, std::ostream& out) {
    const ExperimentSpec spec = spec_from_settings(flags.settings());
    const Summary s = run_experiment(spec);
    write_summary_csv(out, s);
    return kOk;
}

int cmd_replay(const RunFlags& flags, const std::string& transcript_path, const std::string& bob_path,
               std::ostream& out) {
    Settings settings = flags.settings();
    // Only the protocol keys matter for replay.
    for (const char* key : {"trials", "attack", "noise_p", "positions", "out_dir", "dump_transcripts", "threads"}) {
        settings.erase(key);
    }
    const ExperimentSpec spec = spec_from_settings(settings);

    std::ifstream tin(transcript_path);
    if (!tin) throw std::ios_base::failure("cannot open transcript '" + transcript_path + "'");
    std::ifstream bin(bob_path);
    if (!bin) throw std::ios_base::failure("cannot open Bob record '" + bob_path + "'");
    const Transcript transcript = read_transcript(tin);
    const BobFile bob = read_bob_file(bin);

    const BobResult result = bob_process(bob.record, transcript, spec.protocol);
    const std::string key = result.final_key ? result.final_key->to_string() : "";
    const std::string recorded = bob.final_key ? bob.final_key->to_string() : "";
    const bool matches = result.final_key.has_value() == bob.final_key.has_value() && key == recorded;
    out << "aborted=" << (result.aborted ? 1 : 0) << " reason=" << to_string(result.abort_reason) << '\n';
    out << "key=" << key << '\n';
    out << "recorded=" << (bob.final_key ? recorded : std::string("aborted")) << '\n';
    out << "match=" << (matches ? "yes" : "no") << '\n';
    return kOk;
}

int cmd_codes_validate(const std::string& path, std::ostream& out) {
    std::ifstream in(path);
    if (!in) throw std::ios_base::failure("cannot open '" + path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    const std::string text = buffer.str();

    auto report = [&](const char* label, const LinearCode& code) {
        out << label << " n=" << code.n() << " k=" << code.k() << " d=" << code.d();
        if (code.k() <= 24) {
            const auto dmin = code.min_distance();
            out << " min_distance=" << dmin << (dmin >= code.d() ? " ok" : " VIOLATED");
            if (dmin < code.d()) {
                out << '\n';
                throw std::invalid_argument("declared distance " + std::to_string(code.d()) +
                                            " exceeds actual minimum distance " + std::to_string(dmin));
            }
        }
        out << '\n';
    };

    std::istringstream is(text);
    bool is_pair = false;
    for (std::string line; std::getline(is, line);) {
        if (line.find_first_not_of(" \t\r") != std::string::npos &&
            line.substr(line.find_first_not_of(" \t\r"), 1) == "%") {
            is_pair = true;
        }
    }
    std::istringstream parse_in(text);
    if (is_pair) {
        const CssPair pair = read_css_pair(parse_in, path);
        report("C1", pair.outer());
        report("C2", pair.inner());
        out << "pair key_width=" << pair.key_width() << " valid\n";
    } else {
        report("code", read_code(parse_in));
        out << "valid\n";
    }
    return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Concatenated BB84 simulator and analysis toolkit", "cbb84"};
    app.require_subcommand(1);

    RunFlags run_flags;
    auto* run_cmd = app.add_subcommand("run", "execute protocol trials and write CSV summaries");
    run_flags.attach(*run_cmd, true);

    auto* stats_cmd = app.add_subcommand("stats", "random-sampling and recursion quantities");
    stats_cmd->require_subcommand(1);
    double r = 0.0, z = 0.0, threshold = 0.0, T = 0.0, r0 = 0.0;
    std::uint64_t n = 1;
    std::size_t steps = 1;
    bool exact = false;
    auto* sigma_cmd = stats_cmd->add_subcommand("sigma", "sqrt(r (1 - r) / n)");
    sigma_cmd->add_option("--r", r)->required();
    sigma_cmd->add_option("--n", n)->required();
    auto* thr_cmd = stats_cmd->add_subcommand("threshold", "r + z sigma, clamped to [0, 1]");
    thr_cmd->add_option("--r", r)->required();
    thr_cmd->add_option("--n", n)->required();
    thr_cmd->add_option("--z", z)->required();
    auto* cheat_cmd = stats_cmd->add_subcommand("cheat", "probability that the true rate exceeds a threshold");
    cheat_cmd->add_option("--r", r)->required();
    cheat_cmd->add_option("--n", n)->required();
    cheat_cmd->add_option("--threshold", threshold)->required();
    cheat_cmd->add_flag("--exact", exact, "exact binomial tail instead of the Gaussian approximation");
    auto* rec_cmd = stats_cmd->add_subcommand("recursion", "r_{i+1} = exp(-T^2 / r_i) as CSV");
    rec_cmd->add_option("--T", T)->required();
    rec_cmd->add_option("--r0", r0)->required();
    rec_cmd->add_option("--steps", steps)->required();

    RunFlags replay_flags;
    std::string transcript_path, bob_path;
    auto* replay_cmd = app.add_subcommand("replay", "recompute Bob's key from a transcript and his record");
    replay_cmd->add_option("transcript", transcript_path, "transcript file")->required();
    replay_cmd->add_option("bob", bob_path, "Bob's measurement record")->required();
    replay_flags.attach(*replay_cmd, false);

    auto* codes_cmd = app.add_subcommand("codes", "code file utilities");
    codes_cmd->require_subcommand(1);
    std::string code_path;
    auto* validate_cmd = codes_cmd->add_subcommand("validate", "check a code or CSS pair file");
    validate_cmd->add_option("file", code_path, "code or pair file")->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kConfigError;
    }

    try {
        if (*run_cmd) return cmd_run(run_flags, out);
        if (*replay_cmd) return cmd_replay(replay_flags, transcript_path, bob_path, out);
        if (*validate_cmd) return cmd_codes_validate(code_path, out);
        if (*sigma_cmd) {
            out << num(stats::sigma({r, n})) << '\n';
        } else if (*thr_cmd) {
            out << num(stats::confidence_threshold({r, n}, z)) << '\n';
        } else if (*cheat_cmd) {
            const stats::SamplingModel model{r, n};
            out << num(exact ? stats::cheat_probability_binomial(model, threshold)
                             : stats::cheat_probability(model, threshold))
                << '\n';
        } else if (*rec_cmd) {
            out << "step,r_model,underflow,floored\n";
            for (const auto& s : stats::iterate_error_rate({T, r0}, steps)) {
                char buf[48];
                std::snprintf(buf, sizeof buf, "%.6e", s.rate);
                out << s.step << ',' << buf << ',' << (s.underflow ? 1 : 0) << ',' << (s.floored ? 1 : 0) << '\n';
            }
        }
        return kOk;
    } catch (const ParseError& e) {
        err << "parse error: " << e.what() << '\n';
        return kParseError;
    } catch (const ProtocolDesyncError& e) {
        err << "transcript inconsistent with Bob's record: " << e.what() << '\n';
        return kParseError;
    } catch (const std::ios_base::failure& e) {
        err << "I/O error: " << e.what() << '\n';
        return kIoError;
    } catch (const std::invalid_argument& e) {
        err << "configuration error: " << e.what() << '\n';
        return kConfigError;
    }
}

}  // namespace cbb84::cli
