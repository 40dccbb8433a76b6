#include "cbb84/experiment.hpp"

#include "cbb84/code_io.hpp"
#include "cbb84/transcript.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <thread>

namespace cbb84 {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double to_double(const std::string& key, const std::string& value) {
    double out = 0.0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc{} || ptr != value.data() + value.size() || !std::isfinite(out)) {
        throw ConfigError(key + ": '" + value + "' is not a number");
    }
    return out;
}

std::uint64_t to_unsigned(const std::string& key, const std::string& value) {
    std::uint64_t out = 0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc{} || ptr != value.data() + value.size()) {
        throw ConfigError(key + ": '" + value + "' is not a non-negative integer");
    }
    return out;
}

bool to_bool(const std::string& key, const std::string& value) {
    if (value == "1" || value == "true" || value == "yes") return true;
    if (value == "0" || value == "false" || value == "no") return false;
    throw ConfigError(key + ": '" + value + "' is not a boolean");
}

std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::string format_optional(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }

}  // namespace

Settings read_settings(std::istream& is) {
    Settings out;
    std::string raw;
    std::size_t lineno = 0;
    while (std::getline(is, raw)) {
        ++lineno;
        const auto hash = raw.find('#');
        const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ParseError(lineno, "expected key=value, got '" + line + "'");
        }
        const std::string key = trim(line.substr(0, eq));
        if (key.empty()) throw ParseError(lineno, "empty key");
        out[key] = trim(line.substr(eq + 1));
    }
    return out;
}

AttackModel make_attack(const std::string& kind, double p, const std::vector<std::size_t>& positions) {
    AttackModel attack;
    if (kind == "none") {
        attack = NoAttack{};
    } else if (kind == "bitflip") {
        attack = BitFlipAttack{p};
    } else if (kind == "intercept") {
        attack = InterceptResendAttack{p};
    } else if (kind == "correlated") {
        attack = CorrelatedPositionsAttack{positions, p};
    } else {
        throw ConfigError("unknown attack '" + kind + "' (none, bitflip, intercept, correlated)");
    }
    try {
        validate_attack(attack);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return attack;
}

ExperimentSpec spec_from_settings(const Settings& settings) {
    static const char* const known[] = {"stage1", "stage2",  "delta",        "threshold",        "seed",
                                        "trials", "attack",  "noise_p",      "positions",        "policy",
                                        "max_restarts", "out_dir", "dump_transcripts", "threads"};
    for (const auto& [key, value] : settings) {
        if (std::find_if(std::begin(known), std::end(known), [&](const char* k) { return key == k; }) ==
            std::end(known)) {
            throw ConfigError("unknown configuration key '" + key + "'");
        }
    }
    auto get = [&](const std::string& key, const std::string& fallback) {
        auto it = settings.find(key);
        return it == settings.end() ? fallback : it->second;
    };

    ExperimentSpec spec;
    try {
        spec.protocol.stage1_pair = load_pair(get("stage1", "steane"));
        spec.protocol.stage2_pair = load_pair(get("stage2", "steane"));
    } catch (const ParseError& e) {
        throw ConfigError(std::string("code pair file: ") + e.what());
    } catch (const std::ios_base::failure& e) {
        throw ConfigError(e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("code pair: ") + e.what());
    }
    spec.protocol.delta = to_double("delta", get("delta", "0.1"));
    spec.protocol.abort_threshold = to_double("threshold", get("threshold", "0.124"));
    spec.protocol.seed = to_unsigned("seed", get("seed", "0"));
    spec.protocol.max_restarts = to_unsigned("max_restarts", get("max_restarts", "16"));
    const std::string policy = get("policy", "flag");
    if (policy == "flag") {
        spec.protocol.decode_policy = DecodeFailurePolicy::FlagAndContinue;
    } else if (policy == "strict") {
        spec.protocol.decode_policy = DecodeFailurePolicy::Strict;
    } else {
        throw ConfigError("policy must be 'flag' or 'strict'");
    }
    try {
        validate(spec.protocol);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }

    std::vector<std::size_t> positions;
    try {
        positions = split_indices(get("positions", ""));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("positions: ") + e.what());
    }
    spec.attack = make_attack(get("attack", "none"), to_double("noise_p", get("noise_p", "0")), positions);
    try {
        validate_attack(spec.attack, spec.protocol.qubit_count());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }

    spec.trials = to_unsigned("trials", get("trials", "1"));
    if (spec.trials < 1) throw ConfigError("trials must be at least 1");
    spec.out_dir = get("out_dir", ".");
    spec.dump_transcripts = to_bool("dump_transcripts", get("dump_transcripts", "false"));
    spec.threads = to_unsigned("threads", get("threads", "0"));
    return spec;
}

std::vector<RunResult> run_trials(const ExperimentSpec& spec) {
    std::vector<RunResult> results(spec.trials);
    std::size_t workers = spec.threads ? spec.threads : std::max(1U, std::thread::hardware_concurrency());
    workers = std::min(workers, spec.trials);

    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < spec.trials; i = next++) {
            ProtocolConfig config = spec.protocol;
            config.seed = spec.protocol.seed + i;
            results[i] = run_protocol(config, spec.attack);
        }
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    }
    return results;
}

std::vector<TrialRow> to_rows(const ExperimentSpec& spec, const std::vector<RunResult>& results) {
    std::vector<TrialRow> rows;
    rows.reserve(results.size());
    for (std::size_t i = 0; i < results.size(); ++i) {
        rows.push_back({i, spec.protocol.seed + i, results[i].outcome});
    }
    return rows;
}

Summary summarize(const std::vector<TrialRow>& rows) {
    Summary s;
    s.trials = rows.size();
    double sum = 0.0;
    std::vector<double> rates;
    for (const auto& row : rows) {
        const auto& o = row.outcome;
        if (o.aborted) {
            ++s.aborted;
            if (o.abort_reason == AbortReason::InsufficientSift) ++s.insufficient_sift;
            if (o.abort_reason == AbortReason::Security) ++s.security_aborts;
        } else {
            ++s.completed;
            if (o.keys_equal()) ++s.key_agreements;
        }
        if (o.observed_check_error_rate) {
            rates.push_back(*o.observed_check_error_rate);
            sum += *o.observed_check_error_rate;
        }
    }
    s.checked = rates.size();
    s.abort_fraction = s.trials ? static_cast<double>(s.aborted) / static_cast<double>(s.trials) : 0.0;
    if (!rates.empty()) {
        const double mean = sum / static_cast<double>(rates.size());
        s.mean_check_error = mean;
        if (rates.size() > 1) {
            double ss = 0.0;
            for (double r : rates) ss += (r - mean) * (r - mean);
            s.stddev_check_error = std::sqrt(ss / static_cast<double>(rates.size() - 1));
        }
    }
    if (s.completed) {
        s.key_agreement_fraction = static_cast<double>(s.key_agreements) / static_cast<double>(s.completed);
    }
    return s;
}

void write_trials_csv(std::ostream& os, const std::vector<TrialRow>& rows) {
    os << "trial,seed,aborted,abort_reason,restarts,sifted_count,check_error_rate,keys_equal,"
          "stage1_decode_failures,stage2_decode_failures,decode_failures,alice_key,bob_key\n";
    for (const auto& row : rows) {
        const auto& o = row.outcome;
        os << row.trial << ',' << row.seed << ',' << (o.aborted ? 1 : 0) << ',' << to_string(o.abort_reason) << ','
           << o.restarts << ',' << o.sifted_count << ',' << format_optional(o.observed_check_error_rate) << ','
           << (o.keys_equal() ? 1 : 0) << ',' << o.stage1_decode_failures << ',' << o.stage2_decode_failures << ','
           << o.decode_failures() << ',' << (o.alice_final_key ? o.alice_final_key->to_string() : "") << ','
           << (o.bob_final_key ? o.bob_final_key->to_string() : "") << '\n';
    }
}

void write_summary_csv(std::ostream& os, const Summary& s) {
    os << "trials,aborted,abort_fraction,insufficient_sift,security_aborts,checked,mean_check_error,"
          "stddev_check_error,completed,key_agreements,key_agreement_fraction\n";
    os << s.trials << ',' << s.aborted << ',' << format_number(s.abort_fraction) << ',' << s.insufficient_sift << ','
       << s.security_aborts << ',' << s.checked << ',' << format_optional(s.mean_check_error) << ','
       << format_optional(s.stddev_check_error) << ',' << s.completed << ',' << s.key_agreements << ','
       << format_optional(s.key_agreement_fraction) << '\n';
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream is(line);
    while (std::getline(is, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

AbortReason reason_from_string(const std::string& s, std::size_t lineno) {
    for (auto r : {AbortReason::None, AbortReason::InsufficientSift, AbortReason::Security,
                   AbortReason::DecodeFailure}) {
        if (s == to_string(r)) return r;
    }
    throw ParseError(lineno, "unknown abort reason '" + s + "'");
}

}  // namespace

std::vector<TrialRow> read_trials_csv(std::istream& is) {
    std::vector<TrialRow> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (lineno == 1 || line.empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != 13) throw ParseError(lineno, "expected 13 columns");
        try {
            TrialRow row;
            row.trial = std::stoull(cells[0]);
            row.seed = std::stoull(cells[1]);
            auto& o = row.outcome;
            o.aborted = cells[2] == "1";
            o.abort_reason = reason_from_string(cells[3], lineno);
            o.restarts = std::stoull(cells[4]);
            o.sifted_count = std::stoull(cells[5]);
            if (!cells[6].empty()) o.observed_check_error_rate = std::stod(cells[6]);
            o.stage1_decode_failures = std::stoull(cells[8]);
            o.stage2_decode_failures = std::stoull(cells[9]);
            if (!cells[11].empty() || !o.aborted) o.alice_final_key = BitVector::from_string(cells[11]);
            if (!cells[12].empty() || !o.aborted) o.bob_final_key = BitVector::from_string(cells[12]);
            rows.push_back(std::move(row));
        } catch (const std::logic_error& e) {
            throw ParseError(lineno, e.what());
        }
    }
    return rows;
}

std::string transcript_filename(std::size_t trial) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "trial_%06zu.txt", trial);
    return buf;
}

namespace {

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::ios_base::failure("cannot write '" + path.string() + "'");
    return out;
}

}  // namespace

Summary run_experiment(const ExperimentSpec& spec) {
    std::error_code ec;
    std::filesystem::create_directories(spec.out_dir, ec);
    if (ec) throw std::ios_base::failure("cannot create '" + spec.out_dir.string() + "': " + ec.message());

    const auto results = run_trials(spec);
    const auto rows = to_rows(spec, results);
    const auto summary = summarize(rows);

    {
        auto out = open_output(spec.out_dir / "trials.csv");
        write_trials_csv(out, rows);
        if (!out) throw std::ios_base::failure("write failed for trials.csv");
    }
    {
        auto out = open_output(spec.out_dir / "summary.csv");
        write_summary_csv(out, summary);
        if (!out) throw std::ios_base::failure("write failed for summary.csv");
    }
    if (spec.dump_transcripts) {
        const auto tdir = spec.out_dir / "transcripts";
        const auto bdir = spec.out_dir / "bob";
        std::filesystem::create_directories(tdir, ec);
        if (!ec) std::filesystem::create_directories(bdir, ec);
        if (ec) throw std::ios_base::failure("cannot create transcript directories: " + ec.message());
        for (std::size_t i = 0; i < results.size(); ++i) {
            auto t = open_output(tdir / transcript_filename(i));
            write_transcript(t, results[i].transcript);
            auto b = open_output(bdir / transcript_filename(i));
            write_bob_file(b, {results[i].bob_record, results[i].outcome.bob_final_key});
            if (!t || !b) throw std::ios_base::failure("write failed for trial " + std::to_string(i));
        }
    }
    return summary;
}

}  // namespace cbb84
