#include "cbb84/code_io.hpp"
#include "cbb84/codes.hpp"
#include "cbb84/experiment.hpp"
#include "cbb84/protocol.hpp"
#include "cbb84/stats.hpp"
#include "cbb84/transcript.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

namespace py = pybind11;
using namespace cbb84;

// Bit strings cross the boundary as "0101" text.

namespace {

std::optional<std::string> bits(const std::optional<BitVector>& v) {
    if (!v) return std::nullopt;
    return v->to_string();
}

ProtocolConfig make_config(const std::string& stage1, const std::string& stage2, std::uint64_t seed, double delta,
                           double threshold, const std::string& policy, std::size_t max_restarts,
                           bool randomize_blocks) {
    ProtocolConfig c;
    c.stage1_pair = load_pair(stage1);
    c.stage2_pair = load_pair(stage2);
    c.seed = seed;
    c.delta = delta;
    c.abort_threshold = threshold;
    c.max_restarts = max_restarts;
    c.randomize_blocks = randomize_blocks;
    if (policy == "strict") {
        c.decode_policy = DecodeFailurePolicy::Strict;
    } else if (policy != "flag") {
        throw std::invalid_argument("policy must be 'flag' or 'strict'");
    }
    validate(c);
    return c;
}

py::dict outcome_dict(const RunOutcome& o) {
    py::dict d;
    d["aborted"] = o.aborted;
    d["abort_reason"] = to_string(o.abort_reason);
    d["check_error_rate"] = o.observed_check_error_rate;
    d["alice_key"] = bits(o.alice_final_key);
    d["bob_key"] = bits(o.bob_final_key);
    d["alice_stage1_key"] = bits(o.alice_stage1_key);
    d["bob_stage1_key"] = bits(o.bob_stage1_key);
    d["keys_equal"] = o.keys_equal();
    d["decode_failures"] = o.decode_failures();
    d["transmitted"] = o.transmitted_count;
    d["sifted"] = o.sifted_count;
    d["restarts"] = o.restarts;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Concatenated BB84 simulator core";

    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
    py::register_exception<ProtocolDesyncError>(m, "ProtocolDesyncError", PyExc_RuntimeError);

    auto stats_mod = m.def_submodule("stats", "random-sampling and recursion quantities");
    stats_mod.def("sigma", [](double r, std::uint64_t n) { return stats::sigma({r, n}); }, py::arg("r"), py::arg("n"));
    stats_mod.def(
        "confidence_threshold", [](double r, std::uint64_t n, double z) { return stats::confidence_threshold({r, n}, z); },
        py::arg("r"), py::arg("n"), py::arg("z"));
    stats_mod.def(
        "cheat_probability",
        [](double r, std::uint64_t n, double threshold, bool exact) {
            return exact ? stats::cheat_probability_binomial({r, n}, threshold)
                         : stats::cheat_probability({r, n}, threshold);
        },
        py::arg("r"), py::arg("n"), py::arg("threshold"), py::arg("exact") = false);
    stats_mod.def(
        "iterate_error_rate",
        [](double t, double r0, std::size_t steps) {
            std::vector<double> out;
            for (const auto& s : stats::iterate_error_rate({t, r0}, steps)) out.push_back(s.rate);
            return out;
        },
        py::arg("T"), py::arg("r0"), py::arg("steps"));

    py::class_<LinearCode>(m, "LinearCode")
        .def_property_readonly("n", &LinearCode::n)
        .def_property_readonly("k", &LinearCode::k)
        .def_property_readonly("d", &LinearCode::d)
        .def("contains", [](const LinearCode& c, const std::string& w) { return c.contains(BitVector::from_string(w)); })
        .def("syndrome", [](const LinearCode& c, const std::string& w) { return c.syndrome(BitVector::from_string(w)).to_string(); })
        .def("codewords", [](const LinearCode& c) {
            std::vector<std::string> out;
            for (const auto& w : c.codewords()) out.push_back(w.to_string());
            return out;
        })
        .def("min_distance", &LinearCode::min_distance);

    py::class_<CssPair, std::shared_ptr<CssPair>>(m, "CssPair")
        .def_property_readonly("outer", &CssPair::outer, py::return_value_policy::reference_internal)
        .def_property_readonly("inner", &CssPair::inner, py::return_value_policy::reference_internal)
        .def_property_readonly("n", &CssPair::n)
        .def_property_readonly("key_width", &CssPair::key_width)
        .def_property_readonly("name", &CssPair::name)
        .def("coset_label",
             [](const CssPair& p, const std::string& w) { return p.coset_label(BitVector::from_string(w)).to_string(); })
        .def("decode", [](const CssPair& p, const std::string& w) -> std::optional<std::string> {
            auto r = p.decoder().decode(BitVector::from_string(w));
            if (!r) return std::nullopt;
            return r->codeword.to_string();
        });

    m.def("load_pair", [](const std::string& source) { return std::make_shared<CssPair>(*load_pair(source)); },
          py::arg("source"), "'steane', 'golay', or a pair file path");

    m.def(
        "run_protocol",
        [](std::uint64_t seed, const std::string& attack, double p, const std::vector<std::size_t>& positions,
           const std::string& stage1, const std::string& stage2, double delta, double threshold,
           const std::string& policy, std::size_t max_restarts, bool randomize_blocks) {
            const auto config =
                make_config(stage1, stage2, seed, delta, threshold, policy, max_restarts, randomize_blocks);
            const auto run = run_protocol(config, make_attack(attack, p, positions));
            py::dict d = outcome_dict(run.outcome);
            d["transcript"] = dump_transcript(run.transcript);
            d["bob_bases"] = run.bob_record.bases.to_string();
            d["bob_results"] = run.bob_record.results.to_string();
            return d;
        },
        py::arg("seed") = 0, py::arg("attack") = "none", py::arg("p") = 0.0,
        py::arg("positions") = std::vector<std::size_t>{}, py::arg("stage1") = "steane", py::arg("stage2") = "steane",
        py::arg("delta") = 0.1, py::arg("threshold") = 0.124, py::arg("policy") = "flag",
        py::arg("max_restarts") = 16, py::arg("randomize_blocks") = true);

    m.def(
        "replay",
        [](const std::string& transcript, const std::string& bob_bases, const std::string& bob_results,
           const std::string& stage1, const std::string& stage2, double threshold, const std::string& policy) {
            const auto config = make_config(stage1, stage2, 0, 0.1, threshold, policy, 0, true);
            BobRecord bob{BitVector::from_string(bob_bases), BitVector::from_string(bob_results)};
            const auto result = bob_process(bob, parse_transcript(transcript), config);
            py::dict d;
            d["aborted"] = result.aborted;
            d["abort_reason"] = to_string(result.abort_reason);
            d["key"] = bits(result.final_key);
            return d;
        },
        py::arg("transcript"), py::arg("bob_bases"), py::arg("bob_results"), py::arg("stage1") = "steane",
        py::arg("stage2") = "steane", py::arg("threshold") = 0.124, py::arg("policy") = "flag");

    m.def(
        "run_experiment",
        [](const std::map<std::string, std::string>& settings) {
            const auto spec = spec_from_settings(settings);
            const auto s = run_experiment(spec);
            py::dict d;
            d["trials"] = s.trials;
            d["aborted"] = s.aborted;
            d["abort_fraction"] = s.abort_fraction;
            d["mean_check_error"] = s.mean_check_error;
            d["stddev_check_error"] = s.stddev_check_error;
            d["key_agreement_fraction"] = s.key_agreement_fraction;
            return d;
        },
        py::arg("settings"), "Run trials as configured by key=value settings; writes CSVs to out_dir.");
}
