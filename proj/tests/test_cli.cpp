#include "cli.hpp"

#include "cbb84/code_io.hpp"
#include "cbb84/experiment.hpp"
#include "cbb84/transcript.hpp"

#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

using namespace cbb84;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result invoke(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::filesystem::path scratch(const std::string& name) {
    const char* base = std::getenv("CBB84_TEST_TMP");
    auto dir = std::filesystem::path(base ? base : std::filesystem::temp_directory_path().string()) / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const std::filesystem::path& p, const std::string& text) { std::ofstream(p) << text; }

}  // namespace

TEST_CASE("stats subcommands") {
    auto r = invoke({"stats", "sigma", "--r", "0.10", "--n", "1000"});
    CHECK(r.code == 0);
    CHECK(std::stod(r.out) == doctest::Approx(0.009487).epsilon(1e-4));

    r = invoke({"stats", "threshold", "--r", "0.10", "--n", "1000", "--z", "20"});
    CHECK(r.code == 0);
    CHECK(std::stod(r.out) == doctest::Approx(0.2897).epsilon(1e-3));

    r = invoke({"stats", "cheat", "--r", "0.25", "--n", "49", "--threshold", "0.124", "--exact"});
    CHECK(r.code == 0);
    CHECK(std::stod(r.out) > 0.97);

    r = invoke({"stats", "recursion", "--T", "0.3", "--r0", "0.01", "--steps", "3"});
    CHECK(r.code == 0);
    std::istringstream lines(r.out);
    std::string header, first, second, third;
    std::getline(lines, header);
    std::getline(lines, first);
    std::getline(lines, second);
    std::getline(lines, third);
    CHECK(header == "step,r_model,underflow,floored");
    CHECK(first == "1,1.234098e-04,0,0");
    CHECK(second.rfind("2,", 0) == 0);
    CHECK(second.find(",1,0") != std::string::npos);
    CHECK(third.find(",1,1") != std::string::npos);
}

TEST_CASE("exit codes") {
    CHECK(invoke({"stats", "sigma", "--r", "1.5", "--n", "10"}).code == cli::kConfigError);
    CHECK(invoke({"stats", "sigma", "--r", "0.1"}).code == cli::kConfigError);
    CHECK(invoke({"bogus"}).code == cli::kConfigError);
    CHECK(invoke({"run", "--trials", "0"}).code == cli::kConfigError);
    CHECK(invoke({"run", "--config", "/no/such/file.cfg"}).code == cli::kIoError);
    CHECK(invoke({"replay", "/no/such/t.txt", "/no/such/b.txt"}).code == cli::kIoError);
    CHECK(invoke({"--help"}).code == cli::kOk);

    const auto dir = scratch("cli_exit");
    spit(dir / "bad.cfg", "this line has no equals sign\n");
    const auto r = invoke({"run", "--config", (dir / "bad.cfg").string()});
    CHECK(r.code == cli::kParseError);
    CHECK(r.err.find("line 1") != std::string::npos);
}

TEST_CASE("run, dump, and replay") {
    const auto dir = scratch("cli_run");
    const auto out_dir = dir / "out";
    auto r = invoke({"run", "--trials", "1", "--seed", "42", "--dump-transcripts", "--out-dir", out_dir.string()});
    REQUIRE(r.code == 0);
    CHECK(r.out.rfind("trials,aborted,abort_fraction", 0) == 0);

    std::size_t files = 0;
    for (const auto& e : std::filesystem::directory_iterator(out_dir / "transcripts")) {
        (void)e;
        ++files;
    }
    CHECK(files == 1);
    const auto tpath = out_dir / "transcripts" / transcript_filename(0);
    const auto bpath = out_dir / "bob" / transcript_filename(0);
    const std::string text = slurp(tpath);
    CHECK(dump_transcript(parse_transcript(text)) == text);

    SUBCASE("clean replay matches") {
        r = invoke({"replay", tpath.string(), bpath.string()});
        CHECK(r.code == 0);
        CHECK(r.out.find("match=yes") != std::string::npos);
    }
    SUBCASE("truncated transcript names the missing tag") {
        std::istringstream in(text);
        std::string kept;
        for (std::string line; std::getline(in, line);) {
            if (line.rfind("BLK", 0) == 0) break;
            kept += line + '\n';
        }
        spit(dir / "truncated.txt", kept);
        r = invoke({"replay", (dir / "truncated.txt").string(), bpath.string()});
        CHECK(r.code == cli::kParseError);
        CHECK(r.err.find("missing tag BLK1") != std::string::npos);
    }
    SUBCASE("malformed line reports its number") {
        spit(dir / "garbled.txt", text.substr(0, text.find('\n') + 1) + "KEEP positions=1,x\n");
        r = invoke({"replay", (dir / "garbled.txt").string(), bpath.string()});
        CHECK(r.code == cli::kParseError);
        CHECK(r.err.find("line 2") != std::string::npos);
    }
    SUBCASE("one flipped masked bit is reported without a crash") {
        auto t = parse_transcript(text);
        t.blocks[0].masked_word.flip(0);
        spit(dir / "flipped.txt", dump_transcript(t));
        r = invoke({"replay", (dir / "flipped.txt").string(), bpath.string()});
        CHECK(r.code == 0);
        CHECK(r.out.find("match=") != std::string::npos);
    }
    SUBCASE("flips beyond the correction radius change the key") {
        auto t = parse_transcript(text);
        for (std::size_t b : {0, 1}) {
            t.blocks[b].masked_word.flip(0);
            t.blocks[b].masked_word.flip(1);
        }
        spit(dir / "flipped2.txt", dump_transcript(t));
        r = invoke({"replay", (dir / "flipped2.txt").string(), bpath.string()});
        CHECK(r.code == 0);
        CHECK(r.out.find("match=no") != std::string::npos);
    }
}

TEST_CASE("codes validate") {
    const auto dir = scratch("cli_codes");
    {
        std::ofstream out(dir / "steane.txt");
        write_css_pair(out, make_steane_pair());
    }
    auto r = invoke({"codes", "validate", (dir / "steane.txt").string()});
    CHECK(r.code == 0);
    CHECK(r.out.find("key_width=1 valid") != std::string::npos);

    {
        std::ofstream out(dir / "hamming.txt");
        write_code(out, make_hamming_7_4());
    }
    r = invoke({"codes", "validate", (dir / "hamming.txt").string()});
    CHECK(r.code == 0);
    CHECK(r.out.find("min_distance=3 ok") != std::string::npos);

    // Declared distance 4 on the Hamming code.
    std::string text = slurp(dir / "hamming.txt");
    text.replace(text.find("7 4 3"), 5, "7 4 4");
    spit(dir / "overclaim.txt", text);
    CHECK(invoke({"codes", "validate", (dir / "overclaim.txt").string()}).code == cli::kConfigError);

    spit(dir / "broken.txt", "7 4 3\n1110000\n");
    CHECK(invoke({"codes", "validate", (dir / "broken.txt").string()}).code == cli::kParseError);

    r = invoke({"run", "--trials", "2", "--stage1", (dir / "steane.txt").string(), "--out-dir",
             (dir / "out").string()});
    CHECK(r.code == 0);
}
