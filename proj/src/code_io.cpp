#include "cbb84/code_io.hpp"

#include "cbb84/transcript.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

namespace cbb84 {

namespace {

struct Line {
    std::size_t number;
    std::string text;
};

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<Line> content_lines(std::istream& is) {
    std::vector<Line> out;
    std::string raw;
    std::size_t number = 0;
    while (std::getline(is, raw)) {
        ++number;
        auto text = trim(raw);
        if (text.empty() || text.front() == '#') continue;
        out.push_back({number, std::move(text)});
    }
    return out;
}

LinearCode parse_block(const std::vector<Line>& lines, std::size_t& cursor) {
    if (cursor >= lines.size()) throw ParseError(0, "expected code header 'n k d'");
    const Line& header = lines[cursor++];
    std::istringstream hs(header.text);
    long long n = -1, k = -1, d = -1;
    std::string extra;
    if (!(hs >> n >> k >> d) || (hs >> extra) || n < 1 || k < 0 || k > n || d < 0) {
        throw ParseError(header.number, "bad code header '" + header.text + "', expected 'n k d'");
    }
    auto read_rows = [&](long long count, const char* what) {
        std::vector<BitVector> rows;
        for (long long i = 0; i < count; ++i) {
            if (cursor >= lines.size() || lines[cursor].text == "%") {
                throw ParseError(cursor < lines.size() ? lines[cursor].number : 0,
                                 std::string("expected ") + std::to_string(count) + " " + what + " rows, found " +
                                     std::to_string(i));
            }
            const Line& line = lines[cursor++];
            if (line.text.size() != static_cast<std::size_t>(n)) {
                throw ParseError(line.number, std::string(what) + " row has length " +
                                                  std::to_string(line.text.size()) + ", expected " + std::to_string(n));
            }
            try {
                rows.push_back(BitVector::from_string(line.text));
            } catch (const std::invalid_argument& e) {
                throw ParseError(line.number, e.what());
            }
        }
        return BitMatrix::from_rows(std::move(rows), static_cast<std::size_t>(n));
    };
    BitMatrix g = read_rows(k, "generator");
    BitMatrix h = read_rows(n - k, "parity-check");
    return LinearCode(static_cast<std::size_t>(d), std::move(g), std::move(h));
}

}  // namespace

LinearCode read_code(std::istream& is) {
    const auto lines = content_lines(is);
    std::size_t cursor = 0;
    auto code = parse_block(lines, cursor);
    if (cursor != lines.size()) {
        throw ParseError(lines[cursor].number, "trailing content after code block");
    }
    return code;
}

CssPair read_css_pair(std::istream& is, std::string name) {
    const auto lines = content_lines(is);
    std::size_t cursor = 0;
    auto outer = parse_block(lines, cursor);
    if (cursor >= lines.size() || lines[cursor].text != "%") {
        throw ParseError(cursor < lines.size() ? lines[cursor].number : 0, "expected '%' separating C1 and C2");
    }
    ++cursor;
    auto inner = parse_block(lines, cursor);
    if (cursor != lines.size()) {
        throw ParseError(lines[cursor].number, "trailing content after C2 block");
    }
    return CssPair(std::move(outer), std::move(inner), std::move(name));
}

void write_code(std::ostream& os, const LinearCode& code) {
    os << code.n() << ' ' << code.k() << ' ' << code.d() << '\n';
    for (const auto& row : code.generator().row_vectors()) os << row.to_string() << '\n';
    for (const auto& row : code.parity_check().row_vectors()) os << row.to_string() << '\n';
}

void write_css_pair(std::ostream& os, const CssPair& pair) {
    write_code(os, pair.outer());
    os << "%\n";
    write_code(os, pair.inner());
}

std::shared_ptr<const CssPair> load_pair(const std::string& source) {
    if (source == "steane") return std::make_shared<const CssPair>(make_steane_pair());
    if (source == "golay") return std::make_shared<const CssPair>(make_golay_pair());
    std::ifstream in(source);
    if (!in) {
        throw std::ios_base::failure("cannot open code pair file '" + source + "'");
    }
    return std::make_shared<const CssPair>(read_css_pair(in, source));
}

}  // namespace cbb84
