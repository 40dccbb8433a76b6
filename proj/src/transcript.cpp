#include "cbb84/transcript.hpp"

#include <charconv>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace cbb84 {

ParseError::ParseError(std::size_t line, const std::string& message)
    : std::runtime_error(line == 0 ? message : "line " + std::to_string(line) + ": " + message), line_(line) {}

std::vector<const BlockAnnouncement*> Transcript::stage_blocks(int stage) const {
    std::vector<const BlockAnnouncement*> out;
    for (const auto& b : blocks) {
        if (b.stage == stage) out.push_back(&b);
    }
    return out;
}

std::string join_indices(const std::vector<std::size_t>& indices) {
    std::string out;
    for (std::size_t i = 0; i < indices.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(indices[i]);
    }
    return out;
}

std::vector<std::size_t> split_indices(const std::string& text) {
    std::vector<std::size_t> out;
    if (text.empty()) return out;
    std::size_t start = 0;
    while (true) {
        const auto comma = text.find(',', start);
        const auto piece = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        std::size_t value = 0;
        auto [ptr, ec] = std::from_chars(piece.data(), piece.data() + piece.size(), value);
        if (ec != std::errc{} || ptr != piece.data() + piece.size() || piece.empty()) {
            throw std::invalid_argument("bad index '" + piece + "'");
        }
        out.push_back(value);
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

void write_transcript(std::ostream& os, const Transcript& t) {
    if (t.basis_string) os << "B bits=" << t.basis_string->to_string() << '\n';
    if (t.kept_positions) os << "KEEP positions=" << join_indices(*t.kept_positions) << '\n';
    if (t.check_positions) os << "CHECKPOS positions=" << join_indices(*t.check_positions) << '\n';
    if (t.alice_check_values) os << "ACHK bits=" << t.alice_check_values->to_string() << '\n';
    if (t.bob_check_values) os << "BCHK bits=" << t.bob_check_values->to_string() << '\n';
    std::size_t index[3] = {0, 0, 0};
    for (const auto& b : t.blocks) {
        os << "BLK" << b.stage << " index=" << index[b.stage]++ << " positions=" << join_indices(b.positions)
           << " masked=" << b.masked_word.to_string() << '\n';
    }
}

std::string dump_transcript(const Transcript& t) {
    std::ostringstream os;
    write_transcript(os, t);
    return os.str();
}

namespace {

struct Record {
    std::string tag;
    std::map<std::string, std::string> fields;
};

Record split_record(const std::string& line, std::size_t lineno) {
    Record rec;
    std::istringstream is(line);
    is >> rec.tag;
    std::string token;
    while (is >> token) {
        const auto eq = token.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw ParseError(lineno, "expected field=value, got '" + token + "'");
        }
        if (!rec.fields.emplace(token.substr(0, eq), token.substr(eq + 1)).second) {
            throw ParseError(lineno, "duplicate field '" + token.substr(0, eq) + "'");
        }
    }
    return rec;
}

const std::string& field(const Record& rec, const std::string& name, std::size_t lineno) {
    auto it = rec.fields.find(name);
    if (it == rec.fields.end()) {
        throw ParseError(lineno, rec.tag + " record missing field '" + name + "'");
    }
    return it->second;
}

BitVector bits_field(const Record& rec, const std::string& name, std::size_t lineno) {
    try {
        return BitVector::from_string(field(rec, name, lineno));
    } catch (const std::invalid_argument& e) {
        throw ParseError(lineno, rec.tag + " " + name + ": " + e.what());
    }
}

std::vector<std::size_t> index_field(const Record& rec, const std::string& name, std::size_t lineno) {
    try {
        return split_indices(field(rec, name, lineno));
    } catch (const std::invalid_argument& e) {
        throw ParseError(lineno, rec.tag + " " + name + ": " + e.what());
    }
}

template <typename T>
void set_once(std::optional<T>& slot, T value, const std::string& tag, std::size_t lineno) {
    if (slot) throw ParseError(lineno, "duplicate " + tag + " record");
    slot = std::move(value);
}

}  // namespace

Transcript read_transcript(std::istream& is) {
    Transcript t;
    std::string line;
    std::size_t lineno = 0;
    std::size_t expected_index[3] = {0, 0, 0};
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        const Record rec = split_record(line, lineno);
        if (rec.tag == "B") {
            set_once(t.basis_string, bits_field(rec, "bits", lineno), rec.tag, lineno);
        } else if (rec.tag == "KEEP") {
            set_once(t.kept_positions, index_field(rec, "positions", lineno), rec.tag, lineno);
        } else if (rec.tag == "CHECKPOS") {
            set_once(t.check_positions, index_field(rec, "positions", lineno), rec.tag, lineno);
        } else if (rec.tag == "ACHK") {
            set_once(t.alice_check_values, bits_field(rec, "bits", lineno), rec.tag, lineno);
        } else if (rec.tag == "BCHK") {
            set_once(t.bob_check_values, bits_field(rec, "bits", lineno), rec.tag, lineno);
        } else if (rec.tag == "BLK1" || rec.tag == "BLK2") {
            const int stage = rec.tag == "BLK1" ? 1 : 2;
            std::size_t index = 0;
            const auto& index_text = field(rec, "index", lineno);
            auto [ptr, ec] = std::from_chars(index_text.data(), index_text.data() + index_text.size(), index);
            if (ec != std::errc{} || ptr != index_text.data() + index_text.size()) {
                throw ParseError(lineno, rec.tag + " index '" + index_text + "' is not an integer");
            }
            if (index != expected_index[stage]) {
                throw ParseError(lineno, rec.tag + " index " + index_text + " out of sequence, expected " +
                                             std::to_string(expected_index[stage]));
            }
            ++expected_index[stage];
            BlockAnnouncement b;
            b.stage = stage;
            b.positions = index_field(rec, "positions", lineno);
            b.masked_word = bits_field(rec, "masked", lineno);
            if (b.positions.size() != b.masked_word.size()) {
                throw ParseError(lineno, rec.tag + " has " + std::to_string(b.positions.size()) +
                                             " positions but a masked word of length " +
                                             std::to_string(b.masked_word.size()));
            }
            t.blocks.push_back(std::move(b));
        } else {
            throw ParseError(lineno, "unknown record tag '" + rec.tag + "'");
        }
    }
    return t;
}

Transcript parse_transcript(const std::string& text) {
    std::istringstream is(text);
    return read_transcript(is);
}

}  // namespace cbb84
