#pragma once

#include "cbb84/gf2.hpp"

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cbb84 {

/// Malformed or incomplete text input. `line()` is 1-based, 0 when the
/// problem is not tied to a line (e.g. a missing record).
class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, const std::string& message);
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// One "u + v" announcement. Stage-1 positions index the transmission;
/// stage-2 positions index the stage-1 key string.
struct BlockAnnouncement {
    int stage = 1;
    std::vector<std::size_t> positions;
    BitVector masked_word;

    friend bool operator==(const BlockAnnouncement&, const BlockAnnouncement&) = default;
};

/// Public classical messages of one run, in protocol order. Records that
/// were never sent (the run aborted earlier) are absent.
struct Transcript {
    std::optional<BitVector> basis_string;                   // B
    std::optional<std::vector<std::size_t>> kept_positions;   // KEEP
    std::optional<std::vector<std::size_t>> check_positions;  // CHECKPOS
    std::optional<BitVector> alice_check_values;              // ACHK
    std::optional<BitVector> bob_check_values;                // BCHK
    std::vector<BlockAnnouncement> blocks;                    // BLK1 / BLK2

    std::vector<const BlockAnnouncement*> stage_blocks(int stage) const;

    friend bool operator==(const Transcript&, const Transcript&) = default;
};

/// Line format, one record per line:
///
///     B bits=0110...
///     KEEP positions=0,2,5
///     CHECKPOS positions=...
///     ACHK bits=...
///     BCHK bits=...
///     BLK1 index=0 positions=... masked=...
///     BLK2 index=0 positions=... masked=...
void write_transcript(std::ostream& os, const Transcript& t);
std::string dump_transcript(const Transcript& t);

/// Inverse of write_transcript. Throws ParseError naming the line.
Transcript read_transcript(std::istream& is);
Transcript parse_transcript(const std::string& text);

std::string join_indices(const std::vector<std::size_t>& indices);
/// Comma-separated non-negative integers; empty string gives an empty list.
std::vector<std::size_t> split_indices(const std::string& text);

}  // namespace cbb84
