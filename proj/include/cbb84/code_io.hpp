#pragma once

#include "cbb84/codes.hpp"

#include <iosfwd>
#include <memory>
#include <string>

namespace cbb84 {

/// Plain-text code block:
///
///     n k d
///     <k generator rows of n '0'/'1' characters>
///     <n - k parity-check rows>
///
/// A pair file holds the C1 block, a line containing only `%`, then the C2
/// block. Blank lines and lines starting with `#` are ignored. Malformed input
/// throws ParseError; a well-formed but invalid code throws InvalidCodeError
/// or InvalidPairError.
LinearCode read_code(std::istream& is);
CssPair read_css_pair(std::istream& is, std::string name = {});

void write_code(std::ostream& os, const LinearCode& code);
void write_css_pair(std::ostream& os, const CssPair& pair);

/// "steane", "golay", or a path to a pair file.
std::shared_ptr<const CssPair> load_pair(const std::string& source);

}  // namespace cbb84
