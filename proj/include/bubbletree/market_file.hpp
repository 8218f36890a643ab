#pragma once

#include <string>
#include <string_view>

#include "bubbletree/fixtures.hpp"

namespace bubbletree {

/// Parses the line-oriented market format (see README). Errors carry
/// "source:line:" prefixes; validation failures name the offending nodes.
Instance parse_market_text(std::string_view text, const std::string& source = "<input>");

/// Reads and parses a file; I/O failures raise Errc::invalid_input.
Instance parse_market_file(const std::string& path);

/// Writes an instance in the same format; parse_market_text inverts it.
std::string format_market(const Instance& instance);

}  // namespace bubbletree
