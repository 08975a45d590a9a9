#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace bridg::text {

std::string trim(std::string_view s);

// Unicode NFC. Compiled against ICU when available; identity otherwise
// (BRIDG_HAVE_ICU). All ingested corpus/pool text goes through normalize().
std::string nfc(std::string_view s);
bool nfc_available();

// NFC + trim; the canonical form for every sentence entering the pipeline.
std::string normalize(std::string_view s);

// UTF-8 decode to Unicode scalar values; invalid bytes become U+FFFD.
std::u32string to_utf32(std::string_view s);

std::vector<std::string> split_whitespace(std::string_view s);
std::vector<std::string> split_lines(std::string_view s);

// ASCII-only case mapping; used by scripted mock backends.
std::string ascii_upper(std::string_view s);

bool starts_with(std::string_view s, std::string_view prefix);

}  // namespace bridg::text
