// Copyright the eager authors. Licensed under the Apache 2.0 license. See LICENSE in the project root.
#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace eager {

// UTF-8 <-> Unicode scalar values. Invalid byte sequences decode to U+FFFD so
// malformed input degrades instead of aborting a whole ingestion run.
std::u32string utf8_decode(std::string_view s);
std::string utf8_encode(const std::u32string& s);

// ASCII whitespace trim.
std::string_view trim(std::string_view s);

// Unicode NFC normalization (ICU-backed).
std::string nfc(std::string_view s);

// Per-codepoint Unicode lowercasing (simple case mapping).
std::string to_lower(std::string_view s);

bool is_alnum(char32_t cp);

}  // namespace eager
