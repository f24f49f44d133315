#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace bsm {

/// Classic Porter (1980) suffix-stripping stemmer over lowercase ASCII words.
/// Words of one or two letters are returned unchanged, as in the reference
/// implementation.
std::string porter_stem(std::string_view word);

/// Lowercased alphanumeric runs of `text`; everything else separates tokens.
std::vector<std::string> word_tokens(std::string_view text);

}  // namespace bsm
