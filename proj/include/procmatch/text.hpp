#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace procmatch {

/// Decodes UTF-8 into Unicode scalar values. Malformed sequences decode to
/// U+FFFD, one per offending byte.
std::u32string decode_utf8(std::string_view text);

/// Minimum number of single-character insertions, deletions and
/// substitutions turning `s` into `t`.
std::size_t levenshtein(std::u32string_view s, std::u32string_view t);
std::size_t levenshtein(std::string_view s, std::string_view t);

/// 1 - LD(s, t) / max(|s|, |t|), lengths in scalar values; 1 when both are
/// empty. Inputs are expected to be normalized names.
double name_similarity(std::u32string_view s, std::u32string_view t);
double name_similarity(std::string_view s, std::string_view t);

} // namespace procmatch
