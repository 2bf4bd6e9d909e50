#include "procmatch/text.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

namespace procmatch {

std::u32string decode_utf8(std::string_view text) {
    constexpr char32_t replacement = 0xFFFD;
    std::u32string out;
    out.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        auto b0 = static_cast<unsigned char>(text[i]);
        if (b0 < 0x80) {
            out.push_back(b0);
            ++i;
            continue;
        }
        std::size_t len = 0;
        char32_t cp = 0;
        char32_t min = 0;
        if ((b0 & 0xE0) == 0xC0) {
            len = 2, cp = b0 & 0x1F, min = 0x80;
        } else if ((b0 & 0xF0) == 0xE0) {
            len = 3, cp = b0 & 0x0F, min = 0x800;
        } else if ((b0 & 0xF8) == 0xF0) {
            len = 4, cp = b0 & 0x07, min = 0x10000;
        }
        bool ok = len > 0 && i + len <= text.size();
        for (std::size_t k = 1; ok && k < len; ++k) {
            auto b = static_cast<unsigned char>(text[i + k]);
            if ((b & 0xC0) != 0x80) ok = false;
            cp = (cp << 6) | (b & 0x3F);
        }
        if (ok && (cp < min || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF))) ok = false;
        if (ok) {
            out.push_back(cp);
            i += len;
        } else {
            out.push_back(replacement);
            ++i;
        }
    }
    return out;
}

std::size_t levenshtein(std::u32string_view s, std::u32string_view t) {
    if (s.size() < t.size()) std::swap(s, t);
    if (t.empty()) return s.size();

    // One row over the shorter string.
    std::vector<std::size_t> row(t.size() + 1);
    std::iota(row.begin(), row.end(), std::size_t{0});
    for (std::size_t i = 0; i < s.size(); ++i) {
        std::size_t diagonal = row[0];
        row[0] = i + 1;
        for (std::size_t j = 0; j < t.size(); ++j) {
            std::size_t above = row[j + 1];
            std::size_t substitute = diagonal + (s[i] == t[j] ? 0 : 1);
            row[j + 1] = std::min({above + 1, row[j] + 1, substitute});
            diagonal = above;
        }
    }
    return row[t.size()];
}

std::size_t levenshtein(std::string_view s, std::string_view t) {
    return levenshtein(std::u32string_view(decode_utf8(s)), std::u32string_view(decode_utf8(t)));
}

double name_similarity(std::u32string_view s, std::u32string_view t) {
    const std::size_t longest = std::max(s.size(), t.size());
    if (longest == 0) return 1.0;
    return 1.0 - static_cast<double>(levenshtein(s, t)) / static_cast<double>(longest);
}

double name_similarity(std::string_view s, std::string_view t) {
    return name_similarity(std::u32string_view(decode_utf8(s)), std::u32string_view(decode_utf8(t)));
}

} // namespace procmatch
