#include "ncb/text.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <stdexcept>

namespace ncb {

namespace {

std::string ascii_lower(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    return out;
}

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

// Common Unicode punctuation ranges (general category P plus a few S-category
// quote marks models emit). Not the full Unicode table; covers the general
// punctuation block, CJK brackets, and fullwidth forms alongside ASCII.
struct Range {
    std::uint32_t lo, hi;
};
constexpr Range kUnicodePunct[] = {
    {0x00A1, 0x00A1}, {0x00A7, 0x00A7}, {0x00AB, 0x00AB}, {0x00B6, 0x00B7},
    {0x00BB, 0x00BB}, {0x00BF, 0x00BF}, {0x2010, 0x2027}, {0x2030, 0x205E},
    {0x2E00, 0x2E7F}, {0x3001, 0x3003}, {0x3008, 0x3011}, {0x3014, 0x301F},
    {0x3030, 0x3030}, {0xFE10, 0xFE19}, {0xFE30, 0xFE52}, {0xFE54, 0xFE61},
    {0xFE63, 0xFE63}, {0xFE68, 0xFE68}, {0xFE6A, 0xFE6B}, {0xFF01, 0xFF03},
    {0xFF05, 0xFF0A}, {0xFF0C, 0xFF0F}, {0xFF1A, 0xFF1B}, {0xFF1F, 0xFF20},
    {0xFF3B, 0xFF3D}, {0xFF3F, 0xFF3F}, {0xFF5B, 0xFF5B}, {0xFF5D, 0xFF5D},
    {0xFF5F, 0xFF65},
};

bool is_unicode_punct(std::uint32_t cp) {
    for (const auto& r : kUnicodePunct)
        if (cp >= r.lo && cp <= r.hi) return true;
    return false;
}

// Decodes one UTF-8 codepoint at s[i]; advances i past it. Malformed bytes
// are passed through as single-byte codepoints.
std::uint32_t decode_utf8(std::string_view s, std::size_t& i) {
    unsigned char c0 = static_cast<unsigned char>(s[i]);
    std::size_t len = 1;
    std::uint32_t cp = c0;
    if ((c0 & 0xE0) == 0xC0) {
        len = 2;
        cp = c0 & 0x1F;
    } else if ((c0 & 0xF0) == 0xE0) {
        len = 3;
        cp = c0 & 0x0F;
    } else if ((c0 & 0xF8) == 0xF0) {
        len = 4;
        cp = c0 & 0x07;
    }
    if (i + len > s.size()) len = 1, cp = c0;
    for (std::size_t k = 1; k < len; ++k) {
        unsigned char ck = static_cast<unsigned char>(s[i + k]);
        if ((ck & 0xC0) != 0x80) {
            len = 1;
            cp = c0;
            break;
        }
        cp = (cp << 6) | (ck & 0x3F);
    }
    i += len;
    return cp;
}

std::string strip_punct_and_fold(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        unsigned char c = static_cast<unsigned char>(s[i]);
        if (c < 0x80) {
            if (std::isalnum(c)) {
                out.push_back(static_cast<char>(std::tolower(c)));
            } else {
                out.push_back(' ');
            }
            ++i;
        } else {
            std::size_t start = i;
            std::uint32_t cp = decode_utf8(s, i);
            if (is_unicode_punct(cp)) {
                out.push_back(' ');
            } else {
                out.append(s.substr(start, i - start));
            }
        }
    }
    // collapse whitespace runs and trim
    std::string collapsed;
    collapsed.reserve(out.size());
    bool pending_space = false;
    for (char c : out) {
        if (c == ' ') {
            pending_space = !collapsed.empty();
        } else {
            if (pending_space) collapsed.push_back(' ');
            pending_space = false;
            collapsed.push_back(c);
        }
    }
    return collapsed;
}

}  // namespace

const std::vector<std::string>& default_refusal_lexicon() {
    static const std::vector<std::string> lexicon = {
        "i don't know", "i do not know", "unknown",       "n/a",
        "none",         "no answer",     "cannot answer",
    };
    return lexicon;
}

NormalizedEntity normalize_entity(std::string_view raw) {
    return normalize_entity(raw, default_refusal_lexicon());
}

NormalizedEntity normalize_entity(std::string_view raw,
                                  const std::vector<std::string>& refusal_lexicon) {
    const std::string pre = ascii_lower(trim(raw));
    const std::string value = strip_punct_and_fold(raw);

    bool refusal = false;
    for (const auto& phrase : refusal_lexicon) {
        if (pre == ascii_lower(phrase) || value == strip_punct_and_fold(phrase)) {
            refusal = true;
            break;
        }
    }
    NormalizedEntity out;
    out.value = value;
    out.valid = !refusal && !value.empty();
    return out;
}

bool loose_match(std::string_view prediction, std::string_view gold) {
    const NormalizedEntity p = normalize_entity(prediction);
    const NormalizedEntity g = normalize_entity(gold);
    if (!p.valid || !g.valid)
        throw std::invalid_argument("loose_match: invalid entity after normalization");
    return p.value.find(g.value) != std::string::npos ||
           g.value.find(p.value) != std::string::npos;
}

}  // namespace ncb
