#pragma once

// Small UTF-8 / codepoint helpers shared by the tokenizer, the TEI reader
// and the XML parser. Coverage is deliberately limited to what the corpus
// needs: Basic Latin, Latin-1 Supplement and Latin Extended-A, plus the
// General Punctuation block.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace brigata {

inline void append_utf8(std::string& out, uint32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

// Decodes the codepoint starting at s[i] and advances i. Malformed bytes are
// consumed one at a time and returned as U+FFFD so text processing never
// stalls on a bad corpus byte.
inline uint32_t decode_utf8(std::string_view s, size_t& i) {
    const auto byte = [&](size_t k) { return static_cast<uint8_t>(s[k]); };
    uint8_t b0 = byte(i);
    if (b0 < 0x80) { i += 1; return b0; }
    auto cont = [&](size_t k) { return k < s.size() && (byte(k) & 0xC0) == 0x80; };
    if ((b0 & 0xE0) == 0xC0 && cont(i + 1)) {
        uint32_t cp = (uint32_t(b0 & 0x1F) << 6) | (byte(i + 1) & 0x3F);
        i += 2;
        return cp;
    }
    if ((b0 & 0xF0) == 0xE0 && cont(i + 1) && cont(i + 2)) {
        uint32_t cp = (uint32_t(b0 & 0x0F) << 12) | (uint32_t(byte(i + 1) & 0x3F) << 6) |
                      (byte(i + 2) & 0x3F);
        i += 3;
        return cp;
    }
    if ((b0 & 0xF8) == 0xF0 && cont(i + 1) && cont(i + 2) && cont(i + 3)) {
        uint32_t cp = (uint32_t(b0 & 0x07) << 18) | (uint32_t(byte(i + 1) & 0x3F) << 12) |
                      (uint32_t(byte(i + 2) & 0x3F) << 6) | (byte(i + 3) & 0x3F);
        i += 4;
        return cp;
    }
    i += 1;
    return 0xFFFD;
}

inline std::vector<uint32_t> to_codepoints(std::string_view s) {
    std::vector<uint32_t> cps;
    cps.reserve(s.size());
    size_t i = 0;
    while (i < s.size()) cps.push_back(decode_utf8(s, i));
    return cps;
}

inline std::string from_codepoints(const uint32_t* cps, size_t n) {
    std::string out;
    out.reserve(n + n / 2);
    for (size_t i = 0; i < n; ++i) append_utf8(out, cps[i]);
    return out;
}

// Lowercasing for Basic Latin, Latin-1 and Latin Extended-A. Everything the
// Decameron's orthography uses falls in these blocks.
inline uint32_t lower_cp(uint32_t cp) {
    if (cp >= 'A' && cp <= 'Z') return cp + 32;
    if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 32;
    if (cp == 0x130) return 'i';  // dotted capital I
    if (cp >= 0x100 && cp <= 0x137) return (cp | 1u);
    if (cp >= 0x139 && cp <= 0x148) return (cp % 2 == 1) ? cp + 1 : cp;
    if (cp >= 0x14A && cp <= 0x177) return (cp | 1u) == cp ? cp : cp + 1;
    if (cp == 0x178) return 0xFF;
    if (cp == 0x179 || cp == 0x17B || cp == 0x17D) return cp + 1;
    return cp;
}

inline bool is_space_cp(uint32_t cp) {
    switch (cp) {
        case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D: case 0x20:
        case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
        case 0x202F: case 0x205F: case 0x3000:
            return true;
        default:
            return cp >= 0x2000 && cp <= 0x200A;
    }
}

inline bool is_punct_cp(uint32_t cp) {
    if (cp < 0x80) {
        return (cp >= 0x21 && cp <= 0x2F) || (cp >= 0x3A && cp <= 0x40) ||
               (cp >= 0x5B && cp <= 0x60) || (cp >= 0x7B && cp <= 0x7E);
    }
    switch (cp) {
        case 0xA1: case 0xA7: case 0xAB: case 0xB6: case 0xB7: case 0xBB: case 0xBF:
            return true;
        default:
            return (cp >= 0x2010 && cp <= 0x205E) || (cp >= 0x2E00 && cp <= 0x2E52);
    }
}

// Collapses runs of Unicode whitespace to a single ASCII space and trims the
// ends. Chunking must not depend on source layout.
inline std::string normalize_whitespace(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool pending_space = false;
    bool seen_any = false;
    size_t i = 0;
    while (i < s.size()) {
        size_t start = i;
        uint32_t cp = decode_utf8(s, i);
        if (is_space_cp(cp)) {
            pending_space = seen_any;
        } else {
            if (pending_space) out.push_back(' ');
            pending_space = false;
            seen_any = true;
            out.append(s.substr(start, i - start));
        }
    }
    return out;
}

}  // namespace brigata
