#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace stagecraft::text {

std::string trim(std::string_view s);
std::string to_lower_ascii(std::string_view s);
bool iequals(std::string_view a, std::string_view b);
bool icontains(std::string_view haystack, std::string_view needle);
std::vector<std::string> split(std::string_view s, std::string_view delim);
std::string join(const std::vector<std::string>& parts, std::string_view delim);

// Strips one layer of surrounding [brackets], **bold** or quotes, then trims.
std::string strip_decoration(std::string_view s);

// Replaces every {key} with vars[key]; unknown placeholders are left as-is.
std::string render(std::string_view tmpl, const std::map<std::string, std::string>& vars);

// Stable 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view data);
std::string hex64(std::uint64_t v);

// Deterministic token estimate used when a backend reports no usage:
// each run of ASCII alphanumerics, each other visible ASCII char and each
// non-ASCII code point counts as one token.
std::int64_t estimate_tokens(std::string_view s);

// One labeled field and the spellings accepted for it, e.g. {"time", {"Time", "时间"}}.
struct LabelSpec {
    std::string key;
    std::vector<std::string> aliases;
};

// Tolerant "Label: value" block parser. Labels match case-insensitively,
// may be wrapped in markdown (bullets, numbering, headings, bold) and use
// either ':' or the full-width colon. A value runs until the next recognized
// label. The first occurrence of a label wins. Values are trimmed only.
std::map<std::string, std::string> parse_labeled(std::string_view reply,
                                                 const std::vector<LabelSpec>& labels);

// Fraction of non-space characters enclosed in quotation marks.
double quoted_fraction(std::string_view s);

}  // namespace stagecraft::text
