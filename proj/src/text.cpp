#include "stagecraft/text.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>

namespace stagecraft::text {

namespace {

bool is_space(unsigned char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

// Length in bytes of the UTF-8 sequence starting with lead byte c.
std::size_t utf8_len(unsigned char c) {
    if (c < 0x80) return 1;
    if ((c >> 5) == 0x6) return 2;
    if ((c >> 4) == 0xE) return 3;
    if ((c >> 3) == 0x1E) return 4;
    return 1;
}

constexpr std::string_view kFullWidthColon = "\xEF\xBC\x9A";

const std::vector<std::pair<std::string_view, std::string_view>>& quote_pairs() {
    static const std::vector<std::pair<std::string_view, std::string_view>> pairs = {
        {"\"", "\""},
        {"\xE2\x80\x9C", "\xE2\x80\x9D"},  // “ ”
        {"\xE3\x80\x8C", "\xE3\x80\x8D"},  // 「 」
        {"\xE3\x80\x8E", "\xE3\x80\x8F"},  // 『 』
    };
    return pairs;
}

}  // namespace

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && is_space(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && is_space(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::string to_lower_ascii(std::string_view s) {
    std::string out(s);
    for (auto& c : out) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    return out;
}

bool iequals(std::string_view a, std::string_view b) {
    return a.size() == b.size() && to_lower_ascii(a) == to_lower_ascii(b);
}

bool icontains(std::string_view haystack, std::string_view needle) {
    return to_lower_ascii(haystack).find(to_lower_ascii(needle)) != std::string::npos;
}

std::vector<std::string> split(std::string_view s, std::string_view delim) {
    std::vector<std::string> out;
    if (delim.empty()) {
        out.emplace_back(s);
        return out;
    }
    std::size_t start = 0;
    while (true) {
        auto pos = s.find(delim, start);
        if (pos == std::string_view::npos) {
            out.emplace_back(s.substr(start));
            break;
        }
        out.emplace_back(s.substr(start, pos - start));
        start = pos + delim.size();
    }
    return out;
}

std::string join(const std::vector<std::string>& parts, std::string_view delim) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += delim;
        out += parts[i];
    }
    return out;
}

std::string strip_decoration(std::string_view s) {
    std::string t = trim(s);
    bool changed = true;
    while (changed && !t.empty()) {
        changed = false;
        if (t.size() >= 4 && t.starts_with("**") && t.ends_with("**")) {
            t = trim(t.substr(2, t.size() - 4));
            changed = true;
        } else if (t.size() >= 2 && t.front() == '[' && t.back() == ']') {
            t = trim(t.substr(1, t.size() - 2));
            changed = true;
        } else if (t.size() >= 2 && ((t.front() == '"' && t.back() == '"') || (t.front() == '\'' && t.back() == '\''))) {
            t = trim(t.substr(1, t.size() - 2));
            changed = true;
        }
    }
    return t;
}

std::string render(std::string_view tmpl, const std::map<std::string, std::string>& vars) {
    std::string out;
    out.reserve(tmpl.size());
    std::size_t i = 0;
    while (i < tmpl.size()) {
        if (tmpl[i] == '{') {
            auto close = tmpl.find('}', i + 1);
            if (close != std::string_view::npos) {
                std::string key(tmpl.substr(i + 1, close - i - 1));
                auto it = vars.find(key);
                if (it != vars.end()) {
                    out += it->second;
                    i = close + 1;
                    continue;
                }
            }
        }
        out += tmpl[i++];
    }
    return out;
}

std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::int64_t estimate_tokens(std::string_view s) {
    std::int64_t count = 0;
    std::size_t i = 0;
    while (i < s.size()) {
        auto c = static_cast<unsigned char>(s[i]);
        if (c >= 0x80) {
            ++count;
            i += utf8_len(c);
        } else if (std::isalnum(c)) {
            ++count;
            while (i < s.size() && static_cast<unsigned char>(s[i]) < 0x80 &&
                   std::isalnum(static_cast<unsigned char>(s[i]))) {
                ++i;
            }
        } else {
            if (!is_space(c)) ++count;
            ++i;
        }
    }
    return count;
}

namespace {

// Skips bullets, numbering, heading marks and bold markers at a line start.
std::size_t skip_line_markup(std::string_view line) {
    std::size_t i = 0;
    bool progressed = true;
    while (progressed && i < line.size()) {
        progressed = false;
        while (i < line.size() && is_space(static_cast<unsigned char>(line[i]))) ++i;
        if (i < line.size() && (line[i] == '-' || line[i] == '*' || line[i] == '#' || line[i] == '>')) {
            while (i < line.size() && (line[i] == '-' || line[i] == '*' || line[i] == '#' || line[i] == '>')) ++i;
            progressed = true;
            continue;
        }
        if (line.substr(i).starts_with("\xE2\x80\xA2")) {  // bullet
            i += 3;
            progressed = true;
            continue;
        }
        std::size_t j = i;
        while (j < line.size() && std::isdigit(static_cast<unsigned char>(line[j]))) ++j;
        if (j > i && j < line.size() && (line[j] == '.' || line[j] == ')')) {
            i = j + 1;
            progressed = true;
        }
    }
    return i;
}

// If line[pos..] starts with alias followed by a colon, returns the offset
// just past the colon (and trailing bold markers).
std::optional<std::size_t> match_label(std::string_view line, std::size_t pos, std::string_view alias) {
    if (line.size() - pos < alias.size()) return std::nullopt;
    if (!iequals(line.substr(pos, alias.size()), alias)) return std::nullopt;
    std::size_t i = pos + alias.size();
    while (i < line.size() && (line[i] == '*' || line[i] == ' ' || line[i] == '\t')) ++i;
    if (i < line.size() && line[i] == ':') {
        ++i;
    } else if (line.substr(i).starts_with(kFullWidthColon)) {
        i += kFullWidthColon.size();
    } else {
        return std::nullopt;
    }
    while (i < line.size() && line[i] == '*') ++i;
    return i;
}

}  // namespace

std::map<std::string, std::string> parse_labeled(std::string_view reply, const std::vector<LabelSpec>& labels) {
    // Longest aliases first so that "Perception of Others" beats "Perception".
    std::vector<std::pair<std::string, std::string>> aliases;
    for (const auto& spec : labels) {
        for (const auto& a : spec.aliases) aliases.emplace_back(a, spec.key);
    }
    std::stable_sort(aliases.begin(), aliases.end(),
                     [](const auto& a, const auto& b) { return a.first.size() > b.first.size(); });

    std::map<std::string, std::string> out;
    std::string current;
    std::string buffer;
    auto flush = [&] {
        if (!current.empty() && !out.contains(current)) out[current] = trim(buffer);
        current.clear();
        buffer.clear();
    };

    for (const auto& raw : split(reply, "\n")) {
        std::string_view line(raw);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        std::size_t start = skip_line_markup(line);
        bool matched = false;
        for (const auto& [alias, key] : aliases) {
            if (auto after = match_label(line, start, alias)) {
                flush();
                current = key;
                buffer = std::string(line.substr(*after));
                matched = true;
                break;
            }
        }
        if (!matched && !current.empty()) {
            buffer += "\n";
            buffer += line;
        }
    }
    flush();
    return out;
}

double quoted_fraction(std::string_view s) {
    std::size_t total = 0;
    std::size_t quoted = 0;
    std::string_view open_close;
    bool inside = false;
    std::size_t i = 0;
    while (i < s.size()) {
        auto c = static_cast<unsigned char>(s[i]);
        std::size_t len = utf8_len(c);
        std::string_view ch = s.substr(i, len);
        bool handled = false;
        if (inside && ch == open_close) {
            inside = false;
            handled = true;
        } else if (!inside) {
            for (const auto& [open, close] : quote_pairs()) {
                if (ch == open) {
                    inside = true;
                    open_close = close;
                    handled = true;
                    break;
                }
            }
        }
        if (!handled && !(len == 1 && is_space(c))) {
            ++total;
            if (inside) ++quoted;
        }
        i += len;
    }
    return total == 0 ? 0.0 : static_cast<double>(quoted) / static_cast<double>(total);
}

}  // namespace stagecraft::text
