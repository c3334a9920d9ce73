#include "stagecraft/gateway.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

#include "stagecraft/error.hpp"
#include "stagecraft/simulated.hpp"
#include "stagecraft/text.hpp"

#ifdef STAGECRAFT_HTTPS
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include "httplib.h"

namespace stagecraft {

// --- Rational ---------------------------------------------------------------

namespace {

using i128 = __int128;

i128 gcd128(i128 a, i128 b) {
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b != 0) {
        i128 t = a % b;
        a = b;
        b = t;
    }
    return a;
}

Rational make_rational(i128 num, i128 den) {
    if (den == 0) throw Error(ErrorCode::Precondition, "zero denominator");
    if (den < 0) {
        num = -num;
        den = -den;
    }
    i128 g = gcd128(num, den);
    if (g > 1) {
        num /= g;
        den /= g;
    }
    constexpr i128 lim = std::numeric_limits<std::int64_t>::max();
    if (num > lim || -num > lim || den > lim) throw Error(ErrorCode::Precondition, "rational overflow");
    return Rational(static_cast<std::int64_t>(num), static_cast<std::int64_t>(den));
}

i128 pow10_128(int n) {
    i128 r = 1;
    for (int i = 0; i < n; ++i) r *= 10;
    return r;
}

}  // namespace

Rational::Rational(std::int64_t num, std::int64_t den) : num_(num), den_(den) {
    if (den_ == 0) throw Error(ErrorCode::Precondition, "zero denominator");
    if (den_ < 0) {
        num_ = -num_;
        den_ = -den_;
    }
    auto g = std::gcd(num_ < 0 ? -num_ : num_, den_);
    if (g > 1) {
        num_ /= g;
        den_ /= g;
    }
}

Rational Rational::from_decimal(std::string_view raw) {
    std::string s = text::trim(raw);
    if (s.empty()) throw Error(ErrorCode::Parse, "empty decimal");
    std::size_t i = 0;
    bool neg = false;
    if (s[i] == '-' || s[i] == '+') neg = s[i++] == '-';
    i128 mantissa = 0;
    int frac_digits = 0;
    bool seen_dot = false;
    bool any_digit = false;
    for (; i < s.size(); ++i) {
        char c = s[i];
        if (c >= '0' && c <= '9') {
            mantissa = mantissa * 10 + (c - '0');
            if (seen_dot) ++frac_digits;
            any_digit = true;
        } else if (c == '.' && !seen_dot) {
            seen_dot = true;
        } else {
            break;
        }
    }
    if (!any_digit) throw Error(ErrorCode::Parse, "bad decimal '" + s + "'");
    int exponent = 0;
    if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
        try {
            exponent = std::stoi(s.substr(i + 1));
        } catch (const std::exception&) {
            throw Error(ErrorCode::Parse, "bad exponent in '" + s + "'");
        }
        i = s.size();
    }
    if (i != s.size()) throw Error(ErrorCode::Parse, "bad decimal '" + s + "'");
    int scale = frac_digits - exponent;
    if (neg) mantissa = -mantissa;
    if (scale >= 0) return make_rational(mantissa, pow10_128(scale));
    return make_rational(mantissa * pow10_128(-scale), 1);
}

Rational Rational::operator+(const Rational& o) const {
    return make_rational(static_cast<i128>(num_) * o.den_ + static_cast<i128>(o.num_) * den_,
                         static_cast<i128>(den_) * o.den_);
}

Rational Rational::operator*(const Rational& o) const {
    return make_rational(static_cast<i128>(num_) * o.num_, static_cast<i128>(den_) * o.den_);
}

bool Rational::operator<(const Rational& o) const {
    return static_cast<i128>(num_) * o.den_ < static_cast<i128>(o.num_) * den_;
}

std::string Rational::to_fixed(int places) const {
    i128 scaled = static_cast<i128>(num_ < 0 ? -num_ : num_) * pow10_128(places);
    i128 q = (2 * scaled + den_) / (2 * static_cast<i128>(den_));
    i128 unit = pow10_128(places);
    auto whole = static_cast<long long>(q / unit);
    auto frac = static_cast<long long>(q % unit);
    std::string fs = std::to_string(frac);
    if (static_cast<int>(fs.size()) < places) fs.insert(0, static_cast<std::size_t>(places) - fs.size(), '0');
    std::string out = (num_ < 0 && q != 0 ? "-" : "") + std::to_string(whole);
    if (places > 0) out += "." + fs;
    return out;
}

// --- chat types -------------------------------------------------------------

std::string_view to_string(ChatRole role) {
    switch (role) {
        case ChatRole::system: return "system";
        case ChatRole::user: return "user";
        case ChatRole::assistant: return "assistant";
    }
    return "user";
}

ChatRequest ChatRequest::user(std::string model_id, std::string prompt, double temperature, std::string purpose) {
    ChatRequest r;
    r.model_id = std::move(model_id);
    r.messages.push_back({ChatRole::user, std::move(prompt)});
    r.temperature = temperature;
    r.purpose = std::move(purpose);
    return r;
}

void ChatRequest::validate() const {
    if (model_id.empty()) throw Error(ErrorCode::Precondition, "request has no model_id");
    if (messages.empty()) throw Error(ErrorCode::Precondition, "request has no messages");
    if (messages.front().role == ChatRole::assistant) {
        throw Error(ErrorCode::Precondition, "first message must be system or user");
    }
    if (!(temperature >= 0.0)) throw Error(ErrorCode::Precondition, "temperature must be >= 0");
    if (max_tokens <= 0) throw Error(ErrorCode::Precondition, "max_tokens must be > 0");
}

Json ChatRequest::canonical() const {
    Json msgs = Json::array();
    for (const auto& m : messages) msgs.push_back(Json{{"role", to_string(m.role)}, {"content", m.content}});
    return Json{{"model", model_id}, {"messages", msgs}, {"temperature", temperature}, {"max_tokens", max_tokens}};
}

std::string ChatRequest::hash() const { return text::hex64(text::fnv1a64(canonical().dump())); }

// --- accounting -------------------------------------------------------------

std::string_view to_string(RoleTag tag) {
    switch (tag) {
        case RoleTag::narrator: return "narrator";
        case RoleTag::character: return "character";
        case RoleTag::judge: return "judge";
        case RoleTag::scene_forge: return "scene_forge";
    }
    return "character";
}

RoleTag parse_role_tag(std::string_view s) {
    for (auto t : kAllRoleTags) {
        if (to_string(t) == s) return t;
    }
    throw Error(ErrorCode::Parse, "unknown role tag '" + std::string(s) + "'");
}

void PriceTable::set(const std::string& model_id, Rate rate) { rates_[model_id] = rate; }

void PriceTable::set_unmetered(const std::string& model_id) { rates_[model_id] = Rate{{}, {}, false}; }

const Rate* PriceTable::find(const std::string& model_id) const {
    auto it = rates_.find(model_id);
    return it == rates_.end() ? nullptr : &it->second;
}

namespace {

Rational rate_from_json(const Json& v) {
    if (v.is_string()) return Rational::from_decimal(v.get<std::string>());
    if (v.is_number()) return Rational::from_decimal(v.dump());
    throw Error(ErrorCode::Parse, "rate must be a number");
}

}  // namespace

PriceTable PriceTable::from_json(const Json& j) {
    PriceTable t;
    if (!j.is_object()) return t;
    for (const auto& [model, v] : j.items()) {
        if (v.is_null() || (v.is_object() && !v.value("metered", true))) {
            t.set_unmetered(model);
            continue;
        }
        if (!v.contains("input")) throw Error(ErrorCode::MissingField, "prices." + model + ".input");
        if (!v.contains("output")) throw Error(ErrorCode::MissingField, "prices." + model + ".output");
        Rate r{rate_from_json(v.at("input")), rate_from_json(v.at("output")), true};
        if (r.input_per_million < Rational(0) || r.output_per_million < Rational(0)) {
            throw Error(ErrorCode::Parse, "negative rate for " + model);
        }
        t.set(model, r);
    }
    return t;
}

UsageLedger::UsageLedger(const UsageLedger& other) {
    std::lock_guard lock(other.mu_);
    entries_ = other.entries_;
}

UsageLedger& UsageLedger::operator=(const UsageLedger& other) {
    if (this == &other) return *this;
    auto copy = other.entries();
    std::lock_guard lock(mu_);
    entries_ = std::move(copy);
    return *this;
}

void UsageLedger::append(LedgerEntry entry) {
    std::lock_guard lock(mu_);
    entries_.push_back(std::move(entry));
}

std::vector<LedgerEntry> UsageLedger::entries() const {
    std::lock_guard lock(mu_);
    return entries_;
}

std::size_t UsageLedger::size() const {
    std::lock_guard lock(mu_);
    return entries_.size();
}

TokenTotals UsageLedger::totals(RoleTag role) const {
    std::lock_guard lock(mu_);
    TokenTotals t;
    for (const auto& e : entries_) {
        if (e.role != role) continue;
        t.input_tokens += e.input_tokens;
        t.output_tokens += e.output_tokens;
        ++t.calls;
    }
    return t;
}

TokenTotals UsageLedger::grand_total() const {
    std::lock_guard lock(mu_);
    TokenTotals t;
    for (const auto& e : entries_) {
        t.input_tokens += e.input_tokens;
        t.output_tokens += e.output_tokens;
        ++t.calls;
    }
    return t;
}

std::string UsageLedger::to_lines() const {
    std::string out;
    for (const auto& e : entries()) {
        out += Json{{"role", to_string(e.role)},
                    {"model_id", e.model_id},
                    {"input_tokens", e.input_tokens},
                    {"output_tokens", e.output_tokens}}
                   .dump() +
               "\n";
    }
    return out;
}

UsageLedger UsageLedger::from_lines(std::string_view content) {
    UsageLedger ledger;
    for (const auto& line : text::split(content, "\n")) {
        if (text::trim(line).empty()) continue;
        auto j = Json::parse(line);
        ledger.append({parse_role_tag(j.at("role").get<std::string>()), j.at("model_id").get<std::string>(),
                       j.at("input_tokens").get<std::int64_t>(), j.at("output_tokens").get<std::int64_t>()});
    }
    return ledger;
}

Rational entry_cost(const LedgerEntry& entry, const Rate& rate) {
    return Rational(entry.input_tokens) * rate.input_per_million * Rational(1, 1'000'000) +
           Rational(entry.output_tokens) * rate.output_per_million * Rational(1, 1'000'000);
}

const RoleCost* CostReport::find(RoleTag role) const {
    auto it = std::find_if(roles.begin(), roles.end(), [&](const auto& r) { return r.role == role; });
    return it == roles.end() ? nullptr : &*it;
}

Json CostReport::to_json() const {
    Json j;
    Json rows = Json::array();
    for (const auto& r : roles) {
        rows.push_back(Json{{"role", to_string(r.role)},
                            {"input_tokens", r.tokens.input_tokens},
                            {"output_tokens", r.tokens.output_tokens},
                            {"calls", r.tokens.calls},
                            {"cost", r.cost ? Json(r.cost->to_fixed(4)) : Json(nullptr)}});
    }
    j["roles"] = rows;
    j["total_cost"] = total ? Json(total->to_fixed(4)) : Json(nullptr);
    return j;
}

std::string CostReport::render() const {
    std::ostringstream out;
    char line[160];
    std::snprintf(line, sizeof line, "%-12s %10s %10s %10s\n", "Role", "Input", "Output", "Cost($)");
    out << line;
    for (const auto& r : roles) {
        std::snprintf(line, sizeof line, "%-12s %10lld %10lld %10s\n", std::string(to_string(r.role)).c_str(),
                      static_cast<long long>(r.tokens.input_tokens), static_cast<long long>(r.tokens.output_tokens),
                      r.cost ? r.cost->to_fixed(4).c_str() : "-");
        out << line;
    }
    std::snprintf(line, sizeof line, "%-12s %10s %10s %10s\n", "Total", "", "", total ? total->to_fixed(4).c_str() : "-");
    out << line;
    return out.str();
}

CostReport scene_cost_report(const UsageLedger& ledger, const PriceTable& prices) {
    CostReport report;
    const auto entries = ledger.entries();
    for (auto role : kAllRoleTags) {
        RoleCost rc{role, {}, std::nullopt};
        for (const auto& e : entries) {
            if (e.role != role) continue;
            const Rate* rate = prices.find(e.model_id);
            if (!rate) throw Error(ErrorCode::MissingRate, "no price for model '" + e.model_id + "'");
            rc.tokens.input_tokens += e.input_tokens;
            rc.tokens.output_tokens += e.output_tokens;
            ++rc.tokens.calls;
            if (rate->metered) rc.cost = rc.cost.value_or(Rational(0)) + entry_cost(e, *rate);
        }
        if (rc.tokens.calls == 0) continue;
        if (rc.cost) report.total = report.total.value_or(Rational(0)) + *rc.cost;
        report.roles.push_back(rc);
    }
    return report;
}

// --- backends ---------------------------------------------------------------

std::vector<double> hash_embedding(std::string_view text, std::size_t dim) {
    std::mt19937_64 rng(text::fnv1a64(text));
    std::vector<double> v(dim);
    double norm2 = 0.0;
    for (auto& x : v) {
        x = static_cast<double>(rng() >> 11) * 0x1.0p-53 * 2.0 - 1.0;
        norm2 += x * x;
    }
    const double norm = std::sqrt(norm2);
    for (auto& x : v) x /= norm;
    return v;
}

QueuedBackend::QueuedBackend(std::vector<std::string> replies) : replies_(replies.begin(), replies.end()) {}

void QueuedBackend::push(std::string reply) { replies_.push_back(std::move(reply)); }

ChatResponse QueuedBackend::chat(const ChatRequest& request) {
    requests_.push_back(request);
    if (replies_.empty()) throw Error(ErrorCode::ReplayMiss, "queued backend exhausted");
    ChatResponse r;
    r.content = std::move(replies_.front());
    replies_.pop_front();
    std::int64_t in = 0;
    for (const auto& m : request.messages) in += text::estimate_tokens(m.content);
    r.input_tokens = in;
    r.output_tokens = text::estimate_tokens(r.content);
    return r;
}

ChatResponse FunctionBackend::chat(const ChatRequest& request) {
    ChatResponse r;
    r.content = responder_(request);
    for (const auto& m : request.messages) r.input_tokens += text::estimate_tokens(m.content);
    r.output_tokens = text::estimate_tokens(r.content);
    return r;
}

ScriptStore::ScriptStore(std::filesystem::path dir) : dir_(std::move(dir)) {}

std::optional<ChatResponse> ScriptStore::find(const ChatRequest& request) const {
    auto path = dir_ / (request.hash() + ".json");
    std::error_code ec;
    if (!std::filesystem::exists(path, ec)) return std::nullopt;
    auto j = Json::parse(read_file(path));
    const auto& resp = j.at("response");
    return ChatResponse{resp.at("content").get<std::string>(), resp.at("input_tokens").get<std::int64_t>(),
                        resp.at("output_tokens").get<std::int64_t>()};
}

void ScriptStore::put(const ChatRequest& request, const ChatResponse& response) {
    std::lock_guard lock(write_mu_);
    auto path = dir_ / (request.hash() + ".json");
    if (std::filesystem::exists(path)) return;
    Json j{{"purpose", request.purpose},
           {"request", request.canonical()},
           {"response",
            {{"content", response.content},
             {"input_tokens", response.input_tokens},
             {"output_tokens", response.output_tokens}}}};
    auto tmp = path;
    tmp += ".tmp";
    write_file(tmp, j.dump(2) + "\n");
    std::filesystem::rename(tmp, path);
}

ScriptedBackend::ScriptedBackend(ScriptMode mode, std::filesystem::path dir, std::shared_ptr<Backend> inner)
    : mode_(mode), store_(std::move(dir)), inner_(std::move(inner)) {
    if (mode_ == ScriptMode::record && !inner_) {
        throw Error(ErrorCode::Precondition, "record mode needs an upstream backend");
    }
    if (mode_ == ScriptMode::record) std::filesystem::create_directories(store_.dir());
}

ChatResponse ScriptedBackend::chat(const ChatRequest& request) {
    if (mode_ == ScriptMode::replay) {
        if (auto hit = store_.find(request)) return *hit;
        throw Error(ErrorCode::ReplayMiss, "no recorded exchange for request " + request.hash() + " (" +
                                               request.purpose + ", model " + request.model_id + ")");
    }
    if (auto hit = store_.find(request)) return *hit;
    auto response = inner_->chat(request);
    store_.put(request, response);
    return response;
}

// --- HTTP -------------------------------------------------------------------

namespace {

struct UrlParts {
    std::string origin;  // scheme://host[:port]
    std::string prefix;  // path prefix without trailing slash
};

UrlParts split_url(const std::string& url) {
    auto scheme_end = url.find("://");
    auto path_start = url.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
    if (path_start == std::string::npos) return {url, ""};
    std::string prefix = url.substr(path_start);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    return {url.substr(0, path_start), prefix};
}

}  // namespace

HttpBackend::HttpBackend(HttpConfig config) : config_(std::move(config)) {
    if (config_.base_url.empty()) throw Error(ErrorCode::Precondition, "http backend needs base_url");
}

Json HttpBackend::request_body(const ChatRequest& request, const std::string& remote_model) {
    Json body = request.canonical();
    body["model"] = remote_model;
    return body;
}

ChatResponse HttpBackend::parse_response(const Json& body) {
    ChatResponse r;
    try {
        const auto& choices = body.at("choices");
        if (choices.empty()) throw Error(ErrorCode::EmptyResponse, "no choices in response");
        const auto& content = choices.at(0).at("message").at("content");
        r.content = content.is_string() ? content.get<std::string>() : std::string();
    } catch (const Json::exception& e) {
        throw Error(ErrorCode::Parse, std::string("malformed completion response: ") + e.what());
    }
    if (body.contains("usage") && body.at("usage").is_object()) {
        const auto& u = body.at("usage");
        r.input_tokens = u.value("prompt_tokens", std::int64_t{0});
        r.output_tokens = u.value("completion_tokens", std::int64_t{0});
    } else {
        r.output_tokens = text::estimate_tokens(r.content);
    }
    return r;
}

Json HttpBackend::post(const std::string& path, const Json& body) {
    auto url = split_url(config_.base_url);
    httplib::Client client(url.origin);
    client.set_connection_timeout(config_.timeout);
    client.set_read_timeout(config_.timeout);
    httplib::Headers headers;
    if (const char* key = std::getenv(config_.api_key_env.c_str()); key && *key) {
        headers.emplace("Authorization", std::string("Bearer ") + key);
    }
    auto res = client.Post(url.prefix + path, headers, body.dump(), "application/json");
    if (!res) throw Error(ErrorCode::Transport, "request to " + config_.base_url + path + " failed: " +
                                                    httplib::to_string(res.error()));
    if (res->status == 429 || res->status >= 500) {
        throw Error(ErrorCode::Transport, "HTTP " + std::to_string(res->status) + " from " + path);
    }
    if (res->status != 200) {
        throw Error(ErrorCode::Io, "HTTP " + std::to_string(res->status) + " from " + path + ": " + res->body);
    }
    try {
        return Json::parse(res->body);
    } catch (const Json::parse_error& e) {
        throw Error(ErrorCode::Parse, std::string("response is not JSON: ") + e.what());
    }
}

ChatResponse HttpBackend::chat(const ChatRequest& request) {
    auto it = config_.model_map.find(request.model_id);
    const std::string remote = it == config_.model_map.end() ? request.model_id : it->second;
    return parse_response(post("/v1/chat/completions", request_body(request, remote)));
}

std::vector<double> HttpBackend::embed(const std::string& input) {
    auto body = post("/v1/embeddings", Json{{"model", config_.embedding_model}, {"input", input}});
    std::vector<double> v;
    try {
        v = body.at("data").at(0).at("embedding").get<std::vector<double>>();
    } catch (const Json::exception& e) {
        throw Error(ErrorCode::Parse, std::string("malformed embedding response: ") + e.what());
    }
    double n2 = 0;
    for (double x : v) n2 += x * x;
    if (n2 <= 0) throw Error(ErrorCode::Parse, "zero embedding vector");
    const double n = std::sqrt(n2);
    for (auto& x : v) x /= n;
    return v;
}

// --- gateway ----------------------------------------------------------------

Gateway::Gateway(std::shared_ptr<Backend> backend, RetryPolicy retry, PriceTable prices)
    : backend_(std::move(backend)), retry_(retry), prices_(std::move(prices)),
      sleeper_([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }) {
    if (!backend_) throw Error(ErrorCode::Precondition, "gateway needs a backend");
}

template <typename F>
auto Gateway::with_retries(F&& f) -> decltype(f()) {
    for (int attempt = 0;; ++attempt) {
        try {
            return f();
        } catch (const Error& e) {
            if (e.code() != ErrorCode::Transport || attempt >= retry_.max_retries) throw;
            sleeper_(retry_.backoff_base * (1LL << attempt));
        }
    }
}

ChatResponse Gateway::complete(const ChatRequest& request, RoleTag role, UsageLedger& ledger) {
    request.validate();
    ChatResponse response = with_retries([&] { return backend_->chat(request); });
    ledger.append({role, request.model_id, response.input_tokens, response.output_tokens});
    if (text::trim(response.content).empty()) {
        throw Error(ErrorCode::EmptyResponse, "empty completion from " + request.model_id);
    }
    return response;
}

std::vector<double> Gateway::embed(const std::string& input) {
    if (input.empty()) throw Error(ErrorCode::Precondition, "cannot embed empty text");
    return with_retries([&] { return backend_->embed(input); });
}

// --- config -----------------------------------------------------------------

BackendConfig BackendConfig::from_json(const Json& j) {
    BackendConfig c;
    c.kind = j.value("kind", "simulated");
    c.http.base_url = j.value("base_url", "");
    c.http.api_key_env = j.value("api_key_env", "OPENAI_API_KEY");
    c.http.embedding_model = j.value("embedding_model", c.http.embedding_model);
    if (j.contains("models")) c.http.model_map = j.at("models").get<std::map<std::string, std::string>>();
    if (j.contains("timeout_s")) c.http.timeout = std::chrono::seconds(j.at("timeout_s").get<int>());
    if (j.contains("prices")) c.prices = PriceTable::from_json(j.at("prices"));
    if (j.contains("retry")) {
        const auto& r = j.at("retry");
        c.retry.max_retries = r.value("max_retries", c.retry.max_retries);
        c.retry.backoff_base = std::chrono::milliseconds(r.value("backoff_base_ms", 1000));
    }
    if (c.kind != "http" && c.kind != "simulated") {
        throw Error(ErrorCode::Parse, "backend kind must be http or simulated, got '" + c.kind + "'");
    }
    return c;
}

BackendConfig BackendConfig::load(const std::filesystem::path& path) {
    try {
        return from_json(Json::parse(read_file(path)));
    } catch (const Json::parse_error& e) {
        throw Error(ErrorCode::Parse, path.string() + ": " + e.what());
    }
}

std::shared_ptr<Backend> make_backend(const BackendConfig& config) {
    if (config.kind == "http") return std::make_shared<HttpBackend>(config.http);
    return std::make_shared<SimulatedBackend>();
}

}  // namespace stagecraft
