#pragma once

#include <chrono>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "stagecraft/domain.hpp"

namespace stagecraft {

// --- exact money arithmetic -------------------------------------------------

// Non-negative-friendly exact fraction; costs are summed without rounding and
// rounded half-up only for display.
class Rational {
public:
    Rational() = default;
    Rational(std::int64_t num, std::int64_t den = 1);

    // Parses decimal text such as "0.5", "12" or "1e-06".
    static Rational from_decimal(std::string_view s);

    std::int64_t num() const { return num_; }
    std::int64_t den() const { return den_; }

    Rational operator+(const Rational& o) const;
    Rational operator*(const Rational& o) const;
    Rational& operator+=(const Rational& o) { return *this = *this + o; }
    bool operator==(const Rational& o) const = default;
    bool operator<(const Rational& o) const;

    double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }
    // Half-up (away from zero) rounding to the given number of decimals.
    std::string to_fixed(int places) const;

private:
    std::int64_t num_ = 0;
    std::int64_t den_ = 1;
};

// --- chat wire types --------------------------------------------------------

enum class ChatRole { system, user, assistant };
std::string_view to_string(ChatRole role);

struct ChatMessage {
    ChatRole role = ChatRole::user;
    std::string content;
    bool operator==(const ChatMessage&) const = default;
};

inline constexpr double kDefaultTemperature = 0.7;
inline constexpr double kJudgeTemperature = 0.0;

struct ChatRequest {
    std::string model_id;
    std::vector<ChatMessage> messages;
    double temperature = kDefaultTemperature;
    int max_tokens = 1024;
    // Which prompt template produced this request. Not sent on the wire and
    // not part of the request hash.
    std::string purpose;

    static ChatRequest user(std::string model_id, std::string prompt, double temperature, std::string purpose);

    // Throws Error(Precondition) for an empty message list, a leading
    // assistant message, negative temperature or non-positive max_tokens.
    void validate() const;
    // Canonical wire content used for record/replay keys.
    Json canonical() const;
    std::string hash() const;
};

struct ChatResponse {
    std::string content;
    std::int64_t input_tokens = 0;
    std::int64_t output_tokens = 0;
};

// --- accounting -------------------------------------------------------------

enum class RoleTag { narrator, character, judge, scene_forge };
std::string_view to_string(RoleTag tag);
RoleTag parse_role_tag(std::string_view s);
inline constexpr std::array<RoleTag, 4> kAllRoleTags = {RoleTag::narrator, RoleTag::character, RoleTag::judge,
                                                       RoleTag::scene_forge};

struct Rate {
    Rational input_per_million;
    Rational output_per_million;
    // Unmetered models (local inference) report no cost at all.
    bool metered = true;
};

class PriceTable {
public:
    void set(const std::string& model_id, Rate rate);
    void set_unmetered(const std::string& model_id);
    const Rate* find(const std::string& model_id) const;
    static PriceTable from_json(const Json& j);

private:
    std::map<std::string, Rate> rates_;
};

struct LedgerEntry {
    RoleTag role = RoleTag::character;
    std::string model_id;
    std::int64_t input_tokens = 0;
    std::int64_t output_tokens = 0;
    bool operator==(const LedgerEntry&) const = default;
};

struct TokenTotals {
    std::int64_t input_tokens = 0;
    std::int64_t output_tokens = 0;
    std::size_t calls = 0;
    bool operator==(const TokenTotals&) const = default;
};

// Append-only usage record; appends are serialized so one ledger may be fed
// from several threads.
class UsageLedger {
public:
    UsageLedger() = default;
    UsageLedger(const UsageLedger& other);
    UsageLedger& operator=(const UsageLedger& other);

    void append(LedgerEntry entry);
    std::vector<LedgerEntry> entries() const;
    std::size_t size() const;
    TokenTotals totals(RoleTag role) const;
    TokenTotals grand_total() const;

    std::string to_lines() const;
    static UsageLedger from_lines(std::string_view text);

private:
    mutable std::mutex mu_;
    std::vector<LedgerEntry> entries_;
};

Rational entry_cost(const LedgerEntry& entry, const Rate& rate);

struct RoleCost {
    RoleTag role;
    TokenTotals tokens;
    std::optional<Rational> cost;  // empty when every call was unmetered
};

struct CostReport {
    std::vector<RoleCost> roles;  // only roles that appear in the ledger
    std::optional<Rational> total;

    const RoleCost* find(RoleTag role) const;
    Json to_json() const;
    std::string render() const;
};

// Throws Error(MissingRate) when a ledger model has no price entry.
CostReport scene_cost_report(const UsageLedger& ledger, const PriceTable& prices);

// --- backends ---------------------------------------------------------------

class Backend {
public:
    virtual ~Backend() = default;
    virtual ChatResponse chat(const ChatRequest& request) = 0;
    virtual std::vector<double> embed(const std::string& text) = 0;
};

inline constexpr std::size_t kHashEmbeddingDim = 64;

// Content-hash seeded pseudo-random unit vector.
std::vector<double> hash_embedding(std::string_view text, std::size_t dim = kHashEmbeddingDim);

// Serves queued replies in order. Used for unit tests and scripted fixtures.
class QueuedBackend : public Backend {
public:
    QueuedBackend() = default;
    explicit QueuedBackend(std::vector<std::string> replies);

    void push(std::string reply);
    ChatResponse chat(const ChatRequest& request) override;
    std::vector<double> embed(const std::string& text) override { return hash_embedding(text); }

    const std::vector<ChatRequest>& requests() const { return requests_; }
    std::size_t remaining() const { return replies_.size(); }

private:
    std::deque<std::string> replies_;
    std::vector<ChatRequest> requests_;
};

// Answers through a caller-supplied function; token counts are estimated.
class FunctionBackend : public Backend {
public:
    using Responder = std::function<std::string(const ChatRequest&)>;
    explicit FunctionBackend(Responder responder) : responder_(std::move(responder)) {}
    ChatResponse chat(const ChatRequest& request) override;
    std::vector<double> embed(const std::string& text) override { return hash_embedding(text); }

private:
    Responder responder_;
};

// One recorded exchange per file, named by request hash.
class ScriptStore {
public:
    explicit ScriptStore(std::filesystem::path dir);

    std::optional<ChatResponse> find(const ChatRequest& request) const;
    // First recording of a hash wins; later identical requests are not rewritten.
    void put(const ChatRequest& request, const ChatResponse& response);
    const std::filesystem::path& dir() const { return dir_; }

private:
    std::filesystem::path dir_;
    mutable std::mutex write_mu_;
};

enum class ScriptMode { record, replay };

// Record mode passes through to `inner` and persists each exchange; replay
// mode serves only from the store and fails hard on an unknown request.
// Embeddings are always the local hash embedding so record and replay agree.
class ScriptedBackend : public Backend {
public:
    ScriptedBackend(ScriptMode mode, std::filesystem::path dir, std::shared_ptr<Backend> inner = nullptr);
    ChatResponse chat(const ChatRequest& request) override;
    std::vector<double> embed(const std::string& text) override { return hash_embedding(text); }

private:
    ScriptMode mode_;
    ScriptStore store_;
    std::shared_ptr<Backend> inner_;
};

struct HttpConfig {
    std::string base_url;  // e.g. https://api.openai.com
    std::string api_key_env = "OPENAI_API_KEY";
    std::map<std::string, std::string> model_map;  // model_id -> remote model name
    std::string embedding_model = "text-embedding-3-small";
    std::chrono::seconds timeout{120};
};

// OpenAI-compatible /v1/chat/completions and /v1/embeddings client.
class HttpBackend : public Backend {
public:
    explicit HttpBackend(HttpConfig config);
    ChatResponse chat(const ChatRequest& request) override;
    std::vector<double> embed(const std::string& text) override;

    static Json request_body(const ChatRequest& request, const std::string& remote_model);
    static ChatResponse parse_response(const Json& body);

private:
    Json post(const std::string& path, const Json& body);
    HttpConfig config_;
};

// --- gateway ----------------------------------------------------------------

struct RetryPolicy {
    int max_retries = 3;
    std::chrono::milliseconds backoff_base{1000};
};

// Shared by concurrent runs: owns the backend and the retry policy. Usage is
// always recorded into the caller's ledger.
class Gateway {
public:
    using Sleeper = std::function<void(std::chrono::milliseconds)>;

    explicit Gateway(std::shared_ptr<Backend> backend, RetryPolicy retry = {}, PriceTable prices = {});

    ChatResponse complete(const ChatRequest& request, RoleTag role, UsageLedger& ledger);
    std::vector<double> embed(const std::string& text);

    const PriceTable& prices() const { return prices_; }
    const RetryPolicy& retry() const { return retry_; }
    void set_sleeper(Sleeper sleeper) { sleeper_ = std::move(sleeper); }
    Backend& backend() { return *backend_; }

private:
    template <typename F>
    auto with_retries(F&& f) -> decltype(f());

    std::shared_ptr<Backend> backend_;
    RetryPolicy retry_;
    PriceTable prices_;
    Sleeper sleeper_;
};

// One run's handle on the gateway: shared backend, private ledger.
class Session {
public:
    explicit Session(Gateway& gateway) : gateway_(&gateway) {}

    ChatResponse complete(const ChatRequest& request, RoleTag role) {
        return gateway_->complete(request, role, ledger_);
    }
    std::vector<double> embed(const std::string& text) { return gateway_->embed(text); }

    UsageLedger& ledger() { return ledger_; }
    const UsageLedger& ledger() const { return ledger_; }
    Gateway& gateway() { return *gateway_; }

private:
    Gateway* gateway_;
    UsageLedger ledger_;
};

// Config document: {"kind": "http"|"simulated", "base_url", "api_key_env",
// "models": {...}, "prices": {...}, "retry": {"max_retries", "backoff_base_ms"}}.
struct BackendConfig {
    std::string kind = "simulated";
    HttpConfig http;
    PriceTable prices;
    RetryPolicy retry;

    static BackendConfig from_json(const Json& j);
    static BackendConfig load(const std::filesystem::path& path);
};

std::shared_ptr<Backend> make_backend(const BackendConfig& config);

}  // namespace stagecraft
