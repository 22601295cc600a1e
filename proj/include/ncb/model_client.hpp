#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ncb/belief_math.hpp"
#include "ncb/prompt_synth.hpp"
#include "ncb/records.hpp"

namespace ncb {

class BackendError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Transport failures and HTTP 429/5xx; everything else is permanent.
class RetryableBackendError : public BackendError {
public:
    using BackendError::BackendError;
};

enum class BackendKind { Remote, SimulatedAgent };

struct RetryPolicy {
    int max_attempts = 3;
    std::vector<int> backoff_ms = {1000, 4000, 16000};
};

// Mixture of simulated agents: each fact id is deterministically assigned the
// structured or the unstructured profile. structured_fraction 1.0 collapses
// to a single-profile backend.
struct PopulationConfig {
    AgentProfile structured;
    AgentProfile unstructured;
    double structured_fraction = 1.0;
};

struct BackendConfig {
    BackendKind kind = BackendKind::SimulatedAgent;
    std::string endpoint;  // http://host:port[/path], Remote only
    std::string model_name = "sim-agent";
    double temperature = 0.7;
    int max_concurrency = 4;
    RetryPolicy retry;
    std::string api_key_env = "NCB_API_KEY";
    PopulationConfig population;  // SimulatedAgent only
    std::uint64_t seed = 0;

    void validate() const;
    // Stable identity used in cache keys; folds the population parameters for
    // simulated backends so caches from different calibrations never mix.
    std::string backend_id() const;
};

struct ChatRequest {
    const RenderedPrompt* prompt = nullptr;  // metadata; never null
    // Full turn list to send (prompt turns plus any reflection turns).
    std::vector<std::pair<Role, std::string>> turns;
    std::string cache_key;
    int sample_index = 0;
};

class Backend {
public:
    virtual ~Backend() = default;
    virtual std::string complete(const ChatRequest& request) = 0;
    virtual std::string id() const = 0;
    // Completed invocations; the cache-idempotence tests assert this stays 0
    // on warm reruns.
    virtual std::uint64_t calls() const = 0;
};

std::unique_ptr<Backend> make_backend(const BackendConfig& config);

// Deterministic offline backend. Every response is a pure function of the
// profile seed and the request cache key. Yield draws under stress conditions
// share one uniform stream across intensity, credibility, and truth position
// (common random numbers), so sweeps along those axes are exactly monotone in
// the yield probability rather than monotone only in expectation.
class SimulatedAgentBackend : public Backend {
public:
    explicit SimulatedAgentBackend(const BackendConfig& config);

    std::string complete(const ChatRequest& request) override;
    std::string id() const override { return id_; }
    std::uint64_t calls() const override { return calls_.load(); }

    // Pins the structured/unstructured split to exact fractions over a known
    // fact population (ranked by a seeded hash). Without this, assignment
    // falls back to an independent per-fact draw.
    void assign_population(const std::vector<std::string>& fact_ids);

    const AgentProfile& profile_for(const std::string& fact_id) const;
    // Probability of yielding to the interference described by `condition`.
    static double yield_probability(const AgentProfile& profile, const StressCondition& condition);

private:
    BackendConfig config_;
    std::string id_;
    std::map<std::string, BeliefState> assignment_;
    mutable std::atomic<std::uint64_t> calls_{0};
};

// Chat-completion JSON over HTTP with bearer auth from the configured
// environment variable.
class RemoteBackend : public Backend {
public:
    explicit RemoteBackend(const BackendConfig& config);

    std::string complete(const ChatRequest& request) override;
    std::string id() const override { return id_; }
    std::uint64_t calls() const override { return calls_.load(); }

private:
    BackendConfig config_;
    std::string id_;
    std::string host_;
    int port_ = 80;
    std::string path_;
    std::atomic<std::uint64_t> calls_{0};
};

// Append-only response log keyed by ResponseRecord::cache_key(). Reads and
// writes are safe from multiple threads; file writes go through one mutex.
class ResponseCache {
public:
    ResponseCache() = default;
    // Binds the cache to a JSONL file, loading any existing records.
    explicit ResponseCache(const std::string& path);

    std::optional<ResponseRecord> get(const std::string& key) const;
    void put(const ResponseRecord& record);
    std::size_t size() const;

    static std::string serialize_record(const ResponseRecord& record);
    static ResponseRecord parse_record(const std::string& line);

private:
    mutable std::mutex mutex_;
    std::map<std::string, ResponseRecord> records_;
    std::string path_;  // empty for in-memory caches
};

enum class ExtractionStrategy { Rule, Model };

// Marker-based extraction: the tail after the last "Answer:" marker, else the
// final sentence's trailing phrase after its last copular verb ("is"/"was"/
// "are") or colon, else the final sentence itself. Markdown emphasis, quotes,
// and trailing punctuation are stripped.
std::string rule_extract_entity(const std::string& raw_text);

// Model-strategy extraction sends the versioned extraction prompt to
// `extractor`; any failure falls back to the rule with *fell_back set.
std::string extract_entity(const std::string& raw_text, const std::string& question,
                           ExtractionStrategy strategy, Backend* extractor = nullptr,
                           bool* fell_back = nullptr);

// Samples a prompt plan n times through the cache. Misses are fetched
// concurrently (bounded by max_concurrency) with retry/backoff; a sample that
// still fails yields an invalid record carrying the error note instead of
// aborting the batch. Throws BackendError only when every fetch of a batch
// failed with a transport-level error.
class SamplingClient {
public:
    SamplingClient(BackendConfig config, std::shared_ptr<ResponseCache> cache);
    SamplingClient(BackendConfig config, std::shared_ptr<ResponseCache> cache,
                   std::unique_ptr<Backend> backend);

    std::vector<ResponseRecord> sample(const PromptPlan& plan, int n);

    Backend& backend() { return *backend_; }
    ResponseCache& cache() { return *cache_; }
    const BackendConfig& config() const { return config_; }

private:
    ResponseRecord fetch_one(const PromptPlan& plan, int sample_index,
                             const ResponseRecord& skeleton);
    std::string complete_with_retry(const ChatRequest& request);

    BackendConfig config_;
    std::shared_ptr<ResponseCache> cache_;
    std::unique_ptr<Backend> backend_;
};

std::string iso8601_utc_now();

}  // namespace ncb
