#include "ncb/model_client.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <sstream>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "ncb/rng.hpp"

namespace ncb {

using ordered_json = nlohmann::ordered_json;

void BackendConfig::validate() const {
    if (!(temperature >= 0.0)) throw std::invalid_argument("temperature must be >= 0");
    if (max_concurrency < 1) throw std::invalid_argument("max_concurrency must be >= 1");
    if (retry.max_attempts < 1) throw std::invalid_argument("retry attempts must be >= 1");
    if (kind == BackendKind::Remote && endpoint.empty())
        throw std::invalid_argument("remote backend requires an endpoint");
    if (!(population.structured_fraction >= 0.0 && population.structured_fraction <= 1.0))
        throw std::invalid_argument("structured_fraction must be in [0,1]");
    population.structured.validate();
    population.unstructured.validate();
}

std::string BackendConfig::backend_id() const {
    if (kind == BackendKind::Remote) return "remote:" + model_name;
    std::ostringstream params;
    const auto describe = [&params](const AgentProfile& p) {
        params << to_string(p.state) << ',' << p.p_target << ',' << p.p_neighbor_given_target
               << ',' << p.p_base << ',' << p.conformity << ',' << p.rng_seed;
        for (const auto& [level, w] : p.authority_weights) params << ',' << w;
    };
    describe(population.structured);
    params << ';';
    describe(population.unstructured);
    params << ';' << population.structured_fraction << ';' << seed;
    std::ostringstream id;
    id << "sim:" << model_name << '-' << std::hex << fnv1a64(params.str());
    return id.str();
}

std::unique_ptr<Backend> make_backend(const BackendConfig& config) {
    config.validate();
    if (config.kind == BackendKind::Remote) return std::make_unique<RemoteBackend>(config);
    return std::make_unique<SimulatedAgentBackend>(config);
}

// ---------------------------------------------------------------------------
// SimulatedAgentBackend

SimulatedAgentBackend::SimulatedAgentBackend(const BackendConfig& config) : config_(config) {
    config_.validate();
    id_ = config_.backend_id();
}

void SimulatedAgentBackend::assign_population(const std::vector<std::string>& fact_ids) {
    std::vector<std::pair<std::uint64_t, std::string>> ranked;
    ranked.reserve(fact_ids.size());
    for (const auto& id : fact_ids) ranked.emplace_back(keyed_seed(config_.seed, id), id);
    std::sort(ranked.begin(), ranked.end());
    const auto structured_count = static_cast<std::size_t>(
        std::llround(config_.population.structured_fraction * static_cast<double>(ranked.size())));
    assignment_.clear();
    for (std::size_t i = 0; i < ranked.size(); ++i)
        assignment_[ranked[i].second] =
            i < structured_count ? BeliefState::Structured : BeliefState::Unstructured;
}

const AgentProfile& SimulatedAgentBackend::profile_for(const std::string& fact_id) const {
    BeliefState state;
    if (const auto it = assignment_.find(fact_id); it != assignment_.end()) {
        state = it->second;
    } else {
        SplitMix64 rng(keyed_seed(config_.seed ^ 0x706F70ULL, fact_id));
        state = rng.bernoulli(config_.population.structured_fraction) ? BeliefState::Structured
                                                                      : BeliefState::Unstructured;
    }
    return state == BeliefState::Structured ? config_.population.structured
                                            : config_.population.unstructured;
}

double SimulatedAgentBackend::yield_probability(const AgentProfile& profile,
                                                const StressCondition& condition) {
    switch (condition.setting) {
        case StressSetting::Baseline:
            return 0.0;
        case StressSetting::PeerQuantity: {
            if (condition.scenario == StressScenario::Conflict) {
                double y = profile.conformity *
                           (static_cast<double>(condition.intensity) / kPeerCount);
                if (kPeerCount - condition.intensity == 1)
                    y *= 1.0 - 1.0 / kPeerCount;  // a lone dissenter weakens the consensus
                return y;
            }
            const double k_eff = std::min(condition.intensity, kPeerCount);
            return 0.5 * profile.conformity * (k_eff / kPeerCount);
        }
        case StressSetting::SourceCredibility: {
            const double w = profile.authority_weights.at(*condition.credibility);
            double y = profile.conformity * w;
            if (condition.scenario == StressScenario::Misleading) y *= 0.5;
            return y;
        }
    }
    return 0.0;
}

std::string SimulatedAgentBackend::complete(const ChatRequest& request) {
    if (!request.prompt) throw BackendError("simulated backend requires prompt metadata");
    calls_.fetch_add(1);
    const RenderedPrompt& prompt = *request.prompt;
    const PromptMeta& meta = prompt.meta;
    const StressCondition& condition = prompt.condition;
    const AgentProfile& profile = profile_for(prompt.fact_id);

    if (meta.kind == QuestionKind::Neighbor) {
        SplitMix64 rng(keyed_seed(profile.rng_seed, request.cache_key));
        const bool correct = rng.bernoulli(profile.neighbor_probability());
        std::string token;
        if (correct) {
            token = meta.expected_answer;
        } else if (meta.answer_type == AnswerType::Boolean) {
            token = meta.expected_answer == "Yes" ? "No" : "Yes";
        } else {
            // uniform wrong option label
            const int wrong = static_cast<int>(
                rng.next_below(static_cast<std::uint64_t>(std::max(meta.option_count - 1, 1))));
            const int expected = meta.expected_answer.empty() ? 0 : meta.expected_answer[0] - 'A';
            const int pick = wrong >= expected ? wrong + 1 : wrong;
            token = std::string(1, NeighborFact::option_label(static_cast<std::size_t>(pick)));
        }
        return "Answer: " + token;
    }

    std::string entity;
    if (meta.kind == QuestionKind::Stress && condition.setting != StressSetting::Baseline) {
        // Yield and fallback draws are keyed without intensity, credibility, or
        // truth position so that sweeps along those axes reuse the same
        // uniforms (common random numbers).
        validateCondition:
        condition.validate();
        const std::string axis = prompt.fact_id + '|' + to_string(condition.setting) + '|' +
                                 to_string(condition.scenario) + '|' + to_string(condition.mode) +
                                 '|' + std::to_string(request.sample_index);
        SplitMix64 yield_rng(keyed_seed(profile.rng_seed, "yield|" + axis));
        if (yield_rng.bernoulli(yield_probability(profile, condition))) {
            entity = meta.misleading_entity;
        } else {
            SplitMix64 fallback_rng(keyed_seed(profile.rng_seed, "fallback|" + axis));
            entity = fallback_rng.bernoulli(profile.p_target) ? meta.gold_entity
                                                              : meta.misleading_entity;
        }
    } else {
        SplitMix64 rng(keyed_seed(profile.rng_seed, request.cache_key));
        entity = rng.bernoulli(profile.p_target) ? meta.gold_entity : meta.misleading_entity;
    }
    return "Answer: " + entity;
}

// ---------------------------------------------------------------------------
// RemoteBackend

RemoteBackend::RemoteBackend(const BackendConfig& config) : config_(config) {
    config_.validate();
    id_ = config_.backend_id();
    std::string rest = config_.endpoint;
    const auto scheme_end = rest.find("://");
    if (scheme_end != std::string::npos) {
        const std::string scheme = rest.substr(0, scheme_end);
        if (scheme != "http")
            throw BackendError("unsupported endpoint scheme '" + scheme + "' (http only)");
        rest = rest.substr(scheme_end + 3);
    }
    const auto slash = rest.find('/');
    std::string hostport = slash == std::string::npos ? rest : rest.substr(0, slash);
    path_ = slash == std::string::npos ? std::string("/v1/chat/completions") : rest.substr(slash);
    const auto colon = hostport.rfind(':');
    if (colon == std::string::npos) {
        host_ = hostport;
        port_ = 80;
    } else {
        host_ = hostport.substr(0, colon);
        port_ = std::stoi(hostport.substr(colon + 1));
    }
    if (host_.empty()) throw BackendError("endpoint has no host: " + config_.endpoint);
}

std::string RemoteBackend::complete(const ChatRequest& request) {
    calls_.fetch_add(1);
    ordered_json body;
    body["model"] = config_.model_name;
    body["messages"] = ordered_json::array();
    if (request.prompt && request.prompt->system)
        body["messages"].push_back({{"role", "system"}, {"content", *request.prompt->system}});
    for (const auto& [role, text] : request.turns)
        body["messages"].push_back(
            {{"role", role == Role::User ? "user" : "assistant"}, {"content", text}});
    body["temperature"] = config_.temperature;
    body["n"] = 1;

    httplib::Client client(host_, port_);
    client.set_connection_timeout(10, 0);
    client.set_read_timeout(120, 0);
    httplib::Headers headers;
    if (const char* key = std::getenv(config_.api_key_env.c_str()); key && *key)
        headers.emplace("Authorization", std::string("Bearer ") + key);

    auto res = client.Post(path_, headers, body.dump(), "application/json");
    if (!res)
        throw RetryableBackendError("transport error talking to " + host_ + ":" +
                                    std::to_string(port_) + ": " +
                                    httplib::to_string(res.error()));
    if (res->status == 429 || res->status >= 500)
        throw RetryableBackendError("HTTP " + std::to_string(res->status) + " from service");
    if (res->status != 200)
        throw BackendError("HTTP " + std::to_string(res->status) + " from service: " + res->body);
    try {
        const auto parsed = nlohmann::json::parse(res->body);
        return parsed.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw BackendError(std::string("malformed service response: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// ResponseCache

ResponseCache::ResponseCache(const std::string& path) : path_(path) {
    std::ifstream in(path_, std::ios::binary);
    if (!in) return;  // fresh cache file, created on first put
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        ResponseRecord record = parse_record(line);
        records_[record.cache_key()] = std::move(record);
    }
}

std::optional<ResponseRecord> ResponseCache::get(const std::string& key) const {
    std::lock_guard lock(mutex_);
    if (const auto it = records_.find(key); it != records_.end()) return it->second;
    return std::nullopt;
}

void ResponseCache::put(const ResponseRecord& record) {
    std::lock_guard lock(mutex_);
    const auto [it, inserted] = records_.emplace(record.cache_key(), record);
    if (!inserted) return;  // keys are immutable once written
    if (!path_.empty()) {
        std::ofstream out(path_, std::ios::binary | std::ios::app);
        out << serialize_record(record) << '\n';
    }
}

std::size_t ResponseCache::size() const {
    std::lock_guard lock(mutex_);
    return records_.size();
}

std::string ResponseCache::serialize_record(const ResponseRecord& r) {
    ordered_json j;
    j["fact_id"] = r.fact_id;
    j["kind"] = to_string(r.kind);
    j["neighbor_index"] = r.neighbor_index;
    j["condition_id"] = r.condition_id;
    j["sample_index"] = r.sample_index;
    j["raw_text"] = r.raw_text;
    if (r.extracted_entity) j["extracted_entity"] = *r.extracted_entity;
    j["normalized"] = {{"value", r.normalized.value}, {"valid", r.normalized.valid}};
    j["backend_id"] = r.backend_id;
    j["template_version"] = r.template_version;
    j["timestamp"] = r.timestamp;
    if (!r.error_note.empty()) j["error_note"] = r.error_note;
    return j.dump();
}

ResponseRecord ResponseCache::parse_record(const std::string& line) {
    const auto j = nlohmann::json::parse(line);
    ResponseRecord r;
    r.fact_id = j.at("fact_id").get<std::string>();
    r.kind = question_kind_from_string(j.at("kind").get<std::string>());
    r.neighbor_index = j.at("neighbor_index").get<int>();
    r.condition_id = j.at("condition_id").get<std::string>();
    r.sample_index = j.at("sample_index").get<int>();
    r.raw_text = j.at("raw_text").get<std::string>();
    if (j.contains("extracted_entity"))
        r.extracted_entity = j.at("extracted_entity").get<std::string>();
    r.normalized.value = j.at("normalized").at("value").get<std::string>();
    r.normalized.valid = j.at("normalized").at("valid").get<bool>();
    r.backend_id = j.at("backend_id").get<std::string>();
    r.template_version = j.at("template_version").get<std::string>();
    r.timestamp = j.at("timestamp").get<std::string>();
    if (j.contains("error_note")) r.error_note = j.at("error_note").get<std::string>();
    return r;
}

// ---------------------------------------------------------------------------
// Entity extraction

namespace {

std::string strip_decoration(std::string s) {
    auto drop = [](char c) {
        return c == '*' || c == '"' || c == '\'' || c == '`' || std::isspace(static_cast<unsigned char>(c));
    };
    std::size_t b = 0, e = s.size();
    while (b < e && drop(s[b])) ++b;
    while (e > b && (drop(s[e - 1]) || s[e - 1] == '.' || s[e - 1] == ',' || s[e - 1] == '!' ||
                     s[e - 1] == ':'))
        --e;
    return s.substr(b, e - b);
}

std::size_t find_last_ci(const std::string& haystack, const std::string& needle) {
    if (needle.empty() || haystack.size() < needle.size()) return std::string::npos;
    auto lower = [](char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); };
    for (std::size_t i = haystack.size() - needle.size() + 1; i-- > 0;) {
        bool hit = true;
        for (std::size_t k = 0; k < needle.size(); ++k)
            if (lower(haystack[i + k]) != lower(needle[k])) {
                hit = false;
                break;
            }
        if (hit) return i;
    }
    return std::string::npos;
}

}  // namespace

std::string rule_extract_entity(const std::string& raw_text) {
    if (const auto pos = find_last_ci(raw_text, "answer:"); pos != std::string::npos) {
        const std::string tail = raw_text.substr(pos + 7);
        const std::string stripped = strip_decoration(tail);
        if (!stripped.empty()) return stripped;
    }
    // final sentence
    std::string text = strip_decoration(raw_text);
    std::size_t sentence_start = 0;
    for (std::size_t i = 0; i + 1 < text.size(); ++i)
        if ((text[i] == '.' || text[i] == '!' || text[i] == '?') && text[i + 1] == ' ')
            sentence_start = i + 2;
    std::string sentence = text.substr(sentence_start);
    // trailing phrase after the last copular verb or colon
    std::size_t best = std::string::npos;
    std::size_t best_len = 0;
    for (const std::string marker : {" is: ", " is ", " was ", " are ", ": "}) {
        const auto pos = find_last_ci(sentence, marker);
        if (pos != std::string::npos && (best == std::string::npos || pos > best)) {
            best = pos;
            best_len = marker.size();
        }
    }
    if (best != std::string::npos) {
        const std::string tail = strip_decoration(sentence.substr(best + best_len));
        if (!tail.empty()) return tail;
    }
    return strip_decoration(sentence);
}

std::string extract_entity(const std::string& raw_text, const std::string& question,
                           ExtractionStrategy strategy, Backend* extractor, bool* fell_back) {
    if (fell_back) *fell_back = false;
    if (raw_text.empty()) throw std::invalid_argument("extract_entity: empty response text");
    if (strategy == ExtractionStrategy::Model && extractor) {
        try {
            RenderedPrompt prompt;
            prompt.fact_id = "extraction";
            prompt.turns.emplace_back(Role::User, build_extraction_prompt(question, raw_text));
            ChatRequest request;
            request.prompt = &prompt;
            request.turns = prompt.turns;
            request.cache_key = "extract|" + std::to_string(fnv1a64(question + '\n' + raw_text));
            const std::string reply = extractor->complete(request);
            const std::string stripped = strip_decoration(reply);
            if (!stripped.empty()) return stripped;
        } catch (const BackendError&) {
            // fall through to the rule
        }
        if (fell_back) *fell_back = true;
    }
    return rule_extract_entity(raw_text);
}

// ---------------------------------------------------------------------------
// SamplingClient

std::string iso8601_utc_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

SamplingClient::SamplingClient(BackendConfig config, std::shared_ptr<ResponseCache> cache)
    : SamplingClient(std::move(config), std::move(cache), nullptr) {}

SamplingClient::SamplingClient(BackendConfig config, std::shared_ptr<ResponseCache> cache,
                               std::unique_ptr<Backend> backend)
    : config_(std::move(config)), cache_(std::move(cache)), backend_(std::move(backend)) {
    config_.validate();
    if (!cache_) cache_ = std::make_shared<ResponseCache>();
    if (!backend_) backend_ = make_backend(config_);
}

std::string SamplingClient::complete_with_retry(const ChatRequest& request) {
    const int attempts = config_.retry.max_attempts;
    for (int attempt = 0;; ++attempt) {
        try {
            return backend_->complete(request);
        } catch (const RetryableBackendError&) {
            if (attempt + 1 >= attempts) throw;
            const auto& schedule = config_.retry.backoff_ms;
            const int delay =
                schedule.empty()
                    ? 0
                    : schedule[std::min<std::size_t>(attempt, schedule.size() - 1)];
            std::this_thread::sleep_for(std::chrono::milliseconds(delay));
        }
    }
}

ResponseRecord SamplingClient::fetch_one(const PromptPlan& plan, int sample_index,
                                         const ResponseRecord& skeleton) {
    ResponseRecord record = skeleton;
    record.sample_index = sample_index;
    record.timestamp = iso8601_utc_now();
    try {
        ChatRequest request;
        request.prompt = &plan.first;
        request.sample_index = sample_index;
        if (plan.followup_instruction) {
            // Turn 1 is byte-identical to the Standard-mode prompt, so its
            // samples share the Standard cache keys.
            ResponseRecord turn1 = skeleton;
            RenderedPrompt std_prompt = plan.first;
            std_prompt.condition.mode = InferenceMode::Standard;
            turn1.condition_id = std_prompt.condition.id();
            turn1.sample_index = sample_index;
            std::string first_answer;
            if (const auto cached = cache_->get(turn1.cache_key())) {
                first_answer = cached->raw_text;
            } else {
                ChatRequest first_request;
                first_request.prompt = &std_prompt;
                first_request.turns = std_prompt.turns;
                first_request.cache_key = turn1.cache_key();
                first_request.sample_index = sample_index;
                first_answer = complete_with_retry(first_request);
                turn1.raw_text = first_answer;
                turn1.timestamp = iso8601_utc_now();
                const std::string token = rule_extract_entity(first_answer);
                if (plan.first.meta.kind != QuestionKind::Neighbor) turn1.extracted_entity = token;
                turn1.normalized = normalize_entity(token);
                cache_->put(turn1);
            }
            request.turns = plan.first.turns;
            request.turns.emplace_back(Role::Assistant, first_answer);
            request.turns.emplace_back(Role::User, *plan.followup_instruction);
        } else {
            request.turns = plan.first.turns;
        }
        request.cache_key = record.cache_key();
        record.raw_text = complete_with_retry(request);
        const std::string token = rule_extract_entity(record.raw_text);
        if (plan.first.meta.kind != QuestionKind::Neighbor) record.extracted_entity = token;
        record.normalized = normalize_entity(token);
    } catch (const BackendError& e) {
        record.raw_text.clear();
        record.extracted_entity.reset();
        record.normalized = NormalizedEntity{};
        record.error_note = e.what();
    }
    return record;
}

std::vector<ResponseRecord> SamplingClient::sample(const PromptPlan& plan, int n) {
    if (n < 1) throw std::invalid_argument("sample: n must be >= 1");
    plan.first.condition.validate();

    ResponseRecord skeleton;
    skeleton.fact_id = plan.first.fact_id;
    skeleton.kind = plan.first.meta.kind;
    skeleton.neighbor_index = plan.first.meta.neighbor_index;
    skeleton.condition_id = plan.first.condition.id();
    skeleton.backend_id = backend_->id();
    skeleton.template_version = plan.first.template_version;

    std::vector<ResponseRecord> records(static_cast<std::size_t>(n));
    std::vector<int> misses;
    for (int i = 0; i < n; ++i) {
        ResponseRecord probe = skeleton;
        probe.sample_index = i;
        if (auto cached = cache_->get(probe.cache_key())) {
            records[static_cast<std::size_t>(i)] = std::move(*cached);
        } else {
            misses.push_back(i);
        }
    }
    if (misses.empty()) return records;

    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> transport_failures{0};
    const int workers = std::min<int>(config_.max_concurrency, static_cast<int>(misses.size()));
    auto work = [&] {
        for (;;) {
            const std::size_t slot = next.fetch_add(1);
            if (slot >= misses.size()) break;
            const int index = misses[slot];
            ResponseRecord record = fetch_one(plan, index, skeleton);
            if (!record.error_note.empty() &&
                record.error_note.find("transport error") != std::string::npos)
                transport_failures.fetch_add(1);
            cache_->put(record);
            records[static_cast<std::size_t>(index)] = std::move(record);
        }
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    if (transport_failures.load() == misses.size())
        throw BackendError("endpoint unreachable: every sample in the batch failed after retries");
    return records;
}

}  // namespace ncb
