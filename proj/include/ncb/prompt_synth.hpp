#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ncb/belief_math.hpp"
#include "ncb/core_data.hpp"
#include "ncb/records.hpp"

namespace ncb {

// Bumped whenever any template text changes; persisted with every response
// record so cached results from older template revisions are never reused.
inline constexpr const char* kTemplateVersion = "templates-v1";

enum class StressSetting { Baseline, PeerQuantity, SourceCredibility };
enum class StressScenario { None, Conflict, Misleading };
enum class InferenceMode { Standard, CoT, Reflection };

std::string to_string(StressSetting s);
std::string to_string(StressScenario s);
std::string to_string(InferenceMode m);
InferenceMode inference_mode_from_string(const std::string& s);

inline constexpr int kPeerCount = 6;

// Fully parameterized interference configuration. `intensity` is the
// distractor count k for PeerQuantity-Conflict and the statement count N for
// Misleading scenarios.
struct StressCondition {
    StressSetting setting = StressSetting::Baseline;
    StressScenario scenario = StressScenario::None;
    int intensity = 0;
    std::optional<Credibility> credibility;
    InferenceMode mode = InferenceMode::Standard;
    std::optional<int> truth_position;  // 1-based peer slot; only for k = peers-1

    // Throws std::invalid_argument on any inconsistent combination.
    void validate() const;
    // Stable identifier, e.g. "peer-conflict-k5-pos3-cot"; doubles as the
    // cache-key component.
    std::string id() const;

    static StressCondition baseline(InferenceMode mode = InferenceMode::Standard);
    static StressCondition peer_conflict(int k, InferenceMode mode = InferenceMode::Standard,
                                         std::optional<int> truth_position = std::nullopt);
    static StressCondition peer_misleading(int n, InferenceMode mode = InferenceMode::Standard);
    static StressCondition source_conflict(Credibility c, int n,
                                           InferenceMode mode = InferenceMode::Standard);
    static StressCondition source_misleading(Credibility c, int n,
                                             InferenceMode mode = InferenceMode::Standard);
};

enum class Role { User, Assistant };

// What the simulated backend needs to answer in character without seeing the
// dataset: the entities in play and, for neighbors, the expected token.
struct PromptMeta {
    QuestionKind kind = QuestionKind::Target;
    int neighbor_index = -1;
    std::string gold_entity;
    std::string misleading_entity;
    std::string expected_answer;  // neighbor token ("Yes"/"No"/option label)
    AnswerType answer_type = AnswerType::Boolean;
    int option_count = 0;
};

struct RenderedPrompt {
    std::optional<std::string> system;
    std::vector<std::pair<Role, std::string>> turns;
    StressCondition condition;
    std::string fact_id;
    std::string template_version = kTemplateVersion;
    PromptMeta meta;

    const std::string& user_text() const;  // text of the last user turn
};

// A renderable unit of work: `first` is sent as-is; when
// `followup_instruction` is set the client appends the model's first answer
// as an assistant turn plus the instruction, and the second answer is the
// sample.
struct PromptPlan {
    RenderedPrompt first;
    std::optional<std::string> followup_instruction;
};

// Plain target question, no interference.
RenderedPrompt build_baseline(const BeliefNeighborhood& fact);
// Blind-solver prompt for neighbor index i (MCQ options rendered inline).
RenderedPrompt build_neighbor(const BeliefNeighborhood& fact, int neighbor_index);

// Six peers; k of them answer the misleading entity, the rest the gold one.
// Distractors come first unless truth_position pins the single truth-teller.
RenderedPrompt build_peer_conflict(const BeliefNeighborhood& fact, int k,
                                   std::optional<int> truth_position = std::nullopt);

// n peer lines quoting misleading neighbor facts (cycled in order when n
// exceeds the supply), then the original question.
RenderedPrompt build_peer_misleading(const BeliefNeighborhood& fact, int n);

// Credibility-specific wrapper embedding n misleading-neighbor statements.
RenderedPrompt build_source_misleading(const BeliefNeighborhood& fact, Credibility credibility,
                                       int n);

// True neighbor-derived statements attributed to hearsay, with their
// entity-swapped falsifications attributed to verified records.
RenderedPrompt build_source_conflict(const BeliefNeighborhood& fact, Credibility credibility,
                                     std::span<const std::string> neighbor_statements);

// Replaces every whole-word, case-insensitive mention of from_entity; throws
// std::invalid_argument when no mention is found.
std::string rewrite_entity(const std::string& statement, const std::string& from_entity,
                           const std::string& to_entity);

// Standard returns the prompt unchanged; CoT appends one instruction line to
// the user turn; Reflection adds the reconsider instruction as a follow-up.
PromptPlan apply_mode(RenderedPrompt prompt, InferenceMode mode);

// Canonical text form used for golden files and debugging output.
std::string render_to_text(const PromptPlan& plan);

// Verbatim instruction texts (exposed for tests and the run manifest).
const std::string& cot_instruction();
const std::string& reflection_instruction();
// Versioned free-form entity extraction prompt for model-based extraction.
std::string build_extraction_prompt(const std::string& question, const std::string& response);

}  // namespace ncb
