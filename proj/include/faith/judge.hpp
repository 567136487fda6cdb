#pragma once

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "faith/dataset.hpp"
#include "faith/model_client.hpp"

namespace faith {

/// How a chain of thought handled the injected bias: never mentioned it,
/// mentioned but dismissed it, or leaned on it for the answer.
enum class Articulation { Unmentioned, Discarded, Relied };

std::string to_string(Articulation articulation);
Articulation articulation_from_string(const std::string& text);

/// Judge digit replies: 1 is Unmentioned, 2 is Discarded, 3 is Relied.
Articulation articulation_from_digit(int digit);

enum class JudgeMode { Model, Rules };

std::string to_string(JudgeMode mode);
JudgeMode judge_mode_from_string(const std::string& text);

struct CotLabel {
    Articulation articulation = Articulation::Unmentioned;
    bool inconsistent = false;
    std::string judge_raw;
    JudgeMode judge_mode = JudgeMode::Rules;

    bool operator==(const CotLabel&) const = default;
};

/// One transcript's labels. final_answer empty means unanswered (scored
/// incorrect); label empty means the judge reply stayed unparseable and the
/// sample is excluded, with the reason in audit.
struct JudgedTranscript {
    std::string question_id;
    std::optional<Label> final_answer;
    std::optional<CotLabel> label;
    std::string audit;

    bool operator==(const JudgedTranscript&) const = default;
};

nlohmann::json judged_to_json(const JudgedTranscript& judged);
JudgedTranscript judged_from_json(const nlohmann::json& j);

/// Human-readable bias phrase inserted into the articulation prompt; fixed
/// per kind so labels stay comparable across runs.
std::string bias_description(BiasKind kind);

/// Lowercase tokens whose presence in a CoT counts as mentioning the bias.
const std::vector<std::string>& bias_signature_tokens(BiasKind kind);

// Judge prompt templates, also shipped under prompts/ for versioning.
extern const char* const kFinalAnswerPromptTemplate;
extern const char* const kArticulationPromptTemplate;
extern const char* const kInconsistencyPromptTemplate;

std::string build_final_answer_prompt(const Question& q, const std::string& cot);
std::string build_articulation_prompt(const std::string& cot, const std::string& bias_desc);
std::string build_inconsistency_prompt(const Question& q, const std::string& cot);

// Reply parsing; empty optional means the reply did not follow the format.
std::optional<Label> parse_final_answer_reply(const std::string& reply);
std::optional<Articulation> parse_articulation_reply(const std::string& reply);
std::optional<bool> parse_inconsistency_reply(const std::string& reply);

/// Scans for boxed answers, parenthesized labels, and "answer is X"
/// phrasings; the last occurrence wins. Empty optional means unanswered.
std::optional<Label> rules_extract_final_answer(const std::string& cot);

Articulation rules_classify_articulation(const std::string& cot, BiasKind kind);
bool rules_detect_inconsistency(const std::string& cot);

/// Deterministic labeling from lexical signals; used in tests and offline
/// runs. Never fails.
CotLabel fallback_classify(const Transcript& t, const BiasSpec& spec);

/// Labels transcripts either with deterministic rules or through a judge
/// model. Model replies that ignore the format are retried once with a
/// format reminder; still-bad replies exclude the sample.
class Judge {
  public:
    Judge() = default;
    explicit Judge(std::shared_ptr<ModelClient> client);

    JudgeMode mode() const { return client_ ? JudgeMode::Model : JudgeMode::Rules; }

    std::optional<Label> extract_final_answer(const Transcript& t, const Question& q);
    JudgedTranscript judge(const Transcript& t, const Question& q, const BiasSpec& spec);

    std::vector<JudgedTranscript> judge_all(
        const std::vector<std::pair<Transcript, Question>>& items, const BiasSpec& spec,
        long concurrency = 4);

  private:
    std::string ask(const std::string& prompt, const std::string& question_id);

    std::shared_ptr<ModelClient> client_;
};

/// Agreement between two judges over the same transcripts, for calibrating
/// a model judge against the rules or a second model.
struct JudgeAgreement {
    long n = 0;
    double articulation_agreement = 0.0;
    double inconsistency_agreement = 0.0;
};

JudgeAgreement judge_agreement(const std::vector<CotLabel>& first,
                               const std::vector<CotLabel>& second);

}  // namespace faith
