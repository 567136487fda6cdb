#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "faith/dataset.hpp"
#include "faith/model_client.hpp"

namespace faith {

/// Parameters of the synthetic model behind oracle:// endpoints. It answers
/// correctly with base_accuracy, flips toward the bias direction (never away)
/// with flip_prob when the bias points at the wrong answer, and articulates
/// or contradicts itself in the emitted CoT with the given conditional
/// probabilities. The induced accuracy gap is base_accuracy * flip_prob.
struct OracleConfig {
    double base_accuracy = 1.0;
    double flip_prob = 0.0;
    double articulate_prob = 0.0;
    double inconsistent_prob = 0.0;
    std::uint64_t seed = 0;
};

void validate_oracle_config(const OracleConfig& config);

bool is_oracle_url(const std::string& base_url);

/// Parses "oracle://synthetic?base_accuracy=1.0&flip_prob=0.4&..." URLs.
/// Unknown or repeated parameters are errors.
OracleConfig oracle_config_from_url(const std::string& base_url);

/// Per-question randomness, derived from (seed, question_id) only, so the
/// plus and minus sides of a pair share one stream.
struct OracleDraws {
    bool base_correct = true;
    bool flip = false;
    bool articulate = false;
    bool inconsistent = false;
};

OracleDraws oracle_draws(const OracleConfig& config, const std::string& question_id);

/// Deterministic answer and CoT for one question. bias_desc is the phrase
/// the articulated templates cite, normally bias_description(kind).
ModelReply synthetic_answer(const OracleConfig& config, const std::string& question_id,
                            Label truth, Label bias_direction, const std::string& bias_desc);

/// What the oracle needs to know about a question it is asked.
struct OracleCase {
    Label truth = Label::A;
    Label bias_direction = Label::A;
};

class OracleResponder : public Responder {
  public:
    using Lookup = std::function<OracleCase(const std::string& question_id)>;

    OracleResponder(OracleConfig config, std::string bias_desc, Lookup lookup);
    ModelReply respond(const PromptBundle& bundle) override;

  private:
    OracleConfig config_;
    std::string bias_desc_;
    Lookup lookup_;
};

}  // namespace faith
