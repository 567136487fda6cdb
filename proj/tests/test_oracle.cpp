#include "faith/oracle.hpp"

#include <gtest/gtest.h>

#include <string>

#include "faith/error.hpp"
#include "faith/judge.hpp"

namespace faith {
namespace {

TEST(OracleUrl, ParsesAllParameters) {
    auto config = oracle_config_from_url(
        "oracle://synthetic?base_accuracy=0.9&flip_prob=0.4&articulate_prob=0.7"
        "&inconsistent_prob=0.3&seed=42");
    EXPECT_DOUBLE_EQ(config.base_accuracy, 0.9);
    EXPECT_DOUBLE_EQ(config.flip_prob, 0.4);
    EXPECT_DOUBLE_EQ(config.articulate_prob, 0.7);
    EXPECT_DOUBLE_EQ(config.inconsistent_prob, 0.3);
    EXPECT_EQ(config.seed, 42u);
}

TEST(OracleUrl, DefaultsWhenQueryOmitted) {
    auto config = oracle_config_from_url("oracle://synthetic");
    EXPECT_DOUBLE_EQ(config.base_accuracy, 1.0);
    EXPECT_DOUBLE_EQ(config.flip_prob, 0.0);
    EXPECT_EQ(config.seed, 0u);
}

TEST(OracleUrl, RejectsMalformedInput) {
    EXPECT_FALSE(is_oracle_url("http://host/v1"));
    EXPECT_TRUE(is_oracle_url("oracle://synthetic?seed=1"));
    EXPECT_THROW(oracle_config_from_url("http://synthetic"), Error);
    EXPECT_THROW(oracle_config_from_url("oracle://other"), Error);
    EXPECT_THROW(oracle_config_from_url("oracle://synthetic?tempo=1"), Error);
    EXPECT_THROW(oracle_config_from_url("oracle://synthetic?seed=1&seed=2"), Error);
    EXPECT_THROW(oracle_config_from_url("oracle://synthetic?flip_prob=1.5"), Error);
    EXPECT_THROW(oracle_config_from_url("oracle://synthetic?flip_prob=abc"), Error);
    EXPECT_THROW(oracle_config_from_url("oracle://synthetic?seed=12x"), Error);
    EXPECT_THROW(oracle_config_from_url("oracle://synthetic?flip_prob"), Error);
}

TEST(OracleDrawsTest, DeterministicPerSeedAndQuestion) {
    OracleConfig config;
    config.base_accuracy = 0.5;
    config.flip_prob = 0.5;
    config.articulate_prob = 0.5;
    config.inconsistent_prob = 0.5;
    config.seed = 7;

    auto signature = [&](std::uint64_t seed) {
        OracleConfig c = config;
        c.seed = seed;
        std::string sig;
        for (int i = 0; i < 64; ++i) {
            auto draws = oracle_draws(c, "q" + std::to_string(i));
            sig += draws.base_correct ? '1' : '0';
            sig += draws.flip ? '1' : '0';
            sig += draws.articulate ? '1' : '0';
            sig += draws.inconsistent ? '1' : '0';
        }
        return sig;
    };
    EXPECT_EQ(signature(7), signature(7));
    EXPECT_NE(signature(7), signature(8));
}

TEST(SyntheticAnswer, FlipsOnlyTowardTheBias) {
    OracleConfig config;
    config.base_accuracy = 1.0;
    config.flip_prob = 1.0;
    config.seed = 3;
    for (int i = 0; i < 20; ++i) {
        std::string id = "q" + std::to_string(i);
        auto plus = synthetic_answer(config, id, Label::A, Label::A, "the hint");
        auto minus = synthetic_answer(config, id, Label::A, Label::B, "the hint");
        EXPECT_EQ(rules_extract_final_answer(plus.text), Label::A) << id;
        EXPECT_EQ(rules_extract_final_answer(minus.text), Label::B) << id;
    }
}

TEST(SyntheticAnswer, NoFlipMeansTruthfulAnswersBothSides) {
    OracleConfig config;
    config.base_accuracy = 1.0;
    config.flip_prob = 0.0;
    config.seed = 3;
    for (int i = 0; i < 20; ++i) {
        std::string id = "q" + std::to_string(i);
        auto plus = synthetic_answer(config, id, Label::B, Label::B, "the hint");
        auto minus = synthetic_answer(config, id, Label::B, Label::A, "the hint");
        EXPECT_EQ(rules_extract_final_answer(plus.text), Label::B) << id;
        EXPECT_EQ(rules_extract_final_answer(minus.text), Label::B) << id;
    }
}

TEST(SyntheticAnswer, ZeroBaseAccuracyAnswersWrongWithoutBias) {
    OracleConfig config;
    config.base_accuracy = 0.0;
    config.seed = 5;
    for (int i = 0; i < 10; ++i) {
        auto reply = synthetic_answer(config, "q" + std::to_string(i), Label::A, Label::A, "x");
        EXPECT_EQ(rules_extract_final_answer(reply.text), Label::B);
    }
}

TEST(SyntheticAnswer, FlipRateNearConfiguredValue) {
    OracleConfig config;
    config.base_accuracy = 1.0;
    config.flip_prob = 0.4;
    config.seed = 11;
    int flips = 0;
    const int n = 2000;
    for (int i = 0; i < n; ++i) {
        auto reply = synthetic_answer(config, "q" + std::to_string(i), Label::A, Label::B, "x");
        if (rules_extract_final_answer(reply.text) == Label::B) ++flips;
    }
    double rate = static_cast<double>(flips) / n;
    EXPECT_GT(rate, 0.35);
    EXPECT_LT(rate, 0.45);
}

TEST(SyntheticAnswer, TemplatesClassifyCorrectlyUnderTheRulesJudge) {
    for (BiasKind kind : all_bias_kinds()) {
        const std::string desc = bias_description(kind);
        for (bool articulate : {false, true}) {
            for (bool inconsistent : {false, true}) {
                OracleConfig config;
                config.base_accuracy = 1.0;
                config.flip_prob = 1.0;
                config.articulate_prob = articulate ? 1.0 : 0.0;
                config.inconsistent_prob = inconsistent ? 1.0 : 0.0;
                config.seed = 9;

                auto reply = synthetic_answer(config, "q1", Label::A, Label::B, desc);
                Transcript t;
                t.question_id = "q1";
                t.raw_cot = reply.text;
                CotLabel label = fallback_classify(t, {kind, {}});

                EXPECT_EQ(label.articulation,
                          articulate ? Articulation::Relied : Articulation::Unmentioned)
                    << to_string(kind) << " articulate=" << articulate
                    << " inconsistent=" << inconsistent << "\n"
                    << reply.text;
                EXPECT_EQ(label.inconsistent, inconsistent)
                    << to_string(kind) << " articulate=" << articulate
                    << " inconsistent=" << inconsistent << "\n"
                    << reply.text;
                EXPECT_EQ(rules_extract_final_answer(reply.text), Label::B);
            }
        }
    }
}

TEST(SyntheticAnswer, UnflippedTemplateIsUnmentionedAndConsistent) {
    OracleConfig config;
    config.base_accuracy = 1.0;
    config.seed = 2;
    for (BiasKind kind : all_bias_kinds()) {
        auto reply = synthetic_answer(config, "q1", Label::A, Label::A, bias_description(kind));
        Transcript t;
        t.question_id = "q1";
        t.raw_cot = reply.text;
        CotLabel label = fallback_classify(t, {kind, {}});
        EXPECT_EQ(label.articulation, Articulation::Unmentioned) << to_string(kind);
        EXPECT_FALSE(label.inconsistent) << to_string(kind);
    }
}

TEST(OracleResponderTest, AnswersThroughTheLookup) {
    OracleConfig config;
    config.base_accuracy = 1.0;
    config.flip_prob = 1.0;
    config.seed = 1;
    OracleResponder responder(config, "the hint given in the question",
                              [](const std::string& id) {
                                  require(id == "q1", "unknown question ", id);
                                  return OracleCase{Label::A, Label::B};
                              });
    PromptBundle bundle;
    bundle.messages.push_back({"user", "question text", {}});
    bundle.test_question_id = "q1";
    auto reply = responder.respond(bundle);
    EXPECT_EQ(rules_extract_final_answer(reply.text), Label::B);

    bundle.test_question_id = "q2";
    EXPECT_THROW(responder.respond(bundle), Error);
}

TEST(OracleResponderTest, RequiresLookup) {
    EXPECT_THROW(OracleResponder(OracleConfig{}, "x", nullptr), Error);
}

}  // namespace
}  // namespace faith
