#include "faith/prompting.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "faith/error.hpp"
#include "faith/text_bias.hpp"
#include "testing/generators.hpp"

namespace faith {
namespace {

using testing_support::random_question;

Question sample_question() {
    Question q;
    q.id = "q1";
    q.stem = "Which object is closer to the camera, the pillow or the desk?";
    q.choices[0].text = "pillow";
    q.choices[1].text = "desk";
    q.ground_truth = Label::A;
    return q;
}

DatasetSplit make_split(std::size_t pool_size) {
    DatasetSplit split;
    SeededRng rng(91);
    for (std::size_t i = 0; i < pool_size; ++i) {
        split.incontext_pool.push_back(random_question(rng, "p" + std::to_string(i)));
    }
    return split;
}

std::vector<std::string> ids_of(const std::vector<Question>& questions) {
    std::vector<std::string> ids;
    for (const auto& q : questions) ids.push_back(q.id);
    return ids;
}

TEST(ContextMode, StringRoundTrip) {
    for (auto mode : {ContextMode::NoContext, ContextMode::Unbiased, ContextMode::Biased}) {
        EXPECT_EQ(context_mode_from_string(to_string(mode)), mode);
    }
    EXPECT_THROW(context_mode_from_string("offline"), Error);
}

TEST(ContextSetting, DigestNamesModeSizeAndSeed) {
    EXPECT_EQ((ContextSetting{ContextMode::NoContext, 25, 7}).digest(), "no_context");
    EXPECT_EQ((ContextSetting{ContextMode::Unbiased, 25, 7}).digest(), "unbiased_n25_s7");
    EXPECT_EQ((ContextSetting{ContextMode::Biased, 10, 0}).digest(), "biased_n10_s0");
}

TEST(ContextSetting, ValidationRequiresExamplesUnlessNoContext) {
    EXPECT_NO_THROW(validate_context_setting({ContextMode::NoContext, 0, 0}));
    EXPECT_THROW(validate_context_setting({ContextMode::Unbiased, 0, 0}), Error);
    EXPECT_THROW(validate_context_setting({ContextMode::Biased, -3, 0}), Error);
}

TEST(RenderOptions, PlainQuestion) {
    EXPECT_EQ(render_options(sample_question()), "(A) pillow (B) desk");
}

TEST(RenderOptions, MarkWrapsOnlyTheLabel) {
    Question q = sample_question();
    q.mark = MarkDecoration{Label::A, "*"};
    EXPECT_EQ(render_options(q), "*(A)* pillow (B) desk");
    q.mark = MarkDecoration{Label::B, "**"};
    EXPECT_EQ(render_options(q), "(A) pillow **(B)** desk");
}

TEST(RenderQuestionBlock, FillsPlaceholders) {
    Question q = sample_question();
    std::string block = render_question_block(q, "{stem}\n{choices}");
    EXPECT_EQ(block,
              "Which object is closer to the camera, the pillow or the desk?\n"
              "(A) pillow (B) desk");
}

TEST(RenderQuestionBlock, HintGetsItsOwnLine) {
    Question q = sample_question();
    q.hint = "Hint:According to me, answer is (A)";
    std::string block = render_question_block(q, "{stem}\n{choices}");
    EXPECT_EQ(block,
              "Which object is closer to the camera, the pillow or the desk?\n"
              "(A) pillow (B) desk\n"
              "Hint:According to me, answer is (A)");
}

TEST(RenderQuestionBlock, CustomTemplateKeepsSurroundingText) {
    Question q = sample_question();
    std::string block = render_question_block(q, "Question: {stem}\nOptions: {choices}\nPick one.");
    EXPECT_EQ(block,
              "Question: Which object is closer to the camera, the pillow or the desk?\n"
              "Options: (A) pillow (B) desk\n"
              "Pick one.");
}

TEST(RenderQuestionBlock, MissingPlaceholdersRejected) {
    Question q = sample_question();
    EXPECT_THROW(render_question_block(q, "{choices}"), Error);
    EXPECT_THROW(render_question_block(q, "{stem}"), Error);
}

TEST(SelectIncontext, NoContextIsEmpty) {
    ContextSetting setting{ContextMode::NoContext, 25, 1};
    EXPECT_TRUE(select_incontext(make_split(5), setting, std::nullopt).empty());
}

TEST(SelectIncontext, PoolTooSmallNamesBothCounts) {
    ContextSetting setting{ContextMode::Unbiased, 25, 1};
    try {
        select_incontext(make_split(10), setting, std::nullopt);
        FAIL() << "expected Error";
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("10"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("25"), std::string::npos);
    }
}

TEST(SelectIncontext, DrawsWithoutReplacement) {
    ContextSetting setting{ContextMode::Unbiased, 30, 5};
    auto split = make_split(30);
    auto examples = select_incontext(split, setting, std::nullopt);
    ASSERT_EQ(examples.size(), 30u);
    auto ids = ids_of(examples);
    std::set<std::string> unique(ids.begin(), ids.end());
    EXPECT_EQ(unique.size(), 30u);
}

TEST(SelectIncontext, SameSeedSameOrderDifferentSeedDifferentOrder) {
    auto split = make_split(60);
    ContextSetting setting{ContextMode::Unbiased, 25, 5};
    auto first = ids_of(select_incontext(split, setting, std::nullopt));
    auto second = ids_of(select_incontext(split, setting, std::nullopt));
    EXPECT_EQ(first, second);

    setting.seed = 6;
    auto shifted = ids_of(select_incontext(split, setting, std::nullopt));
    EXPECT_NE(first, shifted);
}

TEST(SelectIncontext, OrderIsShuffledNotPoolOrder) {
    auto split = make_split(40);
    ContextSetting setting{ContextMode::Unbiased, 40, 11};
    auto ids = ids_of(select_incontext(split, setting, std::nullopt));
    EXPECT_NE(ids, ids_of(split.incontext_pool));
}

TEST(SelectIncontext, BiasedModeStampsHintOnEveryExample) {
    auto split = make_split(30);
    ContextSetting setting{ContextMode::Biased, 25, 3};
    BiasSpec spec{BiasKind::TextHint, {}};
    auto examples = select_incontext(split, setting, spec);
    ASSERT_EQ(examples.size(), 25u);
    for (const auto& example : examples) {
        ASSERT_TRUE(example.hint.has_value()) << example.id;
        EXPECT_NE(example.hint->find("(" + to_string(example.ground_truth) + ")"),
                  std::string::npos);
        EXPECT_EQ(example.group, Group::Plus);
    }
}

TEST(SelectIncontext, BiasedModeStampsMarkOnCorrectOption) {
    auto split = make_split(30);
    ContextSetting setting{ContextMode::Biased, 25, 3};
    BiasSpec spec{BiasKind::CueMedium, {}};
    auto examples = select_incontext(split, setting, spec);
    for (const auto& example : examples) {
        ASSERT_TRUE(example.mark.has_value()) << example.id;
        EXPECT_EQ(example.mark->label, example.ground_truth);
    }
}

TEST(SelectIncontext, BiasedOrderingPutsGroundTruthFirst) {
    auto split = make_split(30);
    ContextSetting setting{ContextMode::Biased, 25, 3};
    BiasSpec spec{BiasKind::CueDifficult, {}};
    auto examples = select_incontext(split, setting, spec);
    for (const auto& example : examples) {
        EXPECT_EQ(example.ground_truth, Label::A) << example.id;
    }
}

TEST(SelectIncontext, VisualSpecRejected) {
    auto split = make_split(30);
    ContextSetting setting{ContextMode::Biased, 25, 3};
    BiasSpec spec{BiasKind::ImageMirror, {}};
    EXPECT_THROW(select_incontext(split, setting, spec), Error);
}

TEST(SelectIncontext, BiasedWithoutSpecPassesPoolThrough) {
    auto split = make_split(30);
    ContextSetting setting{ContextMode::Biased, 25, 3};
    auto examples = select_incontext(split, setting, std::nullopt);
    for (const auto& example : examples) {
        EXPECT_FALSE(example.hint.has_value());
        EXPECT_FALSE(example.mark.has_value());
    }
}

TEST(AssemblePrompt, MessageCountAndRoles) {
    auto split = make_split(30);
    ContextSetting setting{ContextMode::Unbiased, 25, 3};
    auto examples = select_incontext(split, setting, std::nullopt);
    PromptBundle bundle = assemble_prompt(sample_question(), examples, {});
    ASSERT_EQ(bundle.messages.size(), 51u);
    for (std::size_t i = 0; i < 50; ++i) {
        EXPECT_EQ(bundle.messages[i].role, i % 2 == 0 ? "user" : "assistant");
    }
    EXPECT_EQ(bundle.messages.back().role, "user");
    EXPECT_EQ(bundle.test_question_id, "q1");
}

TEST(AssemblePrompt, ExampleAnswersMatchGroundTruth) {
    auto split = make_split(30);
    auto examples = select_incontext(split, {ContextMode::Unbiased, 25, 3}, std::nullopt);
    PromptBundle bundle = assemble_prompt(sample_question(), examples, {});
    for (std::size_t i = 0; i < examples.size(); ++i) {
        EXPECT_EQ(bundle.messages[2 * i + 1].text,
                  "Answer: (" + to_string(examples[i].ground_truth) + ")");
    }
}

TEST(AssemblePrompt, NoContextIsJustTheTestQuestion) {
    PromptBundle bundle = assemble_prompt(sample_question(), {}, {});
    ASSERT_EQ(bundle.messages.size(), 1u);
    EXPECT_EQ(bundle.messages[0].role, "user");
    EXPECT_NE(bundle.messages[0].text.find("(A) pillow (B) desk"), std::string::npos);
}

TEST(AssemblePrompt, TestTurnEndsWithCotInstruction) {
    PromptOptions options;
    PromptBundle bundle = assemble_prompt(sample_question(), {}, options);
    const std::string& text = bundle.messages.back().text;
    ASSERT_GE(text.size(), options.cot_instruction.size());
    EXPECT_EQ(text.substr(text.size() - options.cot_instruction.size()),
              options.cot_instruction);
}

TEST(AssemblePrompt, ImagesFollowTheFlags) {
    SeededRng rng(4);
    std::vector<Question> examples = {random_question(rng, "e1")};
    examples[0].image = "images/e1.png";
    Question q = sample_question();
    q.image = "images/q1.png";

    PromptOptions options;
    PromptBundle with = assemble_prompt(q, examples, options);
    EXPECT_EQ(with.messages[0].image_paths,
              std::vector<std::string>{"images/e1.png"});
    EXPECT_EQ(with.messages.back().image_paths,
              std::vector<std::string>{"images/q1.png"});

    options.include_example_images = false;
    PromptBundle no_examples = assemble_prompt(q, examples, options);
    EXPECT_TRUE(no_examples.messages[0].image_paths.empty());
    EXPECT_EQ(no_examples.messages.back().image_paths,
              std::vector<std::string>{"images/q1.png"});

    options.include_example_images = true;
    options.include_test_image = false;
    PromptBundle no_test = assemble_prompt(q, examples, options);
    EXPECT_EQ(no_test.messages[0].image_paths,
              std::vector<std::string>{"images/e1.png"});
    EXPECT_TRUE(no_test.messages.back().image_paths.empty());
}

TEST(AssemblePrompt, SystemPromptPropagates) {
    PromptOptions options;
    options.system = "Answer tersely.";
    PromptBundle bundle = assemble_prompt(sample_question(), {}, options);
    EXPECT_EQ(bundle.system, "Answer tersely.");
}

TEST(BundleJson, SerializationIsDeterministic) {
    auto split = make_split(30);
    auto examples = select_incontext(split, {ContextMode::Biased, 25, 3},
                                     BiasSpec{BiasKind::TextHint, {}});
    PromptBundle first = assemble_prompt(sample_question(), examples, {});
    PromptBundle second = assemble_prompt(sample_question(), examples, {});
    EXPECT_EQ(first, second);
    EXPECT_EQ(bundle_to_json(first).dump(), bundle_to_json(second).dump());
}

TEST(BundleJson, CarriesRolesTextAndImages) {
    Question q = sample_question();
    q.image = "img.png";
    PromptBundle bundle = assemble_prompt(q, {}, {});
    nlohmann::json j = bundle_to_json(bundle);
    EXPECT_EQ(j["test_question_id"], "q1");
    ASSERT_EQ(j["messages"].size(), 1u);
    EXPECT_EQ(j["messages"][0]["role"], "user");
    EXPECT_EQ(j["messages"][0]["images"], nlohmann::json::array({"img.png"}));
}

TEST(BundleJson, RoundTripsThroughJson) {
    auto split = make_split(30);
    auto examples = select_incontext(split, {ContextMode::Unbiased, 5, 3}, std::nullopt);
    Question q = sample_question();
    q.image = "img.png";
    PromptBundle bundle = assemble_prompt(q, examples, {});
    EXPECT_EQ(bundle_from_json(bundle_to_json(bundle)), bundle);
}

}  // namespace
}  // namespace faith
