#include "faith/prompting.hpp"

#include <algorithm>
#include <numeric>

#include "faith/error.hpp"
#include "faith/text_bias.hpp"
#include "faith/util.hpp"

namespace faith {

std::string to_string(ContextMode mode) {
    switch (mode) {
        case ContextMode::NoContext: return "no_context";
        case ContextMode::Unbiased: return "unbiased";
        case ContextMode::Biased: return "biased";
    }
    raise("unknown context mode value ", static_cast<int>(mode));
}

ContextMode context_mode_from_string(const std::string& text) {
    if (text == "no_context") return ContextMode::NoContext;
    if (text == "unbiased") return ContextMode::Unbiased;
    if (text == "biased") return ContextMode::Biased;
    raise("unknown context mode \"", text, "\" (known: no_context, unbiased, biased)");
}

std::string ContextSetting::digest() const {
    if (mode == ContextMode::NoContext) {
        return to_string(mode);
    }
    return to_string(mode) + "_n" + std::to_string(n_examples) + "_s" + std::to_string(seed);
}

void validate_context_setting(const ContextSetting& setting) {
    if (setting.mode != ContextMode::NoContext) {
        require(setting.n_examples >= 1, "setting ", to_string(setting.mode),
                " needs n_examples >= 1, got ", setting.n_examples);
    }
}

nlohmann::json bundle_to_json(const PromptBundle& bundle) {
    nlohmann::json j;
    j["system"] = bundle.system;
    j["test_question_id"] = bundle.test_question_id;
    j["messages"] = nlohmann::json::array();
    for (const Message& message : bundle.messages) {
        j["messages"].push_back({{"role", message.role},
                                 {"text", message.text},
                                 {"images", message.image_paths}});
    }
    return j;
}

PromptBundle bundle_from_json(const nlohmann::json& j) {
    PromptBundle bundle;
    bundle.system = j.at("system").get<std::string>();
    bundle.test_question_id = j.at("test_question_id").get<std::string>();
    for (const nlohmann::json& m : j.at("messages")) {
        Message message;
        message.role = m.at("role").get<std::string>();
        message.text = m.at("text").get<std::string>();
        message.image_paths = m.at("images").get<std::vector<std::string>>();
        bundle.messages.push_back(std::move(message));
    }
    return bundle;
}

std::string render_options(const Question& q) {
    std::string out;
    for (const Choice& choice : q.choices) {
        std::string label_part = "(" + to_string(choice.label) + ")";
        if (q.mark && q.mark->label == choice.label) {
            label_part = q.mark->token + label_part + q.mark->token;
        }
        if (!out.empty()) {
            out += ' ';
        }
        out += label_part + " " + choice.text;
    }
    return out;
}

std::string render_question_block(const Question& q, const std::string& template_text) {
    require(count_occurrences(template_text, "{stem}") >= 1,
            "prompt template is missing the {stem} placeholder");
    require(count_occurrences(template_text, "{choices}") >= 1,
            "prompt template is missing the {choices} placeholder");
    std::string choices_block = render_options(q);
    if (q.hint) {
        choices_block += '\n';
        choices_block += *q.hint;
    }
    std::string out = replace_all(template_text, "{stem}", q.stem);
    return replace_all(out, "{choices}", choices_block);
}

std::vector<Question> select_incontext(const DatasetSplit& split, const ContextSetting& setting,
                                       const std::optional<BiasSpec>& spec) {
    validate_context_setting(setting);
    if (setting.mode == ContextMode::NoContext) {
        return {};
    }
    const auto available = static_cast<long>(split.incontext_pool.size());
    require(available >= setting.n_examples, "in-context pool has ", available,
            " examples, setting needs ", setting.n_examples);

    std::vector<std::size_t> order(split.incontext_pool.size());
    std::iota(order.begin(), order.end(), 0);
    SeededRng rng(setting.seed);
    rng.shuffle(order);

    std::vector<Question> examples;
    examples.reserve(static_cast<std::size_t>(setting.n_examples));
    for (long i = 0; i < setting.n_examples; ++i) {
        examples.push_back(split.incontext_pool[order[static_cast<std::size_t>(i)]]);
    }

    if (setting.mode == ContextMode::Biased && spec.has_value()) {
        require(!bias_is_visual(spec->kind),
                "visual biases must be stamped onto the pool before selection; pass no spec");
        for (Question& example : examples) {
            example = build_text_pair(example, *spec).plus;
        }
    }
    return examples;
}

PromptBundle assemble_prompt(const Question& q, const std::vector<Question>& examples,
                             const PromptOptions& options) {
    PromptBundle bundle;
    bundle.system = options.system;
    bundle.test_question_id = q.id;

    for (const Question& example : examples) {
        Message user;
        user.role = "user";
        user.text = render_question_block(example, options.template_text);
        if (options.include_example_images && example.image) {
            user.image_paths.push_back(*example.image);
        }
        bundle.messages.push_back(std::move(user));

        Message assistant;
        assistant.role = "assistant";
        assistant.text = "Answer: (" + to_string(example.ground_truth) + ")";
        bundle.messages.push_back(std::move(assistant));
    }

    Message test;
    test.role = "user";
    test.text = render_question_block(q, options.template_text) + '\n' + options.cot_instruction;
    if (options.include_test_image && q.image) {
        test.image_paths.push_back(*q.image);
    }
    bundle.messages.push_back(std::move(test));
    return bundle;
}

}  // namespace faith
