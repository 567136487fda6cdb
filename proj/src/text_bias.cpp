#include "faith/text_bias.hpp"

#include "faith/error.hpp"
#include "faith/util.hpp"

namespace faith {

TextBiasParams text_params_from_spec(const BiasSpec& spec) {
    validate_bias_spec(spec);
    TextBiasParams params;
    params.hint_template = spec.param_or("hint_template", params.hint_template);
    params.mark_token = spec.param_or("mark_token", params.mark_token);
    require(count_occurrences(params.hint_template, "{label}") == 1,
            "hint_template must contain exactly one {label} placeholder, got \"",
            params.hint_template, '"');
    require(!params.mark_token.empty(), "mark_token must be nonempty");
    return params;
}

Question swap_choice_contents(const Question& q) {
    Question out = q;
    std::swap(out.choices[0].text, out.choices[1].text);
    out.ground_truth = other(out.ground_truth);
    return out;
}

namespace {

void check_pair_input(const Question& q) {
    require(!q.hint.has_value() && !q.mark.has_value(), "question ", q.id,
            ": already carries a bias decoration");
    require(!q.group.has_value(), "question ", q.id, ": base questions must not carry a group");
}

Question oriented_ground_truth_first(const Question& q) {
    return q.ground_truth == Label::A ? q : swap_choice_contents(q);
}

}  // namespace

BiasedPair build_text_pair(const Question& q, const BiasSpec& spec) {
    require(!bias_is_visual(spec.kind), "build_text_pair called with ", to_string(spec.kind));
    check_pair_input(q);
    const TextBiasParams params = text_params_from_spec(spec);

    BiasedPair pair;
    pair.base_id = q.id;
    pair.spec = spec;
    Question plus = q;
    Question minus = q;

    switch (spec.kind) {
        case BiasKind::TextHint: {
            plus.hint = replace_all(params.hint_template, "{label}", to_string(q.ground_truth));
            minus.hint =
                replace_all(params.hint_template, "{label}", to_string(other(q.ground_truth)));
            break;
        }
        case BiasKind::TextMark:
        case BiasKind::CueMedium: {
            plus.mark = MarkDecoration{q.ground_truth, params.mark_token};
            minus.mark = MarkDecoration{other(q.ground_truth), params.mark_token};
            break;
        }
        case BiasKind::TextOrdering:
        case BiasKind::CueDifficult: {
            require(q.choices[0].text != q.choices[1].text, "question ", q.id,
                    ": ordering bias needs distinct choice texts");
            plus = oriented_ground_truth_first(q);
            minus = swap_choice_contents(plus);
            break;
        }
        default:
            raise("build_text_pair called with ", to_string(spec.kind));
    }

    plus.group = Group::Plus;
    minus.group = Group::Minus;
    pair.plus = std::move(plus);
    pair.minus = std::move(minus);
    return pair;
}

BiasedPair apply_text_bias(const Question& q, const BiasSpec& spec) {
    require(spec.kind == BiasKind::TextHint || spec.kind == BiasKind::TextMark ||
                spec.kind == BiasKind::TextOrdering,
            "apply_text_bias called with ", to_string(spec.kind));
    return build_text_pair(q, spec);
}

IncontextCue cue_for_kind(BiasKind kind) {
    switch (kind) {
        case BiasKind::CueMedium:
        case BiasKind::TextMark:
            return IncontextCue::MediumMarker;
        case BiasKind::CueDifficult:
        case BiasKind::TextOrdering:
            return IncontextCue::DifficultFirstOption;
        default:
            raise("no in-context cue defined for ", to_string(kind));
    }
}

std::vector<Question> apply_incontext_cue(const std::vector<Question>& examples,
                                          IncontextCue cue, const BiasSpec& spec) {
    require(!examples.empty(), "apply_incontext_cue needs at least one example");
    const TextBiasParams params = text_params_from_spec(spec);
    std::vector<Question> out;
    out.reserve(examples.size());
    for (const Question& example : examples) {
        require(!example.mark.has_value(), "question ", example.id,
                ": already carries a mark");
        Question cued = example;
        switch (cue) {
            case IncontextCue::MediumMarker:
                cued.mark = MarkDecoration{example.ground_truth, params.mark_token};
                break;
            case IncontextCue::DifficultFirstOption:
                require(example.choices[0].text != example.choices[1].text, "question ",
                        example.id, ": ordering cue needs distinct choice texts");
                cued = oriented_ground_truth_first(example);
                break;
        }
        out.push_back(std::move(cued));
    }
    return out;
}

Question strip_bias(const Question& q, const BiasSpec& spec) {
    Question out = q;
    out.group = std::nullopt;
    switch (spec.kind) {
        case BiasKind::TextHint:
            out.hint = std::nullopt;
            break;
        case BiasKind::TextMark:
        case BiasKind::CueMedium:
            out.mark = std::nullopt;
            break;
        case BiasKind::TextOrdering:
        case BiasKind::CueDifficult:
            out = oriented_ground_truth_first(out);
            break;
        case BiasKind::ImageHint:
        case BiasKind::ImageBBoxThicken:
        case BiasKind::ImageMirror:
            out.image = std::nullopt;
            out.boxes = std::nullopt;
            break;
    }
    return out;
}

}  // namespace faith
