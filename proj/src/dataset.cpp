#include "faith/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_set>

#include "faith/error.hpp"
#include "faith/util.hpp"

namespace faith {

namespace fs = std::filesystem;
using nlohmann::json;

Label other(Label label) {
    return label == Label::A ? Label::B : Label::A;
}

std::string to_string(Label label) {
    return label == Label::A ? "A" : "B";
}

Label label_from_string(const std::string& text) {
    if (text == "A") return Label::A;
    if (text == "B") return Label::B;
    raise("label must be \"A\" or \"B\", got \"", text, '"');
}

std::string to_string(Group group) {
    return group == Group::Plus ? "plus" : "minus";
}

Group group_from_string(const std::string& text) {
    if (text == "plus") return Group::Plus;
    if (text == "minus") return Group::Minus;
    raise("group must be \"plus\" or \"minus\", got \"", text, '"');
}

namespace {

const std::vector<std::pair<BiasKind, std::string>>& bias_kind_names() {
    static const std::vector<std::pair<BiasKind, std::string>> names = {
        {BiasKind::TextHint, "text_hint"},
        {BiasKind::TextMark, "text_mark"},
        {BiasKind::TextOrdering, "text_ordering"},
        {BiasKind::ImageHint, "image_hint"},
        {BiasKind::ImageBBoxThicken, "image_bbox_thicken"},
        {BiasKind::ImageMirror, "image_mirror"},
        {BiasKind::CueMedium, "cue_medium"},
        {BiasKind::CueDifficult, "cue_difficult"},
    };
    return names;
}

}  // namespace

std::string to_string(BiasKind kind) {
    for (const auto& [k, name] : bias_kind_names()) {
        if (k == kind) return name;
    }
    raise("unknown bias kind value ", static_cast<int>(kind));
}

BiasKind bias_kind_from_string(const std::string& text) {
    for (const auto& [kind, name] : bias_kind_names()) {
        if (name == text) return kind;
    }
    std::string known;
    for (const auto& [kind, name] : bias_kind_names()) {
        known += known.empty() ? name : ", " + name;
    }
    raise("unknown bias kind \"", text, "\" (known: ", known, ')');
}

const std::vector<BiasKind>& all_bias_kinds() {
    static const std::vector<BiasKind> kinds = [] {
        std::vector<BiasKind> out;
        for (const auto& [kind, name] : bias_kind_names()) {
            out.push_back(kind);
        }
        return out;
    }();
    return kinds;
}

bool bias_is_visual(BiasKind kind) {
    return kind == BiasKind::ImageHint || kind == BiasKind::ImageBBoxThicken ||
           kind == BiasKind::ImageMirror;
}

const std::string& Question::choice_text(Label label) const {
    return label == Label::A ? choices[0].text : choices[1].text;
}

std::optional<std::string> BiasSpec::param(const std::string& key) const {
    const auto it = params.find(key);
    if (it == params.end()) return std::nullopt;
    return it->second;
}

std::string BiasSpec::param_or(const std::string& key, const std::string& fallback) const {
    const auto value = param(key);
    return value ? *value : fallback;
}

double BiasSpec::param_double_or(const std::string& key, double fallback) const {
    const auto value = param(key);
    if (!value) return fallback;
    std::size_t consumed = 0;
    double parsed = 0.0;
    try {
        parsed = std::stod(*value, &consumed);
    } catch (const std::exception&) {
        raise("bias param ", key, " is not a number: \"", *value, '"');
    }
    require(consumed == value->size(), "bias param ", key, " is not a number: \"", *value, '"');
    return parsed;
}

long BiasSpec::param_long_or(const std::string& key, long fallback) const {
    const auto value = param(key);
    if (!value) return fallback;
    std::size_t consumed = 0;
    long parsed = 0;
    try {
        parsed = std::stol(*value, &consumed);
    } catch (const std::exception&) {
        raise("bias param ", key, " is not an integer: \"", *value, '"');
    }
    require(consumed == value->size(), "bias param ", key, " is not an integer: \"", *value, '"');
    return parsed;
}

std::string BiasSpec::digest() const {
    json j;
    j["kind"] = to_string(kind);
    j["params"] = params;
    return sha256_hex(j.dump());
}

void validate_bias_spec(const BiasSpec& spec) {
    static const std::map<BiasKind, std::set<std::string>> allowed = {
        {BiasKind::TextHint, {"hint_template"}},
        {BiasKind::TextMark, {"mark_token"}},
        {BiasKind::TextOrdering, {"ordering_mode"}},
        {BiasKind::ImageHint, {"hint_template", "hint_x", "hint_y", "hint_scale"}},
        {BiasKind::ImageBBoxThicken, {"base_thickness_px", "thick_thickness_px"}},
        {BiasKind::ImageMirror, {}},
        {BiasKind::CueMedium, {"mark_token"}},
        {BiasKind::CueDifficult, {}},
    };
    const auto& keys = allowed.at(spec.kind);
    for (const auto& [key, value] : spec.params) {
        require(keys.count(key) > 0, "bias ", to_string(spec.kind),
                " does not accept param \"", key, '"');
    }
    if (const auto mode = spec.param("ordering_mode")) {
        require(*mode == "swap_contents", "ordering_mode must be \"swap_contents\", got \"",
                *mode, '"');
    }
}

namespace {

void check_keys(const json& j, const std::string& id_hint, bool allow_extensions) {
    static const std::set<std::string> base_keys = {"id",    "stem",  "choices", "ground_truth",
                                                    "image", "boxes", "group"};
    static const std::set<std::string> extension_keys = {"hint", "mark"};
    for (const auto& [key, value] : j.items()) {
        if (base_keys.count(key) > 0) continue;
        if (allow_extensions && extension_keys.count(key) > 0) continue;
        raise("question ", id_hint, ": unknown key \"", key, '"');
    }
}

Box box_from_json(const json& j, const std::string& id, std::size_t index) {
    require(j.is_object(), "question ", id, ": boxes[", index, "] must be an object");
    static const std::set<std::string> box_keys = {"name", "x", "y", "w", "h", "color"};
    for (const auto& [key, value] : j.items()) {
        require(box_keys.count(key) > 0, "question ", id, ": boxes[", index,
                "] has unknown key \"", key, '"');
    }
    for (const auto& key : box_keys) {
        require(j.contains(key), "question ", id, ": boxes[", index, "] missing \"", key, '"');
    }
    Box box;
    box.name = j.at("name").get<std::string>();
    box.color = j.at("color").get<std::string>();
    for (const auto& key : {"x", "y", "w", "h"}) {
        require(j.at(key).is_number_integer(), "question ", id, ": boxes[", index, "].", key,
                " must be an integer");
    }
    box.x = j.at("x").get<long>();
    box.y = j.at("y").get<long>();
    box.w = j.at("w").get<long>();
    box.h = j.at("h").get<long>();
    require(!box.name.empty(), "question ", id, ": boxes[", index, "].name must be nonempty");
    require(!box.color.empty(), "question ", id, ": boxes[", index, "].color must be nonempty");
    require(box.x >= 0 && box.y >= 0, "question ", id, ": boxes[", index,
            "] position must be nonnegative");
    require(box.w >= 1 && box.h >= 1, "question ", id, ": boxes[", index,
            "] width and height must be >= 1");
    return box;
}

}  // namespace

Question question_from_json(const json& j, bool allow_extensions) {
    require(j.is_object(), "dataset record must be a JSON object");
    const std::string id_hint = j.contains("id") && j.at("id").is_string()
                                    ? j.at("id").get<std::string>()
                                    : std::string("<no id>");
    check_keys(j, id_hint, allow_extensions);
    for (const auto& key : {"id", "stem", "choices", "ground_truth"}) {
        require(j.contains(key), "question ", id_hint, ": missing key \"", key, '"');
    }

    Question q;
    q.id = j.at("id").get<std::string>();
    require(!q.id.empty(), "question id must be nonempty");
    q.stem = j.at("stem").get<std::string>();
    require(!q.stem.empty(), "question ", q.id, ": stem must be nonempty");

    const json& choices = j.at("choices");
    require(choices.is_array() && choices.size() == 2, "question ", q.id,
            ": choices must be an array of exactly two entries");
    for (std::size_t i = 0; i < 2; ++i) {
        const json& entry = choices[i];
        require(entry.is_array() && entry.size() == 2, "question ", q.id, ": choices[", i,
                "] must be a [label, text] pair");
        const Label label = label_from_string(entry[0].get<std::string>());
        const Label expected = i == 0 ? Label::A : Label::B;
        require(label == expected, "question ", q.id, ": choices must be labeled A then B");
        q.choices[i].label = label;
        q.choices[i].text = entry[1].get<std::string>();
        require(!q.choices[i].text.empty(), "question ", q.id, ": choices[", i,
                "] text must be nonempty");
    }

    q.ground_truth = label_from_string(j.at("ground_truth").get<std::string>());

    if (j.contains("image") && !j.at("image").is_null()) {
        q.image = j.at("image").get<std::string>();
        require(!q.image->empty(), "question ", q.id, ": image path must be nonempty or null");
    }
    if (j.contains("boxes") && !j.at("boxes").is_null()) {
        const json& boxes = j.at("boxes");
        require(boxes.is_array(), "question ", q.id, ": boxes must be an array or null");
        std::vector<Box> parsed;
        for (std::size_t i = 0; i < boxes.size(); ++i) {
            parsed.push_back(box_from_json(boxes[i], q.id, i));
        }
        q.boxes = std::move(parsed);
        require(q.image.has_value(), "question ", q.id, ": boxes require an image");
    }
    if (j.contains("group") && !j.at("group").is_null()) {
        q.group = group_from_string(j.at("group").get<std::string>());
    }
    if (j.contains("hint") && !j.at("hint").is_null()) {
        q.hint = j.at("hint").get<std::string>();
        require(!q.hint->empty(), "question ", q.id, ": hint must be nonempty");
    }
    if (j.contains("mark") && !j.at("mark").is_null()) {
        const json& mark = j.at("mark");
        require(mark.is_object() && mark.contains("label") && mark.contains("token") &&
                    mark.size() == 2,
                "question ", q.id, ": mark must be {label, token}");
        MarkDecoration decoration;
        decoration.label = label_from_string(mark.at("label").get<std::string>());
        decoration.token = mark.at("token").get<std::string>();
        require(!decoration.token.empty(), "question ", q.id, ": mark token must be nonempty");
        q.mark = decoration;
    }
    return q;
}

json question_to_json(const Question& q) {
    json j;
    j["id"] = q.id;
    j["stem"] = q.stem;
    j["choices"] = json::array();
    for (const Choice& choice : q.choices) {
        j["choices"].push_back(json::array({to_string(choice.label), choice.text}));
    }
    j["ground_truth"] = to_string(q.ground_truth);
    j["image"] = q.image ? json(*q.image) : json(nullptr);
    if (q.boxes) {
        j["boxes"] = json::array();
        for (const Box& box : *q.boxes) {
            j["boxes"].push_back({{"name", box.name},
                                  {"x", box.x},
                                  {"y", box.y},
                                  {"w", box.w},
                                  {"h", box.h},
                                  {"color", box.color}});
        }
    } else {
        j["boxes"] = nullptr;
    }
    j["group"] = q.group ? json(to_string(*q.group)) : json(nullptr);
    if (q.hint) {
        j["hint"] = *q.hint;
    }
    if (q.mark) {
        j["mark"] = {{"label", to_string(q.mark->label)}, {"token", q.mark->token}};
    }
    return j;
}

std::filesystem::path resolve_image_path(const std::string& image, const fs::path& base_dir) {
    fs::path p(image);
    if (!p.is_absolute()) {
        p = base_dir / p;
    }
    return p.lexically_normal();
}

namespace {

void check_image_reference(const Question& q, const fs::path& base_dir) {
    if (!q.image) return;
    const fs::path resolved = resolve_image_path(*q.image, base_dir);
    require(fs::exists(resolved), "question ", q.id, ": image not found: ", resolved.string());
    require(to_lower(resolved.extension().string()) == ".png", "question ", q.id,
            ": image must be a PNG: ", resolved.string());
    if (!q.boxes) return;
    const PngDims dims = png_dimensions(resolved);
    for (std::size_t i = 0; i < q.boxes->size(); ++i) {
        const Box& box = (*q.boxes)[i];
        require(box.x + box.w <= dims.width && box.y + box.h <= dims.height, "question ", q.id,
                ": boxes[", i, "] exceeds image bounds ", dims.width, "x", dims.height);
    }
}

std::vector<Question> parse_jsonl(const fs::path& path, bool allow_extensions,
                                  bool require_group, bool forbid_group) {
    const std::string contents = read_file(path);
    const fs::path base_dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
    std::vector<Question> questions;
    std::unordered_set<std::string> seen_ids;
    std::istringstream lines(contents);
    std::string line;
    long line_no = 0;
    while (std::getline(lines, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            raise(path.string(), ":", line_no, ": malformed JSON: ", e.what());
        }
        Question q;
        try {
            q = question_from_json(j, allow_extensions);
        } catch (const json::exception& e) {
            raise(path.string(), ":", line_no, ": ", e.what());
        } catch (const Error& e) {
            raise(path.string(), ":", line_no, ": ", e.what());
        }
        if (require_group) {
            require(q.group.has_value(), path.string(), ":", line_no, ": question ", q.id,
                    ": group is required by the unpaired schema");
        }
        if (forbid_group) {
            require(!q.group.has_value(), path.string(), ":", line_no, ": question ", q.id,
                    ": group is not allowed by the paired schema");
        }
        require(seen_ids.insert(q.id).second, path.string(), ":", line_no, ": duplicate id ",
                q.id);
        try {
            check_image_reference(q, base_dir);
        } catch (const Error& e) {
            raise(path.string(), ":", line_no, ": ", e.what());
        }
        questions.push_back(std::move(q));
    }
    return questions;
}

}  // namespace

std::vector<Question> parse_dataset(const fs::path& path, DatasetSchema schema) {
    const bool unpaired = schema == DatasetSchema::Unpaired;
    return parse_jsonl(path, /*allow_extensions=*/false, /*require_group=*/unpaired,
                       /*forbid_group=*/!unpaired);
}

std::vector<Question> load_pair_file(const fs::path& path) {
    return parse_jsonl(path, /*allow_extensions=*/true, /*require_group=*/true,
                       /*forbid_group=*/false);
}

std::string serialize_dataset(const std::vector<Question>& questions) {
    std::string out;
    for (const Question& q : questions) {
        out += question_to_json(q).dump();
        out += '\n';
    }
    return out;
}

void write_dataset(const fs::path& path, const std::vector<Question>& questions) {
    write_file(path, serialize_dataset(questions));
}

namespace {

DatasetSplit split_by_pool_size(const std::vector<Question>& items, std::size_t pool_size,
                                std::uint64_t seed) {
    std::vector<std::size_t> order(items.size());
    std::iota(order.begin(), order.end(), 0);
    SeededRng rng(seed);
    rng.shuffle(order);

    std::vector<bool> in_pool(items.size(), false);
    for (std::size_t i = 0; i < pool_size; ++i) {
        in_pool[order[i]] = true;
    }

    DatasetSplit split;
    split.seed = seed;
    for (std::size_t i = 0; i < items.size(); ++i) {
        (in_pool[i] ? split.incontext_pool : split.test).push_back(items[i]);
    }
    return split;
}

}  // namespace

DatasetSplit split_dataset(const std::vector<Question>& items, double incontext_fraction,
                           std::uint64_t seed) {
    require(incontext_fraction > 0.0 && incontext_fraction < 1.0,
            "incontext_fraction must be in (0, 1), got ", incontext_fraction);
    require(items.size() >= 2, "need at least 2 items to split, got ", items.size());
    const auto n = static_cast<double>(items.size());
    auto pool_size = static_cast<long>(std::llround(incontext_fraction * n));
    pool_size = std::clamp<long>(pool_size, 1, static_cast<long>(items.size()) - 1);
    return split_by_pool_size(items, static_cast<std::size_t>(pool_size), seed);
}

DatasetSplit split_dataset_exact(const std::vector<Question>& items, long pool_size,
                                 std::uint64_t seed) {
    require(items.size() >= 2, "need at least 2 items to split, got ", items.size());
    require(pool_size >= 1 && pool_size < static_cast<long>(items.size()),
            "pool size must be in [1, ", items.size() - 1, "], got ", pool_size);
    return split_by_pool_size(items, static_cast<std::size_t>(pool_size), seed);
}

}  // namespace faith
