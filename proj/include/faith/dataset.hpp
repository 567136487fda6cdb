#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace faith {

enum class Label { A, B };

Label other(Label label);
std::string to_string(Label label);
Label label_from_string(const std::string& text);

enum class Group { Plus, Minus };

std::string to_string(Group group);
Group group_from_string(const std::string& text);

enum class BiasKind {
    TextHint,
    TextMark,
    TextOrdering,
    ImageHint,
    ImageBBoxThicken,
    ImageMirror,
    CueMedium,
    CueDifficult,
};

std::string to_string(BiasKind kind);
BiasKind bias_kind_from_string(const std::string& text);
const std::vector<BiasKind>& all_bias_kinds();

/// Visual biases alter the image; everything else alters the prompt text.
bool bias_is_visual(BiasKind kind);

struct Box {
    std::string name;
    long x = 0;
    long y = 0;
    long w = 0;
    long h = 0;
    std::string color;

    bool operator==(const Box&) const = default;
};

struct Choice {
    Label label = Label::A;
    std::string text;

    bool operator==(const Choice&) const = default;
};

/// Decoration wrapped around one choice's "(X)" when rendering options,
/// e.g. token "*" yields "*(A)*".
struct MarkDecoration {
    Label label = Label::A;
    std::string token;

    bool operator==(const MarkDecoration&) const = default;
};

struct Question {
    std::string id;
    std::string stem;
    std::array<Choice, 2> choices{Choice{Label::A, ""}, Choice{Label::B, ""}};
    Label ground_truth = Label::A;
    std::optional<std::string> image;
    std::optional<std::vector<Box>> boxes;
    std::optional<Group> group;

    // Carried only by injected pair files, never by base datasets.
    std::optional<std::string> hint;
    std::optional<MarkDecoration> mark;

    const std::string& choice_text(Label label) const;
    const std::string& ground_truth_text() const { return choice_text(ground_truth); }

    bool operator==(const Question&) const = default;
};

struct BiasSpec {
    BiasKind kind = BiasKind::TextHint;
    std::map<std::string, std::string> params;

    std::optional<std::string> param(const std::string& key) const;
    std::string param_or(const std::string& key, const std::string& fallback) const;
    double param_double_or(const std::string& key, double fallback) const;
    long param_long_or(const std::string& key, long fallback) const;

    /// Stable content hash of (kind, params), hex.
    std::string digest() const;

    bool operator==(const BiasSpec&) const = default;
};

/// Rejects params not recognized by the spec's kind.
void validate_bias_spec(const BiasSpec& spec);

struct BiasedPair {
    std::string base_id;
    Question plus;
    Question minus;
    BiasSpec spec;
};

struct DatasetSplit {
    std::vector<Question> test;
    std::vector<Question> incontext_pool;
    std::uint64_t seed = 0;
};

enum class DatasetSchema { Paired, Unpaired };

nlohmann::json question_to_json(const Question& q);
Question question_from_json(const nlohmann::json& j, bool allow_extensions);

/// Parses a JSONL dataset. Paired schema forbids the group field (base
/// questions that biasing will turn into pairs); unpaired requires it.
/// Image references are resolved against the file's directory and must
/// point at existing PNGs whose bounds contain every box.
std::vector<Question> parse_dataset(const std::filesystem::path& path, DatasetSchema schema);

/// Loads one side of an injected pair file: group required, hint/mark allowed.
std::vector<Question> load_pair_file(const std::filesystem::path& path);

std::string serialize_dataset(const std::vector<Question>& questions);
void write_dataset(const std::filesystem::path& path, const std::vector<Question>& questions);

std::filesystem::path resolve_image_path(const std::string& image,
                                         const std::filesystem::path& base_dir);

/// Deterministic disjoint split; the in-context pool gets round(fraction * n)
/// items, clamped so both sides stay nonempty. Original order is preserved
/// within each side.
DatasetSplit split_dataset(const std::vector<Question>& items, double incontext_fraction,
                           std::uint64_t seed);

/// Same split with an exact pool size instead of a fraction.
DatasetSplit split_dataset_exact(const std::vector<Question>& items, long pool_size,
                                 std::uint64_t seed);

}  // namespace faith
