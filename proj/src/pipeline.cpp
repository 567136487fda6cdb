#include "faith/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <utility>

#include "faith/error.hpp"
#include "faith/image.hpp"
#include "faith/image_bias.hpp"
#include "faith/metrics.hpp"
#include "faith/oracle.hpp"
#include "faith/stats.hpp"
#include "faith/text_bias.hpp"
#include "faith/util.hpp"

namespace fs = std::filesystem;

namespace faith {
namespace {

std::string dump_doc(const nlohmann::json& j) { return j.dump(2) + "\n"; }

nlohmann::json parse_json_file(const fs::path& path) {
    try {
        return nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        raise(path.string(), ": ", e.what());
    }
}

bool segment_safe(const std::string& text) {
    if (text.empty() || text == "." || text == "..") return false;
    for (char c : text) {
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '.' && c != '_' && c != '-') {
            return false;
        }
    }
    return true;
}

void absolutize_images(std::vector<Question>& questions, const fs::path& base_dir) {
    for (Question& q : questions) {
        if (q.image) q.image = resolve_image_path(*q.image, base_dir).string();
    }
}

void check_question_ids(const std::vector<Question>& questions, const std::string& where) {
    std::set<std::string> seen;
    for (const Question& q : questions) {
        require(segment_safe(q.id), where, ": question id not usable in file names: ", q.id);
        require(seen.insert(q.id).second, where, ": duplicate question id ", q.id);
    }
}

nlohmann::json spec_to_json(const BiasSpec& spec) {
    nlohmann::json params = nlohmann::json::object();
    for (const auto& [key, value] : spec.params) params[key] = value;
    return {{"kind", to_string(spec.kind)}, {"params", params}};
}

BiasSpec spec_from_json(const nlohmann::json& j, const std::string& where) {
    BiasSpec spec;
    for (const auto& [key, value] : j.items()) {
        if (key == "kind") {
            spec.kind = bias_kind_from_string(value.get<std::string>());
        } else if (key == "params") {
            for (const auto& [pkey, pvalue] : value.items()) {
                require(pvalue.is_string(), where, ": bias param ", pkey,
                        " must be a string");
                spec.params[pkey] = pvalue.get<std::string>();
            }
        } else {
            raise(where, ": unknown bias key \"", key, "\"");
        }
    }
    require(j.contains("kind"), where, ": bias entry needs a kind");
    return spec;
}

nlohmann::json setting_to_json(const ContextSetting& setting) {
    if (setting.mode == ContextMode::NoContext) {
        return {{"mode", to_string(setting.mode)}};
    }
    return {{"mode", to_string(setting.mode)},
            {"examples", setting.n_examples},
            {"seed", setting.seed}};
}

ContextSetting setting_from_json(const nlohmann::json& j, const std::string& where) {
    ContextSetting setting;
    for (const auto& [key, value] : j.items()) {
        if (key == "mode") {
            setting.mode = context_mode_from_string(value.get<std::string>());
        } else if (key == "examples") {
            setting.n_examples = value.get<long>();
        } else if (key == "seed") {
            setting.seed = value.get<std::uint64_t>();
        } else {
            raise(where, ": unknown setting key \"", key, "\"");
        }
    }
    require(j.contains("mode"), where, ": setting needs a mode");
    return setting;
}

nlohmann::json endpoint_to_json(const ModelEndpoint& endpoint) {
    return {
        {"base_url", endpoint.base_url},
        {"model_name", endpoint.model_name},
        {"api_key_env", endpoint.api_key_env},
        {"temperature", endpoint.temperature},
        {"max_tokens", endpoint.max_tokens},
        {"timeout_s", endpoint.timeout_s},
        {"cot_is_summary", endpoint.cot_is_summary},
    };
}

ModelEndpoint endpoint_from_json(const nlohmann::json& j, const std::string& where) {
    ModelEndpoint endpoint;
    for (const auto& [key, value] : j.items()) {
        if (key == "base_url") {
            endpoint.base_url = value.get<std::string>();
        } else if (key == "model_name") {
            endpoint.model_name = value.get<std::string>();
        } else if (key == "api_key_env") {
            endpoint.api_key_env = value.get<std::string>();
        } else if (key == "temperature") {
            endpoint.temperature = value.get<double>();
        } else if (key == "max_tokens") {
            endpoint.max_tokens = value.get<long>();
        } else if (key == "timeout_s") {
            endpoint.timeout_s = value.get<double>();
        } else if (key == "cot_is_summary") {
            endpoint.cot_is_summary = value.get<bool>();
        } else {
            raise(where, ": unknown endpoint key \"", key, "\"");
        }
    }
    return endpoint;
}

nlohmann::json prompt_options_to_json(const PromptOptions& options) {
    return {
        {"template", options.template_text},
        {"cot_instruction", options.cot_instruction},
        {"system", options.system},
        {"include_example_images", options.include_example_images},
        {"include_test_image", options.include_test_image},
    };
}

PromptOptions prompt_options_from_json(const nlohmann::json& j, const std::string& where) {
    PromptOptions options;
    for (const auto& [key, value] : j.items()) {
        if (key == "template") {
            options.template_text = value.get<std::string>();
        } else if (key == "cot_instruction") {
            options.cot_instruction = value.get<std::string>();
        } else if (key == "system") {
            options.system = value.get<std::string>();
        } else if (key == "include_example_images") {
            options.include_example_images = value.get<bool>();
        } else if (key == "include_test_image") {
            options.include_test_image = value.get<bool>();
        } else {
            raise(where, ": unknown prompt key \"", key, "\"");
        }
    }
    return options;
}

fs::path resolve_against(const fs::path& path, const fs::path& base_dir) {
    if (path.is_absolute()) return path.lexically_normal();
    return (base_dir / path).lexically_normal();
}

}  // namespace

std::string model_segment(const std::string& model_name) {
    std::string segment;
    for (char c : model_name) {
        bool safe = std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '_' ||
                    c == '-';
        segment += safe ? c : '_';
    }
    return segment;
}

void validate_run_config(const RunConfig& config) {
    require(segment_safe(config.run_id), "run_id must use only [A-Za-z0-9._-]: \"",
            config.run_id, "\"");
    require(fs::exists(config.dataset), "dataset not found: ", config.dataset.string());
    require(config.pairs >= 0, "pairs must be >= 0");
    require(config.pool_size >= 1, "pool_size must be >= 1");
    require(config.concurrency >= 1, "concurrency must be >= 1");

    require(!config.biases.empty(), "config needs at least one bias");
    std::set<BiasKind> kinds;
    for (const BiasSpec& spec : config.biases) {
        validate_bias_spec(spec);
        require(kinds.insert(spec.kind).second, "bias ", to_string(spec.kind),
                " listed twice; one spec per kind");
    }

    require(!config.settings.empty(), "config needs at least one context setting");
    std::set<std::string> digests;
    for (const ContextSetting& setting : config.settings) {
        validate_context_setting(setting);
        require(digests.insert(setting.digest()).second, "setting ", setting.digest(),
                " listed twice");
        if (setting.mode != ContextMode::NoContext) {
            require(setting.n_examples <= config.pool_size, "setting ", setting.digest(),
                    " needs ", setting.n_examples, " examples but pool_size is ",
                    config.pool_size);
        }
    }

    require(!config.models.empty(), "config needs at least one model");
    std::set<std::string> segments;
    for (const ModelEndpoint& model : config.models) {
        validate_model_endpoint(model);
        require(segments.insert(model_segment(model.model_name)).second,
                "model name collides after path sanitizing: ", model.model_name);
    }

    if (config.judge.kind == JudgeMode::Model) {
        require(config.judge.endpoint.has_value(), "model judge needs an endpoint");
        validate_model_endpoint(*config.judge.endpoint);
        require(!is_oracle_url(config.judge.endpoint->base_url),
                "judge endpoint cannot be an oracle URL");
    } else {
        require(!config.judge.endpoint.has_value(), "rules judge takes no endpoint");
    }
}

RunConfig run_config_from_json(const nlohmann::json& j, const fs::path& base_dir) {
    RunConfig config;
    require(j.is_object(), "config must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        if (key == "run_id") {
            config.run_id = value.get<std::string>();
        } else if (key == "runs_dir") {
            config.runs_dir = resolve_against(value.get<std::string>(), base_dir);
        } else if (key == "dataset") {
            config.dataset = resolve_against(value.get<std::string>(), base_dir);
        } else if (key == "cache_dir") {
            config.cache_dir = resolve_against(value.get<std::string>(), base_dir);
        } else if (key == "seed") {
            config.seed = value.get<std::uint64_t>();
        } else if (key == "pairs") {
            config.pairs = value.get<long>();
        } else if (key == "pool_size") {
            config.pool_size = value.get<long>();
        } else if (key == "mode") {
            config.mode = query_mode_from_string(value.get<std::string>());
        } else if (key == "concurrency") {
            config.concurrency = value.get<long>();
        } else if (key == "biases") {
            for (const auto& entry : value) {
                config.biases.push_back(spec_from_json(entry, "config.biases"));
            }
        } else if (key == "settings") {
            for (const auto& entry : value) {
                config.settings.push_back(setting_from_json(entry, "config.settings"));
            }
        } else if (key == "models") {
            for (const auto& entry : value) {
                config.models.push_back(endpoint_from_json(entry, "config.models"));
            }
        } else if (key == "judge") {
            for (const auto& [jkey, jvalue] : value.items()) {
                if (jkey == "mode") {
                    config.judge.kind = judge_mode_from_string(jvalue.get<std::string>());
                } else if (jkey == "endpoint") {
                    config.judge.endpoint = endpoint_from_json(jvalue, "config.judge.endpoint");
                } else {
                    raise("config.judge: unknown key \"", jkey, "\"");
                }
            }
        } else if (key == "prompt") {
            config.prompt_options = prompt_options_from_json(value, "config.prompt");
        } else {
            raise("config: unknown key \"", key, "\"");
        }
    }
    return config;
}

RunConfig load_run_config(const fs::path& path) {
    require(fs::exists(path), "config not found: ", path.string());
    return run_config_from_json(parse_json_file(path), fs::absolute(path).parent_path());
}

nlohmann::json run_config_to_json(const RunConfig& config) {
    nlohmann::json biases = nlohmann::json::array();
    for (const BiasSpec& spec : config.biases) biases.push_back(spec_to_json(spec));
    nlohmann::json settings = nlohmann::json::array();
    for (const ContextSetting& setting : config.settings) {
        settings.push_back(setting_to_json(setting));
    }
    nlohmann::json models = nlohmann::json::array();
    for (const ModelEndpoint& model : config.models) models.push_back(endpoint_to_json(model));
    nlohmann::json judge{{"mode", to_string(config.judge.kind)}};
    if (config.judge.endpoint) judge["endpoint"] = endpoint_to_json(*config.judge.endpoint);
    return {
        {"run_id", config.run_id},
        {"runs_dir", config.runs_dir.string()},
        {"dataset", config.dataset.string()},
        {"cache_dir", config.cache_dir.string()},
        {"seed", config.seed},
        {"pairs", config.pairs},
        {"pool_size", config.pool_size},
        {"mode", to_string(config.mode)},
        {"concurrency", config.concurrency},
        {"biases", biases},
        {"settings", settings},
        {"models", models},
        {"judge", judge},
        {"prompt", prompt_options_to_json(config.prompt_options)},
    };
}

Pipeline::Pipeline(RunConfig config) : config_(std::move(config)) {
    validate_run_config(config_);
    run_dir_ = config_.runs_dir / config_.run_id;
}

fs::path Pipeline::bias_dir(const BiasSpec& spec) const {
    return run_dir_ / "bias" / to_string(spec.kind);
}

fs::path Pipeline::pair_path(const BiasSpec& spec, Group direction) const {
    return bias_dir(spec) / (direction == Group::Plus ? "dplus.jsonl" : "dminus.jsonl");
}

fs::path Pipeline::pool_path(const BiasSpec& spec, bool biased) const {
    return bias_dir(spec) / (biased ? "pool_plus.jsonl" : "pool.jsonl");
}

fs::path Pipeline::bundle_path(const BiasSpec& spec, const ContextSetting& setting,
                               const std::string& question_id, Group direction) const {
    return run_dir_ / "prompts" / to_string(spec.kind) / setting.digest() /
           (question_id + "_" + to_string(direction) + ".json");
}

fs::path Pipeline::transcript_path(const ModelEndpoint& model, const BiasSpec& spec,
                                   const ContextSetting& setting,
                                   const std::string& question_id, Group direction) const {
    return run_dir_ / "transcripts" / model_segment(model.model_name) / to_string(spec.kind) /
           setting.digest() / (question_id + "_" + to_string(direction) + ".json");
}

fs::path Pipeline::label_path(const ModelEndpoint& model, const BiasSpec& spec,
                              const ContextSetting& setting, const std::string& question_id,
                              Group direction) const {
    return run_dir_ / "labels" / model_segment(model.model_name) / to_string(spec.kind) /
           setting.digest() / (question_id + "_" + to_string(direction) + ".json");
}

fs::path Pipeline::stamp_path(const std::string& stage) const {
    return run_dir_ / ".stamps" / (stage + ".json");
}

bool Pipeline::stamp_ok(const std::string& stage, const std::string& digest,
                        const std::vector<fs::path>& outputs) const {
    const fs::path path = stamp_path(stage);
    if (!fs::exists(path)) return false;
    nlohmann::json stamp = parse_json_file(path);
    if (stamp.value("input_digest", "") != digest) return false;
    for (const fs::path& output : outputs) {
        if (!fs::exists(output)) return false;
    }
    return true;
}

void Pipeline::write_stamp(const std::string& stage, const std::string& digest,
                           const std::vector<fs::path>& outputs) const {
    std::vector<std::string> names;
    for (const fs::path& output : outputs) {
        names.push_back(output.lexically_relative(run_dir_).generic_string());
    }
    std::sort(names.begin(), names.end());
    const fs::path path = stamp_path(stage);
    fs::create_directories(path.parent_path());
    write_file(path, dump_doc({{"input_digest", digest}, {"outputs", names}}));
}

std::string Pipeline::files_digest(const fs::path& root, const std::string& needed_by) const {
    require(fs::exists(root), needed_by, " needs ", root.string(),
            "; run the earlier stages first");
    std::vector<fs::path> files;
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
        if (entry.is_regular_file()) files.push_back(entry.path());
    }
    std::vector<std::pair<std::string, fs::path>> keyed;
    for (const fs::path& file : files) {
        keyed.emplace_back(file.lexically_relative(root).generic_string(), file);
    }
    std::sort(keyed.begin(), keyed.end());
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& [name, file] : keyed) {
        entries.push_back({name, sha256_file_hex(file)});
    }
    return sha256_hex(entries.dump());
}

std::string Pipeline::inject_input_digest() const {
    nlohmann::json biases = nlohmann::json::array();
    for (const BiasSpec& spec : config_.biases) biases.push_back(spec_to_json(spec));
    return sha256_hex(nlohmann::json{{"dataset", sha256_file_hex(config_.dataset)},
                                     {"seed", config_.seed},
                                     {"pairs", config_.pairs},
                                     {"pool_size", config_.pool_size},
                                     {"biases", biases}}
                          .dump());
}

std::string Pipeline::prompt_input_digest() const {
    nlohmann::json settings = nlohmann::json::array();
    for (const ContextSetting& setting : config_.settings) {
        settings.push_back(setting.digest());
    }
    return sha256_hex(
        nlohmann::json{{"bias_files", files_digest(run_dir_ / "bias", "prompt")},
                       {"settings", settings},
                       {"seed", config_.seed},
                       {"prompt", prompt_options_to_json(config_.prompt_options)}}
            .dump());
}

std::string Pipeline::query_input_digest() const {
    nlohmann::json models = nlohmann::json::array();
    for (const ModelEndpoint& model : config_.models) models.push_back(endpoint_to_json(model));
    return sha256_hex(
        nlohmann::json{{"bundles", files_digest(run_dir_ / "prompts", "query")},
                       {"bias_files", files_digest(run_dir_ / "bias", "query")},
                       {"models", models},
                       {"mode", to_string(config_.mode)}}
            .dump());
}

std::string Pipeline::judge_input_digest() const {
    nlohmann::json judge{{"mode", to_string(config_.judge.kind)}};
    if (config_.judge.endpoint) judge["endpoint"] = endpoint_to_json(*config_.judge.endpoint);
    return sha256_hex(
        nlohmann::json{{"transcripts", files_digest(run_dir_ / "transcripts", "judge")},
                       {"bias_files", files_digest(run_dir_ / "bias", "judge")},
                       {"judge", judge}}
            .dump());
}

std::string Pipeline::analysis_input_digest() const {
    nlohmann::json models = nlohmann::json::array();
    for (const ModelEndpoint& model : config_.models) models.push_back(model.model_name);
    nlohmann::json settings = nlohmann::json::array();
    for (const ContextSetting& setting : config_.settings) {
        settings.push_back(setting.digest());
    }
    return sha256_hex(
        nlohmann::json{{"labels", files_digest(run_dir_ / "labels", "analyze")},
                       {"bias_files", files_digest(run_dir_ / "bias", "analyze")},
                       {"models", models},
                       {"settings", settings}}
            .dump());
}

namespace {

/// Biased plus/minus questions for one visual-bias question, with the
/// derived images written under dir/images/.
std::pair<Question, Question> visual_pair(const Question& q, const BiasSpec& spec,
                                          const fs::path& dir, const std::string& prefix,
                                          nlohmann::json& warnings) {
    require(q.image.has_value(), "question ", q.id, ": ", to_string(spec.kind),
            " needs an image");
    Image source = read_png(*q.image);
    ImagePairResult result = apply_image_bias(q, source, spec);
    const std::string plus_name = "images/" + prefix + q.id + "_plus.png";
    const std::string minus_name = "images/" + prefix + q.id + "_minus.png";
    write_png(dir / plus_name, result.plus);
    write_png(dir / minus_name, result.minus);
    Question plus = q;
    plus.image = plus_name;
    if (q.boxes) plus.boxes = result.plus_boxes;
    plus.group = Group::Plus;
    Question minus = q;
    minus.image = minus_name;
    if (q.boxes) minus.boxes = result.minus_boxes;
    minus.group = Group::Minus;
    for (const std::string& warning : result.warnings) {
        warnings.push_back(q.id + ": " + warning);
    }
    return {std::move(plus), std::move(minus)};
}

}  // namespace

StageResult Pipeline::inject() {
    const std::string digest = inject_input_digest();
    std::vector<fs::path> outputs;
    for (const BiasSpec& spec : config_.biases) {
        const fs::path dir = bias_dir(spec);
        for (const char* name :
             {"dplus.jsonl", "dminus.jsonl", "pool.jsonl", "pool_plus.jsonl", "warnings.json"}) {
            outputs.push_back(dir / name);
        }
    }
    if (stamp_ok("inject", digest, outputs)) return {"inject", true, 0};

    std::vector<Question> base = parse_dataset(config_.dataset, DatasetSchema::Paired);
    check_question_ids(base, config_.dataset.string());
    absolutize_images(base, fs::absolute(config_.dataset).parent_path());
    DatasetSplit split = split_dataset_exact(base, config_.pool_size, config_.seed);
    std::vector<Question> tests = split.test;
    if (config_.pairs > 0) {
        require(static_cast<long>(tests.size()) >= config_.pairs, "dataset split keeps ",
                tests.size(), " test questions but config asks for ", config_.pairs);
        tests.resize(static_cast<std::size_t>(config_.pairs));
    }

    long injected = 0;
    for (const BiasSpec& spec : config_.biases) {
        const fs::path dir = bias_dir(spec);
        fs::create_directories(dir);
        std::vector<Question> plus_side;
        std::vector<Question> minus_side;
        std::vector<Question> pool_plus;
        nlohmann::json warnings = nlohmann::json::array();
        if (!bias_is_visual(spec.kind)) {
            for (const Question& q : tests) {
                BiasedPair pair = build_text_pair(q, spec);
                plus_side.push_back(std::move(pair.plus));
                minus_side.push_back(std::move(pair.minus));
            }
            for (const Question& q : split.incontext_pool) {
                pool_plus.push_back(build_text_pair(q, spec).plus);
            }
        } else {
            fs::create_directories(dir / "images");
            for (const Question& q : tests) {
                auto [plus, minus] = visual_pair(q, spec, dir, "", warnings);
                plus_side.push_back(std::move(plus));
                minus_side.push_back(std::move(minus));
            }
            for (const Question& q : split.incontext_pool) {
                auto [plus, minus] = visual_pair(q, spec, dir, "pool_", warnings);
                (void)minus;
                pool_plus.push_back(std::move(plus));
            }
        }
        write_dataset(dir / "dplus.jsonl", plus_side);
        write_dataset(dir / "dminus.jsonl", minus_side);
        write_dataset(dir / "pool.jsonl", split.incontext_pool);
        write_dataset(dir / "pool_plus.jsonl", pool_plus);
        write_file(dir / "warnings.json", dump_doc(warnings));
        injected += static_cast<long>(plus_side.size() + minus_side.size());
    }
    write_stamp("inject", digest, outputs);
    return {"inject", false, injected};
}

std::vector<Question> Pipeline::load_side(const BiasSpec& spec, Group direction) const {
    std::vector<Question> questions = load_pair_file(pair_path(spec, direction));
    for (const Question& q : questions) {
        require(q.group == direction, pair_path(spec, direction).string(), ": question ",
                q.id, " carries the wrong group");
    }
    absolutize_images(questions, bias_dir(spec));
    return questions;
}

std::vector<Question> Pipeline::select_examples(const BiasSpec& spec,
                                                const ContextSetting& setting) const {
    if (setting.mode == ContextMode::NoContext) return {};
    DatasetSplit split;
    split.seed = config_.seed;
    if (setting.mode == ContextMode::Unbiased) {
        split.incontext_pool = parse_dataset(pool_path(spec, false), DatasetSchema::Paired);
    } else {
        split.incontext_pool = load_pair_file(pool_path(spec, true));
    }
    absolutize_images(split.incontext_pool, bias_dir(spec));
    return select_incontext(split, setting, std::nullopt);
}

StageResult Pipeline::prompt() {
    const std::string digest = prompt_input_digest();
    std::vector<fs::path> outputs;
    std::map<BiasKind, std::vector<std::pair<Group, std::vector<Question>>>> sides;
    for (const BiasSpec& spec : config_.biases) {
        for (Group direction : {Group::Plus, Group::Minus}) {
            std::vector<Question> questions = load_side(spec, direction);
            for (const ContextSetting& setting : config_.settings) {
                for (const Question& q : questions) {
                    outputs.push_back(bundle_path(spec, setting, q.id, direction));
                }
            }
            sides[spec.kind].push_back({direction, std::move(questions)});
        }
    }
    if (stamp_ok("prompt", digest, outputs)) return {"prompt", true, 0};

    long written = 0;
    for (const BiasSpec& spec : config_.biases) {
        for (const ContextSetting& setting : config_.settings) {
            const std::vector<Question> examples = select_examples(spec, setting);
            for (const auto& [direction, questions] : sides.at(spec.kind)) {
                for (const Question& q : questions) {
                    PromptBundle bundle = assemble_prompt(q, examples, config_.prompt_options);
                    const fs::path path = bundle_path(spec, setting, q.id, direction);
                    fs::create_directories(path.parent_path());
                    write_file(path, dump_doc(bundle_to_json(bundle)));
                    ++written;
                }
            }
        }
    }
    write_stamp("prompt", digest, outputs);
    return {"prompt", false, written};
}

std::shared_ptr<Responder> Pipeline::make_responder(const ModelEndpoint& model,
                                                    const BiasSpec& spec, Group direction,
                                                    const std::vector<Question>& side) const {
    if (config_.mode == QueryMode::Replay) return nullptr;
    if (is_oracle_url(model.base_url)) {
        OracleConfig oracle = oracle_config_from_url(model.base_url);
        auto cases = std::make_shared<std::map<std::string, OracleCase>>();
        for (const Question& q : side) {
            const Label truth = q.ground_truth;
            (*cases)[q.id] =
                OracleCase{truth, direction == Group::Plus ? truth : other(truth)};
        }
        return std::make_shared<OracleResponder>(
            oracle, bias_description(spec.kind), [cases](const std::string& id) {
                auto it = cases->find(id);
                require(it != cases->end(), "oracle lookup has no question ", id);
                return it->second;
            });
    }
    return std::make_shared<HttpResponder>(model);
}

StageResult Pipeline::query() {
    const std::string digest = query_input_digest();
    std::vector<fs::path> outputs;
    for (const ModelEndpoint& model : config_.models) {
        for (const BiasSpec& spec : config_.biases) {
            for (Group direction : {Group::Plus, Group::Minus}) {
                const std::vector<Question> questions = load_side(spec, direction);
                for (const ContextSetting& setting : config_.settings) {
                    for (const Question& q : questions) {
                        outputs.push_back(
                            transcript_path(model, spec, setting, q.id, direction));
                    }
                }
            }
        }
    }
    if (stamp_ok("query", digest, outputs)) return {"query", true, 0};

    long asked = 0;
    for (const ModelEndpoint& model : config_.models) {
        for (const BiasSpec& spec : config_.biases) {
            for (Group direction : {Group::Plus, Group::Minus}) {
                const std::vector<Question> questions = load_side(spec, direction);
                ModelClient client(model, config_.cache_dir, config_.mode,
                                   make_responder(model, spec, direction, questions),
                                   config_.concurrency);
                for (const ContextSetting& setting : config_.settings) {
                    std::vector<std::pair<PromptBundle, std::string>> pending;
                    std::vector<fs::path> destinations;
                    for (const Question& q : questions) {
                        const fs::path destination =
                            transcript_path(model, spec, setting, q.id, direction);
                        PromptBundle bundle = bundle_from_json(
                            parse_json_file(bundle_path(spec, setting, q.id, direction)));
                        if (fs::exists(destination)) {
                            Transcript existing =
                                transcript_from_json(parse_json_file(destination));
                            if (existing.cache_key == client.cache_key(bundle)) continue;
                        }
                        pending.push_back({std::move(bundle), setting.digest()});
                        destinations.push_back(destination);
                    }
                    if (pending.empty()) continue;
                    const std::vector<Transcript> transcripts = client.complete_all(pending);
                    for (std::size_t i = 0; i < transcripts.size(); ++i) {
                        fs::create_directories(destinations[i].parent_path());
                        write_file(destinations[i], dump_doc(transcript_to_json(transcripts[i])));
                    }
                    asked += static_cast<long>(transcripts.size());
                }
            }
        }
    }
    write_stamp("query", digest, outputs);
    return {"query", false, asked};
}

Judge Pipeline::make_judge() const {
    if (config_.judge.kind == JudgeMode::Rules) return Judge();
    const ModelEndpoint& endpoint = *config_.judge.endpoint;
    std::shared_ptr<Responder> responder;
    if (config_.mode != QueryMode::Replay) responder = std::make_shared<HttpResponder>(endpoint);
    return Judge(std::make_shared<ModelClient>(endpoint, config_.cache_dir, config_.mode,
                                               responder, config_.concurrency));
}

StageResult Pipeline::judge() {
    const std::string digest = judge_input_digest();
    std::vector<fs::path> outputs;
    for (const ModelEndpoint& model : config_.models) {
        for (const BiasSpec& spec : config_.biases) {
            for (Group direction : {Group::Plus, Group::Minus}) {
                const std::vector<Question> questions = load_side(spec, direction);
                for (const ContextSetting& setting : config_.settings) {
                    for (const Question& q : questions) {
                        outputs.push_back(label_path(model, spec, setting, q.id, direction));
                    }
                }
            }
        }
    }
    if (stamp_ok("judge", digest, outputs)) return {"judge", true, 0};

    Judge judge = make_judge();
    long judged = 0;
    for (const ModelEndpoint& model : config_.models) {
        for (const BiasSpec& spec : config_.biases) {
            for (Group direction : {Group::Plus, Group::Minus}) {
                const std::vector<Question> questions = load_side(spec, direction);
                for (const ContextSetting& setting : config_.settings) {
                    std::vector<std::pair<Transcript, Question>> items;
                    std::vector<fs::path> destinations;
                    for (const Question& q : questions) {
                        const fs::path destination =
                            label_path(model, spec, setting, q.id, direction);
                        Transcript t = transcript_from_json(parse_json_file(
                            transcript_path(model, spec, setting, q.id, direction)));
                        if (t.raw_cot.empty()) {
                            fs::create_directories(destination.parent_path());
                            write_file(destination,
                                       dump_doc(judged_to_json(
                                           {q.id, std::nullopt, std::nullopt,
                                            "empty model reply; scored unanswered"})));
                            ++judged;
                            continue;
                        }
                        items.push_back({std::move(t), q});
                        destinations.push_back(destination);
                    }
                    const std::vector<JudgedTranscript> results =
                        judge.judge_all(items, spec, config_.concurrency);
                    for (std::size_t i = 0; i < results.size(); ++i) {
                        fs::create_directories(destinations[i].parent_path());
                        write_file(destinations[i], dump_doc(judged_to_json(results[i])));
                    }
                    judged += static_cast<long>(results.size());
                }
            }
        }
    }
    write_stamp("judge", digest, outputs);
    return {"judge", false, judged};
}

std::vector<TrialRecord> Pipeline::cell_records(const ModelEndpoint& model,
                                                const BiasSpec& spec,
                                                const ContextSetting& setting) const {
    std::vector<TrialRecord> records;
    for (Group direction : {Group::Plus, Group::Minus}) {
        for (const Question& q : load_side(spec, direction)) {
            const fs::path path = label_path(model, spec, setting, q.id, direction);
            JudgedTranscript judged = judged_from_json(parse_json_file(path));
            require(judged.question_id == q.id, path.string(), ": labels question ",
                    judged.question_id, " but the pair file lists ", q.id);
            TrialRecord record;
            record.pair_id = q.id;
            record.direction = direction;
            record.answered = judged.final_answer.has_value();
            record.correct = judged.final_answer.has_value() &&
                             *judged.final_answer == q.ground_truth;
            record.label = judged.label;
            record.setting = setting.digest();
            record.spec = to_string(spec.kind);
            records.push_back(std::move(record));
        }
    }
    return records;
}

std::vector<CellSummary> Pipeline::collect_summaries() const {
    std::vector<CellSummary> summaries;
    for (const ModelEndpoint& model : config_.models) {
        for (const BiasSpec& spec : config_.biases) {
            for (const ContextSetting& setting : config_.settings) {
                const std::vector<TrialRecord> records = cell_records(model, spec, setting);
                CellSummary summary;
                summary.cell.model = model.model_name;
                summary.cell.bias = to_string(spec.kind);
                summary.cell.setting = setting.digest();
                const auto plus = direction_outcomes(records, Group::Plus);
                const auto minus = direction_outcomes(records, Group::Minus);
                summary.cell.report = stats::accuracy_gap(plus, minus, true);
                summary.cell.unanswered_plus = count_unanswered(records, Group::Plus);
                summary.cell.unanswered_minus = count_unanswered(records, Group::Minus);
                summary.flips = articulation_rate(records, MetricScope::FlipsOnly);
                summary.all = articulation_rate(records, MetricScope::All);
                summary.cell.excluded_plus = summary.all.plus.excluded;
                summary.cell.excluded_minus = summary.all.minus.excluded;
                summary.flip_pairs = flip_subset(records);
                summaries.push_back(std::move(summary));
            }
        }
    }
    return summaries;
}

StageResult Pipeline::analyze() {
    const std::string digest = analysis_input_digest();
    const std::vector<fs::path> outputs = {run_dir_ / "metrics.json"};
    if (stamp_ok("analyze", digest, outputs)) return {"analyze", true, 0};

    const std::vector<CellSummary> summaries = collect_summaries();
    nlohmann::json doc = metrics_json(summaries);
    doc["scatter"] = scatter_json(build_scatter_points(summaries));
    write_file(run_dir_ / "metrics.json", dump_doc(doc));
    write_stamp("analyze", digest, outputs);
    return {"analyze", false, static_cast<long>(summaries.size())};
}

nlohmann::json Pipeline::build_manifest() const {
    nlohmann::json stages = nlohmann::json::object();
    for (const char* stage : {"inject", "prompt", "query", "judge", "analyze"}) {
        const fs::path path = stamp_path(stage);
        stages[stage] = fs::exists(path)
                            ? parse_json_file(path).value("input_digest", "")
                            : "";
    }
    nlohmann::json bias_warnings = nlohmann::json::object();
    for (const BiasSpec& spec : config_.biases) {
        bias_warnings[to_string(spec.kind)] = parse_json_file(bias_dir(spec) / "warnings.json");
    }
    nlohmann::json judge{{"mode", to_string(config_.judge.kind)}};
    if (config_.judge.kind == JudgeMode::Model) {
        judge["model"] = config_.judge.endpoint->model_name;
        judge["prompts"] = {{"final_answer", kFinalAnswerPromptTemplate},
                            {"articulation", kArticulationPromptTemplate},
                            {"inconsistency", kInconsistencyPromptTemplate}};
    }
    return {
        {"run_id", config_.run_id},
        {"config", run_config_to_json(config_)},
        {"dataset_digest", sha256_file_hex(config_.dataset)},
        {"stages", stages},
        {"bias_warnings", bias_warnings},
        {"judge", judge},
        {"artifacts",
         {"distributions.svg", "gaps.csv", "manifest.json", "metrics.json", "scatter.svg"}},
    };
}

StageResult Pipeline::report() {
    const std::string digest = analysis_input_digest();
    const std::vector<fs::path> outputs = {
        run_dir_ / "gaps.csv",
        run_dir_ / "scatter.svg",
        run_dir_ / "distributions.svg",
        run_dir_ / "manifest.json",
    };
    if (stamp_ok("report", digest, outputs)) return {"report", true, 0};

    const std::vector<CellSummary> summaries = collect_summaries();
    std::vector<GapCell> cells;
    for (const CellSummary& summary : summaries) cells.push_back(summary.cell);
    write_file(run_dir_ / "gaps.csv", gap_table_csv(cells));
    write_file(run_dir_ / "scatter.svg", scatter_svg(build_scatter_points(summaries)));
    write_file(run_dir_ / "distributions.svg", distributions_svg(summaries));
    write_file(run_dir_ / "manifest.json", dump_doc(build_manifest()));
    write_stamp("report", digest, outputs);
    return {"report", false, static_cast<long>(outputs.size())};
}

std::vector<StageResult> Pipeline::run_all() {
    return {inject(), prompt(), query(), judge(), analyze(), report()};
}

}  // namespace faith
