#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "faith/dataset.hpp"
#include "faith/judge.hpp"
#include "faith/model_client.hpp"
#include "faith/prompting.hpp"
#include "faith/report.hpp"

namespace faith {

struct JudgeConfig {
    JudgeMode kind = JudgeMode::Rules;
    std::optional<ModelEndpoint> endpoint;  // required for a model judge
};

/// Declarative description of one experiment run.
struct RunConfig {
    std::string run_id;
    std::filesystem::path runs_dir = "runs";
    std::filesystem::path dataset;
    std::filesystem::path cache_dir = "cache";
    std::uint64_t seed = 0;
    long pairs = 0;       // test pairs per bias; 0 keeps the whole split
    long pool_size = 50;  // held-out in-context pool size
    std::vector<BiasSpec> biases;
    std::vector<ContextSetting> settings;
    std::vector<ModelEndpoint> models;
    JudgeConfig judge;
    QueryMode mode = QueryMode::Record;
    long concurrency = 4;
    PromptOptions prompt_options;
};

void validate_run_config(const RunConfig& config);

/// Relative paths in the file resolve against `base_dir`.
RunConfig run_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);
nlohmann::json run_config_to_json(const RunConfig& config);

struct StageResult {
    std::string stage;
    bool skipped = false;  // inputs unchanged, outputs already present
    long items = 0;
};

/// Path-safe token for a model name: anything outside [A-Za-z0-9._-]
/// becomes '_'.
std::string model_segment(const std::string& model_name);

/// Drives one run directory through inject -> prompt -> query -> judge ->
/// analyze -> report. Every stage records a stamp of its input digest and
/// becomes a no-op while inputs stay unchanged, so interrupted runs resume
/// where they stopped.
class Pipeline {
  public:
    explicit Pipeline(RunConfig config);

    const RunConfig& config() const { return config_; }
    std::filesystem::path run_dir() const { return run_dir_; }

    std::filesystem::path bias_dir(const BiasSpec& spec) const;
    std::filesystem::path pair_path(const BiasSpec& spec, Group direction) const;
    std::filesystem::path pool_path(const BiasSpec& spec, bool biased) const;
    std::filesystem::path bundle_path(const BiasSpec& spec, const ContextSetting& setting,
                                      const std::string& question_id, Group direction) const;
    std::filesystem::path transcript_path(const ModelEndpoint& model, const BiasSpec& spec,
                                          const ContextSetting& setting,
                                          const std::string& question_id,
                                          Group direction) const;
    std::filesystem::path label_path(const ModelEndpoint& model, const BiasSpec& spec,
                                     const ContextSetting& setting,
                                     const std::string& question_id, Group direction) const;

    StageResult inject();
    StageResult prompt();
    StageResult query();
    StageResult judge();
    StageResult analyze();
    StageResult report();
    std::vector<StageResult> run_all();

    /// Pair-file side for one direction, image paths made absolute.
    std::vector<Question> load_side(const BiasSpec& spec, Group direction) const;

    /// Trial records for one cell, assembled from pair files and labels.
    std::vector<TrialRecord> cell_records(const ModelEndpoint& model, const BiasSpec& spec,
                                          const ContextSetting& setting) const;

    /// Aggregates for every (model, bias, setting) cell.
    std::vector<CellSummary> collect_summaries() const;

  private:
    std::filesystem::path stamp_path(const std::string& stage) const;
    bool stamp_ok(const std::string& stage, const std::string& digest,
                  const std::vector<std::filesystem::path>& outputs) const;
    void write_stamp(const std::string& stage, const std::string& digest,
                     const std::vector<std::filesystem::path>& outputs) const;
    std::string files_digest(const std::filesystem::path& root, const std::string& needed_by) const;

    std::string inject_input_digest() const;
    std::string prompt_input_digest() const;
    std::string query_input_digest() const;
    std::string judge_input_digest() const;
    std::string analysis_input_digest() const;

    std::vector<Question> select_examples(const BiasSpec& spec,
                                          const ContextSetting& setting) const;
    std::shared_ptr<Responder> make_responder(const ModelEndpoint& model, const BiasSpec& spec,
                                              Group direction,
                                              const std::vector<Question>& side) const;
    Judge make_judge() const;
    nlohmann::json build_manifest() const;

    RunConfig config_;
    std::filesystem::path run_dir_;
};

}  // namespace faith
