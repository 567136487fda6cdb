#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "faith/dataset.hpp"
#include "faith/prompting.hpp"

namespace faith {

enum class QueryMode { Live, Record, Replay };

std::string to_string(QueryMode mode);
QueryMode query_mode_from_string(const std::string& text);

struct ModelEndpoint {
    std::string base_url;
    std::string model_name;
    std::string api_key_env;
    double temperature = 0.0;
    long max_tokens = 1024;
    double timeout_s = 120.0;

    /// Endpoints that return a reasoning summary instead of the raw CoT;
    /// transcripts are tagged so reports can separate them.
    bool cot_is_summary = false;
};

void validate_model_endpoint(const ModelEndpoint& endpoint);

struct Usage {
    long prompt_tokens = 0;
    long completion_tokens = 0;

    bool operator==(const Usage&) const = default;
};

struct Transcript {
    std::string question_id;
    std::string setting;
    std::string raw_cot;
    std::optional<Label> final_answer;
    Usage usage;
    std::string cache_key;
    bool cot_is_summary = false;

    bool operator==(const Transcript&) const = default;
};

nlohmann::json transcript_to_json(const Transcript& transcript);
Transcript transcript_from_json(const nlohmann::json& j);

struct ModelReply {
    std::string text;
    Usage usage;
    bool cot_is_summary = false;
};

/// Transport that turns a prompt into model text; HTTP in production, the
/// synthetic oracle in offline runs.
class Responder {
  public:
    virtual ~Responder() = default;
    virtual ModelReply respond(const PromptBundle& bundle) = 0;
};

/// POST {base_url}/chat/completions with the de-facto chat JSON shape.
/// Retries transient failures (5xx, transport) with exponential backoff;
/// 4xx aborts immediately.
class HttpResponder : public Responder {
  public:
    explicit HttpResponder(ModelEndpoint endpoint, long max_retries = 3, long backoff_ms = 500);
    ModelReply respond(const PromptBundle& bundle) override;

  private:
    ModelEndpoint endpoint_;
    long max_retries_;
    long backoff_ms_;
};

/// Request body for one bundle, images inlined as base64 data URLs.
nlohmann::json chat_request_body(const PromptBundle& bundle, const ModelEndpoint& endpoint);

/// Bundle serialization used for cache keys: image paths replaced by content
/// hashes so relocating files does not invalidate the cache.
nlohmann::json bundle_for_cache_key(const PromptBundle& bundle);

std::string compute_cache_key(const PromptBundle& bundle, const ModelEndpoint& endpoint);

/// Issues requests through a Responder with an on-disk response cache.
/// Record mode is read-through: hits never touch the transport. Replay mode
/// never touches it at all. Live mode ignores the cache entirely.
class ModelClient {
  public:
    ModelClient(ModelEndpoint endpoint, std::filesystem::path cache_dir, QueryMode mode,
                std::shared_ptr<Responder> responder, long concurrency = 4);

    Transcript complete(const PromptBundle& bundle, const std::string& setting_digest);

    /// complete() over all items with at most `concurrency` in flight;
    /// results in input order.
    std::vector<Transcript> complete_all(
        const std::vector<std::pair<PromptBundle, std::string>>& work);

    std::string cache_key(const PromptBundle& bundle) const;
    std::filesystem::path cache_path(const std::string& key) const;

  private:
    Transcript from_cache_entry(const nlohmann::json& entry, const PromptBundle& bundle,
                                const std::string& setting_digest) const;

    ModelEndpoint endpoint_;
    std::filesystem::path cache_dir_;
    QueryMode mode_;
    std::shared_ptr<Responder> responder_;
    long concurrency_;
    std::mutex write_mutex_;
};

}  // namespace faith
