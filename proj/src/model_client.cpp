#include "faith/model_client.hpp"

#include <atomic>
#include <chrono>
#include <exception>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "faith/error.hpp"
#include "faith/util.hpp"

namespace faith {

namespace {

constexpr const char* kQueryModeNames[] = {"live", "record", "replay"};

struct SplitUrl {
    std::string origin;
    std::string prefix;
};

SplitUrl split_base_url(const std::string& base_url) {
    auto scheme_end = base_url.find("://");
    require(scheme_end != std::string::npos, "model endpoint base_url needs a scheme: ", base_url);
    auto path_start = base_url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {base_url, ""};
    std::string prefix = base_url.substr(path_start);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    return {base_url.substr(0, path_start), prefix};
}

std::string image_data_url(const std::string& path) {
    return "data:image/png;base64," + base64_encode(read_file(path));
}

nlohmann::json message_content(const Message& message, bool pack_images) {
    if (!pack_images || message.image_paths.empty()) return message.text;
    nlohmann::json parts = nlohmann::json::array();
    parts.push_back({{"type", "text"}, {"text", message.text}});
    for (const auto& path : message.image_paths) {
        parts.push_back(
            {{"type", "image_url"}, {"image_url", {{"url", image_data_url(path)}}}});
    }
    return parts;
}

std::string cache_entry_dump(const nlohmann::json& entry) {
    return entry.dump(2) + "\n";
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    auto tmp = path;
    tmp += ".tmp";
    write_file(tmp, content);
    std::filesystem::rename(tmp, path);
}

}  // namespace

std::string to_string(QueryMode mode) {
    return kQueryModeNames[static_cast<int>(mode)];
}

QueryMode query_mode_from_string(const std::string& text) {
    for (int i = 0; i < 3; ++i) {
        if (text == kQueryModeNames[i]) return static_cast<QueryMode>(i);
    }
    raise("unknown query mode: ", text, " (expected live, record, or replay)");
}

void validate_model_endpoint(const ModelEndpoint& endpoint) {
    require(!endpoint.base_url.empty(), "model endpoint base_url is empty");
    require(!endpoint.model_name.empty(), "model endpoint model_name is empty");
    require(endpoint.temperature >= 0.0, "model endpoint temperature must be >= 0, got ",
            endpoint.temperature);
    require(endpoint.max_tokens >= 1, "model endpoint max_tokens must be >= 1, got ",
            endpoint.max_tokens);
    require(endpoint.timeout_s > 0.0, "model endpoint timeout_s must be > 0, got ",
            endpoint.timeout_s);
}

nlohmann::json transcript_to_json(const Transcript& transcript) {
    return {
        {"question_id", transcript.question_id},
        {"setting", transcript.setting},
        {"raw_cot", transcript.raw_cot},
        {"final_answer",
         transcript.final_answer ? nlohmann::json(to_string(*transcript.final_answer))
                                 : nlohmann::json(nullptr)},
        {"usage",
         {{"prompt_tokens", transcript.usage.prompt_tokens},
          {"completion_tokens", transcript.usage.completion_tokens}}},
        {"cache_key", transcript.cache_key},
        {"cot_is_summary", transcript.cot_is_summary},
    };
}

Transcript transcript_from_json(const nlohmann::json& j) {
    require(j.is_object(), "transcript must be a JSON object");
    Transcript t;
    t.question_id = j.at("question_id").get<std::string>();
    t.setting = j.at("setting").get<std::string>();
    t.raw_cot = j.at("raw_cot").get<std::string>();
    if (!j.at("final_answer").is_null()) {
        t.final_answer = label_from_string(j.at("final_answer").get<std::string>());
    }
    t.usage.prompt_tokens = j.at("usage").at("prompt_tokens").get<long>();
    t.usage.completion_tokens = j.at("usage").at("completion_tokens").get<long>();
    t.cache_key = j.at("cache_key").get<std::string>();
    t.cot_is_summary = j.at("cot_is_summary").get<bool>();
    return t;
}

HttpResponder::HttpResponder(ModelEndpoint endpoint, long max_retries, long backoff_ms)
    : endpoint_(std::move(endpoint)), max_retries_(max_retries), backoff_ms_(backoff_ms) {
    validate_model_endpoint(endpoint_);
    require(max_retries_ >= 0, "max_retries must be >= 0, got ", max_retries_);
}

ModelReply HttpResponder::respond(const PromptBundle& bundle) {
    auto [origin, prefix] = split_base_url(endpoint_.base_url);
    std::string route = prefix + "/chat/completions";
    std::string body = chat_request_body(bundle, endpoint_).dump();

    httplib::Headers headers;
    if (!endpoint_.api_key_env.empty()) {
        const char* key = std::getenv(endpoint_.api_key_env.c_str());
        require(key != nullptr && *key != '\0', "environment variable ", endpoint_.api_key_env,
                " is not set (needed for ", endpoint_.base_url, ")");
        headers.emplace("Authorization", std::string("Bearer ") + key);
    }

    std::ostringstream attempts;
    for (long attempt = 0; attempt <= max_retries_; ++attempt) {
        if (attempt > 0) {
            auto delay = std::chrono::milliseconds(backoff_ms_ << (attempt - 1));
            std::this_thread::sleep_for(delay);
        }
        httplib::Client client(origin);
        client.set_connection_timeout(std::chrono::duration<double>(endpoint_.timeout_s));
        client.set_read_timeout(std::chrono::duration<double>(endpoint_.timeout_s));
        auto result = client.Post(route, headers, body, "application/json");
        if (!result) {
            attempts << "attempt " << attempt + 1 << ": transport error "
                     << httplib::to_string(result.error()) << "; ";
            continue;
        }
        if (result->status >= 400 && result->status < 500) {
            raise("HTTP ", result->status, " from ", origin, route,
                  " (not retryable): ", result->body);
        }
        if (result->status != 200) {
            attempts << "attempt " << attempt + 1 << ": HTTP " << result->status << "; ";
            continue;
        }

        nlohmann::json reply;
        try {
            reply = nlohmann::json::parse(result->body);
        } catch (const nlohmann::json::exception& e) {
            raise("malformed JSON from ", origin, route, ": ", e.what());
        }
        require(reply.contains("choices") && reply["choices"].is_array() &&
                    !reply["choices"].empty(),
                "model reply has no choices: ", result->body);
        ModelReply out;
        out.text = reply["choices"][0].at("message").at("content").get<std::string>();
        if (reply.contains("usage") && reply["usage"].is_object()) {
            out.usage.prompt_tokens = reply["usage"].value("prompt_tokens", 0L);
            out.usage.completion_tokens = reply["usage"].value("completion_tokens", 0L);
        }
        out.cot_is_summary = endpoint_.cot_is_summary;
        return out;
    }
    raise("request to ", origin, route, " failed after ", max_retries_ + 1,
          " attempts: ", attempts.str());
}

nlohmann::json chat_request_body(const PromptBundle& bundle, const ModelEndpoint& endpoint) {
    nlohmann::json messages = nlohmann::json::array();
    if (!bundle.system.empty()) {
        messages.push_back({{"role", "system"}, {"content", bundle.system}});
    }
    for (const auto& message : bundle.messages) {
        messages.push_back({{"role", message.role}, {"content", message_content(message, true)}});
    }
    return {
        {"model", endpoint.model_name},
        {"messages", messages},
        {"temperature", endpoint.temperature},
        {"max_tokens", endpoint.max_tokens},
    };
}

nlohmann::json bundle_for_cache_key(const PromptBundle& bundle) {
    nlohmann::json j = bundle_to_json(bundle);
    for (auto& message : j["messages"]) {
        for (auto& image : message["images"]) {
            image = "sha256:" + sha256_file_hex(image.get<std::string>());
        }
    }
    return j;
}

std::string compute_cache_key(const PromptBundle& bundle, const ModelEndpoint& endpoint) {
    nlohmann::json key_material = {
        {"bundle", bundle_for_cache_key(bundle)},
        {"model", endpoint.model_name},
        {"temperature", format_double(endpoint.temperature)},
    };
    return sha256_hex(key_material.dump());
}

ModelClient::ModelClient(ModelEndpoint endpoint, std::filesystem::path cache_dir, QueryMode mode,
                         std::shared_ptr<Responder> responder, long concurrency)
    : endpoint_(std::move(endpoint)),
      cache_dir_(std::move(cache_dir)),
      mode_(mode),
      responder_(std::move(responder)),
      concurrency_(concurrency) {
    validate_model_endpoint(endpoint_);
    require(concurrency_ >= 1, "concurrency must be >= 1, got ", concurrency_);
    if (mode_ != QueryMode::Replay) {
        require(responder_ != nullptr, "query mode ", to_string(mode_), " needs a responder");
    }
    if (mode_ != QueryMode::Live) {
        std::filesystem::create_directories(cache_dir_);
    }
}

std::string ModelClient::cache_key(const PromptBundle& bundle) const {
    return compute_cache_key(bundle, endpoint_);
}

std::filesystem::path ModelClient::cache_path(const std::string& key) const {
    return cache_dir_ / (key + ".json");
}

Transcript ModelClient::from_cache_entry(const nlohmann::json& entry, const PromptBundle& bundle,
                                         const std::string& setting_digest) const {
    Transcript t;
    t.question_id = bundle.test_question_id;
    t.setting = setting_digest;
    t.raw_cot = entry.at("raw_cot").get<std::string>();
    t.usage.prompt_tokens = entry.at("usage").at("prompt_tokens").get<long>();
    t.usage.completion_tokens = entry.at("usage").at("completion_tokens").get<long>();
    t.cache_key = entry.at("cache_key").get<std::string>();
    t.cot_is_summary = entry.at("cot_is_summary").get<bool>();
    return t;
}

Transcript ModelClient::complete(const PromptBundle& bundle, const std::string& setting_digest) {
    std::string key = cache_key(bundle);
    auto path = cache_path(key);

    if (mode_ != QueryMode::Live && std::filesystem::exists(path)) {
        auto entry = nlohmann::json::parse(read_file(path));
        return from_cache_entry(entry, bundle, setting_digest);
    }
    if (mode_ == QueryMode::Replay) {
        raise("replay cache miss for question ", bundle.test_question_id, ": key ", key,
              " not found under ", cache_dir_.string());
    }

    ModelReply reply = responder_->respond(bundle);
    Transcript t;
    t.question_id = bundle.test_question_id;
    t.setting = setting_digest;
    t.raw_cot = reply.text;
    t.usage = reply.usage;
    t.cache_key = key;
    t.cot_is_summary = reply.cot_is_summary;

    if (mode_ == QueryMode::Record) {
        nlohmann::json entry = {
            {"cache_key", key},
            {"model", endpoint_.model_name},
            {"raw_cot", t.raw_cot},
            {"usage",
             {{"prompt_tokens", t.usage.prompt_tokens},
              {"completion_tokens", t.usage.completion_tokens}}},
            {"cot_is_summary", t.cot_is_summary},
        };
        std::lock_guard<std::mutex> lock(write_mutex_);
        write_file_atomic(path, cache_entry_dump(entry));
    }
    return t;
}

std::vector<Transcript> ModelClient::complete_all(
    const std::vector<std::pair<PromptBundle, std::string>>& work) {
    std::vector<Transcript> results(work.size());
    if (work.empty()) return results;

    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr first_error;

    auto worker = [&] {
        while (true) {
            std::size_t i = next.fetch_add(1);
            if (i >= work.size()) return;
            {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (first_error) return;
            }
            try {
                results[i] = complete(work[i].first, work[i].second);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };

    std::size_t n_threads = std::min<std::size_t>(static_cast<std::size_t>(concurrency_),
                                                  work.size());
    std::vector<std::thread> threads;
    threads.reserve(n_threads);
    for (std::size_t i = 0; i < n_threads; ++i) threads.emplace_back(worker);
    for (auto& thread : threads) thread.join();
    if (first_error) std::rethrow_exception(first_error);
    return results;
}

}  // namespace faith
