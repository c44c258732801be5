#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <tuple>
#include <vector>

#include "qappp/dataset.hpp"

namespace qappp {

enum class AnswerMode { Greedy, Sample };

std::string to_string(AnswerMode mode);
AnswerMode answer_mode_from_string(const std::string& s);

// Template string meaning "submit the question unchanged".
inline constexpr const char* kIdentityTemplate = "identity";
// Default decoder-only template.
inline constexpr const char* kDecoderTemplate = "Question:{question}\nAnswer:";
inline constexpr const char* kQuestionSlot = "{question}";

struct ModelConfig {
    std::string model_id;
    std::string endpoint_url;
    std::string api_style = "openai";  // "openai" | "simple" | "stub"
    std::string prompt_template = kDecoderTemplate;
    int max_new_tokens = 32;
    int request_timeout_seconds = 60;
    int max_parallel = 1;
    int retry_limit = 3;
    int retry_backoff_ms = 250;
};

struct AnswerRecord {
    std::string question_id;
    std::string model_id;
    AnswerMode mode = AnswerMode::Greedy;
    int sample_index = 0;  // 0 for greedy, 0..k-1 for samples
    double temperature = 0.0;
    std::string raw_text;
    std::string truncated_text;
};

std::string render_prompt(const std::string& question, const ModelConfig& config);

// Prefix up to and including the first '.', '!' or '?' followed by
// whitespace or end-of-text; the trimmed input when no terminator exists.
// Idempotent. Abbreviations ("Dr.") truncate early; accepted limitation.
std::string truncate_first_sentence(const std::string& text);

struct CompletionRequest {
    std::string model_id;
    std::string prompt;
    double temperature = 0.0;
    int max_new_tokens = 32;
    int n = 1;
    // Metadata for offline stubs; wire clients ignore it.
    std::string question_id;
};

class CompletionClient {
public:
    virtual ~CompletionClient() = default;
    // Returns n generated texts. Throws EndpointUnavailable on transport
    // failure and MalformedResponse on an unparseable body.
    virtual std::vector<std::string> complete(const CompletionRequest& request) = 0;
};

// Completion-style HTTP endpoint: POST JSON
//   {"model","prompt","temperature","max_tokens","n"}
// accepting {"choices":[{"text":...}]} ("openai") or {"texts":[...]}
// ("simple") responses. Field names follow the api_style.
class HttpCompletionClient final : public CompletionClient {
public:
    explicit HttpCompletionClient(const ModelConfig& config);
    std::vector<std::string> complete(const CompletionRequest& request) override;

private:
    ModelConfig config_;
};

// Deterministic offline answers derived from the question group: easy
// groups answer consistently with the gold answer, hard groups scatter.
// Keeps correctness, SCons, and Cert informative without any endpoint.
class StubCompletionClient final : public CompletionClient {
public:
    explicit StubCompletionClient(const std::vector<QuestionRecord>& expanded);
    std::vector<std::string> complete(const CompletionRequest& request) override;

    std::size_t request_count() const { return request_count_; }

private:
    std::map<std::string, QuestionRecord> by_id_;
    std::size_t request_count_ = 0;
};

std::unique_ptr<CompletionClient> make_completion_client(
    const ModelConfig& config, const std::vector<QuestionRecord>& expanded);

// Append-only line-delimited JSON store of AnswerRecord, indexed by
// (model_id, question_id, mode, sample_index). Writes are serialized and
// flushed per record so partial results survive failures.
class AnswerStore {
public:
    explicit AnswerStore(std::filesystem::path path);

    bool contains(const std::string& model_id, const std::string& question_id,
                  AnswerMode mode, int sample_index) const;
    void append(const AnswerRecord& record);
    std::vector<AnswerRecord> records() const;
    std::size_t size() const;

    static std::vector<AnswerRecord> read_file(const std::filesystem::path& path);

private:
    using Key = std::tuple<std::string, std::string, int, int>;
    static Key key_of(const std::string& model_id, const std::string& question_id,
                      AnswerMode mode, int sample_index);

    std::filesystem::path path_;
    mutable std::mutex mutex_;
    std::map<Key, std::size_t> index_;
    std::vector<AnswerRecord> records_;
};

// Collects one record per (question, sample index), resuming over the
// store: already-answered pairs are skipped. Up to config.max_parallel
// requests run concurrently; records are committed in question order.
// Greedy mode forces k=1, temperature=0.
std::vector<AnswerRecord> collect_answers(const std::vector<QuestionRecord>& questions,
                                          const ModelConfig& config,
                                          CompletionClient& client, AnswerStore& store,
                                          AnswerMode mode, int k = 1,
                                          double temperature = 0.0);

}  // namespace qappp
