#include "qappp/answering.hpp"

#include <atomic>
#include <cctype>
#include <chrono>
#include <condition_variable>
#include <fstream>
#include <optional>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "qappp/error.hpp"
#include "qappp/util.hpp"

namespace qappp {

using nlohmann::json;

std::string to_string(AnswerMode mode) {
    return mode == AnswerMode::Greedy ? "greedy" : "sample";
}

AnswerMode answer_mode_from_string(const std::string& s) {
    if (s == "greedy") return AnswerMode::Greedy;
    if (s == "sample") return AnswerMode::Sample;
    throw MalformedResponse("unknown answer mode: " + s);
}

std::string render_prompt(const std::string& question, const ModelConfig& config) {
    if (config.prompt_template == kIdentityTemplate) return question;
    std::size_t slots = count_occurrences(config.prompt_template, kQuestionSlot);
    if (slots != 1)
        throw MalformedTemplate("prompt template must contain '" +
                                std::string(kQuestionSlot) + "' exactly once, found " +
                                std::to_string(slots));
    return replace_all(config.prompt_template, kQuestionSlot, question);
}

std::string truncate_first_sentence(const std::string& text) {
    std::string t = trim(text);
    for (std::size_t i = 0; i < t.size(); ++i) {
        char c = t[i];
        if (c != '.' && c != '!' && c != '?') continue;
        if (i + 1 == t.size() || std::isspace(static_cast<unsigned char>(t[i + 1])))
            return t.substr(0, i + 1);
    }
    return t;
}

// ---------------------------------------------------------------------------
// HTTP client

namespace {

struct SplitUrl {
    std::string base;  // scheme://host[:port]
    std::string path;  // /path or /
};

SplitUrl split_url(const std::string& url) {
    std::size_t scheme_end = url.find("://");
    if (scheme_end == std::string::npos)
        throw EndpointUnavailable("endpoint URL missing scheme: " + url);
    std::size_t path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

HttpCompletionClient::HttpCompletionClient(const ModelConfig& config) : config_(config) {}

std::vector<std::string> HttpCompletionClient::complete(const CompletionRequest& request) {
    SplitUrl url = split_url(config_.endpoint_url);
    httplib::Client cli(url.base);
    cli.set_connection_timeout(config_.request_timeout_seconds, 0);
    cli.set_read_timeout(config_.request_timeout_seconds, 0);

    json body = {
        {"model", request.model_id},
        {"prompt", request.prompt},
        {"temperature", request.temperature},
        {"max_tokens", request.max_new_tokens},
        {"n", request.n},
    };
    auto res = cli.Post(url.path, body.dump(), "application/json");
    if (!res)
        throw EndpointUnavailable("no response from " + config_.endpoint_url + ": " +
                                  httplib::to_string(res.error()));
    if (res->status != 200)
        throw EndpointUnavailable("endpoint returned HTTP " + std::to_string(res->status));

    json parsed;
    try {
        parsed = json::parse(res->body);
    } catch (const json::exception& e) {
        throw MalformedResponse(std::string("unparseable completion body: ") + e.what());
    }
    std::vector<std::string> texts;
    if (parsed.contains("choices") && parsed["choices"].is_array()) {
        for (const auto& choice : parsed["choices"]) {
            if (!choice.contains("text") || !choice["text"].is_string())
                throw MalformedResponse("choice without string 'text' field");
            texts.push_back(choice["text"].get<std::string>());
        }
    } else if (parsed.contains("texts") && parsed["texts"].is_array()) {
        for (const auto& t : parsed["texts"]) {
            if (!t.is_string()) throw MalformedResponse("non-string entry in 'texts'");
            texts.push_back(t.get<std::string>());
        }
    } else {
        throw MalformedResponse("completion body has neither 'choices' nor 'texts'");
    }
    if (static_cast<int>(texts.size()) != request.n)
        throw MalformedResponse("requested n=" + std::to_string(request.n) + " but got " +
                                std::to_string(texts.size()) + " completions");
    return texts;
}

// ---------------------------------------------------------------------------
// Deterministic stub

namespace {

double difficulty_of(const std::string& parent_id) {
    return static_cast<double>(fnv1a64(parent_id) % 1000u) / 1000.0;
}

std::string decoy(const std::string& parent_id, int i) {
    std::uint64_t h = fnv1a64(parent_id + "#" + std::to_string(i));
    return "entity " + std::to_string(h % 100000u);
}

int template_index_of(const QuestionRecord& r) {
    if (r.is_original) return -1;
    std::size_t hash_pos = r.id.rfind('#');
    if (hash_pos == std::string::npos) return -1;
    return std::atoi(r.id.c_str() + hash_pos + 1);
}

}  // namespace

StubCompletionClient::StubCompletionClient(const std::vector<QuestionRecord>& expanded) {
    for (const auto& r : expanded) by_id_[r.id] = r;
}

std::vector<std::string> StubCompletionClient::complete(const CompletionRequest& request) {
    ++request_count_;
    auto it = by_id_.find(request.question_id);
    if (it == by_id_.end())
        throw MalformedResponse("stub has no question with id '" + request.question_id + "'");
    const QuestionRecord& r = it->second;
    const std::string& parent = r.parent_id;
    const double delta = difficulty_of(parent);
    const std::string gold = to_lower(trim(r.gold_answers.front()));

    std::vector<std::string> out;
    if (request.temperature == 0.0) {
        // Greedy: one answer per question, stable across paraphrases in
        // the easy and consistently-wrong bands.
        std::string answer;
        int tidx = template_index_of(r);
        if (delta < 0.35) {
            answer = gold;
        } else if (delta < 0.55) {
            answer = decoy(parent, 0);  // confidently wrong
        } else if (delta < 0.75) {
            if (tidx < 0 || tidx % 2 == 0) answer = gold;
            else answer = decoy(parent, tidx);
        } else {
            answer = decoy(parent, tidx < 0 ? 99 : tidx);
        }
        out.assign(static_cast<std::size_t>(request.n), answer);
    } else {
        // Sampled: the share of consistent answers shrinks with difficulty.
        const std::string base = delta < 0.55 ? (delta < 0.35 ? gold : decoy(parent, 0))
                                              : (delta < 0.75 ? gold : decoy(parent, 99));
        for (int i = 0; i < request.n; ++i) {
            double pos = delta + 0.04 * static_cast<double>(i % 10);
            if (pos < 0.55) out.push_back(base);
            else out.push_back(decoy(parent, 100 + (i % 10)));
        }
    }
    return out;
}

std::unique_ptr<CompletionClient> make_completion_client(
    const ModelConfig& config, const std::vector<QuestionRecord>& expanded) {
    if (config.api_style == "stub") return std::make_unique<StubCompletionClient>(expanded);
    return std::make_unique<HttpCompletionClient>(config);
}

// ---------------------------------------------------------------------------
// Answer store

namespace {

json answer_to_json(const AnswerRecord& r) {
    return json{{"question_id", r.question_id}, {"model_id", r.model_id},
                {"mode", to_string(r.mode)},    {"sample_index", r.sample_index},
                {"temperature", r.temperature}, {"raw_text", r.raw_text},
                {"truncated_text", r.truncated_text}};
}

AnswerRecord answer_from_json(const json& j, std::size_t line_no) {
    try {
        AnswerRecord r;
        r.question_id = j.at("question_id").get<std::string>();
        r.model_id = j.at("model_id").get<std::string>();
        r.mode = answer_mode_from_string(j.at("mode").get<std::string>());
        r.sample_index = j.at("sample_index").get<int>();
        r.temperature = j.at("temperature").get<double>();
        r.raw_text = j.at("raw_text").get<std::string>();
        r.truncated_text = j.at("truncated_text").get<std::string>();
        return r;
    } catch (const json::exception& e) {
        throw UnreadableFile("bad answer record on line " + std::to_string(line_no) +
                             ": " + e.what());
    }
}

}  // namespace

AnswerStore::AnswerStore(std::filesystem::path path) : path_(std::move(path)) {
    if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
    if (!std::filesystem::exists(path_)) return;
    for (auto& r : read_file(path_)) {
        index_.emplace(key_of(r.model_id, r.question_id, r.mode, r.sample_index),
                       records_.size());
        records_.push_back(std::move(r));
    }
}

std::vector<AnswerRecord> AnswerStore::read_file(const std::filesystem::path& path) {
    std::vector<AnswerRecord> out;
    std::istringstream in(qappp::read_file(path));
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw UnreadableFile("malformed JSON on line " + std::to_string(line_no) +
                                 ": " + e.what());
        }
        out.push_back(answer_from_json(j, line_no));
    }
    return out;
}

AnswerStore::Key AnswerStore::key_of(const std::string& model_id,
                                     const std::string& question_id, AnswerMode mode,
                                     int sample_index) {
    return {model_id, question_id, static_cast<int>(mode), sample_index};
}

bool AnswerStore::contains(const std::string& model_id, const std::string& question_id,
                           AnswerMode mode, int sample_index) const {
    std::lock_guard lock(mutex_);
    return index_.count(key_of(model_id, question_id, mode, sample_index)) != 0;
}

void AnswerStore::append(const AnswerRecord& record) {
    std::lock_guard lock(mutex_);
    Key key = key_of(record.model_id, record.question_id, record.mode, record.sample_index);
    if (index_.count(key)) return;  // resume may race a pre-existing record
    std::ofstream out(path_, std::ios::app | std::ios::binary);
    if (!out) throw UnreadableFile("cannot append to answer store: " + path_.string());
    out << answer_to_json(record).dump() << '\n';
    out.flush();
    if (!out) throw UnreadableFile("write to answer store failed: " + path_.string());
    index_.emplace(key, records_.size());
    records_.push_back(record);
}

std::vector<AnswerRecord> AnswerStore::records() const {
    std::lock_guard lock(mutex_);
    return records_;
}

std::size_t AnswerStore::size() const {
    std::lock_guard lock(mutex_);
    return records_.size();
}

// ---------------------------------------------------------------------------
// Collection

namespace {

struct Task {
    const QuestionRecord* question;
    std::vector<int> pending_indices;
};

std::vector<AnswerRecord> run_task(const Task& task, const ModelConfig& config,
                                   CompletionClient& client, AnswerMode mode,
                                   double temperature) {
    CompletionRequest request;
    request.model_id = config.model_id;
    request.prompt = render_prompt(task.question->question, config);
    request.temperature = mode == AnswerMode::Greedy ? 0.0 : temperature;
    request.max_new_tokens = config.max_new_tokens;
    request.n = static_cast<int>(task.pending_indices.size());
    request.question_id = task.question->id;

    std::vector<std::string> texts;
    int attempt = 0;
    for (;;) {
        try {
            texts = client.complete(request);
            break;
        } catch (const EndpointUnavailable&) {
            if (attempt >= config.retry_limit) throw;
            auto backoff = std::chrono::milliseconds(
                static_cast<long>(config.retry_backoff_ms) * (1L << attempt));
            std::this_thread::sleep_for(backoff);
            ++attempt;
        }
    }

    std::vector<AnswerRecord> out;
    out.reserve(texts.size());
    for (std::size_t i = 0; i < texts.size(); ++i) {
        AnswerRecord r;
        r.question_id = task.question->id;
        r.model_id = config.model_id;
        r.mode = mode;
        r.sample_index = task.pending_indices[i];
        r.temperature = request.temperature;
        r.raw_text = texts[i];
        r.truncated_text = truncate_first_sentence(texts[i]);
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace

std::vector<AnswerRecord> collect_answers(const std::vector<QuestionRecord>& questions,
                                          const ModelConfig& config,
                                          CompletionClient& client, AnswerStore& store,
                                          AnswerMode mode, int k, double temperature) {
    if (mode == AnswerMode::Greedy) {
        if (k != 1 || temperature != 0.0)
            throw Error("greedy mode requires k=1 and temperature=0");
    } else if (k < 1) {
        throw Error("sample mode requires k >= 1");
    }
    if (config.max_parallel < 1) throw Error("max_parallel must be >= 1");

    std::vector<Task> tasks;
    for (const auto& q : questions) {
        Task task{&q, {}};
        for (int s = 0; s < k; ++s)
            if (!store.contains(config.model_id, q.id, mode, s))
                task.pending_indices.push_back(s);
        if (!task.pending_indices.empty()) tasks.push_back(std::move(task));
    }

    std::vector<std::optional<std::vector<AnswerRecord>>> results(tasks.size());
    std::vector<char> failed(tasks.size(), 0);
    std::exception_ptr first_error;
    std::mutex state_mutex;
    std::condition_variable ready_cv;
    std::atomic<std::size_t> next_task{0};
    std::atomic<bool> abort{false};

    std::size_t n_workers =
        std::min<std::size_t>(static_cast<std::size_t>(config.max_parallel), tasks.size());
    std::atomic<std::size_t> active_workers{n_workers};

    auto worker = [&] {
        for (;;) {
            if (abort.load()) break;
            std::size_t i = next_task.fetch_add(1);
            if (i >= tasks.size()) break;
            try {
                auto records = run_task(tasks[i], config, client, mode, temperature);
                std::lock_guard lock(state_mutex);
                results[i] = std::move(records);
            } catch (...) {
                abort.store(true);
                std::lock_guard lock(state_mutex);
                failed[i] = 1;
                if (!first_error) first_error = std::current_exception();
            }
            ready_cv.notify_all();
        }
        active_workers.fetch_sub(1);
        ready_cv.notify_all();
    };

    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);

    // Commit results in task order so a fresh run writes deterministic bytes.
    std::size_t frontier = 0;
    {
        std::unique_lock lock(state_mutex);
        while (frontier < tasks.size()) {
            ready_cv.wait(lock, [&] {
                return results[frontier].has_value() || failed[frontier] ||
                       (abort.load() && active_workers.load() == 0);
            });
            if (results[frontier].has_value()) {
                auto records = std::move(*results[frontier]);
                lock.unlock();
                for (const auto& r : records) store.append(r);
                lock.lock();
                ++frontier;
                continue;
            }
            break;  // frontier task failed or was never started
        }
    }
    for (auto& t : pool) t.join();

    if (first_error) {
        // Persist whatever completed beyond the failed task before raising.
        for (std::size_t i = frontier; i < tasks.size(); ++i) {
            if (!results[i].has_value()) continue;
            for (const auto& r : *results[i]) store.append(r);
        }
        std::rethrow_exception(first_error);
    }

    // Return the full record set for the request, resumed entries included.
    std::vector<AnswerRecord> out;
    auto all = store.records();
    std::map<std::tuple<std::string, int, int>, const AnswerRecord*> lookup;
    for (const auto& r : all)
        lookup[{r.question_id, static_cast<int>(r.mode), r.sample_index}] = &r;
    for (const auto& q : questions) {
        for (int s = 0; s < k; ++s) {
            auto it = lookup.find({q.id, static_cast<int>(mode), s});
            if (it == lookup.end())
                throw MalformedResponse("answer store missing record for question '" +
                                        q.id + "' sample " + std::to_string(s));
            out.push_back(*it->second);
        }
    }
    return out;
}

}  // namespace qappp
