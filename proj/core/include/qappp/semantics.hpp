#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "qappp/answering.hpp"
#include "qappp/dataset.hpp"

namespace qappp {

// Unit-norm embedding (norm within 1e-6 of 1; dimension fixed per provider).
using EmbeddingVector = std::vector<double>;

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual std::string id() const = 0;
    virtual std::size_t dimension() const = 0;
    // One vector per text; deterministic (same text -> same vector).
    virtual std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) = 0;
};

// Offline deterministic embedder: character trigrams of "^" + text + "$"
// hashed into 256 buckets, L2-normalized. No model dependency; all
// coordinates are nonnegative, so pairwise cosines land in [0, 1].
class HashingEmbedder final : public EmbeddingProvider {
public:
    static constexpr std::size_t kDimension = 256;
    std::string id() const override { return "ngram-hash-v1-d256"; }
    std::size_t dimension() const override { return kDimension; }
    std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) override;

    static EmbeddingVector embed_one(const std::string& text);
};

// HTTP embedding endpoint: POST {"model": ..., "input": [...]} returning
// either {"embeddings": [[...], ...]} or OpenAI-style
// {"data": [{"embedding": [...]}, ...]}. Vectors are L2-normalized on
// receipt; ragged output raises DimensionMismatch.
class HttpEmbeddingProvider final : public EmbeddingProvider {
public:
    HttpEmbeddingProvider(std::string endpoint_url, std::string model,
                          int timeout_seconds = 60);
    std::string id() const override;
    std::size_t dimension() const override { return dimension_; }
    std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) override;

private:
    std::string endpoint_url_;
    std::string model_;
    int timeout_seconds_;
    std::size_t dimension_ = 0;  // learned from the first response
};

// Caches embeddings keyed by (provider_id, text). Optionally file-backed:
// JSONL whose header line records provider_id and dimension.
class CachedEmbeddingProvider final : public EmbeddingProvider {
public:
    explicit CachedEmbeddingProvider(std::shared_ptr<EmbeddingProvider> inner,
                                     std::filesystem::path cache_path = {});
    std::string id() const override { return inner_->id(); }
    std::size_t dimension() const override { return inner_->dimension(); }
    std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) override;

    std::size_t cache_size() const;

private:
    void load_cache();
    void append_to_cache(const std::string& text, const EmbeddingVector& v);

    std::shared_ptr<EmbeddingProvider> inner_;
    std::filesystem::path cache_path_;
    mutable std::mutex mutex_;
    std::map<std::string, EmbeddingVector> cache_;
};

struct ConsistencyFeatures {
    std::string question_id;
    double scons = 0.0;  // over greedy answers of the question and its paraphrases
    double cert = 0.0;   // over temperature-sampled answers of the question
};

// An original question together with its paraphrases; the unit SCons is
// computed over.
struct QuestionGroup {
    QuestionRecord original;
    std::vector<QuestionRecord> paraphrases;
};

// Groups an expanded dataset by parent_id, preserving original order.
std::vector<QuestionGroup> group_questions(const std::vector<QuestionRecord>& expanded);

std::vector<EmbeddingVector> embed(std::span<const std::string> texts,
                                   EmbeddingProvider& provider);

// Exactly 1.0 for bitwise-identical vectors; otherwise dot/(|a||b|)
// clamped to [-1, 1].
double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b);

// Mean pairwise cosine over all C(n,2) pairs, each pair clamped to [0, 1].
// Requires n >= 2 (TooFewTexts otherwise).
double int_sim(std::span<const std::string> texts, EmbeddingProvider& provider);

// Text normalization applied to answers before embedding: lowercase and
// trim the truncated text.
std::string normalize_answer_for_embedding(const std::string& truncated_text);

// SCons over the truncated greedy answers of {q} + P(q); Cert over the
// truncated sampled answers of q. Raises IncompleteAnswerSet naming the
// missing question ids or sample indices.
ConsistencyFeatures consistency_features(const QuestionGroup& group,
                                         std::span<const AnswerRecord> paraphrase_answers,
                                         std::span<const AnswerRecord> sampled_answers,
                                         EmbeddingProvider& provider);

}  // namespace qappp
