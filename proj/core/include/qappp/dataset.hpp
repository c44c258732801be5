#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace qappp {

class EmbeddingProvider;

// One question, original or template paraphrase. Paraphrases share
// category, subject, gold answers, and popularity with their original.
struct QuestionRecord {
    std::string id;
    std::string category;
    std::string subject;
    std::string question;
    std::vector<std::string> gold_answers;
    std::int64_t s_pop = 0;  // mean monthly Wikipedia views of the subject
    bool is_original = true;
    std::string parent_id;  // self for originals
};

// category -> ordered paraphrase templates, each with exactly one
// `<subject>` placeholder.
using TemplateSet = std::map<std::string, std::vector<std::string>>;

inline constexpr const char* kSubjectPlaceholder = "<subject>";

struct CategoryCounts {
    std::string category;
    std::size_t n_originals = 0;
    std::size_t n_alternatives = 0;  // paraphrases per original
    std::size_t n_total = 0;
    // false when paraphrase counts are not uniform across the category's
    // originals, i.e. n_total != (1 + n_alternatives) * n_originals.
    bool formula_consistent = true;
};

struct CountReport {
    std::vector<CategoryCounts> rows;  // sorted by category
    std::size_t grand_total = 0;
    std::vector<std::string> flagged_categories;
};

// A published summary row to validate against the count formula.
struct ClaimedCounts {
    std::string category;
    std::size_t n_originals = 0;
    std::size_t n_alternatives = 0;
    std::size_t n_total = 0;
};

struct ParaphraseQuality {
    std::map<std::string, double> per_category;
    double overall = 0.0;  // unweighted mean over categories
};

// Line-delimited JSON, one QuestionRecord per line. Records load as
// originals (is_original=true, parent_id=id) in source order.
std::vector<QuestionRecord> load_dataset(const std::filesystem::path& path);

// JSON object mapping category -> array of template strings.
TemplateSet load_templates(const std::filesystem::path& path);

std::string question_record_to_json(const QuestionRecord& record);
void write_dataset(const std::filesystem::path& path,
                   const std::vector<QuestionRecord>& records);
// Reads records as serialized (paraphrase links preserved).
std::vector<QuestionRecord> read_dataset(const std::filesystem::path& path);

// Each original followed by one paraphrase per template. Paraphrase ids
// are "<parent_id>#<template_index>"; subject substitution is verbatim.
std::vector<QuestionRecord> expand_templates(const std::vector<QuestionRecord>& originals,
                                             const TemplateSet& templates);

CountReport count_report(const std::vector<QuestionRecord>& dataset);

// Categories whose published row violates
// n_total == (1 + n_alternatives) * n_originals.
std::vector<std::string> validate_claimed_counts(const std::vector<ClaimedCounts>& claims);

// Mean cosine between each paraphrase and its original, averaged within
// question, then within category, then across categories.
ParaphraseQuality paraphrase_quality(const std::vector<QuestionRecord>& dataset,
                                     EmbeddingProvider& provider);

}  // namespace qappp
