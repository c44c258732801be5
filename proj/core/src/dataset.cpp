#include "qappp/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "qappp/error.hpp"
#include "qappp/semantics.hpp"
#include "qappp/util.hpp"

namespace qappp {

namespace {

using nlohmann::json;

QuestionRecord record_from_json(const json& j, std::size_t line_no) {
    auto where = [line_no] { return " (line " + std::to_string(line_no) + ")"; };
    QuestionRecord r;
    for (const char* field : {"id", "category", "subject", "question"}) {
        if (!j.contains(field) || !j[field].is_string())
            throw MissingField(std::string("missing or non-string field '") + field + "'" + where());
    }
    r.id = j["id"].get<std::string>();
    r.category = j["category"].get<std::string>();
    r.subject = j["subject"].get<std::string>();
    r.question = j["question"].get<std::string>();
    if (r.question.empty()) throw MissingField("empty question" + where());

    if (!j.contains("gold_answers") || !j["gold_answers"].is_array() ||
        j["gold_answers"].empty())
        throw EmptyGoldAnswers("missing or empty gold_answers" + where());
    for (const auto& a : j["gold_answers"]) {
        if (!a.is_string())
            throw EmptyGoldAnswers("non-string gold answer" + where());
        r.gold_answers.push_back(a.get<std::string>());
    }

    if (!j.contains("s_pop") || !j["s_pop"].is_number())
        throw MissingField("missing or non-numeric field 's_pop'" + where());
    r.s_pop = j["s_pop"].get<std::int64_t>();
    if (r.s_pop < 0) throw MissingField("negative s_pop" + where());

    r.is_original = j.value("is_original", true);
    r.parent_id = j.value("parent_id", r.id);
    return r;
}

json record_to_json(const QuestionRecord& r) {
    json j = json::object();
    j["id"] = r.id;
    j["category"] = r.category;
    j["subject"] = r.subject;
    j["question"] = r.question;
    j["gold_answers"] = r.gold_answers;
    j["s_pop"] = r.s_pop;
    j["is_original"] = r.is_original;
    j["parent_id"] = r.parent_id;
    return j;
}

std::vector<QuestionRecord> parse_jsonl(const std::string& text, bool force_original) {
    std::vector<QuestionRecord> records;
    std::istringstream in(text);
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
        QuestionRecord r = record_from_json(j, line_no);
        if (force_original) {
            r.is_original = true;
            r.parent_id = r.id;
        }
        records.push_back(std::move(r));
    }
    return records;
}

}  // namespace

std::vector<QuestionRecord> load_dataset(const std::filesystem::path& path) {
    return parse_jsonl(read_file(path), /*force_original=*/true);
}

std::vector<QuestionRecord> read_dataset(const std::filesystem::path& path) {
    return parse_jsonl(read_file(path), /*force_original=*/false);
}

std::string question_record_to_json(const QuestionRecord& record) {
    return record_to_json(record).dump();
}

void write_dataset(const std::filesystem::path& path,
                   const std::vector<QuestionRecord>& records) {
    std::string out;
    for (const auto& r : records) {
        out += question_record_to_json(r);
        out += '\n';
    }
    atomic_write_file(path, out);
}

TemplateSet load_templates(const std::filesystem::path& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw UnreadableFile("malformed templates JSON: " + std::string(e.what()));
    }
    if (!j.is_object()) throw UnreadableFile("templates file must be a JSON object");
    TemplateSet out;
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!it.value().is_array())
            throw MalformedTemplate("templates for '" + it.key() + "' must be an array");
        std::vector<std::string> templates;
        for (const auto& t : it.value()) {
            if (!t.is_string())
                throw MalformedTemplate("non-string template under '" + it.key() + "'");
            templates.push_back(t.get<std::string>());
        }
        out.emplace(it.key(), std::move(templates));
    }
    return out;
}

std::vector<QuestionRecord> expand_templates(const std::vector<QuestionRecord>& originals,
                                             const TemplateSet& templates) {
    // Validate templates up front so a malformed one fails before any output.
    for (const auto& [category, tlist] : templates) {
        for (const auto& t : tlist) {
            if (count_occurrences(t, kSubjectPlaceholder) != 1)
                throw MalformedTemplate("template must contain '" +
                                        std::string(kSubjectPlaceholder) +
                                        "' exactly once: \"" + t + "\"");
        }
    }

    std::vector<QuestionRecord> out;
    for (const auto& q : originals) {
        auto it = templates.find(q.category);
        if (it == templates.end())
            throw UnknownCategory("no templates for category '" + q.category + "'");
        out.push_back(q);
        std::size_t index = 0;
        for (const auto& t : it->second) {
            QuestionRecord p = q;
            p.id = q.id + "#" + std::to_string(index);
            p.question = replace_all(t, kSubjectPlaceholder, q.subject);
            p.is_original = false;
            p.parent_id = q.id;
            out.push_back(std::move(p));
            ++index;
        }
    }
    return out;
}

CountReport count_report(const std::vector<QuestionRecord>& dataset) {
    struct Tally {
        std::size_t originals = 0;
        std::size_t total = 0;
        std::map<std::string, std::size_t> paraphrases_per_original;
    };
    std::map<std::string, Tally> tallies;
    std::map<std::string, std::size_t> original_ids;  // id -> count (per category irrelevant)

    for (const auto& q : dataset)
        if (q.is_original) original_ids[q.id] += 1;

    for (const auto& q : dataset) {
        Tally& t = tallies[q.category];
        t.total += 1;
        if (q.is_original) {
            t.originals += 1;
            t.paraphrases_per_original.emplace(q.id, 0);
        } else {
            if (!original_ids.count(q.parent_id))
                throw OrphanParaphrase("paraphrase '" + q.id +
                                       "' has no original with id '" + q.parent_id + "'");
            t.paraphrases_per_original[q.parent_id] += 1;
        }
    }

    CountReport report;
    for (const auto& [category, t] : tallies) {
        CategoryCounts row;
        row.category = category;
        row.n_originals = t.originals;
        row.n_total = t.total;
        bool uniform = true;
        std::size_t per_original = 0;
        bool first = true;
        for (const auto& [id, count] : t.paraphrases_per_original) {
            if (first) {
                per_original = count;
                first = false;
            } else if (count != per_original) {
                uniform = false;
            }
        }
        row.n_alternatives =
            t.originals > 0 ? (t.total - t.originals) / t.originals : 0;
        row.formula_consistent =
            uniform && t.total == (1 + row.n_alternatives) * row.n_originals;
        if (!row.formula_consistent) report.flagged_categories.push_back(category);
        report.grand_total += t.total;
        report.rows.push_back(std::move(row));
    }
    return report;
}

std::vector<std::string> validate_claimed_counts(const std::vector<ClaimedCounts>& claims) {
    std::vector<std::string> flagged;
    for (const auto& c : claims) {
        if ((1 + c.n_alternatives) * c.n_originals != c.n_total)
            flagged.push_back(c.category);
    }
    return flagged;
}

ParaphraseQuality paraphrase_quality(const std::vector<QuestionRecord>& dataset,
                                     EmbeddingProvider& provider) {
    struct Group {
        const QuestionRecord* original = nullptr;
        std::vector<const QuestionRecord*> paraphrases;
    };
    std::map<std::string, Group> groups;  // parent_id -> group
    std::vector<std::string> group_order;
    for (const auto& q : dataset) {
        Group& g = groups[q.parent_id];
        if (q.is_original) {
            if (!g.original) group_order.push_back(q.parent_id);
            g.original = &q;
        } else {
            if (g.paraphrases.empty() && !g.original) group_order.push_back(q.parent_id);
            g.paraphrases.push_back(&q);
        }
    }

    // One embedding pass over every question text, in dataset order.
    std::vector<std::string> texts;
    texts.reserve(dataset.size());
    for (const auto& q : dataset) texts.push_back(q.question);
    std::vector<EmbeddingVector> vectors = embed(texts, provider);
    std::map<const QuestionRecord*, const EmbeddingVector*> vec_of;
    for (std::size_t i = 0; i < dataset.size(); ++i)
        vec_of[&dataset[i]] = &vectors[i];

    std::map<std::string, std::vector<double>> category_scores;
    for (const auto& parent_id : group_order) {
        const Group& g = groups.at(parent_id);
        if (!g.original)
            throw OrphanParaphrase("paraphrases reference missing original '" + parent_id + "'");
        if (g.paraphrases.empty())
            throw NoParaphrases("question '" + parent_id + "' has no paraphrases");
        double sum = 0.0;
        for (const QuestionRecord* p : g.paraphrases)
            sum += cosine_similarity(*vec_of.at(g.original), *vec_of.at(p));
        category_scores[g.original->category].push_back(sum /
                                                        static_cast<double>(g.paraphrases.size()));
    }

    ParaphraseQuality out;
    double category_sum = 0.0;
    for (const auto& [category, scores] : category_scores) {
        double mean = 0.0;
        for (double s : scores) mean += s;
        mean /= static_cast<double>(scores.size());
        out.per_category[category] = mean;
        category_sum += mean;
    }
    out.overall = category_scores.empty()
                      ? 0.0
                      : category_sum / static_cast<double>(category_scores.size());
    return out;
}

}  // namespace qappp
