#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

namespace valuescape::textprep {

struct TokenDoc {
    std::string contribution_id;
    std::vector<std::string> tokens;  // lowercase, whitespace-free
};

struct Vocabulary {
    std::vector<std::string> terms;        // first-appearance order
    std::vector<std::int64_t> frequencies; // corpus counts, >= 1

    std::size_t size() const { return terms.size(); }
    // -1 when absent
    std::int64_t index_of(std::string_view term) const;

private:
    friend struct DocTermMatrix;
    mutable std::unordered_map<std::string, std::size_t> index_;
    void rebuild_index() const;
};

struct DocRow {
    std::string contribution_id;
    // (term index, count), term indices strictly increasing
    std::vector<std::pair<std::uint32_t, std::uint32_t>> entries;

    std::int64_t token_count() const;
};

struct DocTermMatrix {
    Vocabulary vocabulary;
    std::vector<DocRow> rows;              // corpus order, empty docs removed
    std::vector<std::string> dropped_docs; // ids emptied by pruning/stopwords

    std::int64_t total_count() const;
    nlohmann::ordered_json to_json() const;
    static DocTermMatrix from_json(const nlohmann::json& j);
};

struct PhraseTable {
    struct Bigram {
        std::string first;
        std::string second;
        double pmi = 0.0;
        std::int64_t count = 0;
    };
    std::vector<Bigram> bigrams;  // sorted by (first, second)
    std::int64_t min_count = 10;
    double pmi_threshold = 3.0;

    bool contains(std::string_view a, std::string_view b) const;
};

// Lowercases, strips URLs, replaces punctuation with spaces, drops
// standalone numbers and normalizes whitespace. UTF-8 aware for the
// Latin-1 / Latin Extended-A range (German umlauts and friends).
std::string clean(std::string_view text);

std::vector<std::string> tokenize(std::string_view cleaned_text);

TokenDoc make_token_doc(const std::string& contribution_id, std::string_view raw_text);

// Exact-match gazetteer removal; multi-token names must already be merged
// (underscore-joined) by the phrase stage, so run this after apply_phrases.
TokenDoc remove_named_entities(TokenDoc doc, const std::unordered_set<std::string>& gazetteer);

TokenDoc lemmatize(TokenDoc doc, const std::unordered_map<std::string, std::string>& lexicon);

// Adjacent-bigram PMI over the corpus: pmi(a,b) = ln(p(a,b) / (p(a) p(b)))
// with p(a,b) = pair count / total adjacent pairs and p(a) = unigram count
// / total tokens. Natural log.
PhraseTable detect_ngrams(const std::vector<TokenDoc>& corpus, std::int64_t min_count,
                          double pmi_threshold);

// Left-to-right, non-overlapping merge of table bigrams into "a_b" tokens.
TokenDoc apply_phrases(const PhraseTable& table, TokenDoc doc);

// Stopword/number removal, vocabulary construction and infrequent-term
// pruning. The lowest-frequency terms are dropped until at least
// ceil(prune_fraction * |V|) distinct terms are gone; when the cut falls
// inside a tied frequency class the whole class is dropped.
DocTermMatrix build_matrix(const std::vector<TokenDoc>& corpus,
                           const std::unordered_set<std::string>& stopwords,
                           double prune_fraction);

// one entry per line, UTF-8, '#' comments and blank lines ignored
std::unordered_set<std::string> load_line_set(const std::filesystem::path& path);
// gazetteer entries may be multi-word; internal whitespace becomes '_'
std::unordered_set<std::string> load_gazetteer(const std::filesystem::path& path);
// "inflected<whitespace>lemma" per line
std::unordered_map<std::string, std::string> load_lexicon(const std::filesystem::path& path);

}  // namespace valuescape::textprep
