#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "valuescape/ingest.hpp"

namespace valuescape::sentiment {

enum class Label { negative, neutral, positive };

// negative below -0.05, positive above +0.05, neutral between
constexpr double kNeutralBand = 0.05;

Label label_for(double score);
std::string label_name(Label label);

struct SentimentScore {
    std::string contribution_id;
    double score = 0.0;  // in [-1, 1]
    Label label = Label::neutral;
};

enum class BackendKind { passthrough, http };

struct TranslationBackend {
    BackendKind kind = BackendKind::passthrough;
    std::string endpoint;  // http://host:port/path, http backend only
    std::string target_language = "en";
    int timeout_ms = 5000;
    std::size_t batch_size = 32;
};

struct TranslationResult {
    std::vector<std::string> texts;      // same length as input
    std::size_t warning_count = 0;       // failed items (originals retained)
    std::vector<std::string> warnings;   // one message per failed batch/item
};

// Passthrough is the identity. The http backend POSTs
// {"texts": [...], "target": "<lang>"} per batch and expects
// {"translations": [...]}; failures keep the original text and bump the
// warning count, the pipeline continues.
TranslationResult translate(const std::vector<std::string>& texts,
                            const TranslationBackend& backend);

using Lexicon = std::unordered_map<std::string, double>;

// "word<whitespace>value" per line, values in [-1, 1]
Lexicon load_sentiment_lexicon(const std::filesystem::path& path);

const std::unordered_set<std::string>& default_negators();

// Mean lexicon value over matched tokens, zero when nothing matches. A
// matched token directly preceded by a negator contributes with flipped
// sign.
SentimentScore score(std::string_view text, const Lexicon& lexicon,
                     const std::unordered_set<std::string>& negators = default_negators(),
                     std::string contribution_id = {});

std::vector<SentimentScore> score_corpus(const ingest::ContributionSet& set,
                                         const Lexicon& lexicon,
                                         const TranslationBackend& backend,
                                         std::size_t* warning_count = nullptr);

}  // namespace valuescape::sentiment
