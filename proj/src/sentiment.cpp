#include "valuescape/sentiment.hpp"

#include <fstream>
#include <sstream>

#include <httplib.h>
#include <json.hpp>

#include "valuescape/error.hpp"
#include "valuescape/textprep.hpp"

namespace valuescape::sentiment {

Label label_for(double score) {
    if (score < -kNeutralBand) return Label::negative;
    if (score > kNeutralBand) return Label::positive;
    return Label::neutral;
}

std::string label_name(Label label) {
    switch (label) {
        case Label::negative: return "negative";
        case Label::neutral: return "neutral";
        case Label::positive: return "positive";
    }
    return "neutral";
}

namespace {

struct ParsedEndpoint {
    std::string host_port;  // scheme://host:port
    std::string path;
};

ParsedEndpoint split_endpoint(const std::string& endpoint) {
    const auto scheme_end = endpoint.find("://");
    if (scheme_end == std::string::npos)
        throw Error("translation endpoint must include a scheme: " + endpoint);
    const auto path_start = endpoint.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {endpoint, "/"};
    return {endpoint.substr(0, path_start), endpoint.substr(path_start)};
}

}  // namespace

TranslationResult translate(const std::vector<std::string>& texts,
                            const TranslationBackend& backend) {
    TranslationResult result;
    result.texts = texts;
    if (backend.kind == BackendKind::passthrough) return result;
    if (backend.endpoint.empty())
        throw Error("http translation backend requires an endpoint");

    const ParsedEndpoint ep = split_endpoint(backend.endpoint);
    httplib::Client client(ep.host_port);
    client.set_connection_timeout(0, backend.timeout_ms * 1000);
    client.set_read_timeout(0, backend.timeout_ms * 1000);

    const std::size_t batch = backend.batch_size == 0 ? 32 : backend.batch_size;
    for (std::size_t start = 0; start < texts.size(); start += batch) {
        const std::size_t end = std::min(start + batch, texts.size());
        nlohmann::json body;
        body["texts"] = std::vector<std::string>(texts.begin() + static_cast<std::ptrdiff_t>(start),
                                                 texts.begin() + static_cast<std::ptrdiff_t>(end));
        body["target"] = backend.target_language;
        auto res = client.Post(ep.path, body.dump(), "application/json");
        if (!res || res->status < 200 || res->status >= 300) {
            result.warning_count += end - start;
            result.warnings.push_back(
                "translation batch at offset " + std::to_string(start) + " failed: " +
                (res ? "http status " + std::to_string(res->status) : "no response"));
            continue;  // originals already in place
        }
        try {
            const auto parsed = nlohmann::json::parse(res->body);
            const auto& tr = parsed.at("translations");
            if (!tr.is_array() || tr.size() != end - start)
                throw Error("translation response size mismatch");
            for (std::size_t i = start; i < end; ++i) {
                const auto& item = tr[i - start];
                if (item.is_string()) {
                    result.texts[i] = item.get<std::string>();
                } else {
                    ++result.warning_count;
                    result.warnings.push_back("item " + std::to_string(i) + " not translated");
                }
            }
        } catch (const std::exception& e) {
            result.warning_count += end - start;
            result.warnings.push_back("translation batch at offset " + std::to_string(start) +
                                      " returned malformed payload: " + e.what());
        }
    }
    return result;
}

Lexicon load_sentiment_lexicon(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open sentiment lexicon: " + path.string());
    Lexicon lex;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        bool blank = true;
        for (char c : line) {
            if (!std::isspace(static_cast<unsigned char>(c))) {
                blank = c == '#';
                break;
            }
        }
        if (blank) continue;
        std::istringstream is(line);
        std::string word;
        double value = 0.0;
        if (!(is >> word >> value))
            throw Error("sentiment lexicon " + path.string() + ": malformed line " +
                        std::to_string(n));
        if (value < -1.0 || value > 1.0)
            throw Error("sentiment lexicon " + path.string() + ": value out of [-1, 1] on line " +
                        std::to_string(n));
        lex[word] = value;
    }
    return lex;
}

const std::unordered_set<std::string>& default_negators() {
    static const std::unordered_set<std::string> negators = {
        "not", "no", "never", "nicht", "kein", "keine", "nie", "ohne",
    };
    return negators;
}

SentimentScore score(std::string_view text, const Lexicon& lexicon,
                     const std::unordered_set<std::string>& negators,
                     std::string contribution_id) {
    SentimentScore s;
    s.contribution_id = std::move(contribution_id);
    const auto tokens = textprep::tokenize(textprep::clean(text));
    double sum = 0.0;
    std::size_t matched = 0;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        const auto it = lexicon.find(tokens[i]);
        if (it == lexicon.end()) continue;
        double v = it->second;
        if (i > 0 && negators.count(tokens[i - 1]) > 0) v = -v;
        sum += v;
        ++matched;
    }
    s.score = matched == 0 ? 0.0 : sum / static_cast<double>(matched);
    s.label = label_for(s.score);
    return s;
}

std::vector<SentimentScore> score_corpus(const ingest::ContributionSet& set,
                                         const Lexicon& lexicon,
                                         const TranslationBackend& backend,
                                         std::size_t* warning_count) {
    std::vector<std::string> texts;
    texts.reserve(set.contributions.size());
    for (const auto& c : set.contributions) texts.push_back(c.text);
    const TranslationResult translated = translate(texts, backend);
    if (warning_count) *warning_count = translated.warning_count;

    std::vector<SentimentScore> scores;
    scores.reserve(set.contributions.size());
    for (std::size_t i = 0; i < set.contributions.size(); ++i) {
        scores.push_back(score(translated.texts[i], lexicon, default_negators(),
                               set.contributions[i].id));
    }
    return scores;
}

}  // namespace valuescape::sentiment
