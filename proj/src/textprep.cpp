#include "valuescape/textprep.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "valuescape/error.hpp"

namespace valuescape::textprep {

namespace {

// --- minimal UTF-8 handling -------------------------------------------------

// Decodes one code point starting at s[i]; advances i. Invalid bytes are
// returned as-is (latin-1 fallback) so garbage input cannot throw.
char32_t decode_utf8(std::string_view s, std::size_t& i) {
    const unsigned char b0 = static_cast<unsigned char>(s[i]);
    if (b0 < 0x80) {
        ++i;
        return b0;
    }
    auto cont = [&](std::size_t k) {
        return i + k < s.size() && (static_cast<unsigned char>(s[i + k]) & 0xC0) == 0x80;
    };
    if ((b0 & 0xE0) == 0xC0 && cont(1)) {
        const char32_t cp = ((b0 & 0x1F) << 6) | (static_cast<unsigned char>(s[i + 1]) & 0x3F);
        i += 2;
        return cp;
    }
    if ((b0 & 0xF0) == 0xE0 && cont(1) && cont(2)) {
        const char32_t cp = ((b0 & 0x0F) << 12) |
                            ((static_cast<unsigned char>(s[i + 1]) & 0x3F) << 6) |
                            (static_cast<unsigned char>(s[i + 2]) & 0x3F);
        i += 3;
        return cp;
    }
    if ((b0 & 0xF8) == 0xF0 && cont(1) && cont(2) && cont(3)) {
        const char32_t cp = ((b0 & 0x07) << 18) |
                            ((static_cast<unsigned char>(s[i + 1]) & 0x3F) << 12) |
                            ((static_cast<unsigned char>(s[i + 2]) & 0x3F) << 6) |
                            (static_cast<unsigned char>(s[i + 3]) & 0x3F);
        i += 4;
        return cp;
    }
    ++i;
    return b0;
}

void encode_utf8(char32_t cp, std::string& out) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

// ASCII, Latin-1 supplement and Latin Extended-A cover German, English and
// the other languages DIPAS-style platforms emit.
char32_t to_lower_cp(char32_t cp) {
    if (cp >= U'A' && cp <= U'Z') return cp + 32;
    if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 32;  // À..Þ except ×
    if (cp >= 0x100 && cp <= 0x17F) {
        if (cp == 0x130) return 0x69;          // İ -> i
        if (cp == 0x178) return 0xFF;          // Ÿ -> ÿ
        if ((cp & 1) == 0 && cp <= 0x136) return cp + 1;
        if (cp >= 0x139 && cp <= 0x148 && (cp & 1) == 1) return cp + 1;
        if (cp >= 0x14A && cp <= 0x177 && (cp & 1) == 0) return cp + 1;
        if (cp >= 0x179 && cp <= 0x17E && (cp & 1) == 1) return cp + 1;
    }
    return cp;
}

bool is_letter_cp(char32_t cp) {
    if ((cp >= U'a' && cp <= U'z') || (cp >= U'A' && cp <= U'Z')) return true;
    if (cp >= 0xC0 && cp <= 0xFF && cp != 0xD7 && cp != 0xF7) return true;
    if (cp >= 0x100 && cp <= 0x17F) return true;
    return cp > 0x17F && cp != 0x2018 && cp != 0x2019 && cp != 0x201C && cp != 0x201D &&
           cp != 0x201E && cp != 0x2013 && cp != 0x2014 && cp != 0x2026 && cp != 0x00AB &&
           cp != 0x00BB;  // common unicode punctuation is not a letter
}

bool is_digit_cp(char32_t cp) { return cp >= U'0' && cp <= U'9'; }

bool is_url_word(const std::string& w) {
    return w.rfind("http://", 0) == 0 || w.rfind("https://", 0) == 0 || w.rfind("www.", 0) == 0;
}

bool is_number_token(const std::string& t) {
    if (t.empty()) return false;
    std::size_t i = 0;
    while (i < t.size()) {
        if (!is_digit_cp(decode_utf8(t, i))) return false;
    }
    return true;
}

}  // namespace

std::string clean(std::string_view text) {
    // pass 1: lowercase and split on whitespace so URL words can be dropped
    // before punctuation stripping tears their dots apart
    std::vector<std::string> raw_words;
    std::string cur;
    std::size_t i = 0;
    while (i < text.size()) {
        const char32_t cp = decode_utf8(text, i);
        if (cp == U' ' || cp == U'\t' || cp == U'\n' || cp == U'\r' || cp == 0x0B || cp == 0x0C ||
            cp == 0xA0) {
            if (!cur.empty()) raw_words.push_back(std::move(cur)), cur.clear();
        } else {
            encode_utf8(to_lower_cp(cp), cur);
        }
    }
    if (!cur.empty()) raw_words.push_back(std::move(cur));

    // pass 2: drop URLs, turn punctuation into spaces, drop standalone numbers
    std::string out;
    for (const auto& w : raw_words) {
        if (is_url_word(w)) continue;
        std::string piece;
        std::size_t j = 0;
        std::vector<std::string> parts;
        while (j < w.size()) {
            const char32_t cp = decode_utf8(w, j);
            if (is_letter_cp(cp) || is_digit_cp(cp)) {
                encode_utf8(cp, piece);
            } else {
                if (!piece.empty()) parts.push_back(std::move(piece)), piece.clear();
            }
        }
        if (!piece.empty()) parts.push_back(std::move(piece));
        for (auto& p : parts) {
            if (is_number_token(p)) continue;
            if (!out.empty()) out.push_back(' ');
            out += p;
        }
    }
    return out;
}

std::vector<std::string> tokenize(std::string_view cleaned_text) {
    std::vector<std::string> tokens;
    std::size_t start = 0;
    while (start < cleaned_text.size()) {
        const auto end = cleaned_text.find(' ', start);
        if (end == std::string_view::npos) {
            tokens.emplace_back(cleaned_text.substr(start));
            break;
        }
        if (end > start) tokens.emplace_back(cleaned_text.substr(start, end - start));
        start = end + 1;
    }
    return tokens;
}

TokenDoc make_token_doc(const std::string& contribution_id, std::string_view raw_text) {
    TokenDoc doc;
    doc.contribution_id = contribution_id;
    doc.tokens = tokenize(clean(raw_text));
    return doc;
}

TokenDoc remove_named_entities(TokenDoc doc, const std::unordered_set<std::string>& gazetteer) {
    if (gazetteer.empty()) return doc;
    auto& t = doc.tokens;
    t.erase(std::remove_if(t.begin(), t.end(),
                           [&](const std::string& tok) { return gazetteer.count(tok) > 0; }),
            t.end());
    return doc;
}

TokenDoc lemmatize(TokenDoc doc, const std::unordered_map<std::string, std::string>& lexicon) {
    for (auto& tok : doc.tokens) {
        const auto it = lexicon.find(tok);
        if (it != lexicon.end()) tok = it->second;
    }
    return doc;
}

PhraseTable detect_ngrams(const std::vector<TokenDoc>& corpus, std::int64_t min_count,
                          double pmi_threshold) {
    if (min_count < 2) throw Error("detect_ngrams: min_count must be >= 2");
    std::unordered_map<std::string, std::int64_t> unigram;
    std::map<std::pair<std::string, std::string>, std::int64_t> pair_count;
    std::int64_t total_tokens = 0;
    std::int64_t total_pairs = 0;
    for (const auto& doc : corpus) {
        total_tokens += static_cast<std::int64_t>(doc.tokens.size());
        for (const auto& tok : doc.tokens) ++unigram[tok];
        for (std::size_t i = 0; i + 1 < doc.tokens.size(); ++i) {
            ++pair_count[{doc.tokens[i], doc.tokens[i + 1]}];
            ++total_pairs;
        }
    }

    PhraseTable table;
    table.min_count = min_count;
    table.pmi_threshold = pmi_threshold;
    if (total_pairs == 0 || total_tokens == 0) return table;
    for (const auto& [pair, c] : pair_count) {
        if (c < min_count) continue;
        const double p_ab = static_cast<double>(c) / static_cast<double>(total_pairs);
        const double p_a = static_cast<double>(unigram[pair.first]) / static_cast<double>(total_tokens);
        const double p_b = static_cast<double>(unigram[pair.second]) / static_cast<double>(total_tokens);
        const double pmi = std::log(p_ab / (p_a * p_b));
        if (pmi >= pmi_threshold) {
            table.bigrams.push_back({pair.first, pair.second, pmi, c});
        }
    }
    // std::map iteration already gives (first, second) order
    return table;
}

bool PhraseTable::contains(std::string_view a, std::string_view b) const {
    const auto key = [](const auto& x) {
        return std::pair<std::string_view, std::string_view>(x.first, x.second);
    };
    return std::binary_search(
        bigrams.begin(), bigrams.end(), std::pair(a, b),
        [&](const auto& lhs, const auto& rhs) { return key(lhs) < key(rhs); });
}

TokenDoc apply_phrases(const PhraseTable& table, TokenDoc doc) {
    if (table.bigrams.empty() || doc.tokens.size() < 2) return doc;
    std::vector<std::string> merged;
    merged.reserve(doc.tokens.size());
    std::size_t i = 0;
    while (i < doc.tokens.size()) {
        if (i + 1 < doc.tokens.size() && table.contains(doc.tokens[i], doc.tokens[i + 1])) {
            merged.push_back(doc.tokens[i] + "_" + doc.tokens[i + 1]);
            i += 2;
        } else {
            merged.push_back(std::move(doc.tokens[i]));
            ++i;
        }
    }
    doc.tokens = std::move(merged);
    return doc;
}

std::int64_t Vocabulary::index_of(std::string_view term) const {
    if (index_.empty() && !terms.empty()) rebuild_index();
    const auto it = index_.find(std::string(term));
    return it == index_.end() ? -1 : static_cast<std::int64_t>(it->second);
}

void Vocabulary::rebuild_index() const {
    index_.reserve(terms.size());
    for (std::size_t i = 0; i < terms.size(); ++i) index_[terms[i]] = i;
}

std::int64_t DocRow::token_count() const {
    std::int64_t n = 0;
    for (const auto& [idx, count] : entries) n += count;
    return n;
}

std::int64_t DocTermMatrix::total_count() const {
    std::int64_t n = 0;
    for (const auto& row : rows) n += row.token_count();
    return n;
}

DocTermMatrix build_matrix(const std::vector<TokenDoc>& corpus,
                           const std::unordered_set<std::string>& stopwords,
                           double prune_fraction) {
    if (prune_fraction < 0.0 || prune_fraction >= 1.0)
        throw Error("build_matrix: prune_fraction must be in [0, 1)");

    // surviving tokens per document, stopwords and numbers removed
    std::vector<std::vector<std::string>> kept(corpus.size());
    std::unordered_map<std::string, std::int64_t> freq;
    std::vector<std::string> order;  // first appearance
    for (std::size_t d = 0; d < corpus.size(); ++d) {
        for (const auto& tok : corpus[d].tokens) {
            if (stopwords.count(tok) > 0 || is_number_token(tok)) continue;
            kept[d].push_back(tok);
            auto [it, inserted] = freq.try_emplace(tok, 0);
            if (inserted) order.push_back(tok);
            ++it->second;
        }
    }

    // prune: drop whole lowest-frequency classes until the quota is met
    std::unordered_set<std::string> pruned;
    const std::size_t vocab_size = order.size();
    const auto quota = static_cast<std::size_t>(
        std::ceil(prune_fraction * static_cast<double>(vocab_size)));
    if (quota > 0 && vocab_size > 0) {
        std::map<std::int64_t, std::vector<std::string>> by_freq;
        for (const auto& term : order) by_freq[freq[term]].push_back(term);
        std::size_t dropped = 0;
        for (const auto& [f, terms] : by_freq) {
            if (dropped >= quota) break;
            for (const auto& t : terms) pruned.insert(t);
            dropped += terms.size();
        }
    }

    DocTermMatrix dtm;
    std::unordered_map<std::string, std::uint32_t> index;
    for (const auto& term : order) {
        if (pruned.count(term)) continue;
        index[term] = static_cast<std::uint32_t>(dtm.vocabulary.terms.size());
        dtm.vocabulary.terms.push_back(term);
        dtm.vocabulary.frequencies.push_back(freq[term]);
    }

    for (std::size_t d = 0; d < corpus.size(); ++d) {
        std::map<std::uint32_t, std::uint32_t> counts;
        for (const auto& tok : kept[d]) {
            const auto it = index.find(tok);
            if (it != index.end()) ++counts[it->second];
        }
        if (counts.empty()) {
            dtm.dropped_docs.push_back(corpus[d].contribution_id);
            continue;
        }
        DocRow row;
        row.contribution_id = corpus[d].contribution_id;
        row.entries.assign(counts.begin(), counts.end());
        dtm.rows.push_back(std::move(row));
    }

    if (!corpus.empty() && dtm.rows.empty())
        throw Error("build_matrix: all documents empty after pruning");
    return dtm;
}

nlohmann::ordered_json DocTermMatrix::to_json() const {
    nlohmann::ordered_json j;
    j["vocab"] = vocabulary.terms;
    j["frequencies"] = vocabulary.frequencies;
    auto docs = nlohmann::ordered_json::array();
    for (const auto& row : rows) {
        nlohmann::ordered_json o;
        o["id"] = row.contribution_id;
        auto entries = nlohmann::ordered_json::array();
        for (const auto& [idx, count] : row.entries)
            entries.push_back(nlohmann::ordered_json::array({idx, count}));
        o["entries"] = std::move(entries);
        docs.push_back(std::move(o));
    }
    j["docs"] = std::move(docs);
    j["dropped_docs"] = dropped_docs;
    return j;
}

DocTermMatrix DocTermMatrix::from_json(const nlohmann::json& j) {
    DocTermMatrix dtm;
    dtm.vocabulary.terms = j.at("vocab").get<std::vector<std::string>>();
    dtm.vocabulary.frequencies = j.at("frequencies").get<std::vector<std::int64_t>>();
    if (dtm.vocabulary.terms.size() != dtm.vocabulary.frequencies.size())
        throw Error("DocTermMatrix: vocab/frequency size mismatch");
    for (const auto& o : j.at("docs")) {
        DocRow row;
        row.contribution_id = o.at("id").get<std::string>();
        for (const auto& e : o.at("entries")) {
            const auto idx = e.at(0).get<std::uint32_t>();
            const auto count = e.at(1).get<std::uint32_t>();
            if (idx >= dtm.vocabulary.terms.size())
                throw Error("DocTermMatrix: term index out of range");
            if (count == 0) throw Error("DocTermMatrix: zero count entry");
            row.entries.emplace_back(idx, count);
        }
        dtm.rows.push_back(std::move(row));
    }
    if (j.contains("dropped_docs"))
        dtm.dropped_docs = j["dropped_docs"].get<std::vector<std::string>>();
    return dtm;
}

namespace {

std::ifstream open_or_throw(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open resource file: " + path.string());
    return in;
}

bool comment_or_blank(const std::string& line) {
    for (char c : line) {
        if (std::isspace(static_cast<unsigned char>(c))) continue;
        return c == '#';
    }
    return true;
}

std::string strip(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

}  // namespace

std::unordered_set<std::string> load_line_set(const std::filesystem::path& path) {
    auto in = open_or_throw(path);
    std::unordered_set<std::string> set;
    std::string line;
    while (std::getline(in, line)) {
        if (comment_or_blank(line)) continue;
        set.insert(strip(line));
    }
    return set;
}

std::unordered_set<std::string> load_gazetteer(const std::filesystem::path& path) {
    auto in = open_or_throw(path);
    std::unordered_set<std::string> set;
    std::string line;
    while (std::getline(in, line)) {
        if (comment_or_blank(line)) continue;
        std::string entry = clean(strip(line));
        std::replace(entry.begin(), entry.end(), ' ', '_');
        if (!entry.empty()) set.insert(entry);
    }
    return set;
}

std::unordered_map<std::string, std::string> load_lexicon(const std::filesystem::path& path) {
    auto in = open_or_throw(path);
    std::unordered_map<std::string, std::string> lex;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (comment_or_blank(line)) continue;
        std::istringstream is(line);
        std::string from, to;
        if (!(is >> from >> to))
            throw Error("lexicon " + path.string() + ": malformed line " + std::to_string(n));
        lex[from] = to;
    }
    return lex;
}

}  // namespace valuescape::textprep
