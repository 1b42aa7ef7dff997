#include "valuescape/topicmodel.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "valuescape/error.hpp"
#include "valuescape/hashing.hpp"
#include "valuescape/rng.hpp"

namespace valuescape::topicmodel {

namespace {

constexpr double kAlphaFloor = 0.01;
constexpr int kAlphaUpdateInterval = 20;

struct GibbsState {
    int k = 0;
    std::size_t vocab = 0;
    // expanded token streams, one entry per token occurrence
    std::vector<std::vector<std::uint32_t>> tokens;
    std::vector<std::vector<int>> z;
    std::vector<std::vector<int>> n_dk;   // D x k
    std::vector<std::int64_t> n_kv;       // k x V
    std::vector<std::int64_t> n_k;        // k
    // one prior vector per covariate level; level 0 is the whole corpus
    std::vector<int> doc_level;
    std::vector<std::vector<double>> level_alpha;
    std::vector<double> level_alpha_sum;
    std::vector<std::vector<int>> level_docs;

    std::int64_t& nkv(int t, std::uint32_t v) { return n_kv[static_cast<std::size_t>(t) * vocab + v]; }
    std::int64_t nkv(int t, std::uint32_t v) const { return n_kv[static_cast<std::size_t>(t) * vocab + v]; }
};

std::vector<std::vector<std::uint32_t>> expand_tokens(const textprep::DocTermMatrix& dtm) {
    std::vector<std::vector<std::uint32_t>> tokens(dtm.rows.size());
    for (std::size_t d = 0; d < dtm.rows.size(); ++d) {
        const auto& row = dtm.rows[d];
        if (row.entries.empty())
            throw Error("fit: document '" + row.contribution_id +
                        "' has no tokens (drop empty rows upstream)");
        auto& doc = tokens[d];
        doc.reserve(static_cast<std::size_t>(row.token_count()));
        for (const auto& [v, c] : row.entries)
            for (std::uint32_t i = 0; i < c; ++i) doc.push_back(v);
    }
    return tokens;
}

// lgamma table over integer offsets n + c for n in [0, max_n]
class LgammaTable {
public:
    LgammaTable(double c, std::size_t max_n) : c_(c), table_(max_n + 1) {
        for (std::size_t n = 0; n <= max_n; ++n)
            table_[n] = std::lgamma(static_cast<double>(n) + c);
    }
    double operator()(std::int64_t n) const { return table_[static_cast<std::size_t>(n)]; }
    double offset() const { return c_; }

private:
    double c_;
    std::vector<double> table_;
};

// collapsed complete-data log likelihood log p(w, z | alpha, eta)
double joint_log_likelihood(const GibbsState& s, double eta, const LgammaTable& lg_eta,
                            double lgamma_eta) {
    const auto v_count = static_cast<double>(s.vocab);
    double ll = 0.0;
    const double lg_veta = std::lgamma(v_count * eta);
    for (int t = 0; t < s.k; ++t) {
        ll += lg_veta - v_count * lgamma_eta;
        double words = 0.0;
        for (std::size_t v = 0; v < s.vocab; ++v) {
            const auto c = s.nkv(t, static_cast<std::uint32_t>(v));
            if (c > 0) words += lg_eta(c) - lgamma_eta;
        }
        ll += words - std::lgamma(static_cast<double>(s.n_k[static_cast<std::size_t>(t)]) + v_count * eta);
    }
    for (std::size_t d = 0; d < s.tokens.size(); ++d) {
        const auto& alpha = s.level_alpha[static_cast<std::size_t>(s.doc_level[d])];
        const double alpha_sum = s.level_alpha_sum[static_cast<std::size_t>(s.doc_level[d])];
        ll += std::lgamma(alpha_sum) -
              std::lgamma(static_cast<double>(s.tokens[d].size()) + alpha_sum);
        for (int t = 0; t < s.k; ++t) {
            const int c = s.n_dk[d][static_cast<std::size_t>(t)];
            ll += std::lgamma(static_cast<double>(c) + alpha[static_cast<std::size_t>(t)]) -
                  std::lgamma(alpha[static_cast<std::size_t>(t)]);
        }
    }
    return ll;
}

void rebuild_global_counts(GibbsState& s) {
    std::fill(s.n_kv.begin(), s.n_kv.end(), 0);
    std::fill(s.n_k.begin(), s.n_k.end(), 0);
    for (std::size_t d = 0; d < s.tokens.size(); ++d) {
        for (std::size_t j = 0; j < s.tokens[d].size(); ++j) {
            const int t = s.z[d][j];
            ++s.nkv(t, s.tokens[d][j]);
            ++s.n_k[static_cast<std::size_t>(t)];
        }
    }
}

int sample_discrete(const std::vector<double>& cumulative, double u) {
    // u in [0, 1); cumulative is unnormalized
    const double target = u * cumulative.back();
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
    const auto idx = static_cast<int>(it - cumulative.begin());
    return std::min(idx, static_cast<int>(cumulative.size()) - 1);
}

void sweep_serial(GibbsState& s, double eta, Rng& rng) {
    const double v_eta = static_cast<double>(s.vocab) * eta;
    std::vector<double> cum(static_cast<std::size_t>(s.k));
    for (std::size_t d = 0; d < s.tokens.size(); ++d) {
        const auto& alpha = s.level_alpha[static_cast<std::size_t>(s.doc_level[d])];
        auto& ndk = s.n_dk[d];
        for (std::size_t j = 0; j < s.tokens[d].size(); ++j) {
            const std::uint32_t v = s.tokens[d][j];
            const int old_t = s.z[d][j];
            --ndk[static_cast<std::size_t>(old_t)];
            --s.nkv(old_t, v);
            --s.n_k[static_cast<std::size_t>(old_t)];
            double acc = 0.0;
            for (int t = 0; t < s.k; ++t) {
                const double w = (static_cast<double>(ndk[static_cast<std::size_t>(t)]) +
                                  alpha[static_cast<std::size_t>(t)]) *
                                 (static_cast<double>(s.nkv(t, v)) + eta) /
                                 (static_cast<double>(s.n_k[static_cast<std::size_t>(t)]) + v_eta);
                acc += w;
                cum[static_cast<std::size_t>(t)] = acc;
            }
            const int new_t = sample_discrete(cum, rng.uniform01());
            s.z[d][j] = new_t;
            ++ndk[static_cast<std::size_t>(new_t)];
            ++s.nkv(new_t, v);
            ++s.n_k[static_cast<std::size_t>(new_t)];
        }
    }
}

// Snapshot sweep: every document samples against the global counts frozen
// at the start of the sweep, with its own RNG stream keyed by document id.
// The integer count rebuild makes the result independent of document order.
void sweep_parallel(GibbsState& s, double eta, std::uint64_t seed, int sweep_no,
                    const std::vector<std::uint64_t>& doc_keys) {
    const double v_eta = static_cast<double>(s.vocab) * eta;
    const std::vector<std::int64_t> snap_kv = s.n_kv;
    const std::vector<std::int64_t> snap_k = s.n_k;
    const auto d_count = static_cast<std::int64_t>(s.tokens.size());
    #pragma omp parallel for schedule(static)
    for (std::int64_t d = 0; d < d_count; ++d) {
        const auto du = static_cast<std::size_t>(d);
        Rng rng(splitmix64(seed ^ splitmix64(doc_keys[du] + 0x9e37UL * static_cast<std::uint64_t>(sweep_no + 1))));
        const auto& alpha = s.level_alpha[static_cast<std::size_t>(s.doc_level[du])];
        auto& ndk = s.n_dk[du];
        std::vector<double> cum(static_cast<std::size_t>(s.k));
        for (std::size_t j = 0; j < s.tokens[du].size(); ++j) {
            const std::uint32_t v = s.tokens[du][j];
            const int old_t = s.z[du][j];
            --ndk[static_cast<std::size_t>(old_t)];
            double acc = 0.0;
            for (int t = 0; t < s.k; ++t) {
                const double w = (static_cast<double>(ndk[static_cast<std::size_t>(t)]) +
                                  alpha[static_cast<std::size_t>(t)]) *
                                 (static_cast<double>(snap_kv[static_cast<std::size_t>(t) * s.vocab + v]) + eta) /
                                 (static_cast<double>(snap_k[static_cast<std::size_t>(t)]) + v_eta);
                acc += w;
                cum[static_cast<std::size_t>(t)] = acc;
            }
            const int new_t = sample_discrete(cum, rng.uniform01());
            s.z[du][j] = new_t;
            ++ndk[static_cast<std::size_t>(new_t)];
        }
    }
    rebuild_global_counts(s);
}

// level alpha <- max(floor, mean topic counts of the level's documents)
void update_level_alphas(GibbsState& s) {
    for (std::size_t l = 0; l < s.level_alpha.size(); ++l) {
        const auto& docs = s.level_docs[l];
        if (docs.empty()) continue;
        std::vector<std::int64_t> sums(static_cast<std::size_t>(s.k), 0);
        for (const int d : docs) {
            const auto& ndk = s.n_dk[static_cast<std::size_t>(d)];
            for (int t = 0; t < s.k; ++t) sums[static_cast<std::size_t>(t)] += ndk[static_cast<std::size_t>(t)];
        }
        double total = 0.0;
        for (int t = 0; t < s.k; ++t) {
            const double mean = static_cast<double>(sums[static_cast<std::size_t>(t)]) /
                                static_cast<double>(docs.size());
            s.level_alpha[l][static_cast<std::size_t>(t)] = std::max(kAlphaFloor, mean);
            total += s.level_alpha[l][static_cast<std::size_t>(t)];
        }
        s.level_alpha_sum[l] = total;
    }
}

}  // namespace

void ModelConfig::validate(std::size_t vocab_size) const {
    if (k < 1) throw Error("fit: k must be >= 1");
    if (static_cast<std::size_t>(k) > vocab_size)
        throw Error("fit: k exceeds vocabulary size");
    if (iterations < 1) throw Error("fit: iterations must be >= 1");
    if (burn_in < 0 || burn_in >= iterations)
        throw Error("fit: burn_in must lie in [0, iterations)");
    if (sample_lag < 1) throw Error("fit: sample_lag must be >= 1");
    if (effective_alpha0() <= 0.0 || eta <= 0.0)
        throw Error("fit: alpha0 and eta must be positive");
}

TopicModel fit(const textprep::DocTermMatrix& dtm, const ModelConfig& config,
               const std::vector<std::string>* covariate_values) {
    if (dtm.rows.empty()) throw Error("fit: empty document-term matrix");
    config.validate(dtm.vocabulary.size());
    if (covariate_values && covariate_values->size() != dtm.rows.size())
        throw Error("fit: covariate values do not align with matrix rows");

    GibbsState s;
    s.k = config.k;
    s.vocab = dtm.vocabulary.size();
    s.tokens = expand_tokens(dtm);
    const std::size_t d_count = s.tokens.size();
    s.z.resize(d_count);
    s.n_dk.assign(d_count, std::vector<int>(static_cast<std::size_t>(s.k), 0));
    s.n_kv.assign(static_cast<std::size_t>(s.k) * s.vocab, 0);
    s.n_k.assign(static_cast<std::size_t>(s.k), 0);

    // covariate levels; a single level 0 when covariates are off
    s.doc_level.assign(d_count, 0);
    std::map<std::string, int> level_ids;
    if (covariate_values) {
        for (std::size_t d = 0; d < d_count; ++d) {
            const auto [it, fresh] =
                level_ids.try_emplace((*covariate_values)[d], static_cast<int>(level_ids.size()));
            (void)fresh;
            s.doc_level[d] = it->second;
        }
    }
    const std::size_t n_levels = covariate_values ? level_ids.size() : 1;
    const double alpha0 = config.effective_alpha0();
    s.level_alpha.assign(n_levels, std::vector<double>(static_cast<std::size_t>(s.k), alpha0));
    s.level_alpha_sum.assign(n_levels, alpha0 * static_cast<double>(s.k));
    s.level_docs.assign(n_levels, {});
    for (std::size_t d = 0; d < d_count; ++d)
        s.level_docs[static_cast<std::size_t>(s.doc_level[d])].push_back(static_cast<int>(d));

    std::vector<std::uint64_t> doc_keys(d_count);
    std::int64_t max_doc_len = 0;
    for (std::size_t d = 0; d < d_count; ++d) {
        doc_keys[d] = fnv1a64(dtm.rows[d].contribution_id);
        max_doc_len = std::max(max_doc_len, static_cast<std::int64_t>(s.tokens[d].size()));
    }

    // initial assignments
    Rng base(config.seed);
    if (config.sweep_mode == ExecMode::serial) {
        Rng init = base.stream("gibbs-init");
        for (std::size_t d = 0; d < d_count; ++d) {
            s.z[d].resize(s.tokens[d].size());
            for (std::size_t j = 0; j < s.tokens[d].size(); ++j) {
                const int t = static_cast<int>(init.uniform_int(static_cast<std::uint64_t>(s.k)));
                s.z[d][j] = t;
                ++s.n_dk[d][static_cast<std::size_t>(t)];
            }
        }
    } else {
        for (std::size_t d = 0; d < d_count; ++d) {
            Rng init(splitmix64(config.seed ^ splitmix64(doc_keys[d])));
            s.z[d].resize(s.tokens[d].size());
            for (std::size_t j = 0; j < s.tokens[d].size(); ++j) {
                const int t = static_cast<int>(init.uniform_int(static_cast<std::uint64_t>(s.k)));
                s.z[d][j] = t;
                ++s.n_dk[d][static_cast<std::size_t>(t)];
            }
        }
    }
    rebuild_global_counts(s);

    std::int64_t total_tokens = 0;
    for (const auto& doc : s.tokens) total_tokens += static_cast<std::int64_t>(doc.size());
    const LgammaTable lg_eta(config.eta, static_cast<std::size_t>(total_tokens));
    const double lgamma_eta = std::lgamma(config.eta);

    TopicModel model;
    model.config = config;
    model.k = s.k;
    model.vocab_size = s.vocab;
    model.doc_ids.reserve(d_count);
    for (const auto& row : dtm.rows) model.doc_ids.push_back(row.contribution_id);
    model.log_likelihood.reserve(static_cast<std::size_t>(config.iterations));

    std::vector<double> beta_acc(static_cast<std::size_t>(s.k) * s.vocab, 0.0);
    std::vector<double> theta_acc(d_count * static_cast<std::size_t>(s.k), 0.0);
    int samples = 0;

    Rng sweep_rng = base.stream("gibbs-sweeps");
    const double v_eta = static_cast<double>(s.vocab) * config.eta;
    for (int sweep = 1; sweep <= config.iterations; ++sweep) {
        if (config.sweep_mode == ExecMode::serial)
            sweep_serial(s, config.eta, sweep_rng);
        else
            sweep_parallel(s, config.eta, config.seed, sweep, doc_keys);

        const bool past_burn_in = sweep > config.burn_in;
        if (past_burn_in && covariate_values &&
            (sweep - config.burn_in) % kAlphaUpdateInterval == 0) {
            update_level_alphas(s);
        }

        model.log_likelihood.push_back(joint_log_likelihood(s, config.eta, lg_eta, lgamma_eta));

        const bool retain = (past_burn_in && (sweep - config.burn_in) % config.sample_lag == 0) ||
                            (sweep == config.iterations && samples == 0);
        if (!retain) continue;
        ++samples;
        for (int t = 0; t < s.k; ++t) {
            const double denom = static_cast<double>(s.n_k[static_cast<std::size_t>(t)]) + v_eta;
            for (std::size_t v = 0; v < s.vocab; ++v) {
                beta_acc[static_cast<std::size_t>(t) * s.vocab + v] +=
                    (static_cast<double>(s.nkv(t, static_cast<std::uint32_t>(v))) + config.eta) / denom;
            }
        }
        for (std::size_t d = 0; d < d_count; ++d) {
            const auto& alpha = s.level_alpha[static_cast<std::size_t>(s.doc_level[d])];
            const double denom = static_cast<double>(s.tokens[d].size()) +
                                 s.level_alpha_sum[static_cast<std::size_t>(s.doc_level[d])];
            for (int t = 0; t < s.k; ++t) {
                theta_acc[d * static_cast<std::size_t>(s.k) + static_cast<std::size_t>(t)] +=
                    (static_cast<double>(s.n_dk[d][static_cast<std::size_t>(t)]) +
                     alpha[static_cast<std::size_t>(t)]) / denom;
            }
        }
    }

    model.beta.resize(beta_acc.size());
    for (std::size_t i = 0; i < beta_acc.size(); ++i)
        model.beta[i] = beta_acc[i] / static_cast<double>(samples);
    model.theta.resize(theta_acc.size());
    for (std::size_t i = 0; i < theta_acc.size(); ++i)
        model.theta[i] = theta_acc[i] / static_cast<double>(samples);
    model.dtm_hash = sha256_hex(dtm.to_json().dump());
    return model;
}

std::vector<double> semantic_coherence(const TopicModel& model,
                                       const textprep::DocTermMatrix& dtm, int top_m) {
    if (top_m < 2) throw Error("semantic_coherence: top_m must be >= 2");
    const std::size_t v_count = dtm.vocabulary.size();
    if (model.vocab_size != v_count)
        throw Error("semantic_coherence: model and matrix vocabularies differ");

    // postings: sorted document indices per term
    std::vector<std::vector<int>> postings(v_count);
    for (std::size_t d = 0; d < dtm.rows.size(); ++d) {
        for (const auto& [v, c] : dtm.rows[d].entries) {
            (void)c;
            postings[v].push_back(static_cast<int>(d));
        }
    }

    const auto co_count = [&](std::uint32_t a, std::uint32_t b) {
        const auto& pa = postings[a];
        const auto& pb = postings[b];
        std::size_t i = 0, j = 0, n = 0;
        while (i < pa.size() && j < pb.size()) {
            if (pa[i] < pb[j]) ++i;
            else if (pa[i] > pb[j]) ++j;
            else ++n, ++i, ++j;
        }
        return n;
    };

    const int m = std::min<int>(top_m, static_cast<int>(v_count));
    std::vector<double> coherence(static_cast<std::size_t>(model.k), 0.0);
    for (int t = 0; t < model.k; ++t) {
        // top m terms by beta, ties to the lower index
        std::vector<std::uint32_t> idx(v_count);
        std::iota(idx.begin(), idx.end(), 0);
        const double* row = model.beta_row(t);
        std::partial_sort(idx.begin(), idx.begin() + m, idx.end(),
                          [&](std::uint32_t a, std::uint32_t b) {
                              if (row[a] != row[b]) return row[a] > row[b];
                              return a < b;
                          });
        double c = 0.0;
        for (int i = 1; i < m; ++i) {
            for (int j = 0; j < i; ++j) {
                const auto dj = postings[idx[static_cast<std::size_t>(j)]].size();
                if (dj == 0)
                    throw Error("semantic_coherence: top word with zero document count");
                const auto dij = co_count(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
                c += std::log((static_cast<double>(dij) + 1.0) / static_cast<double>(dj));
            }
        }
        coherence[static_cast<std::size_t>(t)] = c;
    }
    return coherence;
}

double residual_dispersion(const TopicModel& model, const textprep::DocTermMatrix& dtm,
                           ExecMode mode) {
    const auto d_count = static_cast<std::int64_t>(dtm.rows.size());
    const auto v_count = static_cast<std::int64_t>(dtm.vocabulary.size());
    if (static_cast<std::size_t>(v_count) != model.vocab_size ||
        static_cast<std::size_t>(d_count) != dtm.rows.size())
        throw Error("residual_dispersion: model/matrix mismatch");
    const double dof = static_cast<double>(d_count) * static_cast<double>(v_count - model.k);
    if (dof <= 0.0) throw Error("residual_dispersion: k too large for corpus");

    // per-document partial sums, totalled in document order so both
    // execution modes produce the identical double
    std::vector<double> partial(static_cast<std::size_t>(d_count), 0.0);
    #pragma omp parallel for schedule(static) if (mode == ExecMode::openmp)
    for (std::int64_t d = 0; d < d_count; ++d) {
        const auto du = static_cast<std::size_t>(d);
        const auto& row = dtm.rows[du];
        const double n_d = static_cast<double>(row.token_count());
        const double* theta = model.theta_row(du);
        std::vector<double> p(static_cast<std::size_t>(v_count), 0.0);
        for (int t = 0; t < model.k; ++t) {
            const double w = theta[t];
            const double* beta = model.beta_row(t);
            for (std::int64_t v = 0; v < v_count; ++v)
                p[static_cast<std::size_t>(v)] += w * beta[v];
        }
        std::size_t e = 0;
        double sum = 0.0;
        for (std::int64_t v = 0; v < v_count; ++v) {
            double n_dv = 0.0;
            if (e < row.entries.size() && row.entries[e].first == static_cast<std::uint32_t>(v)) {
                n_dv = static_cast<double>(row.entries[e].second);
                ++e;
            }
            const double pv = p[static_cast<std::size_t>(v)];
            if (pv <= 0.0) continue;
            const double denom = n_d * pv * (1.0 - pv);
            if (denom <= 0.0) continue;
            const double resid = n_dv - n_d * pv;
            sum += resid * resid / denom;
        }
        partial[du] = sum;
    }
    double total = 0.0;
    for (const double v : partial) total += v;
    return total / dof;
}

namespace {

struct HoldoutSplit {
    textprep::DocTermMatrix train;
    // held-out term occurrences per training row index
    std::vector<std::vector<std::uint32_t>> held;
    std::int64_t held_total = 0;
};

// Hold out 20% of the tokens of every 5th document (document completion).
HoldoutSplit make_holdout(const textprep::DocTermMatrix& dtm, std::uint64_t seed) {
    HoldoutSplit split;
    split.train.vocabulary = dtm.vocabulary;
    split.train.dropped_docs = dtm.dropped_docs;
    split.held.resize(dtm.rows.size());
    Rng base(seed);
    for (std::size_t d = 0; d < dtm.rows.size(); ++d) {
        const auto& row = dtm.rows[d];
        std::vector<std::uint32_t> tokens;
        tokens.reserve(static_cast<std::size_t>(row.token_count()));
        for (const auto& [v, c] : row.entries)
            for (std::uint32_t i = 0; i < c; ++i) tokens.push_back(v);
        std::size_t n_held = 0;
        if (d % 5 == 0) n_held = tokens.size() / 5;
        if (n_held > 0) {
            Rng rng = base.stream(fnv1a64(row.contribution_id));
            // partial Fisher-Yates: first n_held positions become the held set
            for (std::size_t i = 0; i < n_held; ++i) {
                const std::size_t j =
                    i + static_cast<std::size_t>(rng.uniform_int(tokens.size() - i));
                std::swap(tokens[i], tokens[j]);
            }
            split.held[d].assign(tokens.begin(),
                                 tokens.begin() + static_cast<std::ptrdiff_t>(n_held));
            split.held_total += static_cast<std::int64_t>(n_held);
            tokens.erase(tokens.begin(), tokens.begin() + static_cast<std::ptrdiff_t>(n_held));
        }
        std::map<std::uint32_t, std::uint32_t> counts;
        for (const auto v : tokens) ++counts[v];
        textprep::DocRow out;
        out.contribution_id = row.contribution_id;
        out.entries.assign(counts.begin(), counts.end());
        split.train.rows.push_back(std::move(out));
    }
    return split;
}

}  // namespace

DiagnosticsReport select_k(const textprep::DocTermMatrix& dtm, const std::vector<int>& k_grid,
                           const ModelConfig& config_template,
                           const std::vector<std::string>* covariate_values) {
    if (k_grid.empty()) throw Error("select_k: empty grid");
    DiagnosticsReport report;
    report.note =
        "topic model: collapsed Gibbs LDA with covariate-stratified document priors "
        "(approximation of structural topic modeling); fits use a 20% token holdout "
        "on every 5th document";

    const HoldoutSplit split = make_holdout(dtm, config_template.seed ^ 0x9e3779b97f4a7c15ULL);

    for (const int k : k_grid) {
        KDiagnostics diag;
        diag.k = k;
        try {
            ModelConfig config = config_template;
            config.k = k;
            config.alpha0 = config_template.alpha0;  // 0 keeps the 50/k default per k
            const TopicModel model = fit(split.train, config, covariate_values);
            diag.coherence = semantic_coherence(model, dtm, 10);
            diag.coherence_mean =
                std::accumulate(diag.coherence.begin(), diag.coherence.end(), 0.0) /
                static_cast<double>(diag.coherence.size());
            diag.dispersion = residual_dispersion(model, split.train);
            double ll = 0.0;
            for (std::size_t d = 0; d < split.train.rows.size(); ++d) {
                if (split.held[d].empty()) continue;
                const double* theta = model.theta_row(d);
                for (const auto v : split.held[d]) {
                    double p = 0.0;
                    for (int t = 0; t < k; ++t) p += theta[t] * model.beta_row(t)[v];
                    ll += std::log(p);
                }
            }
            diag.heldout_loglik = ll;
            diag.heldout_tokens = split.held_total;
            diag.ok = true;
        } catch (const Error& e) {
            diag.ok = false;
            diag.error = e.what();
        }
        report.rows.push_back(std::move(diag));
    }
    return report;
}

std::vector<RankedWord> top_words(const TopicModel& model, const textprep::Vocabulary& vocab,
                                  int topic, int n, Ranking ranking) {
    if (topic < 0 || topic >= model.k) throw Error("top_words: topic index out of range");
    if (vocab.size() != model.vocab_size)
        throw Error("top_words: vocabulary does not match the model");
    const std::size_t v_count = model.vocab_size;
    const auto m = static_cast<std::size_t>(std::max(0, n));
    const std::size_t take = std::min(m, v_count);
    if (take == 0) return {};

    const double* row = model.beta_row(topic);
    std::vector<double> weight(v_count);
    if (ranking == Ranking::probability) {
        for (std::size_t v = 0; v < v_count; ++v) weight[v] = row[v];
    } else {
        // frex: harmonic mean of the within-topic ECDF ranks of frequency
        // and exclusivity, weight 0.5
        std::vector<double> exclusivity(v_count, 0.0);
        for (std::size_t v = 0; v < v_count; ++v) {
            double mass = 0.0;
            for (int t = 0; t < model.k; ++t) mass += model.beta_row(t)[v];
            exclusivity[v] = mass > 0.0 ? row[v] / mass : 0.0;
        }
        const auto ecdf = [&](const std::vector<double>& x) {
            std::vector<std::size_t> idx(v_count);
            std::iota(idx.begin(), idx.end(), 0);
            std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
                if (x[a] != x[b]) return x[a] < x[b];
                return a < b;
            });
            std::vector<double> r(v_count);
            // ties share the highest rank of the tied block
            std::size_t i = 0;
            while (i < v_count) {
                std::size_t j = i;
                while (j + 1 < v_count && x[idx[j + 1]] == x[idx[i]]) ++j;
                const double frac = static_cast<double>(j + 1) / static_cast<double>(v_count);
                for (std::size_t q = i; q <= j; ++q) r[idx[q]] = frac;
                i = j + 1;
            }
            return r;
        };
        const std::vector<double> freq_rank = ecdf(std::vector<double>(row, row + v_count));
        const std::vector<double> excl_rank = ecdf(exclusivity);
        constexpr double w = 0.5;
        for (std::size_t v = 0; v < v_count; ++v) {
            weight[v] = 1.0 / (w / excl_rank[v] + (1.0 - w) / freq_rank[v]);
        }
    }

    std::vector<std::uint32_t> idx(v_count);
    std::iota(idx.begin(), idx.end(), 0);
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(take), idx.end(),
                      [&](std::uint32_t a, std::uint32_t b) {
                          if (weight[a] != weight[b]) return weight[a] > weight[b];
                          return a < b;
                      });
    std::vector<RankedWord> out;
    out.reserve(take);
    for (std::size_t i = 0; i < take; ++i)
        out.push_back({vocab.terms[idx[i]], weight[idx[i]]});
    return out;
}

nlohmann::ordered_json ModelConfig::to_json() const {
    nlohmann::ordered_json j;
    j["k"] = k;
    j["alpha0"] = alpha0;
    j["eta"] = eta;
    j["iterations"] = iterations;
    j["burn_in"] = burn_in;
    j["sample_lag"] = sample_lag;
    j["seed"] = seed;
    j["covariates"] = covariates;
    j["sweep_mode"] = sweep_mode == ExecMode::serial ? "serial" : "openmp";
    return j;
}

ModelConfig ModelConfig::from_json(const nlohmann::json& j) {
    ModelConfig c;
    c.k = j.value("k", c.k);
    c.alpha0 = j.value("alpha0", c.alpha0);
    c.eta = j.value("eta", c.eta);
    c.iterations = j.value("iterations", c.iterations);
    c.burn_in = j.value("burn_in", c.burn_in);
    c.sample_lag = j.value("sample_lag", c.sample_lag);
    c.seed = j.value("seed", c.seed);
    if (j.contains("covariates")) c.covariates = j["covariates"].get<std::vector<std::string>>();
    c.sweep_mode = j.value("sweep_mode", std::string{"serial"}) == "openmp" ? ExecMode::openmp
                                                                            : ExecMode::serial;
    return c;
}

nlohmann::ordered_json TopicModel::to_json() const {
    nlohmann::ordered_json j;
    j["config"] = config.to_json();
    j["k"] = k;
    j["vocab_size"] = vocab_size;
    j["beta"] = beta;
    j["theta"] = theta;
    j["doc_ids"] = doc_ids;
    j["log_likelihood"] = log_likelihood;
    j["vocab_ref"] = dtm_hash;
    return j;
}

TopicModel TopicModel::from_json(const nlohmann::json& j) {
    TopicModel m;
    m.config = ModelConfig::from_json(j.at("config"));
    m.k = j.at("k").get<int>();
    m.vocab_size = j.at("vocab_size").get<std::size_t>();
    m.beta = j.at("beta").get<std::vector<double>>();
    m.theta = j.at("theta").get<std::vector<double>>();
    m.doc_ids = j.at("doc_ids").get<std::vector<std::string>>();
    m.log_likelihood = j.value("log_likelihood", std::vector<double>{});
    m.dtm_hash = j.value("vocab_ref", std::string{});
    if (m.beta.size() != static_cast<std::size_t>(m.k) * m.vocab_size)
        throw Error("TopicModel: beta size mismatch");
    if (m.theta.size() != m.doc_ids.size() * static_cast<std::size_t>(m.k))
        throw Error("TopicModel: theta size mismatch");
    return m;
}

nlohmann::ordered_json DiagnosticsReport::to_json() const {
    nlohmann::ordered_json j;
    j["note"] = note;
    auto arr = nlohmann::ordered_json::array();
    for (const auto& r : rows) {
        nlohmann::ordered_json o;
        o["k"] = r.k;
        o["ok"] = r.ok;
        if (!r.ok) {
            o["error"] = r.error;
        } else {
            o["semantic_coherence"] = r.coherence;
            o["coherence_mean"] = r.coherence_mean;
            o["residual_dispersion"] = r.dispersion;
            o["heldout_loglik"] = r.heldout_loglik;
            o["heldout_tokens"] = r.heldout_tokens;
        }
        arr.push_back(std::move(o));
    }
    j["rows"] = std::move(arr);
    return j;
}

std::string DiagnosticsReport::to_table() const {
    std::ostringstream os;
    os << "    k  coherence_mean  dispersion  heldout_loglik\n";
    for (const auto& r : rows) {
        if (!r.ok) {
            os << "  " << r.k << "  error: " << r.error << "\n";
            continue;
        }
        char buf[160];
        std::snprintf(buf, sizeof(buf), "  %3d  %14.4f  %10.4f  %14.2f\n", r.k,
                      r.coherence_mean, r.dispersion, r.heldout_loglik);
        os << buf;
    }
    return os.str();
}

}  // namespace valuescape::topicmodel
