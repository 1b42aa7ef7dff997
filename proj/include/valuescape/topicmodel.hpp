#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "valuescape/parallel.hpp"
#include "valuescape/textprep.hpp"

namespace valuescape::topicmodel {

// Collapsed Gibbs LDA with covariate-stratified empirical-Bayes document
// priors. This approximates the structural topic model's "metadata shifts
// topic prevalence" mechanism: after burn-in the document prior is
// re-estimated per covariate level from that level's mean topic counts.
struct ModelConfig {
    int k = 30;
    double alpha0 = 0.0;  // symmetric document-topic prior; 0 means the 50/k default
    double eta = 0.01;    // symmetric topic-word prior
    int iterations = 2000;
    int burn_in = 1000;
    int sample_lag = 10;
    std::uint64_t seed = 1;
    std::vector<std::string> covariates;  // names, for the manifest; values come per doc
    ExecMode sweep_mode = ExecMode::serial;

    double effective_alpha0() const { return alpha0 > 0.0 ? alpha0 : 50.0 / k; }
    void validate(std::size_t vocab_size) const;

    nlohmann::ordered_json to_json() const;
    static ModelConfig from_json(const nlohmann::json& j);
};

struct TopicModel {
    ModelConfig config;
    int k = 0;
    std::size_t vocab_size = 0;
    std::vector<double> beta;   // k x V row-major, rows sum to 1
    std::vector<double> theta;  // D x k row-major, rows sum to 1
    std::vector<std::string> doc_ids;
    std::vector<double> log_likelihood;  // per-sweep collapsed joint log p(w, z)
    std::string dtm_hash;

    const double* beta_row(int topic) const { return beta.data() + static_cast<std::size_t>(topic) * vocab_size; }
    const double* theta_row(std::size_t doc) const { return theta.data() + doc * static_cast<std::size_t>(k); }

    nlohmann::ordered_json to_json() const;
    static TopicModel from_json(const nlohmann::json& j);
};

// covariate_values, when present, must align with dtm.rows
TopicModel fit(const textprep::DocTermMatrix& dtm, const ModelConfig& config,
               const std::vector<std::string>* covariate_values = nullptr);

// UMass coherence over the top_m words of each topic:
//   C = sum_{i=2..M} sum_{j<i} log((D(w_i, w_j) + 1) / D(w_j))
// with document counts D taken from the given matrix.
std::vector<double> semantic_coherence(const TopicModel& model,
                                       const textprep::DocTermMatrix& dtm, int top_m);

// Dispersion of multinomial Pearson residuals, normalized by
// D(V-1) - D(k-1) degrees of freedom. Values well above 1 indicate the
// model needs more topics.
double residual_dispersion(const TopicModel& model, const textprep::DocTermMatrix& dtm,
                           ExecMode mode = ExecMode::serial);

struct KDiagnostics {
    int k = 0;
    bool ok = false;
    std::string error;
    std::vector<double> coherence;  // per topic
    double coherence_mean = 0.0;
    double dispersion = 0.0;
    double heldout_loglik = 0.0;
    std::int64_t heldout_tokens = 0;
};

struct DiagnosticsReport {
    std::vector<KDiagnostics> rows;
    std::string note;  // records the STM-approximation deviation

    nlohmann::ordered_json to_json() const;
    std::string to_table() const;
};

// Fits every k on a shared seed after holding out 20% of the tokens of
// every 5th document; reports coherence (top 10 words), dispersion and the
// document-completion held-out log-likelihood. Ranks only; the human picks k.
DiagnosticsReport select_k(const textprep::DocTermMatrix& dtm, const std::vector<int>& k_grid,
                           const ModelConfig& config_template,
                           const std::vector<std::string>* covariate_values = nullptr);

enum class Ranking { probability, frex };

struct RankedWord {
    std::string term;
    double weight = 0.0;
};

// frex = harmonic mean (weight 0.5) of the within-topic ECDF ranks of
// probability and exclusivity
std::vector<RankedWord> top_words(const TopicModel& model, const textprep::Vocabulary& vocab,
                                  int topic, int n, Ranking ranking = Ranking::probability);

}  // namespace valuescape::topicmodel
