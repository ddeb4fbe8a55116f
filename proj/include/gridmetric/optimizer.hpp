#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gridmetric/fpp.hpp"

namespace gridmetric::opt {

/// Two-layer stochastic search over k-point laws: outer perturbations of
/// the probability vector, inner perturbation/normalization sweeps over
/// the support values.
struct SearchConfig {
    int k = 2;
    int outer_iters = 4;
    int inner_iters = 40;
    double prob_step = 0.25;   // gaussian step on probability logits
    double value_step = 0.15;  // relative gaussian step on values
    int64_t eval_n = 500;
    int eval_trials = 4;
    int eval_angles = 33;  // full-objective angle grid
    uint64_t seed = 1;
    double margin_factor = 0.3;
    std::optional<fpp::KPointDistribution> init;  // optional seeded start

    void validate() const;
};

struct HistoryEntry {
    int iter = 0;
    double candidate_objective = 0.0;  // cheap {0, pi/4} objective
    double best_objective = 0.0;       // running best (non-increasing)
    fpp::KPointDistribution candidate;
};

struct SearchResult {
    fpp::KPointDistribution best;
    double objective = 0.0;  // full-angle-grid objective of `best`
    double objective_stderr = 0.0;
    std::vector<HistoryEntry> history;
};

/// Scale all support values by 1 / sqrt(mu0 * mu45); probabilities are
/// untouched. Keeps the average stretch of the cardinal and intercardinal
/// directions near 1.
fpp::KPointDistribution normalize_values(const fpp::KPointDistribution& dist, double mu0,
                                         double mu45);

/// Full-angle objective: max over theta of |mu_theta / sqrt(mu0*mu45) - 1|.
/// Scale-invariant, so no explicit normalization of `dist` is needed.
double evaluate(const fpp::KPointDistribution& dist, const SearchConfig& config);

SearchResult local_search(const SearchConfig& config);

void write_history_csv(const std::string& path, const SearchResult& result);
void write_distribution_json(const std::string& path, const fpp::KPointDistribution& dist,
                             double objective);

}  // namespace gridmetric::opt
