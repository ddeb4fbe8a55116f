#include "gridmetric/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include <json.hpp>

namespace gridmetric::opt {

namespace {
constexpr double kPi = 3.14159265358979323846;

double gaussian(RngSequence& seq) {
    double u1 = seq.u01();
    double u2 = seq.u01();
    return std::sqrt(-2.0 * std::log(1.0 - u1)) * std::cos(2.0 * kPi * u2);
}

// Cheap search objective: stretch deviation at theta = 0 and pi/4 only,
// normalized by the geometric mean. Uses a fixed evaluation seed so that
// candidate comparisons share random numbers.
struct CheapEval {
    double objective;
    double mu0, mu45;
};

CheapEval cheap_evaluate(const fpp::KPointDistribution& dist, const SearchConfig& cfg,
                         uint64_t eval_seed) {
    fpp::DirectionalProfile prof = fpp::directional_stretch(
        fpp::EdgeDistribution{dist}, cfg.eval_n, 3, cfg.eval_trials, eval_seed, cfg.margin_factor);
    double mu0 = prof.mu_mean[0];
    double mu45 = prof.mu_mean[1];
    double denom = std::sqrt(mu0 * mu45);
    double obj = std::max(std::abs(mu0 / denom - 1.0), std::abs(mu45 / denom - 1.0));
    return {obj, mu0, mu45};
}

fpp::KPointDistribution make_dist(const std::vector<double>& probs,
                                  const std::vector<double>& values) {
    fpp::KPointDistribution d;
    for (size_t i = 0; i < probs.size(); ++i) d.entries.push_back({probs[i], values[i]});
    return d;
}

// Softmax with an exact unit sum (last entry takes the residual).
std::vector<double> simplex_from_logits(const std::vector<double>& logits) {
    double mx = *std::max_element(logits.begin(), logits.end());
    std::vector<double> p(logits.size());
    double sum = 0.0;
    for (size_t i = 0; i < logits.size(); ++i) {
        p[i] = std::exp(logits[i] - mx);
        sum += p[i];
    }
    double acc = 0.0;
    for (size_t i = 0; i + 1 < p.size(); ++i) {
        p[i] /= sum;
        acc += p[i];
    }
    p.back() = std::max(0.0, 1.0 - acc);
    return p;
}

}  // namespace

void SearchConfig::validate() const {
    if (k < 1) throw std::invalid_argument("SearchConfig: k must be >= 1");
    if (outer_iters < 1 || inner_iters < 1) throw std::invalid_argument("SearchConfig: budgets >= 1");
    if (prob_step <= 0.0 || value_step <= 0.0) throw std::invalid_argument("SearchConfig: steps > 0");
    if (eval_trials < 1 || eval_angles < 3) throw std::invalid_argument("SearchConfig: bad eval");
    if (init && static_cast<int>(init->entries.size()) != k)
        throw std::invalid_argument("SearchConfig: init support size != k");
}

fpp::KPointDistribution normalize_values(const fpp::KPointDistribution& dist, double mu0,
                                         double mu45) {
    if (!(mu0 > 0.0) || !(mu45 > 0.0))
        throw std::invalid_argument("normalize_values: mu0 and mu45 must be positive");
    double f = 1.0 / std::sqrt(mu0 * mu45);
    fpp::KPointDistribution out = dist;
    for (auto& [p, x] : out.entries) x *= f;
    return out;
}

double evaluate(const fpp::KPointDistribution& dist, const SearchConfig& config) {
    fpp::DirectionalProfile prof =
        fpp::directional_stretch(fpp::EdgeDistribution{dist}, config.eval_n, config.eval_angles,
                                 config.eval_trials, RngStream(config.seed).derive(7).state,
                                 config.margin_factor);
    double denom = std::sqrt(prof.mu0() * prof.mu45());
    double obj = 0.0;
    for (double m : prof.mu_mean) obj = std::max(obj, std::abs(m / denom - 1.0));
    return obj;
}

SearchResult local_search(const SearchConfig& config) {
    config.validate();
    uint64_t eval_seed = RngStream(config.seed).derive(11).state;  // shared by all candidates
    RngSequence walk(RngStream(config.seed).derive(13));

    std::vector<double> logits(static_cast<size_t>(config.k), 0.0);
    std::vector<double> values(static_cast<size_t>(config.k), 1.0);
    if (config.init) {
        for (int i = 0; i < config.k; ++i) {
            logits[static_cast<size_t>(i)] =
                std::log(std::max(config.init->entries[static_cast<size_t>(i)].first, 1e-12));
            values[static_cast<size_t>(i)] = config.init->entries[static_cast<size_t>(i)].second;
        }
    } else {
        for (auto& v : values) v = std::exp(gaussian(walk));
    }

    SearchResult res;
    double best_obj = kInfWeight;
    std::vector<double> best_logits = logits, best_values = values;

    int total_inner = config.outer_iters * config.inner_iters;
    double t0 = 0.02, t1 = 1e-4;
    int iter = 0;

    for (int outer = 0; outer < config.outer_iters; ++outer) {
        std::vector<double> cur_logits = best_logits;
        if (outer > 0)
            for (auto& l : cur_logits) l += config.prob_step * gaussian(walk);
        std::vector<double> probs = simplex_from_logits(cur_logits);
        std::vector<double> cur_values = best_values;

        CheapEval cur = cheap_evaluate(make_dist(probs, cur_values), config, eval_seed);
        if (cur.objective < best_obj) {
            best_obj = cur.objective;
            best_logits = cur_logits;
            best_values = cur_values;
        }

        for (int inner = 0; inner < config.inner_iters; ++inner, ++iter) {
            double temp = t0 * std::pow(t1 / t0, static_cast<double>(iter) /
                                                     std::max(1, total_inner - 1));
            std::vector<double> cand = cur_values;
            for (auto& x : cand) x *= std::exp(config.value_step * gaussian(walk));
            CheapEval ce = cheap_evaluate(make_dist(probs, cand), config, eval_seed);
            double delta = ce.objective - cur.objective;
            bool accept = delta < 0.0 || walk.u01() < std::exp(-delta / temp);
            if (accept) {
                // Re-normalize the accepted candidate by its measured means.
                double f = 1.0 / std::sqrt(ce.mu0 * ce.mu45);
                for (auto& x : cand) x *= f;
                cur_values = cand;
                cur = ce;
                if (ce.objective < best_obj) {
                    best_obj = ce.objective;
                    best_logits = cur_logits;
                    best_values = cur_values;
                }
            }
            res.history.push_back({iter, ce.objective, best_obj, make_dist(probs, cand)});
        }
    }

    std::vector<double> bp = simplex_from_logits(best_logits);
    fpp::KPointDistribution best = make_dist(bp, best_values);
    CheapEval fin = cheap_evaluate(best, config, eval_seed);
    res.best = normalize_values(best, fin.mu0, fin.mu45);
    res.objective = evaluate(res.best, config);
    return res;
}

void write_history_csv(const std::string& path, const SearchResult& result) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw std::runtime_error("cannot open " + path);
    std::fprintf(f, "iter,objective,best_objective");
    if (!result.history.empty()) {
        for (size_t i = 0; i < result.history[0].candidate.entries.size(); ++i)
            std::fprintf(f, ",p%zu,x%zu", i + 1, i + 1);
    }
    std::fprintf(f, "\n");
    for (auto& h : result.history) {
        std::fprintf(f, "%d,%.17g,%.17g", h.iter, h.candidate_objective, h.best_objective);
        for (auto& [p, x] : h.candidate.entries) std::fprintf(f, ",%.17g,%.17g", p, x);
        std::fprintf(f, "\n");
    }
    std::fclose(f);
}

void write_distribution_json(const std::string& path, const fpp::KPointDistribution& dist,
                             double objective) {
    nlohmann::json j;
    j["objective"] = objective;
    auto& arr = j["entries"] = nlohmann::json::array();
    for (auto& [p, x] : dist.entries) arr.push_back({{"p", p}, {"x", x}});
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw std::runtime_error("cannot open " + path);
    std::string text = j.dump(2);
    std::fwrite(text.data(), 1, text.size(), f);
    std::fclose(f);
}

}  // namespace gridmetric::opt
