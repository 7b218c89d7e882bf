#pragma once

#include <cstdint>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "featbench/classifier.hpp"
#include "featbench/dataset.hpp"
#include "featbench/errors.hpp"
#include "featbench/feature_select.hpp"
#include "featbench/metrics.hpp"
#include "featbench/rng.hpp"

namespace featbench {

struct SdsConfig {
    std::size_t n_agents = 50;
    std::size_t max_iterations = 100;
    /// Per-bit flip probability when copying an active hypothesis; negative
    /// means 1 / feature count.
    double mutation_rate = -1.0;
    /// Probability of setting each bit in a fresh hypothesis.
    double init_density = 0.5;
    /// Split used inside fitness evaluation (seed field unused; each agent
    /// splits with its own private seed).
    SplitConfig fitness_split{0.8, 0, true};
    /// Fitness classifier; restricted to tree, naive Bayes, or neural
    /// network.
    ClassifierSpec classifier = TreeParams{};
    /// Fraction of agents sharing one hypothesis that counts as convergence.
    double convergence_fraction = 0.33;
    std::uint64_t seed = 0;
};

struct SdsAgent {
    FeatureMask hypothesis;
    bool active = false;
    double fitness = 0.0;
    /// Drives this agent's private train/test split inside fitness.
    std::uint64_t private_seed = 0;
};

struct SdsTraceRow {
    std::size_t iteration = 0;
    /// Best fitness seen so far (non-decreasing across rows).
    double best_fitness = 0.0;
    double mean_fitness = 0.0;
    std::size_t active_count = 0;
    FeatureMask best_hypothesis;
};

struct SdsResult {
    FeatureMask best_mask;
    double best_fitness = 0.0;
    /// Private seed of the agent that produced best_mask; re-evaluating
    /// sds_fitness with it reproduces best_fitness.
    std::uint64_t best_private_seed = 0;
    std::vector<SdsTraceRow> trace;
};

namespace detail {

// Stream tags for the independent per-phase random streams.
inline constexpr std::uint64_t kSdsInitTag = 0x5D51;
inline constexpr std::uint64_t kSdsTestTag = 0x5D52;
inline constexpr std::uint64_t kSdsDiffTag = 0x5D53;
inline constexpr std::uint64_t kSdsPrivateTag = 0x5D54;
inline constexpr std::uint64_t kSdsFitTag = 0x5D55;

inline FeatureMask random_mask(Rng& rng, std::size_t d, double density) {
    FeatureMask m;
    m.bits.resize(d);
    for (std::size_t f = 0; f < d; ++f) m.bits[f] = rng.next_bool(density) ? 1 : 0;
    if (m.count() == 0) m.bits[rng.next_index(d)] = 1;
    return m;
}

inline std::string mask_key(const FeatureMask& m, std::uint64_t private_seed) {
    std::string key(reinterpret_cast<const char*>(m.bits.data()), m.bits.size());
    key.append(reinterpret_cast<const char*>(&private_seed), sizeof(private_seed));
    return key;
}

}  // namespace detail

inline void sds_validate(const SdsConfig& cfg) {
    if (cfg.n_agents < 1) throw ConfigError("sds: n_agents must be >= 1");
    if (cfg.mutation_rate > 1.0) throw ConfigError("sds: mutation_rate must be in [0,1]");
    if (cfg.init_density <= 0.0 || cfg.init_density >= 1.0)
        throw ConfigError("sds: init_density must be in (0,1)");
    if (cfg.convergence_fraction <= 0.0 || cfg.convergence_fraction > 1.0)
        throw ConfigError("sds: convergence_fraction must be in (0,1]");
    if (cfg.fitness_split.train_fraction <= 0.0 || cfg.fitness_split.train_fraction >= 1.0)
        throw ConfigError("sds: fitness_split train_fraction must be in (0,1)");
    const bool allowed = std::holds_alternative<TreeParams>(cfg.classifier) ||
                         std::holds_alternative<NbParams>(cfg.classifier) ||
                         std::holds_alternative<NnParams>(cfg.classifier);
    if (!allowed)
        throw ConfigError("sds: classifier must be tree, naive Bayes, or neural network");
}

/// Fresh population: every bit drawn at init_density (empty masks repaired
/// with one forced random bit), all agents passive, per-agent private seeds
/// derived from cfg.seed.
inline std::vector<SdsAgent> sds_init(const SdsConfig& cfg, std::size_t d) {
    sds_validate(cfg);
    if (d < 1) throw DataError("sds: need at least 1 feature");
    std::vector<SdsAgent> pop(cfg.n_agents);
    for (std::size_t i = 0; i < cfg.n_agents; ++i) {
        Rng rng(mix_seed(cfg.seed, detail::kSdsInitTag, 0, i));
        pop[i].hypothesis = detail::random_mask(rng, d, cfg.init_density);
        pop[i].active = false;
        pop[i].fitness = 0.0;
        pop[i].private_seed = mix_seed(cfg.seed, detail::kSdsPrivateTag, i);
    }
    return pop;
}

/// Test accuracy of cfg.classifier trained on the agent's private
/// train/test split of the masked dataset. Degenerate splits (a class
/// missing from the train part, an unsplittable class, an empty test part)
/// and training failures on the sampled data score 0 instead of throwing;
/// configuration mistakes still propagate.
inline double sds_fitness(const SdsAgent& agent, const Dataset& d, const SdsConfig& cfg) {
    if (agent.hypothesis.count() == 0) throw DataError("sds: empty hypothesis");
    try {
        const Dataset projected = apply_mask(d, agent.hypothesis);
        SplitConfig split = cfg.fitness_split;
        split.seed = agent.private_seed;
        auto [train, test] = stratified_split(projected, split);
        if (test.n_rows() == 0) return 0.0;
        const auto train_counts = train.class_counts();
        for (std::size_t c : train_counts)
            if (c == 0) return 0.0;
        const AnyModel model =
            train_classifier(train, cfg.classifier, mix_seed(agent.private_seed,
                                                             detail::kSdsFitTag));
        const auto predictions = predict_any(model, test);
        const auto cm = confusion(test.labels, predictions, test.n_classes());
        return report(cm).accuracy;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception&) {
        return 0.0;
    }
}

/// Each agent compares its fitness against one uniformly drawn other agent
/// (itself excluded) and becomes active iff strictly greater. Comparisons
/// read a snapshot of the pre-phase fitnesses; a 1-agent population stays
/// passive. Draw order is agent 0 first.
inline void sds_test_phase(std::vector<SdsAgent>& pop, Rng& rng) {
    const std::size_t n = pop.size();
    if (n == 1) {
        pop[0].active = false;
        return;
    }
    std::vector<double> snapshot(n);
    for (std::size_t i = 0; i < n; ++i) snapshot[i] = pop[i].fitness;
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t j = rng.next_index(n - 1);
        if (j >= i) ++j;
        pop[i].active = snapshot[i] > snapshot[j];
    }
}

/// Each passive agent picks one uniform agent (itself allowed): an active
/// pick is copied with per-bit mutation, a passive pick triggers a fresh
/// random hypothesis at init_density. Empty-mask repair applies to both.
/// Active agents keep their hypotheses. Activity flags are read from a
/// pre-phase snapshot and left unchanged; draw order is agent 0 first.
inline void sds_diffusion_phase(std::vector<SdsAgent>& pop, Rng& rng, double mutation_rate,
                                double init_density) {
    const std::size_t n = pop.size();
    std::vector<std::uint8_t> was_active(n);
    std::vector<FeatureMask> old_hypothesis(n);
    for (std::size_t i = 0; i < n; ++i) {
        was_active[i] = pop[i].active ? 1 : 0;
        old_hypothesis[i] = pop[i].hypothesis;
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (was_active[i]) continue;
        const std::size_t pick = rng.next_index(n);
        const std::size_t d = pop[i].hypothesis.size();
        if (was_active[pick]) {
            FeatureMask copy = old_hypothesis[pick];
            for (std::size_t f = 0; f < d; ++f)
                if (rng.next_bool(mutation_rate)) copy.bits[f] ^= 1;
            if (copy.count() == 0) copy.bits[rng.next_index(d)] = 1;
            pop[i].hypothesis = std::move(copy);
        } else {
            pop[i].hypothesis = detail::random_mask(rng, d, init_density);
        }
    }
}

/// Full search loop: init, evaluate, then per iteration test -> diffuse ->
/// evaluate, recording one trace row per evaluation round. Stops at
/// max_iterations or when convergence_fraction of the agents share one
/// identical hypothesis. Returns the best hypothesis ever evaluated
/// together with its fitness and the owning agent's private seed. Fitness
/// values are cached per (hypothesis, private seed) pair.
inline SdsResult sds_run(const Dataset& d, const SdsConfig& cfg) {
    sds_validate(cfg);
    if (d.n_rows() == 0) throw DataError("sds: empty dataset");
    const std::size_t nf = d.n_cols();
    const double mutation =
        cfg.mutation_rate < 0.0 ? 1.0 / static_cast<double>(nf) : cfg.mutation_rate;

    std::vector<SdsAgent> pop = sds_init(cfg, nf);
    std::unordered_map<std::string, double> cache;
    auto evaluate = [&](SdsAgent& agent) {
        const std::string key = detail::mask_key(agent.hypothesis, agent.private_seed);
        const auto it = cache.find(key);
        if (it != cache.end()) {
            agent.fitness = it->second;
            return;
        }
        agent.fitness = sds_fitness(agent, d, cfg);
        cache.emplace(key, agent.fitness);
    };

    SdsResult result;
    result.best_fitness = -1.0;
    auto update_champion = [&]() {
        for (const SdsAgent& agent : pop) {
            if (agent.fitness > result.best_fitness) {
                result.best_fitness = agent.fitness;
                result.best_mask = agent.hypothesis;
                result.best_private_seed = agent.private_seed;
            }
        }
    };
    auto record_trace = [&](std::size_t iteration) {
        SdsTraceRow row;
        row.iteration = iteration;
        row.best_fitness = result.best_fitness;
        row.best_hypothesis = result.best_mask;
        double total = 0.0;
        for (const SdsAgent& agent : pop) {
            total += agent.fitness;
            row.active_count += agent.active ? 1 : 0;
        }
        row.mean_fitness = total / static_cast<double>(pop.size());
        result.trace.push_back(std::move(row));
    };
    auto converged = [&]() {
        std::unordered_map<std::string, std::size_t> multiplicity;
        std::size_t top = 0;
        for (const SdsAgent& agent : pop) {
            const std::string key(reinterpret_cast<const char*>(agent.hypothesis.bits.data()),
                                  agent.hypothesis.bits.size());
            top = std::max(top, ++multiplicity[key]);
        }
        return static_cast<double>(top) >=
               cfg.convergence_fraction * static_cast<double>(pop.size());
    };

    for (SdsAgent& agent : pop) evaluate(agent);
    update_champion();
    record_trace(0);
    if (!converged()) {
        for (std::size_t it = 1; it <= cfg.max_iterations; ++it) {
            Rng test_rng(mix_seed(cfg.seed, detail::kSdsTestTag, it));
            sds_test_phase(pop, test_rng);
            Rng diff_rng(mix_seed(cfg.seed, detail::kSdsDiffTag, it));
            sds_diffusion_phase(pop, diff_rng, mutation, cfg.init_density);
            for (SdsAgent& agent : pop) evaluate(agent);
            update_champion();
            record_trace(it);
            if (converged()) break;
        }
    }
    return result;
}

/// CSV dump, one row per iteration; the best hypothesis is rendered as a
/// 0/1 string, feature 0 first.
inline void write_sds_trace_csv(std::ostream& os, const std::vector<SdsTraceRow>& trace) {
    os << "iteration,best_fitness,mean_fitness,active_count,best_hypothesis\n";
    char buf[32];
    for (const SdsTraceRow& row : trace) {
        os << row.iteration << ',';
        std::snprintf(buf, sizeof(buf), "%.17g", row.best_fitness);
        os << buf << ',';
        std::snprintf(buf, sizeof(buf), "%.17g", row.mean_fitness);
        os << buf << ',' << row.active_count << ',';
        for (std::uint8_t b : row.best_hypothesis.bits) os << (b ? '1' : '0');
        os << '\n';
    }
}

}  // namespace featbench
