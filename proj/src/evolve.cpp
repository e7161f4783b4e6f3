#include "lutfit/evolve.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace lutfit {

std::string_view mutation_name(MutationKind kind) {
    return kind == MutationKind::Gaussian ? "gaussian" : "rm";
}

MutationKind parse_mutation(std::string_view name) {
    if (name == "gaussian") return MutationKind::Gaussian;
    if (name == "rm" || name == "rounding") return MutationKind::Rounding;
    throw std::invalid_argument("unknown mutation '" + std::string(name) +
                                "' (expected gaussian or rm)");
}

std::string_view fitness_name(FitnessMode mode) {
    return mode == FitnessMode::Float ? "float" : "fxp";
}

FitnessMode parse_fitness(std::string_view name) {
    if (name == "float") return FitnessMode::Float;
    if (name == "fxp") return FitnessMode::FixedPoint;
    throw std::invalid_argument("unknown fitness mode '" + std::string(name) +
                                "' (expected float or fxp)");
}

GaConfig GaConfig::for_function(FunctionKind kind, int entries) {
    if (entries < 2) throw std::invalid_argument("entries must be at least 2");
    GaConfig cfg;
    cfg.n_breakpoints = entries - 1;
    const bool wide = entries > 8;
    switch (kind) {
        case FunctionKind::Gelu:
        case FunctionKind::Linear:
            cfg.rm_min = 0;
            cfg.rm_max = 6;
            break;
        case FunctionKind::Hswish:
            cfg.rm_min = wide ? 2 : 0;
            cfg.rm_max = 6;
            break;
        case FunctionKind::Exp:
            cfg.rm_min = wide ? 0 : 2;
            cfg.rm_max = 6;
            break;
        case FunctionKind::Div:
        case FunctionKind::Rsqrt:
            cfg.rm_prob = 0.0;
            cfg.mutation = MutationKind::Gaussian;
            break;
    }
    return cfg;
}

void GaConfig::validate() const {
    auto fail = [](const std::string& field, const std::string& why) {
        throw std::invalid_argument("ga." + field + ": " + why);
    };
    auto probability = [&](const char* field, double v) {
        if (!(v >= 0.0 && v <= 1.0)) fail(field, "must lie in [0, 1]");
    };
    if (n_breakpoints < 1) fail("n_breakpoints", "must be >= 1");
    if (population_size < 1) fail("population_size", "must be >= 1");
    probability("cross_prob", cross_prob);
    probability("mutate_prob", mutate_prob);
    probability("rm_prob", rm_prob);
    if (rm_min < 0 || rm_max < rm_min) fail("rm_range", "need 0 <= rm_min <= rm_max");
    if (rm_max > 52) fail("rm_range", "rm_max above 52 exceeds double precision");
    if (static_cast<double>(rm_max - rm_min + 1) * rm_prob > 1.0) {
        fail("rm_prob", "(rm_max - rm_min + 1) * rm_prob must not exceed 1");
    }
    if (iterations < 0) fail("iterations", "must be >= 0");
    if (frac_bits < 0 || frac_bits > 30) fail("frac_bits", "must lie in [0, 30]");
    if (gaussian_sigma && !(*gaussian_sigma > 0.0)) fail("gaussian_sigma", "must be > 0");
    if (!(grid_step > 0.0)) fail("grid_step", "must be > 0");
}

Population init_population(const GaConfig& cfg, const SearchSpace& space, Rng& rng) {
    Population pop;
    pop.individuals.reserve(static_cast<std::size_t>(cfg.population_size));
    for (int i = 0; i < cfg.population_size; ++i) {
        BreakpointSet p(static_cast<std::size_t>(cfg.n_breakpoints));
        for (auto& v : p) v = rng.uniform(space.range.lo, space.range.hi);
        space.repair(p);
        pop.individuals.push_back(std::move(p));
    }
    return pop;
}

void swap_segment(BreakpointSet& a, BreakpointSet& b, std::size_t first, std::size_t last,
                  const SearchSpace& space) {
    if (a.size() != b.size()) throw std::invalid_argument("crossover: size mismatch");
    if (first > last || last >= a.size()) throw std::out_of_range("crossover: bad index range");
    std::swap_ranges(a.begin() + static_cast<std::ptrdiff_t>(first),
                     a.begin() + static_cast<std::ptrdiff_t>(last) + 1,
                     b.begin() + static_cast<std::ptrdiff_t>(first));
    space.repair(a);
    space.repair(b);
}

void crossover(BreakpointSet& a, BreakpointSet& b, const SearchSpace& space, Rng& rng) {
    const std::size_t n = a.size();
    // Pick one of the n(n+1)/2 ranges; rank r enumerates (first, last) row by row.
    std::size_t r = rng.below(n * (n + 1) / 2);
    std::size_t first = 0;
    while (r >= n - first) {
        r -= n - first;
        ++first;
    }
    swap_segment(a, b, first, first + r, space);
}

BreakpointSet gaussian_mutate(BreakpointSet p, double sigma, const SearchSpace& space, Rng& rng) {
    for (auto& v : p) {
        v = std::clamp(v + sigma * rng.normal(), space.range.lo, space.range.hi);
    }
    space.repair(p);
    return p;
}

double round_to_grid(double value, int level) {
    return std::ldexp(std::round(std::ldexp(value, level)), -level);
}

std::optional<int> rounding_level(double draw, const GaConfig& cfg) {
    for (int i = cfg.rm_min; i <= cfg.rm_max; ++i) {
        if (i * cfg.rm_prob <= draw && draw < (i + 1) * cfg.rm_prob) return i;
    }
    return std::nullopt;
}

BreakpointSet rounding_mutate(BreakpointSet p, const GaConfig& cfg, const SearchSpace& space,
                              Rng& rng) {
    for (auto& v : p) {
        if (const auto level = rounding_level(rng.uniform(), cfg)) v = round_to_grid(v, *level);
    }
    space.repair(p);
    return p;
}

std::vector<std::size_t> tournament_select(std::span<const double> fitnesses, Rng& rng) {
    const std::size_t n = fitnesses.size();
    std::vector<std::size_t> chosen(n);
    for (auto& slot : chosen) {
        std::size_t best = rng.below(n);
        for (int k = 1; k < 3; ++k) {
            const std::size_t c = rng.below(n);
            if (fitnesses[c] < fitnesses[best] || (fitnesses[c] == fitnesses[best] && c < best)) {
                best = c;
            }
        }
        slot = best;
    }
    return chosen;
}

double score_individual(const NonLinSpec& spec, const BreakpointSet& p, const GaConfig& cfg,
                        const SampledGrid& grid) {
    PwlTable table = derive_table(spec, p, cfg.grid_step);
    if (cfg.fitness == FitnessMode::FixedPoint) table = round_parameters(std::move(table), cfg.frac_bits);
    return fitness_mse(table, grid);
}

namespace {

std::vector<double> score(const Population& pop, const NonLinSpec& spec, const GaConfig& cfg,
                          const SampledGrid& grid) {
    std::vector<double> fit;
    fit.reserve(pop.individuals.size());
    for (const auto& p : pop.individuals) {
        fit.push_back(score_individual(spec, p, cfg, grid));
    }
    return fit;
}

std::size_t argmin(const std::vector<double>& v) {
    return static_cast<std::size_t>(std::min_element(v.begin(), v.end()) - v.begin());
}

}  // namespace

EvolveResult evolve(const NonLinSpec& spec, const GaConfig& cfg) {
    cfg.validate();
    const SearchSpace space = SearchSpace::of(spec, cfg);
    const SampledGrid grid = SampledGrid::make(spec, cfg.grid_step);
    const double sigma = cfg.sigma_for(spec.search_range());
    Rng rng(cfg.seed);

    Population pop = init_population(cfg, space, rng);
    std::vector<double> fit = score(pop, spec, cfg, grid);

    const PwlTable placeholder{spec, {}, {}, {}};
    EvolveResult result{placeholder, placeholder, 0.0, 0.0, {}};
    result.best_history.reserve(static_cast<std::size_t>(cfg.iterations) + 1);
    result.best_history.push_back(fit[argmin(fit)]);

    const std::size_t n = pop.individuals.size();
    for (int gen = 0; gen < cfg.iterations; ++gen) {
        for (std::size_t i = 0; i < n; ++i) {
            const double rand_c = rng.uniform();
            const double rand_m = rng.uniform();
            if (rand_c < cfg.cross_prob && n > 1) {
                std::size_t j = rng.below(n - 1);
                if (j >= i) ++j;
                crossover(pop.individuals[i], pop.individuals[j], space, rng);
            }
            if (rand_m < cfg.mutate_prob) {
                auto& p = pop.individuals[i];
                p = cfg.mutation == MutationKind::Gaussian
                        ? gaussian_mutate(std::move(p), sigma, space, rng)
                        : rounding_mutate(std::move(p), cfg, space, rng);
            }
        }
        // Score the varied genotypes so tournaments rank what they copy.
        fit = score(pop, spec, cfg, grid);
        const auto picks = tournament_select(fit, rng);

        Population next;
        next.generation = pop.generation + 1;
        next.individuals.reserve(n);
        std::vector<double> next_fit;
        next_fit.reserve(n);
        for (std::size_t k : picks) {
            next.individuals.push_back(pop.individuals[k]);
            next_fit.push_back(fit[k]);
        }
        pop = std::move(next);
        fit = std::move(next_fit);
        result.best_history.push_back(fit[argmin(fit)]);
    }

    const std::size_t best = argmin(fit);
    result.float_table = derive_table(spec, pop.individuals[best], cfg.grid_step);
    result.float_mse = fitness_mse(result.float_table, grid);
    result.best_fitness = fit[best];
    result.table = round_parameters(result.float_table, cfg.frac_bits);
    return result;
}

}  // namespace lutfit
