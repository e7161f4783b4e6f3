#pragma once

// Genetic search over breakpoint placements.
//
// Each individual is an ascending set of breakpoints; its table is derived by
// interpolation (see derive_table) and scored with fitness_mse. Generations
// apply crossover and mutation per individual and then refill the population
// by 3-way tournaments. Mutation is either Gaussian noise or rounding
// mutation, which snaps breakpoints onto random power-of-two grids so the
// search favours placements that survive breakpoint quantization.

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "lutfit/nonlin.hpp"
#include "lutfit/pwl.hpp"
#include "lutfit/rng.hpp"

namespace lutfit {

using BreakpointSet = std::vector<double>;

enum class MutationKind { Gaussian, Rounding };

/// Which parameters a candidate is scored with: the exact interpolated
/// slopes/intercepts, or the same values rounded to frac_bits as they will
/// be stored.
enum class FitnessMode { Float, FixedPoint };

std::string_view mutation_name(MutationKind kind);  // "gaussian" / "rm"
MutationKind parse_mutation(std::string_view name);
std::string_view fitness_name(FitnessMode mode);  // "float" / "fxp"
FitnessMode parse_fitness(std::string_view name);

struct GaConfig {
    int n_breakpoints = 7;
    int population_size = 50;
    double cross_prob = 0.7;
    double mutate_prob = 0.2;
    /// Per-level rounding-mutation probability.
    double rm_prob = 0.05;
    /// Grid exponents tried by rounding mutation: 2^-rm_min ... 2^-rm_max.
    int rm_min = 0;
    int rm_max = 6;
    int iterations = 500;
    /// Fractional bits of the exported slopes and intercepts.
    int frac_bits = 5;
    MutationKind mutation = MutationKind::Rounding;
    FitnessMode fitness = FitnessMode::FixedPoint;
    /// Gaussian noise scale; 0.05 * range width when unset.
    std::optional<double> gaussian_sigma;
    std::uint64_t seed = 0;
    double grid_step = kDefaultGridStep;

    /// Per-operator defaults for an `entries`-entry table (8 or 16): the
    /// search hyperparameters above plus the operator's rounding-mutation
    /// probability and grid range. DIV/RSQRT get Gaussian mutation with
    /// rounding mutation disabled.
    static GaConfig for_function(FunctionKind kind, int entries);

    int entries() const { return n_breakpoints + 1; }
    double sigma_for(const Interval& range) const {
        return gaussian_sigma.value_or(0.05 * range.width());
    }

    /// Throws std::invalid_argument naming the offending field.
    void validate() const;
};

/// Breakpoint-set constraints shared by every variation operator.
struct SearchSpace {
    Interval range;
    double gap = min_gap();

    static SearchSpace of(const NonLinSpec& spec, const GaConfig& cfg) {
        return {spec.search_range(), min_gap(cfg.grid_step)};
    }
    void repair(BreakpointSet& p) const { repair_breakpoints(p, range, gap); }
    bool valid(const BreakpointSet& p) const { return breakpoints_valid(p, range, gap); }
};

struct Population {
    std::vector<BreakpointSet> individuals;
    int generation = 0;
};

Population init_population(const GaConfig& cfg, const SearchSpace& space, Rng& rng);

/// Exchange indices [first, last] between a and b, then repair both.
void swap_segment(BreakpointSet& a, BreakpointSet& b, std::size_t first, std::size_t last,
                  const SearchSpace& space);

/// Swap a uniformly chosen contiguous index range (uniform over all pairs
/// first <= last) between a and b, in place.
void crossover(BreakpointSet& a, BreakpointSet& b, const SearchSpace& space, Rng& rng);

BreakpointSet gaussian_mutate(BreakpointSet p, double sigma, const SearchSpace& space, Rng& rng);

/// Round to the nearest multiple of 2^-level (ties away from zero).
double round_to_grid(double value, int level);

/// The grid level selected by a uniform draw, i.e. the i in [rm_min, rm_max]
/// with i * rm_prob <= draw < (i + 1) * rm_prob, if any.
std::optional<int> rounding_level(double draw, const GaConfig& cfg);

/// One uniform draw per element; elements whose draw selects a level are
/// rounded onto that grid, the rest pass through. Result is repaired.
BreakpointSet rounding_mutate(BreakpointSet p, const GaConfig& cfg, const SearchSpace& space,
                              Rng& rng);

/// Build the next generation from N_p independent 3-way tournaments
/// (candidates drawn with replacement, lowest fitness wins, ties to the
/// lowest index). Returns the chosen indices.
std::vector<std::size_t> tournament_select(std::span<const double> fitnesses, Rng& rng);

struct EvolveResult {
    /// Best final individual's table with slopes/intercepts rounded to
    /// cfg.frac_bits.
    PwlTable table;
    /// Same breakpoints, unrounded parameters.
    PwlTable float_table;
    /// fitness_mse of float_table.
    double float_mse = 0.0;
    /// Fitness of the returned individual under cfg.fitness.
    double best_fitness = 0.0;
    /// Minimum fitness (under cfg.fitness) of generation n for n = 0 .. T.
    std::vector<double> best_history;
};

/// Score one individual under cfg.fitness.
double score_individual(const NonLinSpec& spec, const BreakpointSet& p, const GaConfig& cfg,
                        const SampledGrid& grid);

EvolveResult evolve(const NonLinSpec& spec, const GaConfig& cfg);

}  // namespace lutfit
