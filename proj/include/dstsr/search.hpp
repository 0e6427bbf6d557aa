#pragma once

#include "dstsr/dataset.hpp"
#include "dstsr/expr.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace dstsr {

enum class MutationKind { ReplaceOperator, ReplaceSubtree, DeleteNode, PerturbConstant, InsertNode };
inline constexpr std::size_t kMutationKindCount = 5;

/// Relative selection weights, indexed by MutationKind.
struct MutationWeights {
    std::array<double, kMutationKindCount> weight{1.0, 1.0, 0.5, 2.0, 1.0};

    [[nodiscard]] double operator[](MutationKind k) const { return weight[static_cast<std::size_t>(k)]; }
};

struct SearchConfig {
    std::size_t population_count = 2;
    std::size_t population_size = 60;
    std::size_t iterations = 100;
    double parsimony = 0.0;
    int max_complexity = 30;
    OperatorSet operators{};
    std::vector<Variable> features{kAllVariables.begin(), kAllVariables.end()};
    double constant_min = -2.0;
    double constant_max = 2.0;
    std::size_t tournament_size = 5;
    MutationWeights mutation_weights{};
    double crossover_probability = 0.1;
    std::size_t init_max_depth = 4;
    std::size_t subtree_max_depth = 3;
    /// Rounds of constant tuning for each generation's best; every round
    /// tries one scale up and down on each constant.
    std::size_t constant_rounds = 8;
    /// Multiplicative perturbation factor exp(s * N(0,1)), s log-uniform in
    /// [perturb_scale_min, perturb_scale_max].
    double perturb_scale_min = 1e-5;
    double perturb_scale_max = 0.5;
    /// Chance that a constant mutation also negates the constant.
    double sign_flip_probability = 0.05;
    /// 0 = use every finite training row; otherwise a seeded random subset.
    std::size_t max_train_rows = 0;
    std::uint64_t seed = 0;
    /// Worker threads for independent populations / runs (0 = hardware).
    std::size_t threads = 1;

    /// Throws std::invalid_argument when a field is out of range.
    void validate() const;
    [[nodiscard]] RandomTreeOptions tree_options() const;
};

struct Candidate {
    Expr expr;
    int complexity = 0;
    double loss = 0.0;
    double fitness = 0.0;
};

/// Best candidate (by loss) seen at each complexity.
class HallOfFame {
public:
    explicit HallOfFame(int max_complexity = 30) : max_complexity_(max_complexity) {}

    /// Returns true when the candidate became the entry for its complexity.
    bool consider(const Candidate& c);
    void merge(const HallOfFame& other);

    [[nodiscard]] const std::map<int, Candidate>& entries() const noexcept { return entries_; }
    [[nodiscard]] int max_complexity() const noexcept { return max_complexity_; }
    [[nodiscard]] std::size_t size() const noexcept { return entries_.size(); }
    [[nodiscard]] const Candidate& best() const;

private:
    int max_complexity_;
    std::map<int, Candidate> entries_;
};

/// Finite rows of the model inputs and the dDst/dt target.
class TrainingData {
public:
    /// Drops rows with a non-finite feature or target. `max_rows` > 0 keeps a
    /// seeded random subset in time order.
    TrainingData(const DerivedSeries& series, std::span<const Variable> features,
                 std::size_t max_rows = 0, std::uint64_t seed = 0);

    [[nodiscard]] std::size_t size() const noexcept { return target_.size(); }
    [[nodiscard]] FeatureTable features() const;
    [[nodiscard]] std::span<const double> target() const noexcept { return target_; }

private:
    std::array<std::vector<double>, kVariableCount> columns_;
    std::vector<double> target_;
};

/// Mean absolute error against dDst/dt; +infinity when any prediction is NaN.
/// Throws std::invalid_argument for empty data.
double loss_l1(const Expr& expr, const TrainingData& data);
double loss_l1(const Expr& expr, const DerivedSeries& rows);

double fitness(double loss, int complexity, double parsimony);

Expr mutate(const Expr& expr, Rng& rng, const SearchConfig& config);
Expr mutate(const Expr& expr, Rng& rng, const SearchConfig& config, MutationKind kind);

/// Copy of `a` with a random subtree replaced by a random subtree of `b`;
/// falls back to `a` when no exchange fits within max_complexity.
Expr crossover(const Expr& a, const Expr& b, Rng& rng, int max_complexity = 30);

struct EvolveResult {
    HallOfFame hall_of_fame;
    /// best_fitness[p][g]: best fitness of population p after generation g
    /// (g = 0 is the initial population).
    std::vector<std::vector<double>> best_fitness;
};

EvolveResult evolve_detailed(const SearchConfig& config, const TrainingData& train);
HallOfFame evolve(const SearchConfig& config, const DerivedSeries& train);

struct MultiRunOptions {
    double parsimony_min = 0.0;
    double parsimony_max = 0.9;
    std::size_t population_size_min = 20;
    std::size_t population_size_max = 120;
};

struct RunResult {
    std::size_t run_id = 0;
    double parsimony = 0.0;
    std::size_t population_size = 0;
    std::uint64_t seed = 0;
    HallOfFame hall_of_fame;
};

struct RunEnsemble {
    std::vector<RunResult> runs;
};

/// Independent runs with per-run sampled parsimony and population size; the
/// result does not depend on `base.threads`.
RunEnsemble multi_run(const SearchConfig& base, std::size_t n_runs, const DerivedSeries& train,
                      const MultiRunOptions& options = {});
RunEnsemble multi_run(const SearchConfig& base, std::size_t n_runs, const TrainingData& train,
                      const MultiRunOptions& options = {});

struct RankedCandidate {
    std::string equation;
    Candidate candidate;
    double parsimony = 0.0;
    std::size_t population_size = 0;
    std::size_t run_id = 0;
    std::uint64_t seed = 0;
};

/// Drops candidates above `max_complexity` or with non-finite loss, removes
/// duplicate canonical strings and sorts by (loss, complexity, text).
std::vector<RankedCandidate> consolidate(const RunEnsemble& ensemble, int max_complexity = 30);

/// Columns: rank, equation_text, complexity, l1_loss, parsimony,
/// population_size, run_id, seed.
void write_candidates_csv(std::ostream& out, const std::vector<RankedCandidate>& candidates);

struct CandidateRow {
    std::size_t rank = 0;
    std::string equation;
    int complexity = 0;
    double loss = 0.0;
};
std::vector<CandidateRow> read_candidates_csv(std::istream& in);

} // namespace dstsr
