#include "dstsr/search.hpp"

#include "dstsr/csv.hpp"
#include "dstsr/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <unordered_map>

namespace dstsr {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Rng stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                      static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
    return Rng(seq);
}

std::size_t random_index(Rng& rng, std::size_t n)
{
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

std::vector<std::size_t> indices_where(const Expr& e, auto pred)
{
    std::vector<std::size_t> out;
    const auto nodes = e.nodes();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (pred(nodes[i])) {
            out.push_back(i);
        }
    }
    return out;
}

bool is_internal(const Node& n) { return !n.is_leaf(); }
bool is_constant(const Node& n) { return n.kind == NodeKind::Constant; }

bool applicable(const Expr& e, MutationKind kind)
{
    switch (kind) {
    case MutationKind::ReplaceOperator:
    case MutationKind::DeleteNode:
        return std::any_of(e.nodes().begin(), e.nodes().end(), is_internal);
    case MutationKind::PerturbConstant:
        return std::any_of(e.nodes().begin(), e.nodes().end(), is_constant);
    default: return true;
    }
}

double perturb_constant_value(double v, Rng& rng, const SearchConfig& config)
{
    const RandomTreeOptions opts = config.tree_options();
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> log_scale(std::log(config.perturb_scale_min),
                                                     std::log(config.perturb_scale_max));
    for (int attempt = 0; attempt < 32; ++attempt) {
        double out;
        if (v == 0.0) {
            out = std::uniform_real_distribution<double>(opts.constant_min, opts.constant_max)(rng);
        } else {
            out = v * std::exp(std::exp(log_scale(rng)) * gauss(rng));
        }
        out = round_significant(out);
        if (out != v && std::isfinite(out)) {
            return out;
        }
    }
    return round_significant(v == 0.0 ? 1.0 : v * 1.01);
}

Expr mutate_once(const Expr& e, Rng& rng, const SearchConfig& config, MutationKind kind)
{
    if (!applicable(e, kind)) {
        return e;
    }
    const auto opts = config.tree_options();
    const auto nodes = e.nodes();
    switch (kind) {
    case MutationKind::ReplaceOperator: {
        const auto internal = indices_where(e, is_internal);
        const std::size_t i = internal[random_index(rng, internal.size())];
        Node n = nodes[i];
        if (n.kind == NodeKind::Unary) {
            const auto& ops = opts.operators.unary;
            if (ops.empty()) return e;
            n.code = static_cast<std::uint8_t>(ops[random_index(rng, ops.size())]);
        } else {
            const auto& ops = opts.operators.binary;
            if (ops.empty()) return e;
            n.code = static_cast<std::uint8_t>(ops[random_index(rng, ops.size())]);
        }
        return e.replace_node(i, n);
    }
    case MutationKind::ReplaceSubtree: {
        const std::size_t i = random_index(rng, nodes.size());
        return e.replace_subtree(i, random_expr(rng, config.subtree_max_depth, opts));
    }
    case MutationKind::DeleteNode: {
        const auto internal = indices_where(e, is_internal);
        const std::size_t i = internal[random_index(rng, internal.size())];
        const Expr sub = e.subtree(i);
        const std::size_t which = sub.root().arity() == 2 ? random_index(rng, 2) : 0;
        return e.replace_subtree(i, sub.child(which));
    }
    case MutationKind::PerturbConstant: {
        const auto consts = indices_where(e, is_constant);
        const std::size_t i = consts[random_index(rng, consts.size())];
        Node n = nodes[i];
        n.value = perturb_constant_value(n.value, rng, config);
        if (std::bernoulli_distribution(config.sign_flip_probability)(rng)) {
            n.value = -n.value;
        }
        return e.replace_node(i, n);
    }
    case MutationKind::InsertNode: {
        const std::size_t i = random_index(rng, nodes.size());
        const Expr sub = e.subtree(i);
        const auto& ops = opts.operators;
        const std::size_t n_ops = ops.unary.size() + ops.binary.size();
        if (n_ops == 0) return e;
        const std::size_t k = random_index(rng, n_ops);
        if (k < ops.unary.size()) {
            return e.replace_subtree(i, Expr::unary(ops.unary[k], sub));
        }
        const auto op = ops.binary[k - ops.unary.size()];
        const Expr leaf = random_leaf(rng, opts);
        const bool sub_left = random_index(rng, 2) == 0;
        return e.replace_subtree(i, sub_left ? Expr::binary(op, sub, leaf) : Expr::binary(op, leaf, sub));
    }
    }
    return e;
}

/// Folds constant subtrees and rounds constants to printer precision, so the
/// evaluated tree is exactly what print() reproduces.
Expr canonicalize(const Expr& e) { return quantize_constants(fold_constants(e)); }

struct Scorer {
    const TrainingData& data;
    double parsimony;

    Candidate operator()(Expr e) const
    {
        Candidate c;
        c.complexity = complexity(e);
        c.loss = loss_l1(e, data);
        c.fitness = fitness(c.loss, c.complexity, parsimony);
        c.expr = std::move(e);
        return c;
    }
};

std::size_t best_index(const std::vector<Candidate>& pop)
{
    std::size_t best = 0;
    for (std::size_t i = 1; i < pop.size(); ++i) {
        if (pop[i].fitness < pop[best].fitness) {
            best = i;
        }
    }
    return best;
}

std::size_t lowest_loss_index(const std::vector<Candidate>& pop)
{
    std::size_t best = 0;
    for (std::size_t i = 1; i < pop.size(); ++i) {
        if (pop[i].loss < pop[best].loss) {
            best = i;
        }
    }
    return best;
}

const Candidate& tournament(const std::vector<Candidate>& pop, std::size_t size, Rng& rng)
{
    std::size_t best = random_index(rng, pop.size());
    for (std::size_t k = 1; k < size; ++k) {
        const std::size_t i = random_index(rng, pop.size());
        if (pop[i].fitness < pop[best].fitness) {
            best = i;
        }
    }
    return pop[best];
}

Candidate optimize_constants(Candidate best, Rng& rng, const SearchConfig& config,
                             const Scorer& score, HallOfFame& hof)
{
    const auto consts = indices_where(best.expr, is_constant);
    if (consts.empty()) {
        return best;
    }
    std::uniform_real_distribution<double> log_scale(std::log(config.perturb_scale_min),
                                                     std::log(config.perturb_scale_max));
    for (std::size_t round = 0; round < config.constant_rounds; ++round) {
        const double s = std::exp(log_scale(rng));
        for (const std::size_t i : consts) {
            for (const double factor : {std::exp(s), std::exp(-s)}) {
                Node n = best.expr.nodes()[i];
                const double v = round_significant(n.value * factor);
                if (v == n.value || !std::isfinite(v)) continue;
                n.value = v;
                auto trial = score(best.expr.replace_node(i, n));
                hof.consider(trial);
                if (trial.fitness < best.fitness) {
                    best = std::move(trial);
                    break;
                }
            }
        }
    }
    return best;
}

void evolve_population(const SearchConfig& config, const TrainingData& train, std::size_t pop_id,
                       HallOfFame& hof, std::vector<double>& history)
{
    Rng rng = stream(config.seed, pop_id, 0x5eed);
    const auto opts = config.tree_options();
    const Scorer score{train, config.parsimony};

    std::vector<Candidate> pop;
    pop.reserve(config.population_size);
    while (pop.size() < config.population_size) {
        Expr e = canonicalize(random_expr(rng, config.init_max_depth, opts));
        if (static_cast<int>(e.size()) > config.max_complexity) {
            e = canonicalize(random_leaf(rng, opts));
        }
        pop.push_back(score(std::move(e)));
        hof.consider(pop.back());
    }
    history.push_back(pop[best_index(pop)].fitness);

    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const std::size_t tsize = std::min(config.tournament_size, pop.size());
    for (std::size_t gen = 0; gen < config.iterations; ++gen) {
        std::vector<Candidate> next;
        next.reserve(pop.size());
        next.push_back(pop[best_index(pop)]);
        while (next.size() < pop.size()) {
            Expr child;
            if (unit(rng) < config.crossover_probability) {
                const auto& a = tournament(pop, tsize, rng);
                const auto& b = tournament(pop, tsize, rng);
                child = crossover(a.expr, b.expr, rng, config.max_complexity);
            } else {
                child = mutate(tournament(pop, tsize, rng).expr, rng, config);
            }
            next.push_back(score(canonicalize(child)));
            hof.consider(next.back());
        }
        const std::size_t b = best_index(next);
        next[b] = optimize_constants(std::move(next[b]), rng, config, score, hof);
        const std::size_t l = lowest_loss_index(next);
        if (l != b) {
            next[l] = optimize_constants(std::move(next[l]), rng, config, score, hof);
        }
        pop = std::move(next);
        history.push_back(pop[best_index(pop)].fitness);
    }
}

} // namespace

void SearchConfig::validate() const
{
    auto fail = [](const std::string& m) { throw std::invalid_argument("search config: " + m); };
    if (population_count < 1) fail("population_count must be >= 1");
    if (population_size < 2) fail("population_size must be >= 2");
    if (max_complexity < 1) fail("max_complexity must be >= 1");
    if (!(parsimony >= 0.0) || !std::isfinite(parsimony)) fail("parsimony must be >= 0");
    if (features.empty()) fail("features must not be empty");
    if (!(constant_min < constant_max)) fail("constant range must be non-empty");
    if (tournament_size < 1) fail("tournament_size must be >= 1");
    if (init_max_depth < 1 || subtree_max_depth < 1) fail("tree depths must be >= 1");
    if (!(perturb_scale_min > 0.0) || !(perturb_scale_min <= perturb_scale_max)) {
        fail("perturbation scale range must be positive and ordered");
    }
    if (!(sign_flip_probability >= 0.0 && sign_flip_probability <= 1.0)) {
        fail("sign_flip_probability must be in [0, 1]");
    }
    if (crossover_probability < 0.0 || crossover_probability > 1.0) {
        fail("crossover_probability must be in [0, 1]");
    }
    double total = 0.0;
    for (double w : mutation_weights.weight) {
        if (w < 0.0) fail("mutation weights must be nonnegative");
        total += w;
    }
    if (!(total > 0.0)) fail("at least one mutation weight must be positive");
}

RandomTreeOptions SearchConfig::tree_options() const
{
    RandomTreeOptions o;
    o.features = features;
    o.operators = operators;
    o.constant_min = constant_min;
    o.constant_max = constant_max;
    return o;
}

bool HallOfFame::consider(const Candidate& c)
{
    if (c.complexity > max_complexity_ || std::isnan(c.loss)) {
        return false;
    }
    auto it = entries_.find(c.complexity);
    if (it == entries_.end()) {
        entries_.emplace(c.complexity, c);
        return true;
    }
    if (c.loss < it->second.loss) {
        it->second = c;
        return true;
    }
    return false;
}

void HallOfFame::merge(const HallOfFame& other)
{
    for (const auto& [k, c] : other.entries_) {
        consider(c);
    }
}

const Candidate& HallOfFame::best() const
{
    if (entries_.empty()) {
        throw std::logic_error("empty hall of fame");
    }
    auto best = entries_.begin();
    for (auto it = entries_.begin(); it != entries_.end(); ++it) {
        if (it->second.loss < best->second.loss) {
            best = it;
        }
    }
    return best->second;
}

TrainingData::TrainingData(const DerivedSeries& series, std::span<const Variable> features,
                           std::size_t max_rows, std::uint64_t seed)
{
    const auto table = series.features();
    const auto target = series.ddst_dt();
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < series.size(); ++i) {
        bool ok = std::isfinite(target[i]);
        for (auto v : features) {
            ok = ok && std::isfinite(table.columns[static_cast<std::size_t>(v)][i]);
        }
        if (ok) {
            keep.push_back(i);
        }
    }
    if (max_rows > 0 && keep.size() > max_rows) {
        std::vector<std::size_t> chosen;
        Rng rng = stream(seed, 0x7a1b);
        std::sample(keep.begin(), keep.end(), std::back_inserter(chosen), max_rows, rng);
        keep = std::move(chosen);
    }
    for (auto v : features) {
        auto& col = columns_[static_cast<std::size_t>(v)];
        const auto src = table.columns[static_cast<std::size_t>(v)];
        col.reserve(keep.size());
        for (auto i : keep) col.push_back(src[i]);
    }
    target_.reserve(keep.size());
    for (auto i : keep) target_.push_back(target[i]);
}

FeatureTable TrainingData::features() const
{
    FeatureTable t;
    t.rows = target_.size();
    for (std::size_t v = 0; v < kVariableCount; ++v) {
        if (columns_[v].size() == t.rows) {
            t.columns[v] = columns_[v];
        }
    }
    return t;
}

double loss_l1(const Expr& expr, const TrainingData& data)
{
    if (data.size() == 0) {
        throw std::invalid_argument("loss_l1 needs at least one row");
    }
    const auto predicted = evaluate_batch(expr, data.features());
    const auto target = data.target();
    double sum = 0.0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        if (std::isnan(predicted[i])) {
            return kInf;
        }
        sum += std::abs(predicted[i] - target[i]);
    }
    const double loss = sum / static_cast<double>(predicted.size());
    return std::isnan(loss) ? kInf : loss;
}

double loss_l1(const Expr& expr, const DerivedSeries& rows)
{
    if (rows.empty()) {
        throw std::invalid_argument("loss_l1 needs at least one row");
    }
    const auto predicted = evaluate_batch(expr, rows.features());
    const auto target = rows.ddst_dt();
    double sum = 0.0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        if (std::isnan(predicted[i])) {
            return kInf;
        }
        sum += std::abs(predicted[i] - target[i]);
    }
    const double loss = sum / static_cast<double>(predicted.size());
    return std::isnan(loss) ? kInf : loss;
}

double fitness(double loss, int complexity, double parsimony)
{
    return loss + parsimony * static_cast<double>(complexity);
}

Expr mutate(const Expr& expr, Rng& rng, const SearchConfig& config, MutationKind kind)
{
    auto out = mutate_once(expr, rng, config, kind);
    return static_cast<int>(out.size()) <= config.max_complexity ? out : expr;
}

Expr mutate(const Expr& expr, Rng& rng, const SearchConfig& config)
{
    std::array<double, kMutationKindCount> w = config.mutation_weights.weight;
    for (std::size_t k = 0; k < kMutationKindCount; ++k) {
        if (!applicable(expr, static_cast<MutationKind>(k))) {
            w[k] = 0.0;
        }
    }
    if (std::accumulate(w.begin(), w.end(), 0.0) <= 0.0) {
        return expr;
    }
    std::discrete_distribution<std::size_t> pick(w.begin(), w.end());
    for (int attempt = 0; attempt < 10; ++attempt) {
        auto out = mutate_once(expr, rng, config, static_cast<MutationKind>(pick(rng)));
        if (static_cast<int>(out.size()) <= config.max_complexity) {
            return out;
        }
    }
    return expr;
}

Expr crossover(const Expr& a, const Expr& b, Rng& rng, int max_complexity)
{
    for (int attempt = 0; attempt < 10; ++attempt) {
        const std::size_t i = random_index(rng, a.size());
        const std::size_t j = random_index(rng, b.size());
        auto out = a.replace_subtree(i, b.subtree(j));
        if (static_cast<int>(out.size()) <= max_complexity) {
            return out;
        }
    }
    return a;
}

EvolveResult evolve_detailed(const SearchConfig& config, const TrainingData& train)
{
    config.validate();
    if (train.size() == 0) {
        throw std::invalid_argument("evolve needs at least one finite training row");
    }
    std::vector<HallOfFame> halls(config.population_count, HallOfFame(config.max_complexity));
    std::vector<std::vector<double>> history(config.population_count);
    parallel_for(config.population_count, config.threads, [&](std::size_t p) {
        evolve_population(config, train, p, halls[p], history[p]);
    });

    EvolveResult result{HallOfFame(config.max_complexity), std::move(history)};
    for (const auto& h : halls) {
        result.hall_of_fame.merge(h);
    }
    return result;
}

HallOfFame evolve(const SearchConfig& config, const DerivedSeries& train)
{
    return evolve_detailed(config, TrainingData(train, config.features, config.max_train_rows, config.seed))
        .hall_of_fame;
}

RunEnsemble multi_run(const SearchConfig& base, std::size_t n_runs, const TrainingData& train,
                      const MultiRunOptions& options)
{
    if (n_runs < 1) {
        throw std::invalid_argument("multi_run needs n_runs >= 1");
    }
    if (!(options.parsimony_min <= options.parsimony_max) ||
        options.population_size_min > options.population_size_max ||
        options.population_size_min < 2) {
        throw std::invalid_argument("invalid multi_run sampling ranges");
    }
    RunEnsemble ensemble;
    ensemble.runs.resize(n_runs);
    for (std::size_t r = 0; r < n_runs; ++r) {
        Rng rng = stream(base.seed, r, 0x4a11);
        auto& run = ensemble.runs[r];
        run.run_id = r;
        run.parsimony =
            std::uniform_real_distribution<double>(options.parsimony_min, options.parsimony_max)(rng);
        run.population_size = std::uniform_int_distribution<std::size_t>(
            options.population_size_min, options.population_size_max)(rng);
        run.seed = rng();
    }
    parallel_for(n_runs, base.threads, [&](std::size_t r) {
        auto& run = ensemble.runs[r];
        SearchConfig cfg = base;
        cfg.parsimony = run.parsimony;
        cfg.population_size = run.population_size;
        cfg.seed = run.seed;
        cfg.threads = 1;
        run.hall_of_fame = evolve_detailed(cfg, train).hall_of_fame;
    });
    return ensemble;
}

RunEnsemble multi_run(const SearchConfig& base, std::size_t n_runs, const DerivedSeries& train,
                      const MultiRunOptions& options)
{
    return multi_run(base, n_runs, TrainingData(train, base.features, base.max_train_rows, base.seed),
                     options);
}

std::vector<RankedCandidate> consolidate(const RunEnsemble& ensemble, int max_complexity)
{
    std::vector<RankedCandidate> out;
    std::unordered_map<std::string, std::size_t> seen;
    for (const auto& run : ensemble.runs) {
        for (const auto& [k, c] : run.hall_of_fame.entries()) {
            if (c.complexity > max_complexity || !std::isfinite(c.loss)) {
                continue;
            }
            RankedCandidate rc{canonical_string(c.expr), c, run.parsimony, run.population_size,
                               run.run_id, run.seed};
            auto [it, inserted] = seen.emplace(rc.equation, out.size());
            if (inserted) {
                out.push_back(std::move(rc));
            } else if (c.loss < out[it->second].candidate.loss) {
                out[it->second] = std::move(rc);
            }
        }
    }
    std::sort(out.begin(), out.end(), [](const RankedCandidate& a, const RankedCandidate& b) {
        if (a.candidate.loss != b.candidate.loss) return a.candidate.loss < b.candidate.loss;
        if (a.candidate.complexity != b.candidate.complexity) {
            return a.candidate.complexity < b.candidate.complexity;
        }
        return a.equation < b.equation;
    });
    return out;
}

void write_candidates_csv(std::ostream& out, const std::vector<RankedCandidate>& candidates)
{
    out << "rank,equation_text,complexity,l1_loss,parsimony,population_size,run_id,seed\n";
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const auto& c = candidates[i];
        csv::write_row(out, {std::to_string(i + 1), c.equation, std::to_string(c.candidate.complexity),
                             csv::format_number(c.candidate.loss), csv::format_number(c.parsimony),
                             std::to_string(c.population_size), std::to_string(c.run_id),
                             std::to_string(c.seed)});
    }
}

std::vector<CandidateRow> read_candidates_csv(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line)) {
        throw DataError(1, "empty candidates file");
    }
    const auto header = csv::split_line(line);
    auto col = [&](const std::string& name) {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (csv::trim(header[i]) == name) return i;
        }
        throw DataError(1, "missing column '" + name + "'");
    };
    const std::size_t c_rank = col("rank"), c_eq = col("equation_text"), c_cx = col("complexity"),
                      c_loss = col("l1_loss");
    std::vector<CandidateRow> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (csv::trim(line).empty()) continue;
        const auto cells = csv::split_line(line);
        if (cells.size() != header.size()) {
            throw DataError(line_no, "expected " + std::to_string(header.size()) + " fields");
        }
        try {
            rows.push_back({static_cast<std::size_t>(csv::parse_number(cells[c_rank])), cells[c_eq],
                            static_cast<int>(csv::parse_number(cells[c_cx])),
                            csv::parse_number(cells[c_loss])});
        } catch (const std::invalid_argument& e) {
            throw DataError(line_no, e.what());
        }
    }
    return rows;
}

} // namespace dstsr
