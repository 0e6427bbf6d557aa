#include "dstsr/search.hpp"

#include "synthetic.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <set>
#include <sstream>

using namespace dstsr;

namespace {

DerivedSeries planted(std::size_t n, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ud(-200, 20), ue(-5, 10), up(0.5, 10), ub(0, 0.5);
    DerivedSeries s;
    const auto t0 = parse_timestamp("2000-01-01T00:00:00Z");
    for (std::size_t i = 0; i < n; ++i) {
        const double d = ud(rng), e = ue(rng);
        s.append({t0 + Hours{static_cast<long>(i)}, e, up(rng), ub(rng), d, d, -0.05 * d - e});
    }
    return s;
}

DerivedSeries two_rows(double t0, double t1)
{
    DerivedSeries s;
    const auto t = parse_timestamp("2000-01-01T00:00:00Z");
    s.append({t, 0, 1, 0, 0, 0, t0});
    s.append({t + Hours{1}, 0, 1, 0, 0, 0, t1});
    return s;
}

SearchConfig small_config()
{
    SearchConfig c;
    c.population_count = 2;
    c.population_size = 30;
    c.iterations = 15;
    c.seed = 11;
    return c;
}

} // namespace

TEST_CASE("L1 loss")
{
    CHECK(loss_l1(parse("0"), two_rows(1, -1)) == 1.0);
    CHECK(loss_l1(parse("-0.05*Dst - Ey"), planted(200, 1)) == 0.0);
    CHECK(loss_l1(parse("sqrt(Dst)"), planted(50, 2)) == std::numeric_limits<double>::infinity());
    CHECK_THROWS_AS(loss_l1(parse("Dst"), DerivedSeries{}), std::invalid_argument);

    const auto s = planted(100, 3);
    const std::vector<Variable> feats{kAllVariables.begin(), kAllVariables.end()};
    CHECK(loss_l1(parse("Ey"), TrainingData(s, feats)) == loss_l1(parse("Ey"), s));
}

TEST_CASE("fitness adds the parsimony penalty")
{
    CHECK(fitness(1.0, 10, 0.0) == 1.0);
    CHECK(fitness(1.0, 10, 0.5) == 6.0);
    CHECK(fitness(std::numeric_limits<double>::infinity(), 3, 0.9) == std::numeric_limits<double>::infinity());
}

TEST_CASE("training data drops non-finite rows and subsamples deterministically")
{
    auto s = planted(100, 4);
    DerivedSeries with_gap;
    for (std::size_t i = 0; i < s.size(); ++i) {
        auto r = s.row(i);
        if (i % 10 == 0) r.ey = std::nan("");
        with_gap.append(r);
    }
    const std::vector<Variable> feats{kAllVariables.begin(), kAllVariables.end()};
    CHECK(TrainingData(with_gap, feats).size() == 90);
    const std::vector<Variable> dst_only{Variable::Dst};
    CHECK(TrainingData(with_gap, dst_only).size() == 100);
    const TrainingData a(s, feats, 30, 5), b(s, feats, 30, 5);
    CHECK(a.size() == 30);
    CHECK(std::equal(a.target().begin(), a.target().end(), b.target().begin()));
}

TEST_CASE("hall of fame keeps the lowest loss per complexity")
{
    HallOfFame h(5);
    CHECK(h.consider({parse("Dst"), 1, 3.0, 3.0}));
    CHECK_FALSE(h.consider({parse("Ey"), 1, 4.0, 4.0}));
    CHECK_FALSE(h.consider({parse("Ey"), 1, 3.0, 3.0}));
    CHECK(h.consider({parse("Pdyn"), 1, 2.0, 2.0}));
    CHECK_FALSE(h.consider({parse("Dst + Ey + Pdyn"), 6, 0.0, 0.0}));
    CHECK_FALSE(h.consider({parse("Dst"), 1, std::nan(""), 0.0}));
    CHECK(h.size() == 1);
    CHECK(print(h.best().expr) == "Pdyn");

    HallOfFame other(5);
    other.consider({parse("Dst + Ey"), 3, 1.0, 1.0});
    h.merge(other);
    CHECK(h.size() == 2);
    CHECK(h.best().complexity == 3);
}

TEST_CASE("mutation kinds")
{
    const auto config = small_config();
    Rng rng(3);
    const auto one = Expr::constant(1.0);
    for (int i = 0; i < 50; ++i) {
        const auto m = mutate(one, rng, config, MutationKind::PerturbConstant);
        REQUIRE(m.size() == 1);
        CHECK(m.root().value != 1.0);
        CHECK(std::isfinite(m.root().value));
    }

    const auto e = parse("-0.05*Dst - max(Ey, -0.16)");
    const auto del = mutate(e, rng, config, MutationKind::DeleteNode);
    CHECK(del.size() < e.size());
    const auto ins = mutate(e, rng, config, MutationKind::InsertNode);
    CHECK(ins.size() > e.size());
    const auto rep = mutate(e, rng, config, MutationKind::ReplaceOperator);
    CHECK(rep.size() == e.size());

    Rng r1(99), r2(99);
    for (int i = 0; i < 20; ++i) {
        CHECK(mutate(e, r1, config) == mutate(e, r2, config));
    }

    auto tight = config;
    tight.max_complexity = 7;
    for (int i = 0; i < 500; ++i) {
        CHECK(static_cast<int>(mutate(e, rng, tight).size()) <= 7);
    }
}

TEST_CASE("crossover")
{
    Rng rng(5);
    const auto a = Expr::variable(Variable::Dst), b = Expr::variable(Variable::Ey);
    for (int i = 0; i < 20; ++i) {
        const auto c = crossover(a, b, rng);
        CHECK((c == a || c == b));
    }
    const auto x = parse("max(Dst, 1) * Ey"), y = parse("sqrt(Pdyn) - 2");
    const std::set<std::string> allowed{"max", "mul", "sqrt", "sub"};
    for (int i = 0; i < 200; ++i) {
        const auto c = crossover(x, y, rng, 30);
        for (const auto& n : c.nodes()) {
            if (n.kind == NodeKind::Unary) CHECK(allowed.count(std::string(name(n.unary_op()))));
            if (n.kind == NodeKind::Binary) CHECK(allowed.count(std::string(name(n.binary_op()))));
            if (n.kind == NodeKind::Variable) CHECK(n.variable() != Variable::PB);
        }
        CHECK(static_cast<int>(crossover(x, y, rng, 5).size()) <= 5);
    }
    Rng r1(8), r2(8);
    CHECK(crossover(x, y, r1) == crossover(x, y, r2));
}

TEST_CASE("evolve with zero iterations keeps the initial population only")
{
    auto config = small_config();
    config.iterations = 0;
    const auto s = planted(300, 6);
    const TrainingData train(s, config.features);
    const auto r = evolve_detailed(config, train);
    REQUIRE(r.best_fitness.size() == 2);
    CHECK(r.best_fitness[0].size() == 1);
    CHECK(r.hall_of_fame.size() > 0);
}

TEST_CASE("evolve is deterministic and elitist")
{
    const auto config = small_config();
    const auto s = planted(300, 7);
    const auto a = evolve(config, s), b = evolve(config, s);
    REQUIRE(a.size() == b.size());
    for (const auto& [k, c] : a.entries()) {
        CHECK(canonical_string(c.expr) == canonical_string(b.entries().at(k).expr));
        CHECK(c.loss == b.entries().at(k).loss);
        CHECK(k <= config.max_complexity);
        CHECK(complexity(c.expr) == k);
    }

    auto threaded = config;
    threaded.threads = 2;
    const auto t = evolve(threaded, s);
    CHECK(t.best().loss == a.best().loss);

    const auto r = evolve_detailed(config, TrainingData(s, config.features));
    for (const auto& hist : r.best_fitness) {
        CHECK(hist.size() == config.iterations + 1);
        for (std::size_t g = 1; g < hist.size(); ++g) CHECK(hist[g] <= hist[g - 1]);
    }
}

TEST_CASE("evolve recovers a planted linear equation")
{
    SearchConfig config;
    config.population_count = 4;
    config.population_size = 80;
    config.iterations = 200;
    config.parsimony = 0.3;
    config.seed = 1;
    const auto hof = evolve(config, planted(1000, 8));
    bool found = false;
    for (const auto& [k, c] : hof.entries()) {
        if (k <= 5 && c.loss < 1e-3) found = true;
    }
    CHECK(found);
}

TEST_CASE("multi_run samples hyperparameters per run")
{
    auto config = small_config();
    config.iterations = 3;
    const auto s = planted(200, 9);
    const auto ens = multi_run(config, 6, s);
    REQUIRE(ens.runs.size() == 6);
    for (const auto& r : ens.runs) {
        CHECK(r.parsimony >= 0.0);
        CHECK(r.parsimony <= 0.9);
        CHECK(r.population_size >= 20);
        CHECK(r.population_size <= 120);
    }
    CHECK(ens.runs[0].seed != ens.runs[1].seed);

    auto threaded = config;
    threaded.threads = 3;
    const auto again = multi_run(threaded, 6, s);
    std::ostringstream x, y;
    write_candidates_csv(x, consolidate(ens));
    write_candidates_csv(y, consolidate(again));
    CHECK(x.str() == y.str());
    CHECK_THROWS_AS(multi_run(config, 0, s), std::invalid_argument);
}

TEST_CASE("consolidate dedupes, filters and sorts")
{
    RunEnsemble ens;
    ens.runs.resize(2);
    ens.runs[0].hall_of_fame = HallOfFame(40);
    ens.runs[1].hall_of_fame = HallOfFame(40);
    ens.runs[0].hall_of_fame.consider({parse("-0.031*Dst"), 3, 2.0, 2.0});
    ens.runs[1].hall_of_fame.consider({parse("-0.031*Dst"), 3, 2.0, 2.0});
    ens.runs[1].hall_of_fame.consider({parse("Ey"), 1, 2.0, 2.0});
    ens.runs[0].hall_of_fame.consider({parse("Ey - Dst"), 5, 1.0, 1.0});
    ens.runs[0].hall_of_fame.consider({parse("Dst*Dst*Dst*Dst*Dst*Dst*Dst*Dst*Dst*Dst*Dst*Dst*Dst*Dst*Dst*Dst"), 31, 0.1, 0.1});
    ens.runs[1].hall_of_fame.consider({parse("sqrt(Dst)"), 2, std::numeric_limits<double>::infinity(), 0});

    const auto ranked = consolidate(ens);
    REQUIRE(ranked.size() == 3);
    CHECK(ranked[0].equation == "Ey - Dst");
    CHECK(ranked[1].equation == "Ey");
    CHECK(ranked[2].equation == "-0.031 * Dst");
    for (std::size_t i = 1; i < ranked.size(); ++i) CHECK(ranked[i - 1].candidate.loss <= ranked[i].candidate.loss);
}

TEST_CASE("candidates CSV round trip")
{
    RunEnsemble ens;
    ens.runs.resize(1);
    ens.runs[0].hall_of_fame.consider({parse("-0.05*Dst - Ey"), 5, 0.25, 0.25});
    ens.runs[0].hall_of_fame.consider({parse("max(Ey, 1)"), 4, 0.5, 0.5});
    std::stringstream buf;
    write_candidates_csv(buf, consolidate(ens));
    CHECK(buf.str().rfind("rank,equation_text,complexity,l1_loss,parsimony,population_size,run_id,seed\n", 0) == 0);
    const auto rows = read_candidates_csv(buf);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].rank == 1);
    CHECK(rows[0].equation == "-0.05 * Dst - Ey");
    CHECK(rows[1].equation == "max(Ey, 1)");
    CHECK(rows[1].loss == 0.5);
    CHECK(parse(rows[1].equation) == parse("max(Ey, 1)"));
}
