#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "ood/errors.hpp"
#include "ood/metrics.hpp"
#include "ood/rng.hpp"

using namespace ood;

namespace {

// Exhaustive pairwise AUROC: P(id > ood) + 1/2 P(id = ood).
double brute_force_auroc(const std::vector<double>& id_scores,
                         const std::vector<double>& ood_scores) {
    double wins = 0.0;
    for (double a : id_scores) {
        for (double b : ood_scores) {
            if (a > b) wins += 1.0;
            else if (a == b) wins += 0.5;
        }
    }
    return wins / (static_cast<double>(id_scores.size()) *
                   static_cast<double>(ood_scores.size()));
}

// Scan every observed score ascending as candidate gamma; take the first with
// OOD recall >= 0.95 and return the ID fraction flagged at it.
double scan_far95(const std::vector<double>& id_scores,
                  const std::vector<double>& ood_scores) {
    std::vector<double> candidates = id_scores;
    candidates.insert(candidates.end(), ood_scores.begin(), ood_scores.end());
    std::sort(candidates.begin(), candidates.end());
    for (double gamma : candidates) {
        std::size_t recalled = 0;
        for (double s : ood_scores)
            if (s <= gamma) ++recalled;
        if (recalled * 20 >= ood_scores.size() * 19) { // recall >= 19/20, exact
            std::size_t flagged = 0;
            for (double s : id_scores)
                if (s <= gamma) ++flagged;
            return static_cast<double>(flagged) / static_cast<double>(id_scores.size());
        }
    }
    return 1.0;
}

std::vector<double> random_scores(rng::SplitMix64& gen, std::size_t count,
                                  int tie_levels) {
    std::vector<double> out(count);
    for (double& v : out) {
        // coarse grid engineers plenty of exact ties
        v = static_cast<double>(gen.next_below(tie_levels)) / 4.0;
    }
    return out;
}

} // namespace

TEST_CASE("auroc separates, ties at chance, matches hand counts") {
    CHECK(auroc(std::vector<double>{0.9, 0.8}, std::vector<double>{0.2, 0.1}) == 1.0);
    CHECK(auroc(std::vector<double>{0.5, 0.5}, std::vector<double>{0.5, 0.5}) == 0.5);
    CHECK(auroc(std::vector<double>{0.9, 0.4, 0.6}, std::vector<double>{0.5, 0.3}) ==
          doctest::Approx(5.0 / 6.0).epsilon(1e-12));
    // reversed separation: below-chance values are legal
    CHECK(auroc(std::vector<double>{0.1, 0.2}, std::vector<double>{0.8, 0.9}) == 0.0);
}

TEST_CASE("auroc rejects empty and non-finite inputs") {
    CHECK_THROWS_AS(auroc(std::vector<double>{}, std::vector<double>{1.0}), ValidationError);
    CHECK_THROWS_AS(auroc(std::vector<double>{1.0}, std::vector<double>{}), ValidationError);
    CHECK_THROWS_AS(
        auroc(std::vector<double>{std::nan("")}, std::vector<double>{1.0}),
        ValidationError);
}

TEST_CASE("rank AUROC equals brute force on random tied instances") {
    rng::SplitMix64 gen(7101);
    for (int it = 0; it < 400; ++it) {
        const std::size_t n = 1 + gen.next_below(100);
        const std::size_t m = 1 + gen.next_below(100);
        const auto id_scores = random_scores(gen, n, 12);
        const auto ood_scores = random_scores(gen, m, 12);
        CHECK(auroc(id_scores, ood_scores) == brute_force_auroc(id_scores, ood_scores));
    }
}

TEST_CASE("auroc is invariant under strictly increasing transforms") {
    rng::SplitMix64 gen(88);
    for (int it = 0; it < 50; ++it) {
        const auto id_scores = random_scores(gen, 40, 8);
        const auto ood_scores = random_scores(gen, 30, 8);
        auto tid = id_scores;
        auto tood = ood_scores;
        for (double& v : tid) v = std::exp(3.0 * v - 1.0);
        for (double& v : tood) v = std::exp(3.0 * v - 1.0);
        CHECK(auroc(id_scores, ood_scores) == auroc(tid, tood));
    }
}

TEST_CASE("auroc complement identity under role swap") {
    rng::SplitMix64 gen(89);
    for (int it = 0; it < 50; ++it) {
        const auto a = random_scores(gen, 35, 10);
        const auto b = random_scores(gen, 25, 10);
        CHECK(auroc(a, b) == doctest::Approx(1.0 - auroc(b, a)).epsilon(1e-12));
    }
}

TEST_CASE("far95 on separated, identical, and integer-ramp scores") {
    std::vector<double> hi{3.0, 4.0, 5.0};
    std::vector<double> lo{0.5, 1.0, 1.5, 2.0, 0.2, 0.9, 1.1, 0.4, 1.7, 0.3,
                           0.6, 1.2, 0.8, 1.9, 0.1, 1.4, 0.7, 1.3, 1.6, 1.8};
    CHECK(far95(hi, lo) == 0.0);

    std::vector<double> ramp(100);
    for (int i = 0; i < 100; ++i) ramp[i] = static_cast<double>(i + 1);
    CHECK(far95(ramp, ramp) == doctest::Approx(0.95));

    // identical multisets of any size flag exactly ceil(0.95 M)/N
    rng::SplitMix64 gen(404);
    std::vector<double> same(20000);
    for (double& v : same) v = gen.next_double();
    CHECK(far95(same, same) == doctest::Approx(0.95).epsilon(1e-6));

    // independent draws from one distribution land near 0.95
    std::vector<double> other(20000);
    for (double& v : other) v = gen.next_double();
    CHECK(far95(same, other) == doctest::Approx(0.95).epsilon(0.02));
}

TEST_CASE("far95 equals the exhaustive threshold scan") {
    rng::SplitMix64 gen(7302);
    for (int it = 0; it < 300; ++it) {
        const std::size_t n = 1 + gen.next_below(80);
        const std::size_t m = 1 + gen.next_below(80);
        const auto id_scores = random_scores(gen, n, 10);
        const auto ood_scores = random_scores(gen, m, 10);
        CHECK(far95(id_scores, ood_scores) == scan_far95(id_scores, ood_scores));
    }
}

TEST_CASE("far95 never increases when ID separation improves") {
    rng::SplitMix64 gen(7404);
    for (int it = 0; it < 100; ++it) {
        const auto id_scores = random_scores(gen, 50, 10);
        const auto ood_scores = random_scores(gen, 50, 10);
        const double base = far95(id_scores, ood_scores);
        auto shifted = id_scores;
        const double c = 0.25 * static_cast<double>(1 + gen.next_below(8));
        for (double& v : shifted) v += c;
        CHECK(far95(shifted, ood_scores) <= base);
    }
}

TEST_CASE("aggregate_trials means and confidence halfwidths") {
    EvalReport a{0.6, 0.2, 100, 100, "msp"};
    EvalReport b{0.8, 0.1, 100, 100, "msp"};
    const SweepCell cell = aggregate_trials({a, b});
    CHECK(cell.mean_auroc == doctest::Approx(0.7).epsilon(1e-12));
    // sd = 0.1414..., halfwidth = 1.96 * sd / sqrt(2) = 0.196
    CHECK(cell.auroc_ci_halfwidth == doctest::Approx(0.196).epsilon(1e-9));
    CHECK(cell.mean_far95 == doctest::Approx(0.15).epsilon(1e-12));

    const SweepCell flat = aggregate_trials({a, a, a});
    CHECK(flat.auroc_ci_halfwidth == 0.0);
    CHECK(flat.mean_auroc == doctest::Approx(0.6));

    CHECK_THROWS_AS(aggregate_trials({a}), ValidationError);
    CHECK_THROWS_AS(aggregate_trials({a, b}, 0.5), ValidationError);
}

TEST_CASE("95% bands cover the true mean in most seeded repetitions") {
    rng::SplitMix64 base(2026);
    int covered = 0;
    const int reps = 400;
    for (int rep = 0; rep < reps; ++rep) {
        rng::NormalStream noise(base.next());
        std::vector<EvalReport> reports;
        for (int t = 0; t < 20; ++t) {
            EvalReport r;
            r.auroc = 0.5 + 0.02 * noise.next_normal();
            reports.push_back(r);
        }
        const SweepCell cell = aggregate_trials(reports);
        if (std::fabs(cell.mean_auroc - 0.5) <= cell.auroc_ci_halfwidth) ++covered;
    }
    CHECK(covered >= static_cast<int>(0.90 * reps));
}
