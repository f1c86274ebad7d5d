#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "ood/detectors.hpp"
#include "ood/errors.hpp"
#include "ood/rng.hpp"
#include "ood/simcore.hpp"

using namespace ood;

namespace {

// Bayes posterior through the two full Gaussian log densities; independent of
// the linear-form route in fit_lda.
double bayes_posterior(const GmmSpec& spec, const std::vector<double>& x) {
    const int d = spec.dims();
    const double log_norm =
        -0.5 * d * std::log(2.0 * std::numbers::pi * spec.covariance_scale);
    double q0 = 0.0;
    double q1 = 0.0;
    for (int j = 0; j < d; ++j) {
        q0 += (x[j] - spec.centroid_0[j]) * (x[j] - spec.centroid_0[j]);
        q1 += (x[j] - spec.centroid_1[j]) * (x[j] - spec.centroid_1[j]);
    }
    const double l0 =
        std::log(1.0 - spec.class1_prior) + log_norm - 0.5 * q0 / spec.covariance_scale;
    const double l1 =
        std::log(spec.class1_prior) + log_norm - 0.5 * q1 / spec.covariance_scale;
    return 1.0 / (1.0 + std::exp(l0 - l1));
}

// Mixture log density without log-sum-exp; valid at moderate magnitudes only.
double naive_density(const GmmSpec& spec, const std::vector<double>& x) {
    const int d = spec.dims();
    const double norm =
        std::pow(2.0 * std::numbers::pi * spec.covariance_scale, -0.5 * d);
    double q0 = 0.0;
    double q1 = 0.0;
    for (int j = 0; j < d; ++j) {
        q0 += (x[j] - spec.centroid_0[j]) * (x[j] - spec.centroid_0[j]);
        q1 += (x[j] - spec.centroid_1[j]) * (x[j] - spec.centroid_1[j]);
    }
    return std::log((1.0 - spec.class1_prior) * norm *
                        std::exp(-0.5 * q0 / spec.covariance_scale) +
                    spec.class1_prior * norm * std::exp(-0.5 * q1 / spec.covariance_scale));
}

GmmSpec two_dim_spec() {
    GmmSpec spec;
    spec.partition.total_dims = 2;
    spec.partition.semantic_indices = {0};
    spec.partition.background_indices = {1};
    spec.centroid_0 = {-1.0, 0.0};
    spec.centroid_1 = {1.0, 0.0};
    return spec;
}

} // namespace

TEST_CASE("fit_lda recovers the [2 mu_s, 0_b] weights with zero bias") {
    const GmmSpec spec = build_id_spec(200, 40, 1.0, 7);
    const LinearPosterior posterior = fit_lda(spec);
    for (int idx : spec.partition.semantic_indices)
        CHECK(posterior.weights[idx] == 2.0 * spec.centroid_1[idx] / 1.0);
    for (int idx : spec.partition.background_indices) CHECK(posterior.weights[idx] == 0.0);
    CHECK(posterior.bias == 0.0);
}

TEST_CASE("posterior is 0.5 at the centroid midpoint") {
    const GmmSpec spec = build_id_spec(10, 3, 1.0, 2);
    const LinearPosterior posterior = fit_lda(spec);
    const std::vector<double> origin(10, 0.0);
    CHECK(posterior_probability(posterior, origin) == 0.5);
}

TEST_CASE("posterior at centroid_1 matches the Bayes density-ratio oracle") {
    const GmmSpec spec = build_id_spec(200, 40, 1.0, 7);
    const LinearPosterior posterior = fit_lda(spec);
    CHECK(posterior_probability(posterior, spec.centroid_1) ==
          doctest::Approx(bayes_posterior(spec, spec.centroid_1)).epsilon(1e-12));
}

TEST_CASE("posterior consistency with Bayes rule on random inputs") {
    rng::SplitMix64 gen(501);
    for (int it = 0; it < 300; ++it) {
        const int d = 2 + static_cast<int>(gen.next_below(9));
        const int n = 1 + static_cast<int>(gen.next_below(d - 1));
        GmmSpec spec = build_id_spec(d, n, 0.5 + gen.next_double(), gen.next());
        // exercise the prior and covariance terms of the bias too
        spec.class1_prior = 0.2 + 0.6 * gen.next_double();
        spec.covariance_scale = 0.5 + gen.next_double();
        const LinearPosterior posterior = fit_lda(spec);
        std::vector<double> x(d);
        for (double& v : x) v = 6.0 * (gen.next_double() - 0.5);
        const double p = posterior_probability(posterior, x);
        CHECK(std::fabs(p - bayes_posterior(spec, x)) < 1e-9);
    }
}

TEST_CASE("msp_score returns the max entry") {
    CHECK(msp_score(std::vector<double>{0.7, 0.2, 0.1}) == 0.7);
    CHECK(msp_score(std::vector<double>{0.25, 0.25, 0.25, 0.25}) == 0.25);
    CHECK(msp_score(std::vector<double>{1.0, 0.0}) == 1.0);
}

TEST_CASE("msp_score rejects malformed probability vectors") {
    CHECK_THROWS_AS(msp_score(std::vector<double>{}), ValidationError);
    CHECK_THROWS_AS(msp_score(std::vector<double>{0.5, -0.1, 0.6}), ValidationError);
    CHECK_THROWS_AS(msp_score(std::vector<double>{0.6, 0.6}), ValidationError);
    CHECK_THROWS_AS(msp_score(std::vector<double>{0.5, 0.499}), ValidationError);
}

TEST_CASE("density_score closed form at the symmetric point") {
    GmmSpec spec;
    spec.partition.total_dims = 1;
    spec.partition.semantic_indices = {0};
    spec.centroid_0 = {-1.0};
    spec.centroid_1 = {1.0};
    const double expected = -0.5 * std::log(2.0 * std::numbers::pi) - 0.5;
    CHECK(density_score(spec, std::vector<double>{0.0}) ==
          doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("density_score translation property under background shift") {
    const GmmSpec id_spec = build_id_spec(20, 5, 1.0, 3);
    const double alpha = 0.75;
    const GmmSpec shifted = background_shift_spec(id_spec, alpha);
    rng::SplitMix64 gen(77);
    for (int it = 0; it < 50; ++it) {
        std::vector<double> x(20);
        for (double& v : x) v = 4.0 * (gen.next_double() - 0.5);
        std::vector<double> x_plus_z = x;
        for (int idx : id_spec.partition.background_indices) x_plus_z[idx] += alpha;
        CHECK(density_score(shifted, x_plus_z) ==
              doctest::Approx(density_score(id_spec, x)).epsilon(1e-9));
    }
}

TEST_CASE("density_score matches the naive mixture density at moderate magnitude") {
    const GmmSpec spec = build_id_spec(5, 2, 1.0, 11);
    rng::SplitMix64 gen(13);
    for (int it = 0; it < 100; ++it) {
        std::vector<double> x(5);
        for (double& v : x) v = 4.0 * (gen.next_double() - 0.5);
        CHECK(density_score(spec, x) ==
              doctest::Approx(naive_density(spec, x)).epsilon(1e-12));
    }
}

TEST_CASE("density_score stays finite for inputs up to norm 1e3") {
    const GmmSpec spec = build_id_spec(50, 10, 1.0, 4);
    std::vector<double> x(50, 1000.0 / std::sqrt(50.0));
    CHECK(std::isfinite(density_score(spec, x)));
    std::vector<double> far(50, 0.0);
    far[0] = 1000.0;
    CHECK(std::isfinite(density_score(spec, far)));
    CHECK_THROWS_AS(density_score(spec, std::vector<double>(49, 0.0)), ValidationError);
}

TEST_CASE("ppl_score is the exponentiated mean log-probability") {
    const double half = std::log(0.5);
    CHECK(ppl_score({half, half, half}) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(ppl_score({std::log(0.9), std::log(0.1)}) ==
          doctest::Approx(0.3).epsilon(1e-9));
    CHECK(ppl_score({0.0}) == 1.0); // probability-1 token
}

TEST_CASE("ppl_score is machine-exact under k-fold repetition") {
    // dyadic log-probs: every partial sum is exact, so the k-fold mean rounds
    // identically
    rng::SplitMix64 gen(303);
    for (int it = 0; it < 100; ++it) {
        const std::size_t t = 1 + gen.next_below(40);
        TokenLogProbs base(t);
        for (double& v : base)
            v = -static_cast<double>(gen.next_below(1 << 20)) * 0x1.0p-18;
        const double score = ppl_score(base);
        for (int k : {2, 3, 5, 10}) {
            TokenLogProbs repeated;
            for (int rep = 0; rep < k; ++rep)
                repeated.insert(repeated.end(), base.begin(), base.end());
            CHECK(ppl_score(repeated) == score);
        }
    }
}

TEST_CASE("ppl_score rejects empty and positive sequences") {
    CHECK_THROWS_AS(ppl_score({}), ValidationError);
    CHECK_THROWS_AS(ppl_score({-0.5, 0.1}), ValidationError);
}

TEST_CASE("seqprob_score sums and scales with repetition") {
    const double half = std::log(0.5);
    TokenLogProbs ten(10, half);
    CHECK(seqprob_score(ten) == doctest::Approx(10.0 * half).epsilon(1e-12));

    const TokenLogProbs base = {-0.25, -1.5, -0.125};
    const double s1 = seqprob_score(base);
    TokenLogProbs tripled;
    for (int rep = 0; rep < 3; ++rep) tripled.insert(tripled.end(), base.begin(), base.end());
    CHECK(seqprob_score(tripled) == doctest::Approx(3.0 * s1).epsilon(1e-12));
    CHECK(seqprob_score(tripled) < s1); // length-decreasing for negative sums

    CHECK(seqprob_score({-0.7}) == doctest::Approx(std::log(ppl_score({-0.7}))).epsilon(1e-12));
}

TEST_CASE("MSP oracle bottoms out on the decision boundary") {
    const GmmSpec spec = build_id_spec(6, 2, 1.0, 8);
    const LinearPosterior posterior = fit_lda(spec);
    SampleSet samples;
    samples.dims = 6;
    samples.features.assign(6, 0.0);
    samples.labels = {0};
    const ScoreSet scores = score_sampleset(posterior, samples);
    CHECK(scores.values.size() == 1);
    CHECK(scores.values[0] == 0.0); // log-odds 0 <=> max(p, 1-p) = 0.5
    CHECK(posterior_probability(posterior, std::vector<double>(6, 0.0)) == 0.5);
}

TEST_CASE("MSP oracle scores are exactly invariant under background translation") {
    const GmmSpec spec = build_id_spec(40, 10, 1.0, 5);
    const LinearPosterior posterior = fit_lda(spec);
    const SampleSet samples = sample(spec, 2000, 123);

    SampleSet translated = samples;
    rng::SplitMix64 gen(9);
    for (int idx : spec.partition.background_indices) {
        const double shift = 20.0 * (gen.next_double() - 0.5);
        for (std::size_t i = 0; i < translated.size(); ++i)
            translated.features[i * 40 + idx] += shift;
    }

    const ScoreSet before = score_sampleset(posterior, samples);
    const ScoreSet after = score_sampleset(posterior, translated);
    REQUIRE(before.values.size() == after.values.size());
    for (std::size_t i = 0; i < before.values.size(); ++i)
        CHECK(before.values[i] == after.values[i]);
}

TEST_CASE("MSP oracle log-odds imply max softmax probabilities in [0.5, 1]") {
    const GmmSpec spec = build_id_spec(30, 6, 1.0, 44);
    const LinearPosterior posterior = fit_lda(spec);
    const ScoreSet scores = score_sampleset(posterior, sample(spec, 5000, 7));
    for (double s : scores.values) {
        CHECK(s >= 0.0);
        const double msp = 1.0 / (1.0 + std::exp(-s));
        CHECK(msp >= 0.5);
        CHECK(msp <= 1.0);
    }
}

TEST_CASE("MSP oracle score order matches the max-probability order") {
    // below the saturation point the probability itself carries the ranking
    const GmmSpec spec = build_id_spec(4, 1, 1.0, 3);
    const LinearPosterior posterior = fit_lda(spec);
    const SampleSet samples = sample(spec, 500, 9);
    const ScoreSet scores = score_sampleset(posterior, samples);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        for (std::size_t j = i + 1; j < std::min(samples.size(), i + 10); ++j) {
            const double pi = std::max(
                posterior_probability(posterior,
                                      std::span<const double>(samples.row(i), 4)),
                1.0 - posterior_probability(
                          posterior, std::span<const double>(samples.row(i), 4)));
            const double pj = std::max(
                posterior_probability(posterior,
                                      std::span<const double>(samples.row(j), 4)),
                1.0 - posterior_probability(
                          posterior, std::span<const double>(samples.row(j), 4)));
            if (pi < pj) CHECK(scores.values[i] < scores.values[j]);
            if (pi > pj) CHECK(scores.values[i] > scores.values[j]);
        }
    }
}

TEST_CASE("msp_score stays within [1/k, 1] on random probability vectors") {
    rng::SplitMix64 gen(4242);
    for (int it = 0; it < 200; ++it) {
        const std::size_t k = 2 + gen.next_below(9);
        std::vector<double> probs(k);
        double sum = 0.0;
        for (double& p : probs) {
            p = gen.next_double() + 1e-3;
            sum += p;
        }
        for (double& p : probs) p /= sum;
        const double s = msp_score(probs);
        CHECK(s >= 1.0 / static_cast<double>(k));
        CHECK(s <= 1.0);
    }
}

TEST_CASE("density oracle matches hand-computed mixture log densities in 2-D") {
    const GmmSpec spec = two_dim_spec();
    SampleSet samples;
    samples.dims = 2;
    samples.features = {0.0, 0.0, 1.0, 0.0, -2.0, 3.0};
    samples.labels = {0, 1, 0};
    const ScoreSet scores = score_sampleset(spec, samples);
    REQUIRE(scores.values.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        const std::vector<double> x = {samples.features[2 * i], samples.features[2 * i + 1]};
        CHECK(scores.values[i] == doctest::Approx(naive_density(spec, x)).epsilon(1e-12));
    }
    CHECK(scores.values[1] > scores.values[2]); // nearer the centroid, denser
}

TEST_CASE("score_sampleset parallel kernels match the serial reference bitwise") {
    const GmmSpec spec = build_id_spec(25, 5, 1.0, 31);
    const LinearPosterior posterior = fit_lda(spec);
    const SampleSet samples = sample(spec, 3000, 77);
    CHECK(score_sampleset(posterior, samples).values ==
          serial::score_sampleset(posterior, samples).values);
    CHECK(score_sampleset(spec, samples).values ==
          serial::score_sampleset(spec, samples).values);
}

TEST_CASE("score_sampleset rejects dimension mismatches") {
    const GmmSpec spec = build_id_spec(8, 2, 1.0, 1);
    const LinearPosterior posterior = fit_lda(spec);
    SampleSet wrong;
    wrong.dims = 7;
    wrong.features.assign(7, 0.0);
    wrong.labels = {0};
    CHECK_THROWS_AS(score_sampleset(posterior, wrong), ValidationError);
    CHECK_THROWS_AS(score_sampleset(spec, wrong), ValidationError);
}
