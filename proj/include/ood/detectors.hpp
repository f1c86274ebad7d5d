#pragma once

// Scoring rules. Every detector emits scores with one fixed orientation:
// higher = more in-distribution. Thresholding ("flag OOD when score < gamma")
// and metrics live in metrics.hpp.

#include <span>
#include <string>
#include <vector>

#include "ood/simcore.hpp"

namespace ood {

// Optimal linear posterior for an identity-scaled-covariance GmmSpec:
// p(y=1|x) = logistic(weights . x + bias).
struct LinearPosterior {
    std::vector<double> weights;
    double bias = 0.0;
};

struct ScoreSet {
    std::vector<double> values; // higher = more in-distribution
    std::string detector_name;
};

// Per-token natural-log probabilities, log p(x_t | x_{1:t-1}); entries <= 0.
using TokenLogProbs = std::vector<double>;

// Closed-form LDA posterior of the mixture: weights = (mu1 - mu0) / sigma^2,
// bias = -(|mu1|^2 - |mu0|^2) / (2 sigma^2) + ln(p1 / p0).
LinearPosterior fit_lda(const GmmSpec& id_spec);

double posterior_probability(const LinearPosterior& posterior, std::span<const double> x);

// Max entry of a probability vector (entries >= 0, sum within 1e-6 of 1).
double msp_score(std::span<const double> class_probs);

// Log mixture density log sum_i prior_i N(x; centroid_i, sigma^2 I), evaluated
// with log-sum-exp; finite for every finite x.
double density_score(const GmmSpec& id_spec, std::span<const double> x);

// exp(mean of token log-probs): per-token geometric-mean probability in (0, 1].
// Invariant under repetition of the sequence.
double ppl_score(const TokenLogProbs& tokens);

// Sum of token log-probs; scales with sequence length by construction.
double seqprob_score(const TokenLogProbs& tokens);

// Oracle detectors vectorized over a SampleSet; row order preserved.
// MSP oracle: the posterior log-odds magnitude |weights . x + bias|, a
// strictly increasing transform of max(p, 1-p) = logistic(|weights . x +
// bias|). The transform keeps the MSP ranking intact where the probability
// itself saturates to 1.0 in double precision (|log-odds| above ~37); rank
// metrics are unchanged by it.
ScoreSet score_sampleset(const LinearPosterior& posterior, const SampleSet& samples);
// Density oracle: density_score per row.
ScoreSet score_sampleset(const GmmSpec& id_spec, const SampleSet& samples);

namespace serial {
ScoreSet score_sampleset(const LinearPosterior& posterior, const SampleSet& samples);
ScoreSet score_sampleset(const GmmSpec& id_spec, const SampleSet& samples);
} // namespace serial

} // namespace ood
