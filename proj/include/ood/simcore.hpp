#pragma once

// Two-class Gaussian-mixture generative model over a feature space split into
// semantic dimensions (label-dependent sign) and background dimensions
// (label-independent), plus the shift constructors that build OOD variants:
// semantic shift relocates semantic dimensions, background shift translates
// both centroids along the background dimensions.

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace ood {

struct FeaturePartition {
    int total_dims = 0;
    std::vector<int> semantic_indices;   // sorted
    std::vector<int> background_indices; // sorted complement

    int n_semantic() const { return static_cast<int>(semantic_indices.size()); }
    int n_background() const { return static_cast<int>(background_indices.size()); }
};

struct GmmSpec {
    FeaturePartition partition;
    std::vector<double> centroid_0; // class-0 mean, length total_dims
    std::vector<double> centroid_1; // class-1 mean, length total_dims
    double covariance_scale = 1.0;  // Sigma = covariance_scale * I
    double class1_prior = 0.5;

    int dims() const { return partition.total_dims; }
};

enum class ShiftKind { Semantic, Background };

struct ShiftSpec {
    ShiftKind kind = ShiftKind::Semantic;
    double overlap_rate = 1.0;       // semantic shifts only
    double displacement_alpha = 0.0; // background shifts only
    std::uint64_t seed = 0;
};

enum class Origin { InDistribution, OutOfDistribution };

// Row-major N x d sample matrix with 0/1 labels.
struct SampleSet {
    int dims = 0;
    std::vector<double> features;
    std::vector<int> labels;
    Origin origin = Origin::InDistribution;

    std::size_t size() const { return labels.size(); }
    const double* row(std::size_t i) const { return features.data() + i * static_cast<std::size_t>(dims); }
};

// ID spec with n_semantic dimensions chosen uniformly without replacement
// under `seed`; class-1 centroid +magnitude / class-0 centroid -magnitude on
// the semantic dimensions, both zero on background dimensions.
GmmSpec build_id_spec(int total_dims, int n_semantic, double semantic_magnitude,
                      std::uint64_t seed);

// OOD spec keeping round(overlap_rate * n) of the ID semantic dimensions and
// relocating the rest into ID background dimensions, both draws under `seed`.
// Centroids are rebuilt at the ID spec's semantic magnitude on the new set.
GmmSpec semantic_shift_spec(const GmmSpec& id_spec, double overlap_rate,
                            std::uint64_t seed);

// OOD spec with both centroids translated by +alpha on every background
// dimension; semantic components, partition, covariance and prior unchanged.
GmmSpec background_shift_spec(const GmmSpec& id_spec, double alpha);

// Applies the shift named by `shift` to an ID spec.
GmmSpec apply_shift(const GmmSpec& id_spec, const ShiftSpec& shift);

// Draws `count` labeled samples: label ~ Bernoulli(class1_prior), features ~
// N(centroid_label, covariance_scale * I). Row i is a pure function of
// (spec, seed, i), so output is identical for any thread count.
SampleSet sample(const GmmSpec& spec, int count, std::uint64_t seed,
                 Origin origin = Origin::InDistribution);

namespace serial {
// Reference implementation of sample(): same per-row streams, plain loop.
SampleSet sample(const GmmSpec& spec, int count, std::uint64_t seed,
                 Origin origin = Origin::InDistribution);
} // namespace serial

nlohmann::json to_json(const GmmSpec& spec);
GmmSpec gmm_spec_from_json(const nlohmann::json& j);

} // namespace ood
