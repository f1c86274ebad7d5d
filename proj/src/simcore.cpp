#include "ood/simcore.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "ood/errors.hpp"
#include "ood/rng.hpp"

namespace ood {

namespace {

std::vector<int> complement_of(const std::vector<int>& sorted_indices, int total_dims) {
    std::vector<int> out;
    out.reserve(total_dims - static_cast<int>(sorted_indices.size()));
    std::size_t k = 0;
    for (int i = 0; i < total_dims; ++i) {
        if (k < sorted_indices.size() && sorted_indices[k] == i) {
            ++k;
        } else {
            out.push_back(i);
        }
    }
    return out;
}

GmmSpec spec_from_semantic_set(std::vector<int> semantic_sorted, int total_dims,
                               double magnitude, double covariance_scale,
                               double class1_prior) {
    GmmSpec spec;
    spec.partition.total_dims = total_dims;
    spec.partition.background_indices = complement_of(semantic_sorted, total_dims);
    spec.partition.semantic_indices = std::move(semantic_sorted);
    spec.centroid_0.assign(total_dims, 0.0);
    spec.centroid_1.assign(total_dims, 0.0);
    for (int idx : spec.partition.semantic_indices) {
        spec.centroid_1[idx] = magnitude;
        spec.centroid_0[idx] = -magnitude;
    }
    spec.covariance_scale = covariance_scale;
    spec.class1_prior = class1_prior;
    return spec;
}

// Common magnitude of the ID spec's semantic components; the shift
// constructors only accept specs in the build_id_spec family.
double semantic_magnitude_of(const GmmSpec& spec) {
    if (spec.partition.semantic_indices.empty())
        throw ValidationError("spec has no semantic dimensions");
    const double mag = spec.centroid_1[spec.partition.semantic_indices.front()];
    for (int idx : spec.partition.semantic_indices) {
        if (spec.centroid_1[idx] != mag || spec.centroid_0[idx] != -mag)
            throw ValidationError("spec semantic centroid components are not uniform +/-magnitude");
    }
    return mag;
}

void validate_spec(const GmmSpec& spec) {
    const int d = spec.partition.total_dims;
    if (d <= 0) throw ValidationError("total_dims must be positive");
    if (spec.centroid_0.size() != static_cast<std::size_t>(d) ||
        spec.centroid_1.size() != static_cast<std::size_t>(d))
        throw ValidationError("centroid length does not match total_dims");
    if (!(spec.covariance_scale > 0.0))
        throw ValidationError("covariance_scale must be positive");
    if (!(spec.class1_prior > 0.0 && spec.class1_prior < 1.0))
        throw ValidationError("class1_prior must lie in (0, 1)");

    std::set<int> seen;
    for (int i : spec.partition.semantic_indices) seen.insert(i);
    for (int i : spec.partition.background_indices) seen.insert(i);
    if (static_cast<int>(seen.size()) != d ||
        static_cast<int>(spec.partition.semantic_indices.size() +
                         spec.partition.background_indices.size()) != d ||
        *seen.begin() != 0 || *seen.rbegin() != d - 1)
        throw ValidationError("semantic and background indices must partition 0..d-1");

    for (int idx : spec.partition.background_indices) {
        if (spec.centroid_0[idx] != spec.centroid_1[idx])
            throw ValidationError("centroids differ on a background dimension");
    }
}

SampleSet sample_impl(const GmmSpec& spec, int count, std::uint64_t seed, Origin origin,
                      bool parallel) {
    if (count < 1) throw ValidationError("sample count must be >= 1");

    const int d = spec.dims();
    SampleSet out;
    out.dims = d;
    out.origin = origin;
    out.features.resize(static_cast<std::size_t>(count) * d);
    out.labels.resize(count);

    const double sigma = std::sqrt(spec.covariance_scale);
    const double* c0 = spec.centroid_0.data();
    const double* c1 = spec.centroid_1.data();

#pragma omp parallel for schedule(static) if (parallel)
    for (int i = 0; i < count; ++i) {
        rng::NormalStream stream(rng::combine(seed, static_cast<std::uint64_t>(i)));
        const int label = stream.next_uniform() < spec.class1_prior ? 1 : 0;
        const double* mean = label ? c1 : c0;
        double* row = out.features.data() + static_cast<std::size_t>(i) * d;
        for (int j = 0; j < d; ++j) {
            row[j] = mean[j] + sigma * stream.next_normal();
        }
        out.labels[i] = label;
    }
    return out;
}

} // namespace

GmmSpec build_id_spec(int total_dims, int n_semantic, double semantic_magnitude,
                      std::uint64_t seed) {
    if (total_dims < 2) throw ValidationError("total_dims must be >= 2");
    if (n_semantic < 1 || n_semantic >= total_dims)
        throw ValidationError("n_semantic must satisfy 1 <= n_semantic < total_dims");
    if (!(semantic_magnitude > 0.0))
        throw ValidationError("semantic_magnitude must be positive");

    std::vector<int> all(total_dims);
    for (int i = 0; i < total_dims; ++i) all[i] = i;
    rng::SplitMix64 gen(seed);
    std::vector<int> semantic =
        rng::sample_without_replacement(std::move(all), n_semantic, gen);
    std::sort(semantic.begin(), semantic.end());

    return spec_from_semantic_set(std::move(semantic), total_dims, semantic_magnitude,
                                  /*covariance_scale=*/1.0, /*class1_prior=*/0.5);
}

GmmSpec semantic_shift_spec(const GmmSpec& id_spec, double overlap_rate,
                            std::uint64_t seed) {
    if (!(overlap_rate >= 0.0 && overlap_rate <= 1.0))
        throw ValidationError("overlap_rate must lie in [0, 1]");

    const int n = id_spec.partition.n_semantic();
    const int m = id_spec.partition.n_background();
    const int n_kept = static_cast<int>(std::floor(overlap_rate * n + 0.5)); // half-up
    const int n_moved = n - n_kept;
    if (n_moved > m)
        throw ValidationError("not enough background dimensions to relocate " +
                              std::to_string(n_moved) + " semantic dimensions into");

    const double magnitude = semantic_magnitude_of(id_spec);

    rng::SplitMix64 gen(seed);
    std::vector<int> kept = rng::sample_without_replacement(
        id_spec.partition.semantic_indices, static_cast<std::size_t>(n_kept), gen);
    std::vector<int> moved = rng::sample_without_replacement(
        id_spec.partition.background_indices, static_cast<std::size_t>(n_moved), gen);

    std::vector<int> semantic;
    semantic.reserve(n);
    semantic.insert(semantic.end(), kept.begin(), kept.end());
    semantic.insert(semantic.end(), moved.begin(), moved.end());
    std::sort(semantic.begin(), semantic.end());

    return spec_from_semantic_set(std::move(semantic), id_spec.dims(), magnitude,
                                  id_spec.covariance_scale, id_spec.class1_prior);
}

GmmSpec background_shift_spec(const GmmSpec& id_spec, double alpha) {
    if (!(alpha >= 0.0)) throw ValidationError("displacement alpha must be >= 0");

    GmmSpec shifted = id_spec;
    for (int idx : shifted.partition.background_indices) {
        shifted.centroid_0[idx] += alpha;
        shifted.centroid_1[idx] += alpha;
    }
    return shifted;
}

GmmSpec apply_shift(const GmmSpec& id_spec, const ShiftSpec& shift) {
    switch (shift.kind) {
    case ShiftKind::Semantic:
        return semantic_shift_spec(id_spec, shift.overlap_rate, shift.seed);
    case ShiftKind::Background:
        return background_shift_spec(id_spec, shift.displacement_alpha);
    }
    throw ValidationError("unknown shift kind");
}

SampleSet sample(const GmmSpec& spec, int count, std::uint64_t seed, Origin origin) {
    return sample_impl(spec, count, seed, origin, /*parallel=*/true);
}

namespace serial {
SampleSet sample(const GmmSpec& spec, int count, std::uint64_t seed, Origin origin) {
    return sample_impl(spec, count, seed, origin, /*parallel=*/false);
}
} // namespace serial

nlohmann::json to_json(const GmmSpec& spec) {
    return nlohmann::json{
        {"total_dims", spec.partition.total_dims},
        {"semantic_indices", spec.partition.semantic_indices},
        {"background_indices", spec.partition.background_indices},
        {"centroid_0", spec.centroid_0},
        {"centroid_1", spec.centroid_1},
        {"covariance_scale", spec.covariance_scale},
        {"class1_prior", spec.class1_prior},
    };
}

GmmSpec gmm_spec_from_json(const nlohmann::json& j) {
    GmmSpec spec;
    try {
        spec.partition.total_dims = j.at("total_dims").get<int>();
        spec.partition.semantic_indices = j.at("semantic_indices").get<std::vector<int>>();
        spec.partition.background_indices =
            j.at("background_indices").get<std::vector<int>>();
        spec.centroid_0 = j.at("centroid_0").get<std::vector<double>>();
        spec.centroid_1 = j.at("centroid_1").get<std::vector<double>>();
        spec.covariance_scale = j.at("covariance_scale").get<double>();
        spec.class1_prior = j.at("class1_prior").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed GmmSpec JSON: ") + e.what());
    }
    if (!std::is_sorted(spec.partition.semantic_indices.begin(),
                        spec.partition.semantic_indices.end()) ||
        !std::is_sorted(spec.partition.background_indices.begin(),
                        spec.partition.background_indices.end()))
        throw ValidationError("GmmSpec index sets must be sorted");
    validate_spec(spec);
    return spec;
}

} // namespace ood
