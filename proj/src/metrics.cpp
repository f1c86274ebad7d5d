#include "ood/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "ood/errors.hpp"

namespace ood {

namespace {

void validate_scores(std::span<const double> scores, const char* side) {
    if (scores.empty())
        throw ValidationError(std::string(side) + " score set is empty");
    for (double s : scores) {
        if (!std::isfinite(s))
            throw ValidationError(std::string("non-finite score in ") + side + " set");
    }
}

double z_for_level(double level) {
    if (level == 0.90) return 1.645;
    if (level == 0.95) return 1.96;
    if (level == 0.99) return 2.576;
    throw ValidationError("unsupported confidence level; use 0.90, 0.95 or 0.99");
}

struct MeanCi {
    double mean;
    double halfwidth;
};

MeanCi mean_ci(const std::vector<double>& xs, double z) {
    const double k = static_cast<double>(xs.size());
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= k;
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    const double sd = std::sqrt(ss / (k - 1.0));
    return {mean, z * sd / std::sqrt(k)};
}

} // namespace

double auroc(std::span<const double> id_scores, std::span<const double> ood_scores) {
    validate_scores(id_scores, "ID");
    validate_scores(ood_scores, "OOD");

    const std::size_t n_id = id_scores.size();
    const std::size_t n_ood = ood_scores.size();

    // (score, came-from-ID) pairs sorted ascending; ties share average rank.
    std::vector<std::pair<double, bool>> combined;
    combined.reserve(n_id + n_ood);
    for (double s : id_scores) combined.emplace_back(s, true);
    for (double s : ood_scores) combined.emplace_back(s, false);
    std::sort(combined.begin(), combined.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    double id_rank_sum = 0.0;
    std::size_t i = 0;
    while (i < combined.size()) {
        std::size_t j = i;
        while (j < combined.size() && combined[j].first == combined[i].first) ++j;
        const double avg_rank = 0.5 * static_cast<double>(i + 1 + j); // 1-based
        for (std::size_t k = i; k < j; ++k) {
            if (combined[k].second) id_rank_sum += avg_rank;
        }
        i = j;
    }

    const double u = id_rank_sum -
                     0.5 * static_cast<double>(n_id) * static_cast<double>(n_id + 1);
    return u / (static_cast<double>(n_id) * static_cast<double>(n_ood));
}

double far95(std::span<const double> id_scores, std::span<const double> ood_scores) {
    validate_scores(id_scores, "ID");
    validate_scores(ood_scores, "OOD");

    std::vector<double> ood_sorted(ood_scores.begin(), ood_scores.end());
    std::sort(ood_sorted.begin(), ood_sorted.end());

    // ceil(0.95 M) in exact integer arithmetic.
    const std::size_t m = ood_sorted.size();
    const std::size_t k = (19 * m + 19) / 20;
    const double gamma = ood_sorted[k - 1];

    std::size_t flagged = 0;
    for (double s : id_scores) {
        if (s <= gamma) ++flagged;
    }
    return static_cast<double>(flagged) / static_cast<double>(id_scores.size());
}

SweepCell aggregate_trials(const std::vector<EvalReport>& reports, double level) {
    if (reports.size() < 2)
        throw ValidationError("aggregate_trials requires at least 2 reports");
    const double z = z_for_level(level);

    std::vector<double> aurocs;
    std::vector<double> far95s;
    aurocs.reserve(reports.size());
    far95s.reserve(reports.size());
    for (const auto& r : reports) {
        aurocs.push_back(r.auroc);
        far95s.push_back(r.far95);
    }

    SweepCell cell;
    cell.trials = reports;
    const MeanCi a = mean_ci(aurocs, z);
    const MeanCi f = mean_ci(far95s, z);
    cell.mean_auroc = a.mean;
    cell.auroc_ci_halfwidth = a.halfwidth;
    cell.mean_far95 = f.mean;
    cell.far95_ci_halfwidth = f.halfwidth;
    return cell;
}

} // namespace ood
