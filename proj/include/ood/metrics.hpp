#pragma once

// Threshold-free evaluation. OOD is the positive class; scores follow the
// "higher = more in-distribution" orientation everywhere.

#include <span>
#include <string>
#include <vector>

namespace ood {

struct EvalReport {
    double auroc = 0.0;
    double far95 = 0.0;
    int n_id = 0;
    int n_ood = 0;
    std::string detector_name;
};

struct SweepCell {
    double sweep_parameter = 0.0;
    std::vector<EvalReport> trials;
    double mean_auroc = 0.0;
    double auroc_ci_halfwidth = 0.0;
    double mean_far95 = 0.0;
    double far95_ci_halfwidth = 0.0;
};

// P(s_id > s_ood) + 1/2 P(s_id = s_ood) over all ID x OOD pairs, computed via
// the Mann-Whitney rank statistic with average ranks for ties. 0.5 = chance;
// values below 0.5 are legal.
double auroc(std::span<const double> id_scores, std::span<const double> ood_scores);

// Fraction of ID scores flagged OOD (score <= gamma) at the smallest observed
// threshold gamma reaching OOD recall >= 0.95: gamma = the ceil(0.95 M)-th
// smallest OOD score. Lower is better.
double far95(std::span<const double> id_scores, std::span<const double> ood_scores);

// Mean trial AUROC/FAR95 with normal-approximation confidence halfwidths
// z(level) * sd / sqrt(k), unbiased sd; z(0.95) = 1.96. Supported levels:
// 0.90, 0.95, 0.99. Requires >= 2 reports.
SweepCell aggregate_trials(const std::vector<EvalReport>& reports, double level = 0.95);

} // namespace ood
