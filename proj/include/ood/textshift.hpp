#pragma once

// Controlled text shifts and the oracle OOD detector. append_filler makes a
// background shift by appending unrelated words; partition_by_class makes a
// semantic shift by moving classes to OOD. The oracle trains a bag-of-words
// logistic regression (OOD = positive class) with access to both sides.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ood/metrics.hpp"

namespace ood {

struct CorpusExample {
    std::string example_id;
    std::string text;
    std::optional<std::string> class_label;
};

struct Corpus {
    std::vector<CorpusExample> examples;

    std::size_t size() const { return examples.size(); }
};

struct BowModel {
    std::vector<std::string> vocabulary; // sorted; index = position
    std::vector<double> weights;
    double bias = 0.0;
};

struct BowTrainConfig {
    double learning_rate = 0.1;
    int epochs = 500;
    double l2 = 1e-4;
    int min_token_count = 2;
};

// Lowercased whitespace-split tokens with leading/trailing punctuation
// stripped; empty tokens dropped.
std::vector<std::string> tokenize(const std::string& text);

// Appends to every example a seeded contiguous run of exactly length_words
// words from the filler corpus word stream, after a single space. Runs are
// drawn independently per example; ids and labels are preserved.
Corpus append_filler(const Corpus& corpus, const Corpus& filler, int length_words,
                     std::uint64_t seed);

// Splits into (examples with class in id_classes, the rest), both in input
// order. Every example must be labeled and every listed class must occur.
std::pair<Corpus, Corpus> partition_by_class(const Corpus& corpus,
                                             const std::vector<std::string>& id_classes);

// Full-batch gradient descent on the L2-regularized logistic loss over raw
// token counts; the bias is not regularized. Optionally reports the loss
// after each epoch.
BowModel fit_bow_logreg(const std::vector<std::string>& id_texts,
                        const std::vector<std::string>& ood_texts,
                        const BowTrainConfig& config = {},
                        std::vector<double>* loss_history = nullptr);

// Predicted OOD probability under the model.
double bow_predict_ood(const BowModel& model, const std::string& text);

// Regularized loss and its analytic gradient at the model's parameters,
// gradient laid out as [d/dw_0 .. d/dw_{V-1}, d/dbias]. Texts are featurized
// against the model's vocabulary.
std::pair<double, std::vector<double>> bow_loss_and_gradient(
    const BowModel& model, const std::vector<std::string>& id_texts,
    const std::vector<std::string>& ood_texts, double l2);

// Seeded per-side split at train_fraction, fit on the train portions, report
// AUROC/FAR95 on the held-out portions with score = 1 - p(ood | x).
EvalReport oracle_detect(const std::vector<std::string>& id_texts,
                         const std::vector<std::string>& ood_texts,
                         double train_fraction, std::uint64_t seed,
                         const BowTrainConfig& config = {},
                         BowModel* fitted_model = nullptr);

Corpus load_corpus(const std::string& path);
std::string serialize_corpus(const Corpus& corpus);
void save_corpus(const Corpus& corpus, const std::string& path);

nlohmann::json to_json(const BowModel& model);
BowModel bow_model_from_json(const nlohmann::json& j);

} // namespace ood
