#include "ood/textshift.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include "ood/errors.hpp"
#include "ood/rng.hpp"

namespace ood {

namespace {

using nlohmann::json;

// index -> count rows, indices strictly increasing.
using SparseRow = std::vector<std::pair<int, double>>;

std::vector<std::string> split_words(const std::string& text) {
    std::vector<std::string> words;
    std::istringstream in(text);
    std::string word;
    while (in >> word) words.push_back(word);
    return words;
}

double logistic(double t) {
    if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
    const double e = std::exp(t);
    return e / (1.0 + e);
}

SparseRow count_row(const std::vector<std::string>& tokens,
                    const std::unordered_map<std::string, int>& vocab_index) {
    std::map<int, double> counts;
    for (const std::string& tok : tokens) {
        auto it = vocab_index.find(tok);
        if (it != vocab_index.end()) counts[it->second] += 1.0;
    }
    return {counts.begin(), counts.end()};
}

double dot(const BowModel& model, const SparseRow& row) {
    double acc = model.bias;
    for (const auto& [idx, count] : row) acc += model.weights[idx] * count;
    return acc;
}

// Mean cross-entropy + (l2/2) |w|^2; the ridge term excludes the bias.
double logreg_loss(const BowModel& model, const std::vector<SparseRow>& rows,
                   const std::vector<int>& labels, double l2) {
    double loss = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const double z = dot(model, rows[i]);
        // -log p(y_i | x_i) = log(1 + exp(z)) - y z, computed without overflow
        loss += std::max(z, 0.0) + std::log1p(std::exp(-std::fabs(z))) -
                labels[i] * z;
    }
    loss /= static_cast<double>(rows.size());
    double ridge = 0.0;
    for (double w : model.weights) ridge += w * w;
    return loss + 0.5 * l2 * ridge;
}

} // namespace

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> tokens;
    std::size_t i = 0;
    const auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
    const auto is_punct = [](unsigned char c) { return std::ispunct(c) != 0; };
    while (i < text.size()) {
        while (i < text.size() && is_space(text[i])) ++i;
        std::size_t j = i;
        while (j < text.size() && !is_space(text[j])) ++j;
        if (j > i) {
            std::size_t lo = i;
            std::size_t hi = j;
            while (lo < hi && is_punct(text[lo])) ++lo;
            while (hi > lo && is_punct(text[hi - 1])) --hi;
            if (hi > lo) {
                std::string tok = text.substr(lo, hi - lo);
                for (char& c : tok)
                    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
                tokens.push_back(std::move(tok));
            }
        }
        i = j;
    }
    return tokens;
}

Corpus append_filler(const Corpus& corpus, const Corpus& filler, int length_words,
                     std::uint64_t seed) {
    if (length_words < 1) throw ValidationError("length_words must be >= 1");
    if (filler.examples.empty()) throw ValidationError("filler corpus is empty");

    std::vector<std::string> pool;
    for (const CorpusExample& ex : filler.examples) {
        for (std::string& w : split_words(ex.text)) pool.push_back(std::move(w));
    }
    if (static_cast<int>(pool.size()) < length_words)
        throw ValidationError("filler corpus has " + std::to_string(pool.size()) +
                              " words, fewer than the requested " +
                              std::to_string(length_words));

    Corpus out;
    out.examples.reserve(corpus.size());
    const std::uint64_t n_starts = pool.size() - length_words + 1;
    for (std::size_t i = 0; i < corpus.examples.size(); ++i) {
        rng::SplitMix64 gen(rng::combine(seed, i));
        const std::size_t start = static_cast<std::size_t>(gen.next_below(n_starts));
        std::string text = corpus.examples[i].text;
        for (int k = 0; k < length_words; ++k) {
            text += ' ';
            text += pool[start + k];
        }
        out.examples.push_back({corpus.examples[i].example_id, std::move(text),
                                corpus.examples[i].class_label});
    }
    return out;
}

std::pair<Corpus, Corpus> partition_by_class(const Corpus& corpus,
                                             const std::vector<std::string>& id_classes) {
    if (id_classes.empty()) throw ValidationError("id_classes must name at least one class");

    std::set<std::string> present;
    for (const CorpusExample& ex : corpus.examples) {
        if (!ex.class_label)
            throw ValidationError("example \"" + ex.example_id + "\" has no class label");
        present.insert(*ex.class_label);
    }
    std::set<std::string> wanted(id_classes.begin(), id_classes.end());
    for (const std::string& cls : wanted) {
        if (!present.count(cls))
            throw ValidationError("class \"" + cls + "\" does not occur in the corpus");
    }

    Corpus id_side;
    Corpus ood_side;
    for (const CorpusExample& ex : corpus.examples) {
        (wanted.count(*ex.class_label) ? id_side : ood_side).examples.push_back(ex);
    }
    return {std::move(id_side), std::move(ood_side)};
}

BowModel fit_bow_logreg(const std::vector<std::string>& id_texts,
                        const std::vector<std::string>& ood_texts,
                        const BowTrainConfig& config,
                        std::vector<double>* loss_history) {
    if (id_texts.empty() || ood_texts.empty())
        throw ValidationError("both ID and OOD training sides must be nonempty");
    if (config.epochs < 1) throw ValidationError("epochs must be >= 1");
    if (!(config.learning_rate > 0.0)) throw ValidationError("learning_rate must be > 0");
    if (config.l2 < 0.0) throw ValidationError("l2 must be >= 0");

    std::vector<std::vector<std::string>> token_lists;
    std::vector<int> labels;
    for (const std::string& t : id_texts) {
        token_lists.push_back(tokenize(t));
        labels.push_back(0);
    }
    for (const std::string& t : ood_texts) {
        token_lists.push_back(tokenize(t));
        labels.push_back(1);
    }

    std::map<std::string, int> token_counts;
    for (const auto& tokens : token_lists) {
        for (const std::string& tok : tokens) ++token_counts[tok];
    }

    BowModel model;
    for (const auto& [tok, count] : token_counts) {
        if (count >= config.min_token_count) model.vocabulary.push_back(tok);
    }
    if (model.vocabulary.empty())
        throw ValidationError("vocabulary is empty after min_token_count filtering");
    model.weights.assign(model.vocabulary.size(), 0.0);

    std::unordered_map<std::string, int> vocab_index;
    for (std::size_t i = 0; i < model.vocabulary.size(); ++i)
        vocab_index[model.vocabulary[i]] = static_cast<int>(i);

    std::vector<SparseRow> rows;
    rows.reserve(token_lists.size());
    for (const auto& tokens : token_lists) rows.push_back(count_row(tokens, vocab_index));

    const double inv_n = 1.0 / static_cast<double>(rows.size());
    std::vector<double> grad(model.weights.size());
    if (loss_history) loss_history->clear();

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        std::fill(grad.begin(), grad.end(), 0.0);
        double grad_bias = 0.0;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const double residual = logistic(dot(model, rows[i])) - labels[i];
            for (const auto& [idx, count] : rows[i]) grad[idx] += residual * count;
            grad_bias += residual;
        }
        for (std::size_t j = 0; j < model.weights.size(); ++j) {
            model.weights[j] -=
                config.learning_rate * (grad[j] * inv_n + config.l2 * model.weights[j]);
        }
        model.bias -= config.learning_rate * grad_bias * inv_n;
        if (loss_history)
            loss_history->push_back(logreg_loss(model, rows, labels, config.l2));
    }
    return model;
}

double bow_predict_ood(const BowModel& model, const std::string& text) {
    std::unordered_map<std::string, int> vocab_index;
    for (std::size_t i = 0; i < model.vocabulary.size(); ++i)
        vocab_index[model.vocabulary[i]] = static_cast<int>(i);
    return logistic(dot(model, count_row(tokenize(text), vocab_index)));
}

std::pair<double, std::vector<double>> bow_loss_and_gradient(
    const BowModel& model, const std::vector<std::string>& id_texts,
    const std::vector<std::string>& ood_texts, double l2) {
    std::unordered_map<std::string, int> vocab_index;
    for (std::size_t i = 0; i < model.vocabulary.size(); ++i)
        vocab_index[model.vocabulary[i]] = static_cast<int>(i);

    std::vector<SparseRow> rows;
    std::vector<int> labels;
    for (const std::string& t : id_texts) {
        rows.push_back(count_row(tokenize(t), vocab_index));
        labels.push_back(0);
    }
    for (const std::string& t : ood_texts) {
        rows.push_back(count_row(tokenize(t), vocab_index));
        labels.push_back(1);
    }
    if (rows.empty()) throw ValidationError("no texts to evaluate the loss on");

    const double inv_n = 1.0 / static_cast<double>(rows.size());
    std::vector<double> grad(model.weights.size() + 1, 0.0);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const double residual = logistic(dot(model, rows[i])) - labels[i];
        for (const auto& [idx, count] : rows[i]) grad[idx] += residual * count * inv_n;
        grad.back() += residual * inv_n;
    }
    for (std::size_t j = 0; j < model.weights.size(); ++j) grad[j] += l2 * model.weights[j];

    return {logreg_loss(model, rows, labels, l2), std::move(grad)};
}

EvalReport oracle_detect(const std::vector<std::string>& id_texts,
                         const std::vector<std::string>& ood_texts,
                         double train_fraction, std::uint64_t seed,
                         const BowTrainConfig& config, BowModel* fitted_model) {
    if (id_texts.size() < 5 || ood_texts.size() < 5)
        throw ValidationError("oracle_detect requires at least 5 examples per side");
    if (!(train_fraction > 0.0 && train_fraction <= 1.0))
        throw ValidationError("train_fraction must lie in (0, 1]");

    // Seeded per-side shuffle; the first round(f * n) indices train. Both
    // sides run the same generator, so an identical pair of corpora splits
    // identically and the null case stays at chance.
    const auto split_side = [&](const std::vector<std::string>& texts) {
        std::vector<std::size_t> order(texts.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        rng::SplitMix64 gen(seed);
        order = rng::sample_without_replacement(std::move(order), texts.size(), gen);
        const std::size_t n_train = static_cast<std::size_t>(
            std::floor(train_fraction * static_cast<double>(texts.size()) + 0.5));
        std::pair<std::vector<std::string>, std::vector<std::string>> out;
        for (std::size_t i = 0; i < order.size(); ++i)
            (i < n_train ? out.first : out.second).push_back(texts[order[i]]);
        return out;
    };

    const auto [id_train, id_test] = split_side(id_texts);
    const auto [ood_train, ood_test] = split_side(ood_texts);
    if (id_test.empty() || ood_test.empty())
        throw ValidationError("train_fraction leaves an empty held-out side");
    if (id_train.empty() || ood_train.empty())
        throw ValidationError("train_fraction leaves an empty training side");

    const BowModel model = fit_bow_logreg(id_train, ood_train, config);
    if (fitted_model) *fitted_model = model;

    std::vector<double> id_scores;
    std::vector<double> ood_scores;
    for (const std::string& t : id_test) id_scores.push_back(1.0 - bow_predict_ood(model, t));
    for (const std::string& t : ood_test)
        ood_scores.push_back(1.0 - bow_predict_ood(model, t));

    EvalReport report;
    report.auroc = auroc(id_scores, ood_scores);
    report.far95 = far95(id_scores, ood_scores);
    report.n_id = static_cast<int>(id_scores.size());
    report.n_ood = static_cast<int>(ood_scores.size());
    report.detector_name = "oracle_bow";
    return report;
}

Corpus load_corpus(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open corpus file: " + path);

    Corpus corpus;
    std::set<std::string> seen_ids;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ValidationError("line " + std::to_string(line_no) +
                                  ": invalid JSON: " + e.what());
        }
        CorpusExample ex;
        if (!j.contains("example_id") || !j.at("example_id").is_string())
            throw ValidationError("line " + std::to_string(line_no) +
                                  ": missing string field \"example_id\"");
        ex.example_id = j.at("example_id").get<std::string>();
        if (!j.contains("text") || !j.at("text").is_string())
            throw ValidationError("line " + std::to_string(line_no) +
                                  ": missing string field \"text\"");
        ex.text = j.at("text").get<std::string>();
        if (ex.text.empty())
            throw ValidationError("line " + std::to_string(line_no) + ": empty text");
        if (j.contains("class")) ex.class_label = j.at("class").get<std::string>();
        if (!seen_ids.insert(ex.example_id).second)
            throw ValidationError("line " + std::to_string(line_no) +
                                  ": duplicate example_id \"" + ex.example_id + "\"");
        corpus.examples.push_back(std::move(ex));
    }
    return corpus;
}

std::string serialize_corpus(const Corpus& corpus) {
    std::ostringstream out;
    for (const CorpusExample& ex : corpus.examples) {
        json j{{"example_id", ex.example_id}, {"text", ex.text}};
        if (ex.class_label) j["class"] = *ex.class_label;
        out << j.dump() << '\n';
    }
    return out.str();
}

void save_corpus(const Corpus& corpus, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write corpus file: " + path);
    out << serialize_corpus(corpus);
}

nlohmann::json to_json(const BowModel& model) {
    return json{{"vocabulary", model.vocabulary},
                {"weights", model.weights},
                {"bias", model.bias}};
}

BowModel bow_model_from_json(const nlohmann::json& j) {
    BowModel model;
    try {
        model.vocabulary = j.at("vocabulary").get<std::vector<std::string>>();
        model.weights = j.at("weights").get<std::vector<double>>();
        model.bias = j.at("bias").get<double>();
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed BowModel JSON: ") + e.what());
    }
    if (model.vocabulary.size() != model.weights.size())
        throw ValidationError("BowModel weight count does not match vocabulary size");
    return model;
}

} // namespace ood
