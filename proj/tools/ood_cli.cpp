// Command-line front end: sim / eval / textshift / oracle subcommands.
// Exit codes: 0 success, 1 validation or usage error, 2 environment or I/O
// failure. Every run writes one run_manifest.json next to its outputs; no
// subcommand writes outside --out.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ood/detectors.hpp"
#include "ood/errors.hpp"
#include "ood/runner.hpp"
#include "ood/scoreio.hpp"
#include "ood/textshift.hpp"
#include "ood/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t hash = 1469598103934665603ull;
    for (unsigned char c : data) {
        hash ^= c;
        hash *= 1099511628211ull;
    }
    return hash;
}

std::string file_digest(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ood::IoError("cannot read back output file: " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    char hex[17];
    std::snprintf(hex, sizeof(hex), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(buffer.str())));
    return hex;
}

void write_text_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ood::IoError("cannot write output file: " + path.string());
    out << content;
    if (!out) throw ood::IoError("write failed: " + path.string());
}

fs::path prepare_out_dir(const std::string& out) {
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) throw ood::IoError("cannot create output directory " + out + ": " + ec.message());
    return fs::path(out);
}

// One manifest per run: resolved config, seed, artifact version, output
// digests.
void write_manifest(const fs::path& out_dir, const std::string& subcommand,
                    json resolved_config, const std::vector<fs::path>& outputs,
                    std::optional<std::uint64_t> master_seed = std::nullopt) {
    json manifest{
        {"schema_version", ood::kSchemaVersion},
        {"artifact_version", ood::kArtifactVersion},
        {"subcommand", subcommand},
        {"config", std::move(resolved_config)},
    };
    if (master_seed) manifest["master_seed"] = *master_seed;
    json digests = json::array();
    for (const fs::path& p : outputs) {
        digests.push_back({{"path", p.filename().string()}, {"fnv1a64", file_digest(p)}});
    }
    manifest["outputs"] = std::move(digests);
    write_text_file(out_dir / "run_manifest.json", manifest.dump(2) + "\n");
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ood::IoError("cannot open file: " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ood::ValidationError("invalid JSON in " + path + ": " + e.what());
    }
}

struct SimArgs {
    std::string sweep;
    std::string config_path;
    std::string out;
    int threads = 0;
};

int run_sim(const SimArgs& args) {
    const ood::ShiftKind kind =
        args.sweep == "semantic" ? ood::ShiftKind::Semantic : ood::ShiftKind::Background;

    ood::SweepConfig config = kind == ood::ShiftKind::Semantic
                                  ? ood::SweepConfig::semantic_defaults()
                                  : ood::SweepConfig::background_defaults();
    if (!args.config_path.empty())
        config = ood::sweep_config_from_json(read_json_file(args.config_path), kind);

    const ood::SweepResult result = kind == ood::ShiftKind::Semantic
                                        ? ood::run_semantic_sweep(config, args.threads)
                                        : ood::run_background_sweep(config, args.threads);

    const fs::path out_dir = prepare_out_dir(args.out);
    const fs::path csv_path = out_dir / (args.sweep + "_sweep.csv");
    const fs::path summary_path = out_dir / (args.sweep + "_sweep_summary.json");
    write_text_file(csv_path, ood::sweep_csv(result));
    write_text_file(summary_path, ood::sweep_summary_json(result).dump(2) + "\n");
    write_manifest(out_dir, "sim", ood::sweep_config_to_json(config, kind),
                   {csv_path, summary_path}, config.master_seed);

    std::cout << args.sweep << " sweep: " << result.cells.size() / 2 << " cells x 2 detectors x "
              << config.n_trials << " trials -> " << csv_path.string() << "\n";
    return 0;
}

struct EvalArgs {
    std::string scores_path;
    std::string detector;
    std::string out;
};

int run_eval(const EvalArgs& args) {
    ood::TextDetector detector = ood::TextDetector::Msp;
    if (args.detector == "ppl") detector = ood::TextDetector::Ppl;
    else if (args.detector == "logpx") detector = ood::TextDetector::LogPx;

    const auto records = ood::load_records(args.scores_path, ood::payload_kind_for(detector));
    const ood::EvalReport report = ood::evaluate_records(records, detector);

    json report_json{
        {"schema_version", ood::kSchemaVersion},
        {"detector", report.detector_name},
        {"auroc", report.auroc},
        {"far95", report.far95},
        {"n_id", report.n_id},
        {"n_ood", report.n_ood},
    };
    if (detector == ood::TextDetector::Ppl) {
        // conventional perplexity = 1/score, averaged per split
        double id_ppl = 0.0;
        double ood_ppl = 0.0;
        for (const ood::ScoreRecord& r : records) {
            const double conventional = 1.0 / ood::ppl_score(r.token_logprobs);
            (r.split == ood::Split::Id ? id_ppl : ood_ppl) += conventional;
        }
        report_json["id_mean_conventional_ppl"] = id_ppl / report.n_id;
        report_json["ood_mean_conventional_ppl"] = ood_ppl / report.n_ood;
    }

    const fs::path out_dir = prepare_out_dir(args.out);
    const fs::path report_path = out_dir / "eval_report.json";
    write_text_file(report_path, report_json.dump(2) + "\n");
    write_manifest(out_dir, "eval",
                   json{{"scores", args.scores_path}, {"detector", args.detector}},
                   {report_path});

    std::cout << report.detector_name << ": AUROC " << ood::format_fixed6(report.auroc)
              << " FAR95 " << ood::format_fixed6(report.far95) << " (n_id=" << report.n_id
              << ", n_ood=" << report.n_ood << ")\n";
    return 0;
}

struct AppendArgs {
    std::string corpus_path;
    std::string filler_path;
    std::vector<int> lengths;
    std::uint64_t seed = 0;
    std::string out;
};

int run_append_filler(const AppendArgs& args) {
    const ood::Corpus corpus = ood::load_corpus(args.corpus_path);
    const ood::Corpus filler = ood::load_corpus(args.filler_path);
    if (args.lengths.empty())
        throw ood::ValidationError("--lengths must name at least one word count");

    const fs::path out_dir = prepare_out_dir(args.out);
    std::vector<fs::path> outputs;
    for (int length : args.lengths) {
        const ood::Corpus appended = ood::append_filler(corpus, filler, length, args.seed);
        const fs::path path = out_dir / ("appended_" + std::to_string(length) + ".jsonl");
        write_text_file(path, ood::serialize_corpus(appended));
        outputs.push_back(path);
    }
    write_manifest(out_dir, "textshift append-filler",
                   json{{"corpus", args.corpus_path},
                        {"filler", args.filler_path},
                        {"lengths", args.lengths},
                        {"seed", args.seed}},
                   outputs, args.seed);
    std::cout << "wrote " << outputs.size() << " appended corpora to " << out_dir.string()
              << "\n";
    return 0;
}

struct PartitionArgs {
    std::string corpus_path;
    std::vector<std::string> id_classes;
    std::string out;
};

int run_partition(const PartitionArgs& args) {
    const ood::Corpus corpus = ood::load_corpus(args.corpus_path);
    const auto [id_side, ood_side] = ood::partition_by_class(corpus, args.id_classes);

    const fs::path out_dir = prepare_out_dir(args.out);
    const fs::path id_path = out_dir / "id.jsonl";
    const fs::path ood_path = out_dir / "ood.jsonl";
    write_text_file(id_path, ood::serialize_corpus(id_side));
    write_text_file(ood_path, ood::serialize_corpus(ood_side));
    if (ood_side.size() == 0)
        std::cerr << "warning: every class is in-distribution; OOD partition is empty\n";
    write_manifest(out_dir, "textshift partition",
                   json{{"corpus", args.corpus_path}, {"id_classes", args.id_classes}},
                   {id_path, ood_path});
    std::cout << "partitioned " << corpus.size() << " examples into " << id_side.size()
              << " ID / " << ood_side.size() << " OOD\n";
    return 0;
}

struct OracleArgs {
    std::string id_path;
    std::string ood_path;
    double train_fraction = 0.8;
    std::uint64_t seed = 0;
    std::string out;
    ood::BowTrainConfig train;
};

int run_oracle(const OracleArgs& args) {
    const ood::Corpus id_corpus = ood::load_corpus(args.id_path);
    const ood::Corpus ood_corpus = ood::load_corpus(args.ood_path);
    std::vector<std::string> id_texts;
    std::vector<std::string> ood_texts;
    for (const auto& ex : id_corpus.examples) id_texts.push_back(ex.text);
    for (const auto& ex : ood_corpus.examples) ood_texts.push_back(ex.text);

    ood::BowModel model;
    const ood::EvalReport report = ood::oracle_detect(id_texts, ood_texts,
                                                      args.train_fraction, args.seed,
                                                      args.train, &model);

    const json train_config{{"learning_rate", args.train.learning_rate},
                            {"epochs", args.train.epochs},
                            {"l2", args.train.l2},
                            {"min_token_count", args.train.min_token_count},
                            {"train_fraction", args.train_fraction},
                            {"seed", args.seed}};
    const json report_json{
        {"schema_version", ood::kSchemaVersion},
        {"detector", report.detector_name},
        {"auroc", report.auroc},
        {"far95", report.far95},
        {"n_id", report.n_id},
        {"n_ood", report.n_ood},
        {"train_config", train_config},
    };

    const fs::path out_dir = prepare_out_dir(args.out);
    const fs::path report_path = out_dir / "oracle_report.json";
    const fs::path model_path = out_dir / "bow_model.json";
    write_text_file(report_path, report_json.dump(2) + "\n");
    write_text_file(model_path, ood::to_json(model).dump(2) + "\n");
    write_manifest(out_dir, "oracle",
                   json{{"id", args.id_path}, {"ood", args.ood_path},
                        {"train_config", train_config}},
                   {report_path, model_path}, args.seed);

    std::cout << report.detector_name << ": AUROC " << ood::format_fixed6(report.auroc)
              << " FAR95 " << ood::format_fixed6(report.far95) << " (n_id=" << report.n_id
              << ", n_ood=" << report.n_ood << ")\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Semantic vs background distribution-shift toolkit"};
    app.require_subcommand(1);

    SimArgs sim_args;
    CLI::App* sim = app.add_subcommand("sim", "Run a simulation sweep");
    sim->add_option("--sweep", sim_args.sweep, "Sweep kind")
        ->required()
        ->check(CLI::IsMember({"semantic", "background"}));
    sim->add_option("--config", sim_args.config_path, "Sweep config JSON");
    sim->add_option("--out", sim_args.out, "Output directory")->required();
    sim->add_option("--threads", sim_args.threads, "Worker cap (0 = default)")
        ->check(CLI::NonNegativeNumber);

    EvalArgs eval_args;
    CLI::App* eval = app.add_subcommand("eval", "Evaluate an external score file");
    eval->add_option("--scores", eval_args.scores_path, "Score JSONL file")->required();
    eval->add_option("--detector", eval_args.detector, "Detector")
        ->required()
        ->check(CLI::IsMember({"msp", "ppl", "logpx"}));
    eval->add_option("--out", eval_args.out, "Output directory")->required();

    CLI::App* textshift = app.add_subcommand("textshift", "Controlled text shifts");
    textshift->require_subcommand(1);

    AppendArgs append_args;
    CLI::App* append = textshift->add_subcommand("append-filler",
                                                 "Append filler words to every example");
    append->add_option("--corpus", append_args.corpus_path, "Corpus JSONL")->required();
    append->add_option("--filler", append_args.filler_path, "Filler corpus JSONL")->required();
    append->add_option("--lengths", append_args.lengths, "Word counts to append")
        ->required()
        ->delimiter(',');
    append->add_option("--seed", append_args.seed, "Seed");
    append->add_option("--out", append_args.out, "Output directory")->required();

    PartitionArgs partition_args;
    CLI::App* partition =
        textshift->add_subcommand("partition", "Split a corpus by class labels");
    partition->add_option("--corpus", partition_args.corpus_path, "Corpus JSONL")->required();
    partition->add_option("--id-classes", partition_args.id_classes, "ID class names")
        ->required()
        ->delimiter(',');
    partition->add_option("--out", partition_args.out, "Output directory")->required();

    OracleArgs oracle_args;
    CLI::App* oracle = app.add_subcommand("oracle", "Bag-of-words logistic-regression oracle");
    oracle->add_option("--id", oracle_args.id_path, "ID corpus JSONL")->required();
    oracle->add_option("--ood", oracle_args.ood_path, "OOD corpus JSONL")->required();
    oracle->add_option("--train-fraction", oracle_args.train_fraction, "Training fraction");
    oracle->add_option("--seed", oracle_args.seed, "Split seed");
    oracle->add_option("--learning-rate", oracle_args.train.learning_rate, "GD step size");
    oracle->add_option("--epochs", oracle_args.train.epochs, "GD epochs");
    oracle->add_option("--l2", oracle_args.train.l2, "L2 strength");
    oracle->add_option("--min-token-count", oracle_args.train.min_token_count,
                       "Vocabulary count threshold");
    oracle->add_option("--out", oracle_args.out, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (sim->parsed()) return run_sim(sim_args);
        if (eval->parsed()) return run_eval(eval_args);
        if (append->parsed()) return run_append_filler(append_args);
        if (partition->parsed()) return run_partition(partition_args);
        if (oracle->parsed()) return run_oracle(oracle_args);
    } catch (const ood::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const ood::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
