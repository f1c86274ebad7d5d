#include "ood/scoreio.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ood/errors.hpp"

namespace ood {

namespace {

using nlohmann::json;

const char* kind_name(PayloadKind kind) {
    return kind == PayloadKind::ClassProbs ? "class_probs" : "token_logprobs";
}

[[noreturn]] void line_error(std::size_t line_no, const std::string& msg) {
    throw ValidationError("line " + std::to_string(line_no) + ": " + msg);
}

// Header: {"kind": ..., "log_base": "e"|<positive number != 1>}. Returns the
// multiplier taking declared-base log-probs to natural log.
double parse_header(const json& header, PayloadKind declared_kind, std::size_t line_no) {
    if (!header.is_object() || !header.contains("kind") || !header.contains("log_base"))
        line_error(line_no, "header must be an object with \"kind\" and \"log_base\"");

    const std::string kind = header.at("kind").get<std::string>();
    if (kind != "class_probs" && kind != "token_logprobs")
        line_error(line_no, "unknown kind \"" + kind + "\"");
    if (kind != kind_name(declared_kind))
        line_error(line_no, "file declares kind \"" + kind + "\" but \"" +
                                kind_name(declared_kind) + "\" was requested");

    const json& base = header.at("log_base");
    if (base.is_string()) {
        if (base.get<std::string>() != "e")
            line_error(line_no, "log_base string value must be \"e\"");
        return 1.0;
    }
    if (base.is_number()) {
        const double b = base.get<double>();
        if (!(b > 0.0) || b == 1.0)
            line_error(line_no, "numeric log_base must be positive and != 1");
        return std::log(b);
    }
    line_error(line_no, "log_base must be \"e\" or a number");
}

ScoreRecord parse_record(const json& j, PayloadKind kind, double to_natural,
                         std::size_t line_no) {
    if (!j.is_object()) line_error(line_no, "record must be a JSON object");

    ScoreRecord record;
    if (!j.contains("example_id") || !j.at("example_id").is_string())
        line_error(line_no, "missing string field \"example_id\"");
    record.example_id = j.at("example_id").get<std::string>();

    if (!j.contains("split") || !j.at("split").is_string())
        line_error(line_no, "missing string field \"split\"");
    const std::string split = j.at("split").get<std::string>();
    if (split == "id") {
        record.split = Split::Id;
    } else if (split == "ood") {
        record.split = Split::Ood;
    } else {
        line_error(line_no, "split must be \"id\" or \"ood\", got \"" + split + "\"");
    }

    const bool has_probs = j.contains("class_probs");
    const bool has_logprobs = j.contains("token_logprobs");
    if (has_probs && has_logprobs)
        line_error(line_no, "record carries both class_probs and token_logprobs");

    if (kind == PayloadKind::ClassProbs) {
        if (!has_probs)
            line_error(line_no, has_logprobs
                                    ? "token_logprobs record in a class_probs file"
                                    : "missing class_probs payload");
        record.class_probs = j.at("class_probs").get<std::vector<double>>();
        if (record.class_probs.empty()) line_error(line_no, "class_probs is empty");
        double sum = 0.0;
        for (double p : record.class_probs) {
            if (!std::isfinite(p) || p < 0.0)
                line_error(line_no, "class probabilities must be finite and >= 0");
            sum += p;
        }
        if (std::fabs(sum - 1.0) > 1e-6)
            line_error(line_no, "class_probs sum to " + std::to_string(sum) +
                                    ", outside 1 +/- 1e-6");
    } else {
        if (!has_logprobs)
            line_error(line_no, has_probs ? "class_probs record in a token_logprobs file"
                                          : "missing token_logprobs payload");
        record.token_logprobs = j.at("token_logprobs").get<std::vector<double>>();
        if (record.token_logprobs.empty()) line_error(line_no, "token_logprobs is empty");
        for (double& v : record.token_logprobs) {
            if (to_natural != 1.0) v *= to_natural;
            if (!std::isfinite(v) || v > 0.0)
                line_error(line_no,
                           "token log-probabilities must be finite and <= 0 in natural log");
        }
    }
    return record;
}

} // namespace

PayloadKind payload_kind_for(TextDetector detector) {
    return detector == TextDetector::Msp ? PayloadKind::ClassProbs
                                         : PayloadKind::TokenLogProbs;
}

const char* detector_name(TextDetector detector) {
    switch (detector) {
    case TextDetector::Msp: return "msp";
    case TextDetector::Ppl: return "ppl";
    case TextDetector::LogPx: return "logpx";
    }
    return "unknown";
}

std::vector<ScoreRecord> load_records(const std::string& path, PayloadKind declared_kind) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open score file: " + path);

    std::vector<ScoreRecord> records;
    std::string line;
    std::size_t line_no = 0;
    double to_natural = 1.0;
    bool header_seen = false;

    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            line_error(line_no, std::string("invalid JSON: ") + e.what());
        }
        if (!header_seen) {
            to_natural = parse_header(j, declared_kind, line_no);
            header_seen = true;
            continue;
        }
        records.push_back(parse_record(j, declared_kind, to_natural, line_no));
    }
    if (!header_seen) throw ValidationError("score file has no header line: " + path);
    return records;
}

std::string serialize_records(const std::vector<ScoreRecord>& records, PayloadKind kind) {
    std::ostringstream out;
    out << json{{"kind", kind_name(kind)}, {"log_base", "e"}}.dump() << '\n';
    for (const ScoreRecord& r : records) {
        json j{{"example_id", r.example_id}, {"split", r.split == Split::Id ? "id" : "ood"}};
        if (kind == PayloadKind::ClassProbs) {
            j["class_probs"] = r.class_probs;
        } else {
            j["token_logprobs"] = r.token_logprobs;
        }
        out << j.dump() << '\n';
    }
    return out.str();
}

void save_records(const std::vector<ScoreRecord>& records, PayloadKind kind,
                  const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write score file: " + path);
    out << serialize_records(records, kind);
}

EvalReport evaluate_records(const std::vector<ScoreRecord>& records, TextDetector detector) {
    const PayloadKind kind = payload_kind_for(detector);

    std::vector<double> id_scores;
    std::vector<double> ood_scores;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const ScoreRecord& r = records[i];
        double score = 0.0;
        if (kind == PayloadKind::ClassProbs) {
            if (r.class_probs.empty())
                throw ValidationError("record " + std::to_string(i + 1) + " (\"" +
                                      r.example_id + "\") has no class_probs payload for " +
                                      detector_name(detector));
            score = msp_score(r.class_probs);
        } else {
            if (r.token_logprobs.empty())
                throw ValidationError("record " + std::to_string(i + 1) + " (\"" +
                                      r.example_id +
                                      "\") has no token_logprobs payload for " +
                                      detector_name(detector));
            score = detector == TextDetector::Ppl ? ppl_score(r.token_logprobs)
                                                  : seqprob_score(r.token_logprobs);
        }
        (r.split == Split::Id ? id_scores : ood_scores).push_back(score);
    }
    if (id_scores.empty()) throw ValidationError("no records with split \"id\"");
    if (ood_scores.empty()) throw ValidationError("no records with split \"ood\"");

    EvalReport report;
    report.auroc = auroc(id_scores, ood_scores);
    report.far95 = far95(id_scores, ood_scores);
    report.n_id = static_cast<int>(id_scores.size());
    report.n_ood = static_cast<int>(ood_scores.size());
    report.detector_name = detector_name(detector);
    return report;
}

} // namespace ood
