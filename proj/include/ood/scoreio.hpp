#pragma once

// Ingestion of externally computed model outputs as JSON Lines. The first
// line is a header object {"kind": "class_probs"|"token_logprobs",
// "log_base": "e"|<number>}; each following line is one record
// {"example_id": ..., "split": "id"|"ood", <payload key>: [...]}. Log
// probabilities are converted to natural log on load. A file holds exactly
// one payload kind.

#include <string>
#include <vector>

#include "ood/detectors.hpp"
#include "ood/metrics.hpp"

namespace ood {

enum class PayloadKind { ClassProbs, TokenLogProbs };

enum class Split { Id, Ood };

struct ScoreRecord {
    std::string example_id;
    Split split = Split::Id;
    std::vector<double> class_probs; // exactly one payload populated,
    TokenLogProbs token_logprobs;    // matching the file's declared kind
};

enum class TextDetector { Msp, Ppl, LogPx };

PayloadKind payload_kind_for(TextDetector detector);
const char* detector_name(TextDetector detector);

std::vector<ScoreRecord> load_records(const std::string& path, PayloadKind declared_kind);

// Canonical serialization: natural-log header, records in order. load() of
// the output reproduces the input records exactly.
std::string serialize_records(const std::vector<ScoreRecord>& records, PayloadKind kind);
void save_records(const std::vector<ScoreRecord>& records, PayloadKind kind,
                  const std::string& path);

// Scores every record with the named detector, partitions by split, and
// evaluates AUROC / FAR95 (ID scores vs OOD scores).
EvalReport evaluate_records(const std::vector<ScoreRecord>& records, TextDetector detector);

} // namespace ood
