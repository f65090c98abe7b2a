#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "cope/corpus/patient.hpp"
#include "cope/util/error.hpp"

namespace cope::corpus {

enum class CorpusFormat { jsonl, csv };

/// Picks the format from the file extension (.csv, otherwise JSONL).
CorpusFormat format_for(const std::filesystem::path& path);

struct IngestIssue {
  std::size_t line = 0;  // 1-based physical line where the row starts
  std::string message;
};

/// Result of a tolerant parse: every valid row plus every problem found.
struct IngestReport {
  std::vector<PatientRecord> records;
  std::vector<IngestIssue> issues;
};

IngestReport parse_corpus(std::string_view content, CorpusFormat format);

/// Strict ingestion: throws DataError (details: one entry per issue, with line
/// numbers) when any row is malformed or any id repeats.
Cohort ingest_corpus(const std::filesystem::path& path, CorpusFormat format);
Cohort ingest_corpus(const std::filesystem::path& path);

/// One canonical JSON object per line, records in cohort order.
std::string serialize_jsonl(const std::vector<PatientRecord>& records);
std::string serialize_jsonl(const Cohort& cohort);

}  // namespace cope::corpus
