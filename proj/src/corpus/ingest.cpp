#include "cope/corpus/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <map>
#include <unordered_map>

#include "cope/util/io.hpp"

namespace fs = std::filesystem;

namespace cope::corpus {

CorpusFormat format_for(const fs::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".csv" ? CorpusFormat::csv : CorpusFormat::jsonl;
}

namespace {

using Problems = std::vector<std::string>;

std::optional<int> int_field(const json& row, const char* key, int lo, int hi, Problems& problems) {
  auto it = row.find(key);
  if (it == row.end() || it->is_null()) return std::nullopt;
  if (!it->is_number_integer()) {
    problems.push_back(std::string(key) + " must be an integer");
    return std::nullopt;
  }
  const auto value = it->get<long long>();
  if (value < lo || value > hi) {
    problems.push_back(std::string(key) + " out of range [" + std::to_string(lo) + ", " +
                       std::to_string(hi) + "]: " + std::to_string(value));
    return std::nullopt;
  }
  return static_cast<int>(value);
}

std::optional<bool> bool_field(const json& row, const char* key, Problems& problems) {
  auto it = row.find(key);
  if (it == row.end() || it->is_null()) return std::nullopt;
  if (!it->is_boolean()) {
    problems.push_back(std::string(key) + " must be a boolean");
    return std::nullopt;
  }
  return it->get<bool>();
}

PatientRecord record_from_json(const json& row, Problems& problems) {
  PatientRecord r;
  if (!row.is_object()) {
    problems.push_back("row is not a JSON object");
    return r;
  }
  auto id = row.find("id");
  if (id == row.end() || !id->is_string() || id->get<std::string>().empty()) {
    problems.push_back("missing id");
  } else {
    r.id = id->get<std::string>();
  }
  auto note = row.find("note_text");
  if (note == row.end() || !note->is_string()) {
    problems.push_back("missing note_text");
  } else if (note->get<std::string>().empty()) {
    problems.push_back("empty note_text");
  } else {
    r.note_text = note->get<std::string>();
  }
  r.mrs_90d = int_field(row, "mrs_90d", 0, 6, problems);
  r.mrs_followup_days = int_field(row, "mrs_followup_days", 0, 100000, problems);
  r.age_years = int_field(row, "age_years", 0, 150, problems);
  if (auto sex = row.find("sex"); sex != row.end() && !sex->is_null()) {
    if (sex->is_string()) r.sex = parse_sex(sex->get<std::string>());
    if (!r.sex) problems.push_back("sex must be \"male\", \"female\" or null");
  }
  r.evt = bool_field(row, "evt", problems);
  r.died_in_hospital = bool_field(row, "died_in_hospital", problems);
  if (auto ov = row.find("structured_overrides"); ov != row.end() && !ov->is_null()) {
    if (ov->is_object()) {
      r.structured_overrides = *ov;
    } else {
      problems.push_back("structured_overrides must be an object");
    }
  }
  return r;
}

struct RawRow {
  std::size_t line = 0;
  json value;
  Problems problems;
};

std::vector<RawRow> read_jsonl_rows(std::string_view content) {
  std::vector<RawRow> rows;
  const auto lines = split_lines(content);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string& line = lines[i];
    if (std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); })) continue;
    RawRow row;
    row.line = i + 1;
    try {
      row.value = json::parse(line);
    } catch (const json::parse_error& e) {
      row.problems.push_back(std::string("invalid JSON: ") + e.what());
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

struct CsvRecord {
  std::size_t line = 0;
  std::vector<std::string> fields;
};

// RFC 4180: quoted fields may hold commas, doubled quotes and newlines.
std::vector<CsvRecord> tokenize_csv(std::string_view text, Problems& problems) {
  std::vector<CsvRecord> out;
  std::size_t line = 1;
  std::size_t i = 0;
  while (i < text.size()) {
    CsvRecord rec;
    rec.line = line;
    std::string field;
    bool in_quotes = false;
    bool record_done = false;
    while (!record_done) {
      if (i >= text.size()) {
        if (in_quotes) problems.push_back("line " + std::to_string(rec.line) + ": unterminated quote");
        rec.fields.push_back(std::move(field));
        break;
      }
      const char c = text[i++];
      if (in_quotes) {
        if (c == '"') {
          if (i < text.size() && text[i] == '"') {
            field.push_back('"');
            ++i;
          } else {
            in_quotes = false;
          }
        } else {
          if (c == '\n') ++line;
          field.push_back(c);
        }
        continue;
      }
      switch (c) {
        case '"':
          in_quotes = true;
          break;
        case ',':
          rec.fields.push_back(std::move(field));
          field.clear();
          break;
        case '\r':
          break;
        case '\n':
          ++line;
          rec.fields.push_back(std::move(field));
          record_done = true;
          break;
        default:
          field.push_back(c);
      }
    }
    const bool blank = rec.fields.size() == 1 && rec.fields[0].empty();
    if (!blank) out.push_back(std::move(rec));
  }
  return out;
}

std::optional<long long> parse_int(std::string_view s) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<bool> parse_bool(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  return std::nullopt;
}

std::vector<RawRow> read_csv_rows(std::string_view content, Problems& file_problems) {
  std::vector<RawRow> rows;
  auto records = tokenize_csv(content, file_problems);
  if (records.empty()) {
    file_problems.push_back("missing CSV header row");
    return rows;
  }
  const std::vector<std::string> header = records.front().fields;
  static const std::map<std::string, char> kTypes = {
      {"id", 's'},      {"note_text", 's'},    {"mrs_90d", 'i'},          {"mrs_followup_days", 'i'},
      {"age_years", 'i'}, {"sex", 's'},        {"evt", 'b'},              {"died_in_hospital", 'b'},
      {"structured_overrides", 'j'}};
  for (std::size_t r = 1; r < records.size(); ++r) {
    RawRow row;
    row.line = records[r].line;
    row.value = json::object();
    const auto& fields = records[r].fields;
    if (fields.size() != header.size()) {
      row.problems.push_back("expected " + std::to_string(header.size()) + " columns, found " +
                             std::to_string(fields.size()));
      rows.push_back(std::move(row));
      continue;
    }
    for (std::size_t c = 0; c < header.size(); ++c) {
      auto type = kTypes.find(header[c]);
      if (type == kTypes.end()) continue;  // unknown columns are ignored
      const std::string& cell = fields[c];
      const bool required = header[c] == "id" || header[c] == "note_text";
      if (cell.empty() && !required) continue;  // empty optional cell == missing
      switch (type->second) {
        case 's':
          row.value[header[c]] = cell;
          break;
        case 'i':
          if (auto v = parse_int(cell)) {
            row.value[header[c]] = *v;
          } else {
            row.problems.push_back(header[c] + " must be an integer");
          }
          break;
        case 'b':
          if (auto v = parse_bool(cell)) {
            row.value[header[c]] = *v;
          } else {
            row.problems.push_back(header[c] + " must be a boolean");
          }
          break;
        case 'j':
          try {
            row.value[header[c]] = json::parse(cell);
          } catch (const json::parse_error&) {
            row.problems.push_back(header[c] + " must hold a JSON object");
          }
          break;
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

IngestReport parse_corpus(std::string_view content, CorpusFormat format) {
  IngestReport report;
  Problems file_problems;
  std::vector<RawRow> rows =
      format == CorpusFormat::jsonl ? read_jsonl_rows(content) : read_csv_rows(content, file_problems);
  for (auto& p : file_problems) report.issues.push_back({0, std::move(p)});

  std::unordered_map<std::string, std::size_t> first_line;
  for (auto& row : rows) {
    Problems problems = std::move(row.problems);
    PatientRecord record;
    if (problems.empty()) record = record_from_json(row.value, problems);
    if (problems.empty()) {
      auto [it, inserted] = first_line.emplace(record.id, row.line);
      if (!inserted) {
        problems.push_back("duplicate id \"" + record.id + "\" (first seen on line " +
                           std::to_string(it->second) + ")");
      }
    }
    if (problems.empty()) {
      report.records.push_back(std::move(record));
    } else {
      for (auto& p : problems) report.issues.push_back({row.line, std::move(p)});
    }
  }
  return report;
}

Cohort ingest_corpus(const fs::path& path, CorpusFormat format) {
  const std::string content = read_file(path);
  IngestReport report = parse_corpus(content, format);
  if (!report.issues.empty()) {
    std::vector<std::string> details;
    for (const auto& issue : report.issues) {
      details.push_back("line " + std::to_string(issue.line) + ": " + issue.message);
    }
    throw DataError(path.string() + ": " + std::to_string(report.issues.size()) +
                        " malformed row(s); first: " + details.front(),
                    details);
  }
  return Cohort(std::move(report.records), Provenance{path.string(), utc_timestamp()});
}

Cohort ingest_corpus(const fs::path& path) { return ingest_corpus(path, format_for(path)); }

std::string serialize_jsonl(const std::vector<PatientRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    out += to_json(r).dump();
    out.push_back('\n');
  }
  return out;
}

std::string serialize_jsonl(const Cohort& cohort) { return serialize_jsonl(cohort.records()); }

}  // namespace cope::corpus
