#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "cope/corpus/patient.hpp"
#include "cope/pipeline/run.hpp"

inline cope::pipeline::RunOptions run_options(std::filesystem::path dir, unsigned concurrency,
                                              std::optional<std::size_t> limit = std::nullopt) {
  cope::pipeline::RunOptions options;
  options.run_dir = std::move(dir);
  options.concurrency = concurrency;
  options.limit = limit;
  return options;
}

inline cope::corpus::PatientRecord note_record(std::string id, std::string note) {
  cope::corpus::PatientRecord record;
  record.id = std::move(id);
  record.note_text = std::move(note);
  return record;
}
