#pragma once

#include <filesystem>

#include "irsbm/engine.hpp"

namespace irsbm {

/// Writes overhead.csv, se_trace.csv, handover.csv and report.json into
/// `dir`, creating it if needed. CSV numbers use 17 significant digits.
void emit_report(const SimReport& r, const std::filesystem::path& dir);

std::string report_to_json(const SimReport& r);
/// Throws DatasetError for malformed documents.
SimReport report_from_json(const std::string& text);
SimReport read_report_json(const std::filesystem::path& path);

}  // namespace irsbm
