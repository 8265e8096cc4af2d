#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "spiderp/types.hpp"

namespace spiderp {

// Signal CSV: header `t,value`, t monotonically increasing in seconds.
// The t column is validated against the declared sampling rate
// (|t_i - i/fs| <= 1e-6 s).
std::vector<double> read_signal_csv(const std::filesystem::path& path, double fs);
void write_signal_csv(const std::filesystem::path& path, const std::vector<double>& samples, double fs);

// Annotation CSV: header `start_s,end_s,fr_label`.
std::vector<Annotation> read_annotation_csv(const std::filesystem::path& path);
void write_annotation_csv(const std::filesystem::path& path, const std::vector<Annotation>& annotations);

// Cohort manifest CSV: header `id,role,sex,pclm,fs,ecg_path,gsr_path,annotation_path`.
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const std::vector<ManifestEntry>& entries);

// Loads one subject's record, resolving paths relative to the manifest
// directory, and validates the RawRecord invariants.
RawRecord load_record(const ManifestEntry& entry, const std::filesystem::path& manifest_dir);

// Formats a double with 17 significant digits (round-trip exact).
std::string format_full(double v);

// Shortest decimal text that round-trips the double exactly.
std::string format_shortest(double v);

}  // namespace spiderp
