#pragma once

#include <cstdint>
#include <filesystem>

#include <json.hpp>

#include "pbcmps/optimizer.hpp"

namespace pbcmps {

inline constexpr const char* kVersion = "1.0.0";

/// Plain text: a header line "pbcmps-tensor v1 <d> <D>" followed by d blocks
/// of D rows, entries printed with 17 significant digits.
void write_tensor(const std::filesystem::path& file, const MpsTensor& A);
/// Throws ValidationError on a malformed file or a non-symmetric tensor.
MpsTensor read_tensor(const std::filesystem::path& file);

/// Timing lives under "timing" so everything else can be hashed.
nlohmann::json to_json(const RunResult& r, std::uint64_t seed);

/// result.json, tensor.txt, tensor.json and (for scans) scan_trace.csv.
void write_run_artifacts(const std::filesystem::path& dir, const RunResult& r, std::uint64_t seed);

void write_scan_trace(const std::filesystem::path& file, const RunResult& r, std::uint64_t seed);

}  // namespace pbcmps
