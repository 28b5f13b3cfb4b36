#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "tofcs/metrics.hpp"
#include "tofcs/sensing.hpp"
#include "tofcs/simulator.hpp"

#include <json.hpp>

namespace tofcs {

/// SHA-256 digest of a byte buffer, lowercase hex.
std::string sha256_hex(const void* data, size_t len);
std::string sha256_hex(const std::string& text);

/// SHA-256 of a file's contents.
std::string sha256_file(const std::string& path);

/// Write a file atomically (temp file + rename) so partially written
/// artifacts never appear.
void atomic_write(const std::string& path, const std::string& contents);
void atomic_write(const std::string& path, const void* data, size_t len);

std::string read_file(const std::string& path);

// ---- Sensing matrix container -----------------------------------------
//
// Binary layout (little-endian):
//   bytes 0..7   magic "TOFCSMAT"
//   bytes 8..11  u32 format version (1)
//   bytes 12..15 u32 metadata length in bytes
//   [metadata]   JSON: grid, plan, pixel, atom model, rows, cols
//   [entries]    rows*cols float64 (re, im) pairs, row-major
//   [norms]      cols float64 column norms

void save_sensing_matrix(const std::string& path, const SensingMatrix& A);
SensingMatrix load_sensing_matrix(const std::string& path);

/// Plain-text debug export: CSV with columns (row, col, re, im).
void write_matrix_csv(const std::string& path, const SensingMatrix& A);

// ---- Raw four-phase rasters --------------------------------------------
//
// raw.bin: float32 little-endian, layout [config][I0 I90 I180 I270 D0 D90
// D180 D270][row][col]; raw.json sidecar carries dimensions and metadata.

void save_raw_four_phase(const std::string& bin_path, const std::string& sidecar_path,
                         const RawFourPhase& raw, const std::string& config_hash);
RawFourPhase load_raw_four_phase(const std::string& bin_path, const std::string& sidecar_path,
                                 std::string* config_hash = nullptr);

// ---- Depth maps ----------------------------------------------------------
//
// float32 little-endian raster, NaN marks invalid pixels; JSON sidecar.

void save_depth_map(const std::string& bin_path, const std::string& sidecar_path,
                    const DepthMap& depth, const std::string& config_hash);
DepthMap load_depth_map(const std::string& bin_path, const std::string& sidecar_path,
                        std::string* config_hash = nullptr);

/// Manifest: config hash plus the SHA-256 of every artifact, written with
/// sorted keys so identical runs produce identical bytes.
void write_manifest(const std::string& path, const std::string& config_hash,
                    const std::map<std::string, std::string>& artifact_hashes);

nlohmann::json plan_to_json(const ModulationPlan& plan);
ModulationPlan plan_from_json(const nlohmann::json& j);
nlohmann::json grid_to_json(const DepthGrid& grid);
DepthGrid grid_from_json(const nlohmann::json& j);

}  // namespace tofcs
