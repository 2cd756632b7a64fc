#pragma once

#include <string>

#include "regpose/volume.hpp"

namespace regpose {

/// RPV1 binary: magic "RPV1", dims (3 x u32 LE), spacing (3 x f64 LE),
/// origin (3 x f64 LE), then f32 voxel data in x-fastest order.
/// Values are quantized to f32 on write.
void write_volume(const Volume& vol, const std::string& path);
Volume read_volume(const std::string& path);

/// Slices travel as one-plane volumes (dims = {nx, ny, 1}).
void write_slice(const Slice& s, const std::string& path);
Slice read_slice(const std::string& path);

/// JSON sidecar ("<path>.json") carrying {dims, spacing, origin}.
void write_sidecar(const Volume& vol, const std::string& volume_path);
/// Validates an existing sidecar against the binary header; throws on
/// mismatch. Missing sidecar is fine.
void check_sidecar(const Volume& vol, const std::string& volume_path);

/// Write to "<path>.tmp" then rename, so readers never see partial files.
void atomic_write_text(const std::string& path, const std::string& content);

}  // namespace regpose
