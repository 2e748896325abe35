#pragma once

#include <string>
#include <utility>

#include "undulate/core.hpp"

namespace undulate {

/// Binary snapshot: 72-byte little-endian header
///   "UNDU" | u32 version | u32 nx, ny, nz | u32 reserved | f64 eps, tau, c, g, a, b
/// followed by f64 arrays Re psi, Im psi, n1, n2, n3 over all nodes in index order.
/// The planar variant uses magic "UND2", nx = ny = N, nz = 0, f64 eps, delta, 0, 0, 0, 0
/// and arrays phi, n1, n2, n3.
constexpr std::uint32_t kSnapshotVersion = 1;
constexpr std::size_t kSnapshotHeaderBytes = 72;

void write_snapshot(const std::string& path, const Field3D& state, const Parameters& p);
std::pair<Field3D, Parameters> read_snapshot(const std::string& path);

void write_snapshot_2d(const std::string& path, const Field2D& state, const Parameters& p);
std::pair<Field2D, Parameters> read_snapshot_2d(const std::string& path);

enum class SliceAxis { X, Y, Z };

/// CSV of the plane {axis coordinate = node `index`}: x,y,z,re_psi,im_psi,n1,n2,n3.
void write_slice_csv(const std::string& path, const Field3D& state, SliceAxis axis, int index);

/// CSV of the planar state: x,y,phi,n1,n2,n3.
void write_planar_csv(const std::string& path, const Field2D& state);

}  // namespace undulate
