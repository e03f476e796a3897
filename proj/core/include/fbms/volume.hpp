#pragma once

#include <cstdint>
#include <optional>

#include "fbms/mesh.hpp"

namespace fbms {

inline constexpr double kBallVolume = 4.0 * 3.14159265358979323846 / 3.0;

// Volume of the component of B^3 \ mesh that does not contain `reference`.
// The mesh must separate the ball, with all boundary loops on the unit
// sphere; the closed region is completed by spherical patches whose areas are
// evaluated exactly (geodesic-polygon Gauss-Bonnet), and the reference side is
// resolved by segment-parity ray casting.
double enclosed_volume(const TriMesh& mesh, const Vec3& reference,
                       const Tolerances& tol = default_tolerances());

// enclosed_volume / |B^3|.
double volume_fraction(const TriMesh& mesh, const Vec3& reference,
                       const Tolerances& tol = default_tolerances());

// Signed area of the spherical region to the left of the oriented geodesic
// polygon through the given unit vectors (2*pi minus total turning).
double spherical_polygon_area_left(const std::vector<Vec3>& loop);

// Parity of mesh crossings along the open segment p -> q; nullopt when a hit
// is too marginal to trust.
std::optional<int> segment_crossing_parity(const TriMesh& mesh, const Vec3& p, const Vec3& q);

// Monte Carlo estimate of the volume fraction not containing `reference`,
// used as a cross-check oracle. Deterministic for a fixed seed.
double monte_carlo_volume_fraction(const TriMesh& mesh, const Vec3& reference,
                                   int samples, std::uint64_t seed);

} // namespace fbms
