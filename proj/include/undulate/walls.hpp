#pragma once

#include <string>
#include <vector>

namespace undulate {

/// Limiting wall energy per unit length for a jump of half-angle X in [0, pi/2].
double wall_energy_density(double X);

struct WallSegment {
  double x0, y0, x1, y1;  // endpoints on the unit torus
  double half_angle;      // X in [0, pi/2]

  double length() const;
};

enum class PatternKind { Square2D, Stripe1D, Other };

std::string to_string(PatternKind kind);

struct WallPattern {
  PatternKind kind = PatternKind::Other;
  std::vector<WallSegment> segments;
};

/// Four unit segments with X = pi/4: two horizontal and two vertical lines.
WallPattern square_pattern();
/// Two unit vertical segments with X = pi/2.
WallPattern stripe_pattern();

/// Sum over segments of length * A(X). Throws std::domain_error on invalid segments.
double pattern_lower_bound(const WallPattern& pattern);

}  // namespace undulate
