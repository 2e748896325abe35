#include "undulate/walls.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace undulate {

using std::numbers::pi;

double wall_energy_density(double X) {
  if (!(X >= 0.0 && X <= 0.5 * pi)) throw std::domain_error("half-angle must lie in [0, pi/2]");
  if (X <= 0.25 * pi) return 4.0 * std::abs(std::sin(X) - X * std::cos(X));
  return 4.0 * std::abs((X - 0.5 * pi) * std::cos(X) - std::sin(X) + std::numbers::sqrt2);
}

double WallSegment::length() const { return std::hypot(x1 - x0, y1 - y0); }

std::string to_string(PatternKind kind) {
  switch (kind) {
    case PatternKind::Square2D: return "square";
    case PatternKind::Stripe1D: return "stripe";
    case PatternKind::Other: return "other";
  }
  return "other";
}

WallPattern square_pattern() {
  const double X = 0.25 * pi;
  WallPattern p;
  p.kind = PatternKind::Square2D;
  p.segments = {{0.25, 0.0, 0.25, 1.0, X},
                {0.75, 0.0, 0.75, 1.0, X},
                {0.0, 0.25, 1.0, 0.25, X},
                {0.0, 0.75, 1.0, 0.75, X}};
  return p;
}

WallPattern stripe_pattern() {
  const double X = 0.5 * pi;
  WallPattern p;
  p.kind = PatternKind::Stripe1D;
  p.segments = {{0.25, 0.0, 0.25, 1.0, X}, {0.75, 0.0, 0.75, 1.0, X}};
  return p;
}

double pattern_lower_bound(const WallPattern& pattern) {
  double total = 0.0;
  for (const auto& s : pattern.segments) {
    const double len = s.length();
    if (!(len > 0.0)) throw std::domain_error("wall segment must have positive length");
    total += len * wall_energy_density(s.half_angle);
  }
  return total;
}

}  // namespace undulate
