#ifndef MPOC_TESTS_SUPPORT_HPP
#define MPOC_TESTS_SUPPORT_HPP

#include "mpoc/optimizer.hpp"

#include <cmath>
#include <string>

namespace mpoc::fixtures {

inline std::string sample(const std::string& name) { return std::string(MPOC_SAMPLES_DIR) + "/" + name; }

inline Mesh square(int refine, const std::string& file = "unit_square.mesh") {
  Mesh m = load_mesh(sample(file));
  for (int i = 0; i < refine; ++i) m = refine_uniform(m);
  return m;
}

// Inflow on the left edge, control on the right edge, slip walls top and bottom.
struct ChannelOptions {
  double mu1 = 1.0, mu2 = 1.0, mur = 0.3, alpha = 0.0;
  double density_slope = 0.5;  // rho0 = 1 + slope * s
  double inflow = 1.0;
  std::array<double, 6> beta{0.5, 1, 1, 1, 1e-2, 1e-2};
};

inline ModelParams channel_params(const ChannelOptions& o = {}) {
  ModelParams mp;
  mp.mu1 = o.mu1;
  mp.mu2 = o.mu2;
  mp.mur = o.mur;
  mp.alpha = o.alpha;
  const double U = o.inflow, r = o.density_slope;
  mp.u0 = [U](const Vec2&, double s) { return Vec2(-4 * s * (1 - s) * U, 0.0); };
  mp.w0 = [](const Vec2& x, double) { return 0.2 * x.y(); };
  mp.rho0 = [r](const Vec2&, double s) { return 1 + r * s; };
  mp.f = [](const Vec2& x) { return Vec2(std::sin(x.y()), 0.5 * x.x()); };
  mp.g = [](const Vec2& x) { return x.x() * x.y(); };
  mp.beta = o.beta;
  return mp;
}

inline ControlPair channel_controls(const Problem& pb, double scale = 1.0, double bound = 10.0) {
  return pb.make_controls(
      [scale](const Vec2& x) { return Vec2(-4 * x.y() * (1 - x.y()) * scale, 0.1 * x.y() * (1 - x.y()) * scale); },
      [scale](const Vec2& x) { return 0.3 * x.x() * scale; }, -bound, bound, -bound, bound);
}

inline Targets channel_targets(const Problem& pb) {
  return Targets::from_functions(
      pb.spaces(), [](const Vec2& x) { return Vec2(x.y(), -x.x()); }, [](const Vec2& x) { return x.x(); },
      [](const Vec2&) { return 1.2; });
}

inline double rel_diff(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

}  // namespace mpoc::fixtures

#endif
