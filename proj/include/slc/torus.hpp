#pragma once

#include <array>
#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace slc {

/// A lattice site of the torus, coordinates in [-L, L].
struct Site {
  int x = 0;
  int y = 0;

  friend constexpr auto operator<=>(const Site&, const Site&) = default;
};

inline std::string to_string(Site s) {
  return "(" + std::to_string(s.x) + "," + std::to_string(s.y) + ")";
}

class unsupported_scale : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// The 2-D torus [-L, L]^2 with opposite edges identified.
///
/// L = 0 is a valid (single-site) torus for wrap arithmetic; simulation
/// entry points that need a time scale reject it.
class TorusSpec {
 public:
  explicit TorusSpec(int half_side) : half_side_(half_side) {
    if (half_side < 0) throw std::invalid_argument("torus half-side L must be >= 0");
  }

  /// Torus with odd side length L' = 2L + 1.
  static TorusSpec from_side_length(int side_length) {
    if (side_length < 1 || side_length % 2 == 0)
      throw std::invalid_argument("side length must be odd and >= 1, got " +
                                  std::to_string(side_length));
    return TorusSpec((side_length - 1) / 2);
  }

  int half_side() const { return half_side_; }
  int side() const { return 2 * half_side_ + 1; }
  std::size_t site_count() const {
    return static_cast<std::size_t>(side()) * static_cast<std::size_t>(side());
  }

  bool contains(Site s) const {
    return s.x >= -half_side_ && s.x <= half_side_ && s.y >= -half_side_ && s.y <= half_side_;
  }

  int wrap_coordinate(long long v) const {
    const long long n = side();
    long long r = (v + half_side_) % n;
    if (r < 0) r += n;
    return static_cast<int>(r - half_side_);
  }

  Site wrap(long long x, long long y) const { return {wrap_coordinate(x), wrap_coordinate(y)}; }

  /// Row-major dense index of a (valid) site.
  std::size_t index(Site s) const {
    return static_cast<std::size_t>(s.x + half_side_) * static_cast<std::size_t>(side()) +
           static_cast<std::size_t>(s.y + half_side_);
  }

  Site site_at(std::size_t idx) const {
    const auto n = static_cast<std::size_t>(side());
    return {static_cast<int>(idx / n) - half_side_, static_cast<int>(idx % n) - half_side_};
  }

  friend bool operator==(const TorusSpec&, const TorusSpec&) = default;

 private:
  int half_side_;
};

inline Site wrap(Site v, const TorusSpec& spec) { return spec.wrap(v.x, v.y); }

namespace detail {
inline int cyclic_offset(int a, int b, int side) {
  int d = (a - b) % side;
  if (d < 0) d += side;
  return d <= side / 2 ? d : side - d;
}
}  // namespace detail

/// Squared torus distance; exact integer form of torus_distance^2.
inline long long torus_distance_sq(Site a, Site b, const TorusSpec& spec) {
  const long long dx = detail::cyclic_offset(a.x, b.x, spec.side());
  const long long dy = detail::cyclic_offset(a.y, b.y, spec.side());
  return dx * dx + dy * dy;
}

/// Euclidean distance to the nearest lattice representative of b.
inline double torus_distance(Site a, Site b, const TorusSpec& spec) {
  return std::sqrt(static_cast<double>(torus_distance_sq(a, b, spec)));
}

/// The four wrapped nearest neighbours, in the order +x, -x, +y, -y.
inline std::array<Site, 4> neighbors(Site a, const TorusSpec& spec) {
  return {spec.wrap(a.x + 1LL, a.y), spec.wrap(a.x - 1LL, a.y), spec.wrap(a.x, a.y + 1LL),
          spec.wrap(a.x, a.y - 1LL)};
}

/// Per-block migration rate: 1/4 to each neighbour, 0 on the one-site torus.
inline double migration_rate(const TorusSpec& spec) { return spec.side() > 1 ? 1.0 : 0.0; }

/// s_L = (2L+1)^2 ln(2L+1).
inline double time_scale(const TorusSpec& spec) {
  if (spec.half_side() < 1) throw std::invalid_argument("time scale undefined for L = 0");
  const double n = spec.side();
  return n * n * std::log(n);
}

inline constexpr std::size_t kOracleMaxSites = 10'000;

/// Law at time t of the wrapped walk started at `start`, jumping at total
/// rate `rate` (1/4 of it per direction). Indexed by TorusSpec::index.
///
/// In continuous time the x and y coordinates move independently at rate/2
/// each, so the 2-D law factorises into two cycle-walk laws, each obtained
/// from the eigen-decomposition of the cycle generator.
inline std::vector<double> exact_transient_distribution(const TorusSpec& spec, Site start,
                                                        double t, double rate = 1.0) {
  if (spec.site_count() > kOracleMaxSites)
    throw unsupported_scale("exact transient law limited to " + std::to_string(kOracleMaxSites) +
                            " sites");
  if (t < 0.0) throw std::invalid_argument("time must be >= 0");
  if (!spec.contains(start)) throw std::invalid_argument("start site outside torus");

  const int n = spec.side();
  // q[d] = P(1-D displacement == d mod n)
  std::vector<double> q(n, 0.0);
  if (t == 0.0 || n == 1) {
    q[0] = 1.0;
  } else {
    const double half_rate = 0.5 * rate;
    std::vector<double> decay(n);
    for (int k = 0; k < n; ++k)
      decay[k] = std::exp(-half_rate * t * (1.0 - std::cos(2.0 * std::numbers::pi * k / n)));
    for (int d = 0; d < n; ++d) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += decay[k] * std::cos(2.0 * std::numbers::pi * k * d / n);
      q[d] = s / n;
    }
  }

  std::vector<double> dist(spec.site_count(), 0.0);
  for (std::size_t i = 0; i < dist.size(); ++i) {
    const Site s = spec.site_at(i);
    int dx = (s.x - start.x) % n;
    if (dx < 0) dx += n;
    int dy = (s.y - start.y) % n;
    if (dy < 0) dy += n;
    dist[i] = q[dx] * q[dy];
  }
  return dist;
}

}  // namespace slc
