#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "slc/rng.hpp"

namespace slc {

// Density part of Lambda on (0, 1].
struct NoDensity {};
struct BetaDensity {
  double alpha = 1.0;
  double beta = 1.0;
  double mass = 1.0;
};
struct PointMass {
  double location = 1.0;
  double mass = 1.0;
};
/// Arbitrary nonnegative density on [0, 1]; rates by adaptive quadrature.
struct TabulatedDensity {
  std::function<double(double)> density;
};

using DensityPart = std::variant<NoDensity, BetaDensity, PointMass, TabulatedDensity>;

/// Finite measure Lambda on [0,1]: an atom c0 at 0 plus a density part.
class LambdaMeasure {
 public:
  LambdaMeasure(double atom_at_zero, DensityPart density)
      : atom_(atom_at_zero), density_(std::move(density)) {
    if (!(atom_ >= 0.0) || !std::isfinite(atom_))
      throw std::invalid_argument("atom at zero must be finite and >= 0");
    std::visit(
        [](const auto& d) {
          using T = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<T, BetaDensity>) {
            if (!(d.alpha > 0 && d.beta > 0)) throw std::invalid_argument("Beta parameters must be > 0");
            if (!(d.mass >= 0)) throw std::invalid_argument("mass must be >= 0");
          } else if constexpr (std::is_same_v<T, PointMass>) {
            if (!(d.location > 0 && d.location <= 1))
              throw std::invalid_argument("point mass location must be in (0, 1]");
            if (!(d.mass >= 0)) throw std::invalid_argument("mass must be >= 0");
          } else if constexpr (std::is_same_v<T, TabulatedDensity>) {
            if (!d.density) throw std::invalid_argument("tabulated density is empty");
          }
        },
        density_);
    const double m = total_mass();
    if (!(m > 0) || !std::isfinite(m)) throw std::invalid_argument("Lambda total mass must be finite and > 0");
  }

  static LambdaMeasure kingman(double mass = 1.0) { return {mass, NoDensity{}}; }
  /// Uniform on [0,1] with total mass `mass`.
  static LambdaMeasure bolthausen_sznitman(double mass = 1.0) {
    return {0.0, BetaDensity{1.0, 1.0, mass}};
  }
  static LambdaMeasure beta(double alpha, double beta, double mass = 1.0) {
    return {0.0, BetaDensity{alpha, beta, mass}};
  }
  static LambdaMeasure point_mass(double location, double mass = 1.0) {
    return {0.0, PointMass{location, mass}};
  }
  static LambdaMeasure tabulated(std::function<double(double)> density, double atom_at_zero = 0.0) {
    return {atom_at_zero, TabulatedDensity{std::move(density)}};
  }

  double atom_at_zero() const { return atom_; }
  const DensityPart& density() const { return density_; }

  double total_mass() const { return atom_ + density_mass(); }

  /// c * Lambda
  LambdaMeasure scaled(double c) const {
    DensityPart d = std::visit(
        [c](const auto& part) -> DensityPart {
          using T = std::decay_t<decltype(part)>;
          if constexpr (std::is_same_v<T, NoDensity>) {
            return part;
          } else if constexpr (std::is_same_v<T, BetaDensity>) {
            return BetaDensity{part.alpha, part.beta, part.mass * c};
          } else if constexpr (std::is_same_v<T, PointMass>) {
            return PointMass{part.location, part.mass * c};
          } else {
            auto f = part.density;
            return TabulatedDensity{[f, c](double z) { return c * f(z); }};
          }
        },
        density_);
    return {atom_ * c, std::move(d)};
  }

 private:
  double density_mass() const;

  double atom_;
  DensityPart density_;
};

namespace detail {

inline double integrate_unit(const std::function<double(double)>& f) {
  using boost::math::quadrature::gauss_kronrod;
  double err = 0.0;
  // relative tolerance; rates here are O(1), so this is well inside 1e-10 absolute
  return gauss_kronrod<double, 31>::integrate(f, 0.0, 1.0, 20, 1e-12, &err);
}

inline double log_beta(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

inline double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  return std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0));
}

}  // namespace detail

inline double LambdaMeasure::density_mass() const {
  return std::visit(
      [](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, NoDensity>) {
          return 0.0;
        } else if constexpr (std::is_same_v<T, TabulatedDensity>) {
          return detail::integrate_unit(d.density);
        } else {
          return d.mass;
        }
      },
      density_);
}

/// lambda_{b,k} = c0 1{k=2} + int z^{k-2} (1-z)^{b-k} (density part)(dz).
inline double merge_rate(const LambdaMeasure& m, int b, int k) {
  if (k < 2 || k > b) throw std::invalid_argument("merge rate needs 2 <= k <= b");
  const double atom = k == 2 ? m.atom_at_zero() : 0.0;
  const double cont = std::visit(
      [b, k](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, NoDensity>) {
          return 0.0;
        } else if constexpr (std::is_same_v<T, BetaDensity>) {
          if (d.mass == 0.0) return 0.0;
          return d.mass * std::exp(detail::log_beta(k - 2 + d.alpha, b - k + d.beta) -
                                   detail::log_beta(d.alpha, d.beta));
        } else if constexpr (std::is_same_v<T, PointMass>) {
          return d.mass * std::pow(d.location, k - 2) * std::pow(1.0 - d.location, b - k);
        } else {
          const auto& f = d.density;
          return detail::integrate_unit([&f, b, k](double z) {
            return std::pow(z, k - 2) * std::pow(1.0 - z, b - k) * f(z);
          });
        }
      },
      m.density());
  return atom + cont;
}

/// Sum over k of C(b,k) lambda_{b,k}; zero for b <= 1.
inline double total_merge_rate(const LambdaMeasure& m, int b) {
  if (b <= 1) return 0.0;
  double s = 0.0;
  for (int k = 2; k <= b; ++k) s += detail::binomial(b, k) * merge_rate(m, b, k);
  return s;
}

/// Rates lambda_{b,k} tabulated once for b <= max_blocks.
class MergeRateTable {
 public:
  MergeRateTable(const LambdaMeasure& m, int max_blocks) : max_blocks_(std::max(max_blocks, 1)) {
    rates_.assign(static_cast<std::size_t>(max_blocks_ + 1), {});
    totals_.assign(static_cast<std::size_t>(max_blocks_ + 1), 0.0);
    cumulative_.assign(static_cast<std::size_t>(max_blocks_ + 1), {});
    for (int b = 2; b <= max_blocks_; ++b) {
      auto& row = rates_[b];
      auto& cum = cumulative_[b];
      row.assign(static_cast<std::size_t>(b + 1), 0.0);
      cum.assign(static_cast<std::size_t>(b + 1), 0.0);
      double acc = 0.0;
      for (int k = 2; k <= b; ++k) {
        row[k] = merge_rate(m, b, k);
        acc += detail::binomial(b, k) * row[k];
        cum[k] = acc;
      }
      totals_[b] = acc;
    }
  }

  int max_blocks() const { return max_blocks_; }
  double rate(int b, int k) const { return (b <= 1 || k < 2 || k > b) ? 0.0 : rates_.at(b)[k]; }
  double total(int b) const { return b <= 1 ? 0.0 : totals_.at(b); }

  /// Merger size k with probability C(b,k) lambda_{b,k} / total(b).
  template <typename G>
  std::optional<int> sample_size(int b, G& rng) const {
    const double tot = total(b);
    if (!(tot > 0.0)) return std::nullopt;
    const double u = uniform01(rng) * tot;
    const auto& cum = cumulative_[b];
    for (int k = 2; k < b; ++k)
      if (u < cum[k]) return k;
    return b;
  }

 private:
  int max_blocks_;
  std::vector<std::vector<double>> rates_;
  std::vector<double> totals_;
  std::vector<std::vector<double>> cumulative_;
};

/// Uniform k-subset of {0, ..., b-1}, sorted.
template <typename G>
std::vector<int> sample_subset(int b, int k, G& rng) {
  std::vector<int> pool(static_cast<std::size_t>(b));
  std::iota(pool.begin(), pool.end(), 0);
  for (int i = 0; i < k; ++i) {
    const auto j = i + static_cast<int>(uniform_index(rng, static_cast<std::size_t>(b - i)));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(static_cast<std::size_t>(k));
  std::sort(pool.begin(), pool.end());
  return pool;
}

struct MergeDraw {
  int k = 0;
  std::vector<int> subset;  // 0-based indices into the b blocks
};

/// One merger among b co-located blocks; nullopt when the total rate is 0.
template <typename G>
std::optional<MergeDraw> sample_merge(const LambdaMeasure& m, int b, G& rng) {
  if (b < 2) return std::nullopt;
  MergeRateTable table(m, b);
  auto k = table.sample_size(b, rng);
  if (!k) return std::nullopt;
  return MergeDraw{*k, sample_subset(b, *k, rng)};
}

/// Coalescence mechanism: a Lambda-coalescent at each site or the
/// instantaneously coalescing random walk.
struct Mechanism {
  enum class Kind { lambda, instantaneous };
  Kind kind = Kind::lambda;
  LambdaMeasure measure = LambdaMeasure::kingman();
  std::string name = "kingman";

  bool instantaneous() const { return kind == Kind::instantaneous; }
};

/// Parses `kingman`, `bs`, `beta:ALPHA:BETA[:MASS]`, `pointmass:P[:MASS]`, `crw`.
inline Mechanism parse_mechanism(const std::string& text) {
  auto fields = [&] {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
      auto p = text.find(':', start);
      out.push_back(text.substr(start, p - start));
      if (p == std::string::npos) break;
      start = p + 1;
    }
    return out;
  }();
  auto num = [&](const std::string& s) {
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      throw std::invalid_argument("mechanism '" + text + "': bad number '" + s + "'");
    }
    if (used != s.size()) throw std::invalid_argument("mechanism '" + text + "': bad number '" + s + "'");
    return v;
  };
  const auto& head = fields.front();
  if (head == "kingman" && fields.size() == 1) return {Mechanism::Kind::lambda, LambdaMeasure::kingman(), text};
  if (head == "bs" && fields.size() == 1)
    return {Mechanism::Kind::lambda, LambdaMeasure::bolthausen_sznitman(), text};
  if (head == "crw" && fields.size() == 1)
    return {Mechanism::Kind::instantaneous, LambdaMeasure::kingman(), text};
  if (head == "beta" && (fields.size() == 3 || fields.size() == 4)) {
    const double mass = fields.size() == 4 ? num(fields[3]) : 1.0;
    return {Mechanism::Kind::lambda, LambdaMeasure::beta(num(fields[1]), num(fields[2]), mass), text};
  }
  if (head == "pointmass" && (fields.size() == 2 || fields.size() == 3)) {
    const double mass = fields.size() == 3 ? num(fields[2]) : 1.0;
    return {Mechanism::Kind::lambda, LambdaMeasure::point_mass(num(fields[1]), mass), text};
  }
  throw std::invalid_argument("unknown mechanism '" + text +
                              "' (expected kingman, bs, crw, beta:A:B[:MASS], pointmass:P[:MASS])");
}

}  // namespace slc
