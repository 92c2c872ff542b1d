#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

namespace slc::stats {

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
  double sd = 0.0;
  std::size_t count = 0;
};

inline MeanSe mean_se(const std::vector<double>& x) {
  if (x.empty()) throw std::invalid_argument("mean of empty sample");
  MeanSe r;
  r.count = x.size();
  for (double v : x) r.mean += v;
  r.mean /= static_cast<double>(x.size());
  if (x.size() > 1) {
    double ss = 0.0;
    for (double v : x) ss += (v - r.mean) * (v - r.mean);
    r.sd = std::sqrt(ss / static_cast<double>(x.size() - 1));
    r.se = r.sd / std::sqrt(static_cast<double>(x.size()));
  }
  return r;
}

/// sup |F_n - F| for a continuous reference CDF.
inline double ks_statistic(std::vector<double> x, const std::function<double(double)>& cdf) {
  if (x.empty()) throw std::invalid_argument("KS statistic of empty sample");
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(x[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

inline double ks_exponential(const std::vector<double>& x, double rate) {
  return ks_statistic(x, [rate](double t) { return t <= 0.0 ? 0.0 : 1.0 - std::exp(-rate * t); });
}

/// Pearson correlation.
inline double correlation(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2) throw std::invalid_argument("correlation needs equal sizes >= 2");
  const auto ma = mean_se(a).mean, mb = mean_se(b).mean;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

/// |observed - expected| in units of the binomial standard deviation.
inline double binomial_z(std::size_t hits, std::size_t trials, double p) {
  const double n = static_cast<double>(trials);
  return (static_cast<double>(hits) - n * p) / std::sqrt(n * p * (1.0 - p));
}

/// Upper tail p-value of the chi-square test of symmetry of a square table
/// (Bowker): sum over i<j of (n_ij - n_ji)^2 / (n_ij + n_ji).
inline double symmetry_test_p_value(const std::vector<std::vector<double>>& table) {
  double stat = 0.0;
  int df = 0;
  for (std::size_t i = 0; i < table.size(); ++i)
    for (std::size_t j = i + 1; j < table.size(); ++j) {
      const double s = table[i][j] + table[j][i];
      if (s == 0.0) continue;
      stat += (table[i][j] - table[j][i]) * (table[i][j] - table[j][i]) / s;
      ++df;
    }
  if (df == 0) return 1.0;
  return boost::math::cdf(boost::math::complement(boost::math::chi_squared(df), stat));
}

/// Total-variation distance between two empirical distributions given as counts.
template <typename Map>
double total_variation(const Map& a, const Map& b, double na, double nb) {
  double tv = 0.0;
  for (const auto& [key, c] : a) {
    const auto it = b.find(key);
    tv += std::abs(c / na - (it == b.end() ? 0.0 : it->second / nb));
  }
  for (const auto& [key, c] : b)
    if (a.find(key) == a.end()) tv += c / nb;
  return tv / 2.0;
}

}  // namespace slc::stats
