#pragma once

// Independent reference computations used by the tests and the validation
// suites. Nothing in the simulator depends on this header.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "slc/mutation.hpp"
#include "slc/rng.hpp"
#include "slc/torus.hpp"

namespace slc::oracle {

/// p(t) = p(0) exp(Qt) by uniformization; Q is a dense generator (rows sum to 0).
inline Eigen::VectorXd uniformized_transient(const Eigen::MatrixXd& Q, const Eigen::VectorXd& p0, double t,
                                             double tol = 1e-15) {
  const auto n = Q.rows();
  double lambda = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) lambda = std::max(lambda, -Q(i, i));
  if (lambda == 0.0 || t == 0.0) return p0;
  const Eigen::MatrixXd P = Eigen::MatrixXd::Identity(n, n) + Q / lambda;
  const double lt = lambda * t;
  // Poisson weights, computed in log space to survive large lambda t
  Eigen::RowVectorXd v = p0.transpose();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
  double mass = 0.0;
  for (long k = 0;; ++k) {
    const double w = std::exp(-lt + k * std::log(lt) - std::lgamma(k + 1.0));
    out += w * v.transpose();
    mass += w;
    // the summed mass can stall a few ulps short of 1; stop once the tail terms vanish
    if (k > lt && (1.0 - mass < tol || w < 1e-20)) break;
    if (k > 100000) throw std::runtime_error("uniformization did not converge");
    v = v * P;
  }
  return out;
}

/// Generator of the wrapped walk at total jump rate `rate`, indexed by TorusSpec::index.
inline Eigen::MatrixXd walk_generator(const TorusSpec& spec, double rate = 1.0) {
  const auto S = static_cast<Eigen::Index>(spec.site_count());
  Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(S, S);
  if (spec.side() == 1) return Q;
  for (Eigen::Index i = 0; i < S; ++i)
    for (Site y : neighbors(spec.site_at(static_cast<std::size_t>(i)), spec)) {
      Q(i, static_cast<Eigen::Index>(spec.index(y))) += rate / 4.0;
      Q(i, i) -= rate / 4.0;
    }
  return Q;
}

inline std::vector<double> walk_transient(const TorusSpec& spec, Site start, double t, double rate = 1.0) {
  if (spec.site_count() > 400) throw unsupported_scale("uniformization oracle limited to 400 sites");
  Eigen::VectorXd p0 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(spec.site_count()));
  p0(static_cast<Eigen::Index>(spec.index(start))) = 1.0;
  const Eigen::VectorXd p = uniformized_transient(walk_generator(spec, rate), p0, t);
  return {p.data(), p.data() + p.size()};
}

/// Two blocks on a small torus, each walking at rate 1, merging at rate
/// `pair_rate` while co-located. States: S*S ordered unmerged pairs, then S
/// merged states (one per site).
class PairChain {
 public:
  PairChain(const TorusSpec& spec, double pair_rate) : spec_(spec), S_(static_cast<Eigen::Index>(spec.site_count())) {
    if (spec.site_count() > 25) throw unsupported_scale("pair chain oracle limited to 25 sites");
    const Eigen::Index N = S_ * S_ + S_;
    Q_ = Eigen::MatrixXd::Zero(N, N);
    const double mig = migration_rate(spec) / 4.0;
    for (Eigen::Index a = 0; a < S_; ++a)
      for (Eigen::Index b = 0; b < S_; ++b) {
        const Eigen::Index s = pair_state(a, b);
        auto add = [&](Eigen::Index to, double r) {
          Q_(s, to) += r;
          Q_(s, s) -= r;
        };
        for (Site y : neighbors(site(a), spec)) add(pair_state(idx(y), b), mig);
        for (Site y : neighbors(site(b), spec)) add(pair_state(a, idx(y)), mig);
        if (a == b) add(merged_state(a), pair_rate);
      }
    for (Eigen::Index a = 0; a < S_; ++a)
      for (Site y : neighbors(site(a), spec)) {
        Q_(merged_state(a), merged_state(idx(y))) += mig;
        Q_(merged_state(a), merged_state(a)) -= mig;
      }
  }

  Eigen::Index state_count() const { return Q_.rows(); }
  const Eigen::MatrixXd& generator() const { return Q_; }
  Eigen::Index pair_state(Eigen::Index a, Eigen::Index b) const { return a * S_ + b; }
  Eigen::Index merged_state(Eigen::Index a) const { return S_ * S_ + a; }

  /// E[tau_c] from the pair (a, b): solves -Q_TT m = 1 over unmerged states.
  double expected_coalescence_time(Site a, Site b) const {
    const Eigen::Index T = S_ * S_;
    const Eigen::MatrixXd A = -Q_.topLeftCorner(T, T);
    const Eigen::VectorXd m = A.partialPivLu().solve(Eigen::VectorXd::Ones(T));
    return m(pair_state(idx(a), idx(b)));
  }

  /// P(tau_c <= t) from the pair (a, b).
  double absorbed_by(Site a, Site b, double t) const {
    Eigen::VectorXd p0 = Eigen::VectorXd::Zero(state_count());
    p0(pair_state(idx(a), idx(b))) = 1.0;
    const Eigen::VectorXd p = uniformized_transient(Q_, p0, t);
    return p.tail(S_).sum();
  }

 private:
  Site site(Eigen::Index i) const { return spec_.site_at(static_cast<std::size_t>(i)); }
  Eigen::Index idx(Site s) const { return static_cast<Eigen::Index>(spec_.index(s)); }

  TorusSpec spec_;
  Eigen::Index S_;
  Eigen::MatrixXd Q_;
};

/// Infinite-alleles spectrum by building a full Kingman tree (pair rate 1)
/// and dropping Poisson(theta/2 per unit length) marks on its branches; a
/// leaf carries the allele of the youngest mark above it.
template <typename G>
Spectrum tree_marking_spectrum(std::size_t n, double theta, G& rng) {
  // nodes 0..n-1 leaves, then internal nodes in order of creation
  std::vector<int> parent(2 * n - 1, -1);
  std::vector<double> height(2 * n - 1, 0.0);
  std::vector<int> active;
  for (std::size_t i = 0; i < n; ++i) active.push_back(static_cast<int>(i));
  double t = 0.0;
  int next = static_cast<int>(n);
  while (active.size() > 1) {
    const double b = static_cast<double>(active.size());
    t += exponential(rng, b * (b - 1.0) / 2.0);
    const auto i = uniform_index(rng, active.size());
    auto j = uniform_index(rng, active.size() - 1);
    if (j >= i) ++j;
    parent[active[i]] = next;
    parent[active[j]] = next;
    height[next] = t;
    const int hi = active[std::max(i, j)];
    active[std::min(i, j)] = next;
    active.erase(std::find(active.begin(), active.end(), hi));
    ++next;
  }
  const int root = active.front();
  // marked[v]: the branch above v carries at least one mutation
  std::vector<char> marked(2 * n - 1, 0);
  for (int v = 0; v < next; ++v) {
    if (v == root) continue;
    const double len = height[parent[v]] - height[v];
    marked[v] = std::poisson_distribution<int>(theta / 2.0 * len)(rng) > 0;
  }
  // allele of a leaf: lowest marked ancestor branch (or the root type)
  std::map<int, std::size_t> allele_size;
  for (int leaf = 0; leaf < static_cast<int>(n); ++leaf) {
    int v = leaf;
    while (v != root && !marked[v]) v = parent[v];
    ++allele_size[v];
  }
  Spectrum s(n);
  for (const auto& [node, k] : allele_size) s.add(k);
  return s;
}

/// P(a_2 = 1) for two lineages: coalescence (rate 1) beats either mutation (theta/2 each).
inline double two_lineage_identity(double theta) { return 1.0 / (1.0 + theta); }

/// 2 * H_{n-1} / pair_rate: expected Kingman total tree length.
inline double kingman_expected_tree_length(std::size_t n, double pair_rate = 1.0) {
  double h = 0.0;
  for (std::size_t k = 1; k < n; ++k) h += 1.0 / static_cast<double>(k);
  return 2.0 * h / pair_rate;
}

}  // namespace slc::oracle
