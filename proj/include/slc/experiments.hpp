#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "slc/event_log.hpp"
#include "slc/kingman.hpp"
#include "slc/lambda.hpp"
#include "slc/mutation.hpp"
#include "slc/partition.hpp"
#include "slc/rng.hpp"
#include "slc/simulator.hpp"
#include "slc/stats.hpp"
#include "slc/torus.hpp"

namespace slc {

/// Invalid user configuration; the message names the offending field.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(const std::string& field, const std::string& message)
      : std::invalid_argument(field + ": " + message), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

inline constexpr const char* kKingmanReference = "kingman-reference";

struct ExperimentConfig {
  int side_length = 99;
  std::string layout = "grid3x3-far";  // grid3x3-far | grid3x3-close | same-site | explicit
  std::vector<Site> sites;             // explicit layout only
  std::size_t same_site_count = 9;
  std::vector<std::string> mechanisms{"bs"};
  std::string reference = kKingmanReference;  // q-q comparison sample
  std::size_t replicates = 100;
  std::size_t reference_replicates = 10000;
  std::uint64_t seed = 1;
  std::optional<double> mutation_rate;
  std::optional<double> threshold;
  std::string out = "out";
  unsigned workers = 1;
  bool events = false;
};

inline TorusSpec experiment_torus(const ExperimentConfig& cfg) {
  if (cfg.side_length < 3 || cfg.side_length % 2 == 0)
    throw ConfigError("side-length", "must be odd and >= 3, got " + std::to_string(cfg.side_length));
  return TorusSpec::from_side_length(cfg.side_length);
}

/// Sample sites of the layout, wrapped onto the torus.
inline std::vector<Site> layout_sites(const ExperimentConfig& cfg, const TorusSpec& torus) {
  std::vector<Site> out;
  if (cfg.layout == "grid3x3-far") {
    const int s = cfg.side_length;
    const int off[3] = {0, s / 3, 2 * s / 3};
    for (int i : off)
      for (int j : off) out.push_back(torus.wrap(i, j));
  } else if (cfg.layout == "grid3x3-close") {
    for (int i = -1; i <= 1; ++i)
      for (int j = -1; j <= 1; ++j) out.push_back(torus.wrap(i, j));
  } else if (cfg.layout == "same-site") {
    out.assign(cfg.same_site_count, Site{0, 0});
  } else if (cfg.layout == "explicit") {
    for (Site s : cfg.sites) {
      if (!torus.contains(s)) throw ConfigError("sites", "site " + to_string(s) + " lies outside the torus");
      out.push_back(s);
    }
  } else {
    throw ConfigError("layout", "unknown layout '" + cfg.layout +
                                    "' (expected grid3x3-far, grid3x3-close, same-site, explicit)");
  }
  return out;
}

inline double experiment_mutation_rate(const ExperimentConfig& cfg, const TorusSpec& torus) {
  return cfg.mutation_rate.value_or(default_mutation_rate(torus));
}

/// Throws ConfigError for the first invalid field.
inline void validate(const ExperimentConfig& cfg) {
  const auto torus = experiment_torus(cfg);
  if (cfg.replicates < 1) throw ConfigError("replicates", "must be >= 1");
  if (cfg.reference_replicates < 2) throw ConfigError("reference-replicates", "must be >= 2");
  if (cfg.workers < 1) throw ConfigError("workers", "must be >= 1");
  if (cfg.mechanisms.empty()) throw ConfigError("mechanism", "at least one mechanism is required");
  for (const auto& m : cfg.mechanisms) {
    try {
      parse_mechanism(m);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("mechanism", e.what());
    }
  }
  if (cfg.reference != kKingmanReference) {
    try {
      parse_mechanism(cfg.reference);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("reference", e.what());
    }
  }
  if (cfg.layout == "same-site" && (cfg.same_site_count < 1 || cfg.same_site_count > 64))
    throw ConfigError("sample-size", "must be in [1, 64]");
  const auto sites = layout_sites(cfg, torus);
  if (sites.empty()) throw ConfigError("sites", "explicit layout needs at least one site");
  if (sites.size() > 64) throw ConfigError("sites", "at most 64 samples");
  if (cfg.mutation_rate && !(*cfg.mutation_rate > 0.0 && std::isfinite(*cfg.mutation_rate)))
    throw ConfigError("mutation-rate", "must be > 0");
  if (cfg.threshold) {
    const double d = std::sqrt(2.0) * torus.half_side();
    if (!(*cfg.threshold >= 0.0 && *cfg.threshold <= d))
      throw ConfigError("threshold", "must lie in [0, " + std::to_string(d) + "]");
  }
  if (cfg.out.empty()) throw ConfigError("out", "output directory must be given");
}

inline nlohmann::ordered_json to_json(const ExperimentConfig& cfg) {
  nlohmann::ordered_json sites = nlohmann::ordered_json::array();
  for (Site s : cfg.sites) sites.push_back({s.x, s.y});
  nlohmann::ordered_json j;
  j["side_length"] = cfg.side_length;
  j["layout"] = cfg.layout;
  j["sites"] = sites;
  j["same_site_count"] = cfg.same_site_count;
  j["mechanisms"] = cfg.mechanisms;
  j["reference"] = cfg.reference;
  j["replicates"] = cfg.replicates;
  j["reference_replicates"] = cfg.reference_replicates;
  j["seed"] = cfg.seed;
  j["mutation_rate"] = cfg.mutation_rate ? nlohmann::ordered_json(*cfg.mutation_rate) : nullptr;
  j["threshold"] = cfg.threshold ? nlohmann::ordered_json(*cfg.threshold) : nullptr;
  return j;
}

/// Reads a JSON config; unknown keys are config errors.
inline void apply_json(ExperimentConfig& cfg, const nlohmann::json& j) {
  for (const auto& [key, v] : j.items()) {
    try {
      if (key == "side_length") cfg.side_length = v.get<int>();
      else if (key == "layout") cfg.layout = v.get<std::string>();
      else if (key == "sites") {
        cfg.sites.clear();
        for (const auto& s : v) cfg.sites.push_back({s.at(0).get<int>(), s.at(1).get<int>()});
      } else if (key == "same_site_count") cfg.same_site_count = v.get<std::size_t>();
      else if (key == "mechanisms") cfg.mechanisms = v.get<std::vector<std::string>>();
      else if (key == "mechanism") cfg.mechanisms = {v.get<std::string>()};
      else if (key == "reference") cfg.reference = v.get<std::string>();
      else if (key == "replicates") cfg.replicates = v.get<std::size_t>();
      else if (key == "reference_replicates") cfg.reference_replicates = v.get<std::size_t>();
      else if (key == "seed") cfg.seed = v.get<std::uint64_t>();
      else if (key == "mutation_rate") cfg.mutation_rate = v.is_null() ? std::nullopt : std::optional(v.get<double>());
      else if (key == "threshold") cfg.threshold = v.is_null() ? std::nullopt : std::optional(v.get<double>());
      else if (key == "out") cfg.out = v.get<std::string>();
      else if (key == "workers") cfg.workers = v.get<unsigned>();
      else if (key == "events") cfg.events = v.get<bool>();
      else throw ConfigError(key, "unknown config key");
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(key, e.what());
    }
  }
}

/// Hash of everything that determines the results (not out/workers/events).
inline std::string config_hash(const ExperimentConfig& cfg) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(to_json(cfg).dump())));
  return buf;
}

/// fn(i) for i in [0, count) on `workers` threads; results by index.
template <typename T, typename Fn>
std::vector<T> parallel_map(std::size_t count, unsigned workers, Fn fn) {
  std::vector<T> out(count);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < count;) {
      try {
        out[i] = fn(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = count;
      }
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(count)));
  if (n == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < n; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

struct ReplicateOutcome {
  Spectrum spectrum;
  double seconds = 0.0;
  std::size_t handoff_blocks = 0;
  bool used_approximation = false;
};

struct SpectrumRun {
  std::string name;
  bool hybrid = false;
  std::vector<ReplicateOutcome> replicates;
  SpectrumSummary summary;
};

struct SpectrumReport {
  std::size_t sample_size = 0;
  double mutation_rate = 0.0;
  double theta = 0.0;
  std::vector<SpectrumRun> runs;  // spatial (and hybrid) runs, then the Kingman reference
  ExpectedSpectrum ewens;
};

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct JsonlSink {
  std::ostream* os;
  void operator()(const Event& e) const { write_event(*os, e); }
};

inline SpectrumRun summarise(std::string name, bool hybrid, std::vector<ReplicateOutcome> reps) {
  std::vector<Spectrum> s;
  for (const auto& r : reps) s.push_back(r.spectrum);
  SpectrumRun run{std::move(name), hybrid, std::move(reps), {}};
  run.summary = mean_spectrum(s);
  return run;
}

}  // namespace detail

/// Mean spectra of every configured mechanism (full spatial, plus the hybrid
/// when a threshold is set), the Kingman reference at matched rates, and the
/// Ewens expectation.
inline SpectrumReport run_spectrum(const ExperimentConfig& cfg) {
  validate(cfg);
  const auto torus = experiment_torus(cfg);
  const auto sites = layout_sites(cfg, torus);
  const auto initial = singletons(sites.size(), sites);
  const double rate = experiment_mutation_rate(cfg, torus);
  const double s_L = time_scale(torus);

  SpectrumReport report;
  report.sample_size = sites.size();
  report.mutation_rate = rate;
  // Kingman phase pair rate pi/s_L: theta = 2 * rate / (pi/s_L)
  report.theta = 2.0 * rate * s_L / std::numbers::pi;
  const MutationConfig mcfg{rate};

  std::ofstream events;
  if (cfg.events) {
    std::filesystem::create_directories(cfg.out);
    events.open(std::filesystem::path(cfg.out) / "events.jsonl");
    write_sample_records(events, initial);
  }

  for (std::size_t mi = 0; mi < cfg.mechanisms.size(); ++mi) {
    const auto mech = parse_mechanism(cfg.mechanisms[mi]);
    const bool log_events = cfg.events && mi == 0;
    auto full = parallel_map<ReplicateOutcome>(cfg.replicates, cfg.workers, [&](std::size_t r) {
      auto rng = make_stream(cfg.seed, r, StreamTag::spectrum);
      const auto t0 = std::chrono::steady_clock::now();
      ReplicateOutcome o;
      if (log_events && r == 0)
        o.spectrum = run_infinite_alleles(torus, initial, mech, mcfg, rng, detail::JsonlSink{&events});
      else
        o.spectrum = run_infinite_alleles(torus, initial, mech, mcfg, rng);
      o.seconds = detail::seconds_since(t0);
      return o;
    });
    report.runs.push_back(detail::summarise(cfg.mechanisms[mi], false, std::move(full)));

    if (cfg.threshold) {
      auto hyb = parallel_map<ReplicateOutcome>(cfg.replicates, cfg.workers, [&](std::size_t r) {
        auto rng = make_stream(cfg.seed, r, StreamTag::hybrid);
        const auto t0 = std::chrono::steady_clock::now();
        auto h = hybrid_run(torus, initial, mech, *cfg.threshold, mcfg, rng);
        return ReplicateOutcome{std::move(h.spectrum), detail::seconds_since(t0), h.handoff_blocks,
                                h.used_approximation};
      });
      report.runs.push_back(detail::summarise(cfg.mechanisms[mi] + "-hybrid", true, std::move(hyb)));
    }
  }

  const KingmanConfig kcfg{std::numbers::pi / s_L, rate};
  auto ref = parallel_map<ReplicateOutcome>(cfg.reference_replicates, cfg.workers, [&](std::size_t r) {
    auto rng = make_stream(cfg.seed, r, StreamTag::kingman_reference);
    const auto t0 = std::chrono::steady_clock::now();
    auto s = kingman_spectrum(report.sample_size, kcfg, rng);
    return ReplicateOutcome{std::move(s), detail::seconds_since(t0), 0, false};
  });
  report.runs.push_back(detail::summarise(kKingmanReference, false, std::move(ref)));

  auto unused = make_stream(cfg.seed, 0, StreamTag::validation);
  report.ewens = ewens_expected_spectrum(report.sample_size, report.theta, EwensMethod::formula, unused);
  return report;
}

/// l1 distance between two mean spectra.
inline double l1_distance(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("spectra of different sample sizes");
  double d = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) d += std::abs(a[k] - b[k]);
  return d;
}

inline std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline void write_spectrum_csv(std::ostream& os, const SpectrumReport& report, const std::string& hash) {
  os << "# config_hash=" << hash << '\n';
  os << "mechanism,k,mean_a_k,stderr_a_k,replicates\n";
  for (const auto& run : report.runs)
    for (std::size_t k = 1; k <= report.sample_size; ++k)
      os << run.name << ',' << k << ',' << format_number(run.summary.mean[k - 1]) << ','
         << format_number(run.summary.stderr_[k - 1]) << ',' << run.summary.replicates << '\n';
  for (std::size_t k = 1; k <= report.sample_size; ++k)
    os << "ewens," << k << ',' << format_number(report.ewens.mean[k - 1]) << ",0,0\n";
}

inline nlohmann::ordered_json spectrum_summary_json(const ExperimentConfig& cfg, const SpectrumReport& report) {
  const auto torus = experiment_torus(cfg);
  nlohmann::ordered_json j;
  j["command"] = "spectrum";
  j["config"] = to_json(cfg);
  j["config_hash"] = config_hash(cfg);
  j["torus"] = {{"side_length", torus.side()}, {"half_side", torus.half_side()}, {"time_scale", time_scale(torus)}};
  j["sample_size"] = report.sample_size;
  j["mutation_rate"] = report.mutation_rate;
  j["theta"] = report.theta;
  std::size_t violations = 0;
  nlohmann::ordered_json runs = nlohmann::ordered_json::array();
  nlohmann::ordered_json timing;
  for (const auto& run : report.runs) {
    nlohmann::ordered_json r;
    r["mechanism"] = run.name;
    r["replicates"] = run.summary.replicates;
    r["mean_spectrum"] = run.summary.mean;
    r["stderr"] = run.summary.stderr_;
    r["l1_to_ewens"] = l1_distance(run.summary.mean, report.ewens.mean);
    for (const auto& rep : run.replicates) violations += !rep.spectrum.conserves_sample();
    if (run.hybrid) {
      std::vector<double> h;
      std::size_t used = 0;
      for (const auto& rep : run.replicates) {
        h.push_back(static_cast<double>(rep.handoff_blocks));
        used += rep.used_approximation;
      }
      const auto ms = stats::mean_se(h);
      r["handoff"] = {{"mean_blocks", ms.mean},
                      {"stddev_blocks", ms.sd},
                      {"fraction_using_approximation", static_cast<double>(used) / static_cast<double>(h.size())}};
    }
    runs.push_back(r);
    double total = 0.0;
    for (const auto& rep : run.replicates) total += rep.seconds;
    timing[run.name] = {{"total_seconds", total},
                        {"per_replicate_seconds", total / static_cast<double>(run.replicates.size())}};
  }
  j["runs"] = runs;
  j["ewens"] = report.ewens.mean;
  j["conservation_violations"] = violations;
  j["timing"] = timing;
  return j;
}

/// Runs the spectrum experiment and writes spectrum.csv, summary.json (and events.jsonl).
inline SpectrumReport cmd_spectrum(const ExperimentConfig& cfg) {
  auto report = run_spectrum(cfg);
  std::filesystem::create_directories(cfg.out);
  std::ofstream csv(std::filesystem::path(cfg.out) / "spectrum.csv");
  write_spectrum_csv(csv, report, config_hash(cfg));
  std::ofstream js(std::filesystem::path(cfg.out) / "summary.json");
  js << spectrum_summary_json(cfg, report).dump(2) << '\n';
  return report;
}

struct QQReport {
  std::string name_a;
  std::string name_b;
  std::vector<double> sample_a;  // rescaled total tree lengths
  std::vector<double> sample_b;
  std::vector<QQPoint> points;
  double seconds_a = 0.0;
  double seconds_b = 0.0;
};

/// Fraction of q-q points with a > b.
inline double fraction_above_diagonal(const std::vector<QQPoint>& pts) {
  std::size_t above = 0;
  for (const auto& p : pts) above += p.a > p.b;
  return static_cast<double>(above) / static_cast<double>(pts.size());
}

/// Median of |a - b| / b over q-q points.
inline double median_relative_deviation(const std::vector<QQPoint>& pts) {
  std::vector<double> d;
  for (const auto& p : pts) d.push_back(std::abs(p.a - p.b) / p.b);
  std::sort(d.begin(), d.end());
  const std::size_t m = d.size();
  return m % 2 ? d[m / 2] : 0.5 * (d[m / 2 - 1] + d[m / 2]);
}

/// Total tree lengths of the spatial process divided by s_L, against the
/// Kingman coalescent with pair rate pi (or a second mechanism).
inline QQReport run_qq(const ExperimentConfig& cfg) {
  validate(cfg);
  const auto torus = experiment_torus(cfg);
  const auto sites = layout_sites(cfg, torus);
  const auto initial = singletons(sites.size(), sites);
  const double s_L = time_scale(torus);

  auto spatial_lengths = [&](const std::string& name, double& seconds) {
    const auto mech = parse_mechanism(name);
    auto reps = parallel_map<std::pair<double, double>>(cfg.replicates, cfg.workers, [&](std::size_t r) {
      auto rng = make_stream(cfg.seed, r, StreamTag::tree_length);
      const auto t0 = std::chrono::steady_clock::now();
      SpatialCoalescent sim(torus, mech, initial);
      sim.run_until(rng, stop_when_blocks_at_most(1));
      return std::make_pair(sim.lineage_time() / s_L, detail::seconds_since(t0));
    });
    std::vector<double> out;
    for (const auto& [len, sec] : reps) {
      out.push_back(len);
      seconds += sec;
    }
    return out;
  };

  QQReport q;
  q.name_a = cfg.mechanisms.front();
  q.name_b = cfg.reference;
  q.sample_a = spatial_lengths(q.name_a, q.seconds_a);
  if (cfg.reference == kKingmanReference) {
    auto reps = parallel_map<double>(cfg.reference_replicates, cfg.workers, [&](std::size_t r) {
      auto rng = make_stream(cfg.seed, r, StreamTag::kingman_tree_length);
      return kingman_tree_length(sites.size(), std::numbers::pi, rng);
    });
    q.sample_b = std::move(reps);
  } else {
    q.sample_b = spatial_lengths(q.name_b, q.seconds_b);
  }
  q.points = qq_data(q.sample_a, q.sample_b);
  return q;
}

inline void write_qq_csv(std::ostream& os, const QQReport& q, const std::string& hash) {
  os << "# config_hash=" << hash << " sample_a=" << q.name_a << " sample_b=" << q.name_b << '\n';
  os << "quantile_index,sample_a,sample_b\n";
  for (const auto& p : q.points) os << p.index << ',' << format_number(p.a) << ',' << format_number(p.b) << '\n';
}

inline nlohmann::ordered_json qq_summary_json(const ExperimentConfig& cfg, const QQReport& q) {
  nlohmann::ordered_json j;
  j["command"] = "qq";
  j["config"] = to_json(cfg);
  j["config_hash"] = config_hash(cfg);
  j["sample_a"] = {{"name", q.name_a}, {"size", q.sample_a.size()}, {"mean", stats::mean_se(q.sample_a).mean}};
  j["sample_b"] = {{"name", q.name_b}, {"size", q.sample_b.size()}, {"mean", stats::mean_se(q.sample_b).mean}};
  j["fraction_above_diagonal"] = fraction_above_diagonal(q.points);
  j["median_relative_deviation"] = median_relative_deviation(q.points);
  j["timing"] = {{"sample_a_seconds", q.seconds_a}, {"sample_b_seconds", q.seconds_b}};
  return j;
}

inline QQReport cmd_qq(const ExperimentConfig& cfg) {
  auto q = run_qq(cfg);
  std::filesystem::create_directories(cfg.out);
  std::ofstream csv(std::filesystem::path(cfg.out) / "qq.csv");
  write_qq_csv(csv, q, config_hash(cfg));
  std::ofstream js(std::filesystem::path(cfg.out) / "summary.json");
  js << qq_summary_json(cfg, q).dump(2) << '\n';
  return q;
}

}  // namespace slc
