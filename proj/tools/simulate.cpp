// simulate: spatial Lambda-coalescent experiments.
//
//   simulate spectrum --side-length 99 --layout grid3x3-far --mechanism crw,bs,kingman --replicates 100
//   simulate qq       --side-length 197 --mechanism bs --out out/qq-bs
//   simulate validate --suite exact
//   simulate plot out/spectrum.csv out/qq.csv
//   simulate replay   --events out/events.jsonl
//
// Exit codes: 0 success, 1 validation failure, 2 configuration / input error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "slc/check/criteria.hpp"
#include "slc/event_log.hpp"
#include "slc/experiments.hpp"
#include "slc/plot.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kValidationFailure = 1;
constexpr int kConfigError = 2;

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::vector<slc::Site> parse_sites(const std::string& s) {
  static const std::regex site(R"(\(\s*(-?\d+)\s*,\s*(-?\d+)\s*\))");
  std::vector<slc::Site> out;
  std::string rest;
  auto it = std::sregex_iterator(s.begin(), s.end(), site);
  std::size_t consumed = 0;
  for (; it != std::sregex_iterator(); ++it) {
    const auto& m = *it;
    rest += s.substr(consumed, static_cast<std::size_t>(m.position()) - consumed);
    consumed = static_cast<std::size_t>(m.position() + m.length());
    out.push_back({std::stoi(m[1]), std::stoi(m[2])});
  }
  rest += s.substr(consumed);
  if (rest.find_first_not_of(", ") != std::string::npos || out.empty())
    throw slc::ConfigError("sites", "expected a list like (0,0),(3,0), got '" + s + "'");
  return out;
}

// Flags shared by spectrum and qq; applied on top of an optional JSON config.
struct ExperimentFlags {
  std::string config;
  int side_length = 0;
  std::string layout;
  std::string sites;
  std::size_t sample_size = 0;
  std::string mechanism;
  std::string reference;
  std::size_t replicates = 0;
  std::size_t reference_replicates = 0;
  std::uint64_t seed = 0;
  double mutation_rate = 0;
  double threshold = 0;
  std::string out;
  unsigned workers = 0;
  bool events = false;

  std::map<std::string, CLI::Option*> opts;

  void add(CLI::App* app, bool qq) {
    opts["config"] = app->add_option("--config", config, "JSON config file (flags override its fields)");
    opts["side-length"] = app->add_option("--side-length", side_length, "odd torus side length L' = 2L+1");
    opts["layout"] = app->add_option("--layout", layout, "grid3x3-far | grid3x3-close | same-site | explicit");
    opts["sites"] = app->add_option("--sites", sites, "explicit layout sites, e.g. \"(0,0),(3,0)\"");
    opts["sample-size"] = app->add_option("--sample-size", sample_size, "number of samples for same-site");
    opts["mechanism"] = app->add_option("--mechanism", mechanism,
                                        qq ? "mechanism for sample_a" : "comma-separated mechanisms");
    if (qq)
      opts["reference"] = app->add_option("--reference", reference, "kingman-reference (default) or a mechanism");
    opts["replicates"] = app->add_option("--replicates", replicates, "replicates per mechanism");
    opts["reference-replicates"] =
        app->add_option("--reference-replicates", reference_replicates, "Kingman reference replicates");
    opts["seed"] = app->add_option("--seed", seed, "master seed");
    if (!qq) {
      opts["mutation-rate"] = app->add_option("--mutation-rate", mutation_rate, "per-line rate (default pi/s_L)");
      opts["threshold"] = app->add_option("--threshold", threshold, "hybrid handoff distance");
      opts["events"] = app->add_flag("--events", events, "write events.jsonl for replicate 0");
    }
    opts["out"] = app->add_option("--out", out, "output directory");
    opts["workers"] = app->add_option("--workers", workers, "worker threads");
  }

  bool given(const std::string& name) const {
    const auto it = opts.find(name);
    return it != opts.end() && it->second->count() > 0;
  }

  slc::ExperimentConfig build() const {
    slc::ExperimentConfig cfg;
    if (given("config")) {
      std::ifstream is(config);
      if (!is) throw slc::ConfigError("config", "cannot open '" + config + "'");
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(is);
      } catch (const nlohmann::json::exception& e) {
        throw slc::ConfigError("config", e.what());
      }
      slc::apply_json(cfg, j);
    }
    if (given("side-length")) cfg.side_length = side_length;
    if (given("layout")) cfg.layout = layout;
    if (given("sites")) {
      cfg.sites = parse_sites(sites);
      if (!given("layout")) cfg.layout = "explicit";
    }
    if (given("sample-size")) cfg.same_site_count = sample_size;
    if (given("mechanism")) cfg.mechanisms = split_list(mechanism);
    if (given("reference")) cfg.reference = reference;
    if (given("replicates")) cfg.replicates = replicates;
    if (given("reference-replicates")) cfg.reference_replicates = reference_replicates;
    if (given("seed")) cfg.seed = seed;
    if (given("mutation-rate")) cfg.mutation_rate = mutation_rate;
    if (given("threshold")) cfg.threshold = threshold;
    if (given("out")) cfg.out = out;
    if (given("workers")) cfg.workers = workers;
    if (given("events")) cfg.events = events;
    slc::validate(cfg);
    return cfg;
  }
};

int run_spectrum(const ExperimentFlags& f) {
  const auto cfg = f.build();
  const auto report = slc::cmd_spectrum(cfg);
  for (const auto& run : report.runs) {
    std::cout << run.name << ": mean a_1 = " << slc::format_number(run.summary.mean[0])
              << ", l1 to Ewens = " << slc::format_number(slc::l1_distance(run.summary.mean, report.ewens.mean))
              << '\n';
  }
  std::cout << "wrote " << (std::filesystem::path(cfg.out) / "spectrum.csv").string() << '\n';
  return kOk;
}

int run_qq(const ExperimentFlags& f) {
  const auto cfg = f.build();
  const auto q = slc::cmd_qq(cfg);
  std::cout << q.name_a << " vs " << q.name_b << ": fraction above diagonal "
            << slc::format_number(slc::fraction_above_diagonal(q.points)) << ", median relative deviation "
            << slc::format_number(slc::median_relative_deviation(q.points)) << '\n';
  std::cout << "wrote " << (std::filesystem::path(cfg.out) / "qq.csv").string() << '\n';
  return kOk;
}

int run_validate(const std::string& suite, const std::vector<int>& ids, const slc::check::RunOptions& opts,
                 const std::string& report_path) {
  using namespace slc::check;
  std::vector<const Criterion*> chosen;
  for (const auto& c : registry()) {
    const bool by_id = !ids.empty() && std::find(ids.begin(), ids.end(), c.id) != ids.end();
    const bool by_suite = ids.empty() && (suite == "all" || suite == to_string(c.suite));
    if (by_id || by_suite) chosen.push_back(&c);
  }
  if (chosen.empty()) throw slc::ConfigError("suite", "no criteria selected");
  std::ofstream file;
  if (!report_path.empty()) file.open(report_path);
  bool failed = false;
  for (const auto* c : chosen) {
    const auto r = run(*c, opts);
    report(std::cout, r);
    if (file) report(file, r);
    failed |= r.hard_failure();
  }
  if (!opts.full_scale())
    std::cout << "note: replicates scaled by " << opts.scale
              << "; confidence intervals are wider and statistical failures are reported as INCONCLUSIVE\n";
  return failed ? kValidationFailure : kOk;
}

int run_plot(const std::vector<std::string>& inputs, const std::string& out) {
  for (const auto& in : inputs) {
    std::ifstream is(in);
    if (!is) throw slc::ConfigError("plot", "cannot open '" + in + "'");
    slc::plot::Table t;
    try {
      t = slc::plot::read_csv(is);
    } catch (const slc::plot::CsvError& e) {
      throw slc::ConfigError(in, e.what());
    }
    std::ostringstream svg;
    try {
      if (std::find(t.header.begin(), t.header.end(), "mechanism") != t.header.end())
        slc::plot::spectrum_svg(svg, t);
      else if (std::find(t.header.begin(), t.header.end(), "sample_a") != t.header.end())
        slc::plot::qq_svg(svg, t);
      else
        throw slc::plot::CsvError("neither a spectrum nor a q-q table");
    } catch (const slc::plot::CsvError& e) {
      throw slc::ConfigError(in, e.what());
    }
    const auto dir = out.empty() ? std::filesystem::path(in).parent_path() : std::filesystem::path(out);
    if (!dir.empty()) std::filesystem::create_directories(dir);
    const auto path = dir / (std::filesystem::path(in).stem().string() + ".svg");
    std::ofstream(path) << svg.str();
    std::cout << "wrote " << path.string() << '\n';
  }
  return kOk;
}

int run_replay(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw slc::ConfigError("events", "cannot open '" + path + "'");
  slc::EventStream stream;
  try {
    stream = slc::read_event_stream(is);
  } catch (const std::invalid_argument& e) {
    throw slc::ConfigError("events", e.what());
  }
  slc::ReplayState state(stream.initial);
  for (const auto& e : stream.events) state.apply(e);
  std::cout << "initial: " << slc::to_string(stream.initial) << '\n';
  std::cout << "events: " << stream.events.size() << '\n';
  std::cout << "live: " << slc::to_string(state.live_blocks()) << '\n';
  std::vector<std::size_t> a(stream.initial.sample_size(), 0);
  for (const auto& b : state.killed_blocks()) ++a.at(b.elements.size() - 1);
  std::cout << "killed spectrum:";
  for (auto v : a) std::cout << ' ' << v;
  std::cout << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spatial Lambda-coalescent simulator"};
  app.require_subcommand(1);

  ExperimentFlags spectrum_flags, qq_flags;
  auto* spectrum = app.add_subcommand("spectrum", "mean allele frequency spectra");
  spectrum_flags.add(spectrum, false);
  auto* qq = app.add_subcommand("qq", "q-q data of rescaled total tree length");
  qq_flags.add(qq, true);

  auto* validate = app.add_subcommand("validate", "run acceptance checks");
  std::string suite = "all";
  std::vector<int> ids;
  slc::check::RunOptions vopts;
  std::string report_path;
  validate->add_option("--suite", suite, "exact | statistical | cannings | all")
      ->check(CLI::IsMember({"exact", "statistical", "cannings", "all"}));
  validate->add_option("--criterion", ids, "criterion number (repeatable)");
  validate->add_option("--scale", vopts.scale, "replicate multiplier (< 1 for a quick run)")
      ->check(CLI::PositiveNumber);
  validate->add_option("--seed", vopts.seed, "master seed");
  validate->add_option("--workers", vopts.workers, "worker threads")->check(CLI::PositiveNumber);
  validate->add_option("--out", report_path, "also write the report to this file");

  auto* plot = app.add_subcommand("plot", "render spectrum.csv / qq.csv as SVG");
  std::vector<std::string> inputs;
  std::string plot_out;
  plot->add_option("inputs", inputs, "CSV files")->required();
  plot->add_option("--out", plot_out, "output directory (default: next to each input)");

  auto* replay = app.add_subcommand("replay", "replay an events.jsonl file");
  std::string events_path;
  replay->add_option("--events", events_path, "events.jsonl")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  try {
    if (*spectrum) return run_spectrum(spectrum_flags);
    if (*qq) return run_qq(qq_flags);
    if (*validate) return run_validate(suite, ids, vopts, report_path);
    if (*plot) return run_plot(inputs, plot_out);
    if (*replay) return run_replay(events_path);
  } catch (const slc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidationFailure;
  }
  return kOk;
}
