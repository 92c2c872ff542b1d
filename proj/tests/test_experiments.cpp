#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "slc/experiments.hpp"
#include "slc/plot.hpp"

using namespace slc;

namespace {

ExperimentConfig small() {
  ExperimentConfig c;
  c.side_length = 15;
  c.mechanisms = {"bs", "crw"};
  c.replicates = 6;
  c.reference_replicates = 20;
  c.seed = 42;
  c.out = (std::filesystem::temp_directory_path() / "slc-test-experiments").string();
  return c;
}

std::string field_of(const ExperimentConfig& c) {
  try {
    validate(c);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "";
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream is(p);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Layout, Grids) {
  ExperimentConfig c;
  const auto t = experiment_torus(c);
  const auto far = layout_sites(c, t);
  ASSERT_EQ(far.size(), 9u);
  EXPECT_EQ(far[0], (Site{0, 0}));
  EXPECT_EQ(far[1], (Site{0, 33}));
  EXPECT_EQ(far[2], t.wrap(0, 66));
  c.layout = "grid3x3-close";
  const auto close = layout_sites(c, t);
  EXPECT_EQ(close.front(), (Site{-1, -1}));
  EXPECT_EQ(close.back(), (Site{1, 1}));
  c.layout = "same-site";
  c.same_site_count = 4;
  EXPECT_EQ(layout_sites(c, t), std::vector<Site>(4, Site{0, 0}));
  c.layout = "explicit";
  c.sites = {{0, 0}, {3, 0}};
  EXPECT_EQ(layout_sites(c, t).size(), 2u);
}

TEST(Config, ValidationNamesField) {
  EXPECT_EQ(field_of(small()), "");
  auto c = small();
  c.side_length = 198;
  EXPECT_EQ(field_of(c), "side-length");
  c = small();
  c.side_length = 1;
  EXPECT_EQ(field_of(c), "side-length");
  c = small();
  c.mechanisms = {"bogus"};
  EXPECT_EQ(field_of(c), "mechanism");
  c = small();
  c.replicates = 0;
  EXPECT_EQ(field_of(c), "replicates");
  c = small();
  c.threshold = 100.0;
  EXPECT_EQ(field_of(c), "threshold");
  c = small();
  c.mutation_rate = -1.0;
  EXPECT_EQ(field_of(c), "mutation-rate");
  c = small();
  c.layout = "ring";
  EXPECT_EQ(field_of(c), "layout");
  c = small();
  c.layout = "explicit";
  c.sites = {{99, 0}};
  EXPECT_EQ(field_of(c), "sites");
  c = small();
  c.workers = 0;
  EXPECT_EQ(field_of(c), "workers");
}

TEST(Config, JsonRoundTripAndHash) {
  auto c = small();
  c.threshold = 2.5;
  ExperimentConfig back;
  apply_json(back, to_json(c));
  back.out = c.out;
  EXPECT_EQ(to_json(back), to_json(c));
  EXPECT_EQ(config_hash(back), config_hash(c));
  EXPECT_EQ(config_hash(c).size(), 16u);
  back.workers = 7;  // not part of the hash
  EXPECT_EQ(config_hash(back), config_hash(c));
  back.seed = 43;
  EXPECT_NE(config_hash(back), config_hash(c));

  ExperimentConfig bad;
  EXPECT_THROW(apply_json(bad, nlohmann::json{{"colour", 1}}), ConfigError);
  try {
    apply_json(bad, nlohmann::json{{"replicates", "many"}});
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "replicates");
  }
}

TEST(Parallel, DeterministicAcrossWorkers) {
  auto c = small();
  c.threshold = 3.0;
  const auto one = run_spectrum(c);
  c.workers = 3;
  const auto three = run_spectrum(c);
  ASSERT_EQ(one.runs.size(), three.runs.size());
  ASSERT_EQ(one.runs.size(), 5u);  // bs, bs-hybrid, crw, crw-hybrid, reference
  for (std::size_t i = 0; i < one.runs.size(); ++i) {
    EXPECT_EQ(one.runs[i].name, three.runs[i].name);
    EXPECT_EQ(one.runs[i].summary.mean, three.runs[i].summary.mean);
    for (std::size_t r = 0; r < one.runs[i].replicates.size(); ++r)
      EXPECT_EQ(one.runs[i].replicates[r].spectrum, three.runs[i].replicates[r].spectrum);
  }
  EXPECT_NEAR(one.theta, 2.0, 1e-12);
}

TEST(Parallel, PropagatesExceptions) {
  EXPECT_THROW(parallel_map<int>(10, 3,
                                 [](std::size_t i) -> int {
                                   if (i == 7) throw std::runtime_error("boom");
                                   return 0;
                                 }),
               std::runtime_error);
}

TEST(Output, SpectrumFiles) {
  auto c = small();
  c.events = true;
  std::filesystem::remove_all(c.out);
  cmd_spectrum(c);
  const auto csv = slurp(std::filesystem::path(c.out) / "spectrum.csv");
  EXPECT_EQ(csv.rfind("# config_hash=" + config_hash(c) + "\n", 0), 0u);
  EXPECT_NE(csv.find("\nmechanism,k,mean_a_k,stderr_a_k,replicates\n"), std::string::npos);
  EXPECT_NE(csv.find("\newens,1,"), std::string::npos);
  EXPECT_NE(csv.find("\nkingman-reference,9,"), std::string::npos);

  const auto j = nlohmann::json::parse(slurp(std::filesystem::path(c.out) / "summary.json"));
  EXPECT_EQ(j.at("config_hash"), config_hash(c));
  EXPECT_EQ(j.at("conservation_violations"), 0);
  EXPECT_TRUE(std::filesystem::exists(std::filesystem::path(c.out) / "events.jsonl"));

  std::ifstream ev(std::filesystem::path(c.out) / "events.jsonl");
  const auto stream = read_event_stream(ev);
  EXPECT_EQ(stream.initial.sample_size(), 9u);
  ReplayState s(stream.initial);
  for (const auto& e : stream.events) s.apply(e);
  EXPECT_EQ(s.block_count(), 0u);
}

TEST(Output, QQFiles) {
  auto c = small();
  c.mechanisms = {"bs"};
  std::filesystem::remove_all(c.out);
  const auto q = cmd_qq(c);
  EXPECT_EQ(q.points.size(), 6u);
  const auto csv = slurp(std::filesystem::path(c.out) / "qq.csv");
  EXPECT_NE(csv.find("\nquantile_index,sample_a,sample_b\n"), std::string::npos);
  std::ifstream is(std::filesystem::path(c.out) / "qq.csv");
  const auto t = plot::read_csv(is);
  EXPECT_EQ(t.rows.size(), 6u);
  std::ostringstream svg;
  plot::qq_svg(svg, t);
  EXPECT_NE(svg.str().find("<svg"), std::string::npos);
}

TEST(Plot, ParseErrors) {
  std::istringstream bad("# c\nmechanism,k,mean_a_k,stderr_a_k,replicates\nbs,1,2.0,0.1,10\nbs,2,oops,0.1,10\n");
  const auto t = plot::read_csv(bad);
  try {
    std::ostringstream os;
    plot::spectrum_svg(os, t);
    FAIL();
  } catch (const plot::CsvError& e) {
    EXPECT_NE(std::string(e.what()).find("line 4"), std::string::npos);
  }
  std::istringstream ragged("a,b\n1,2\n3\n");
  try {
    plot::read_csv(ragged);
    FAIL();
  } catch (const plot::CsvError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
  std::istringstream empty("# only\nquantile_index,sample_a,sample_b\n");
  EXPECT_THROW(plot::read_csv(empty), plot::CsvError);
  std::istringstream nothing("");
  EXPECT_THROW(plot::read_csv(nothing), plot::CsvError);
}

TEST(Plot, SpectrumSvg) {
  std::istringstream in("mechanism,k,mean_a_k,stderr_a_k,replicates\nbs,1,2.5,0.1,10\nbs,2,0.5,0.1,10\newens,1,2.0,0,0\newens,2,0.5,0,0\n");
  const auto t = plot::read_csv(in);
  std::ostringstream os;
  plot::spectrum_svg(os, t);
  const auto s = os.str();
  EXPECT_NE(s.find("<svg"), std::string::npos);
  EXPECT_NE(s.find("ewens"), std::string::npos);
  EXPECT_NE(s.find("</svg>"), std::string::npos);
}
