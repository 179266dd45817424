#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "relu_recover/config.hpp"
#include "relu_recover/dataset_io.hpp"
#include "relu_recover/errors.hpp"
#include "relu_recover/experiments.hpp"
#include "relu_recover/plot.hpp"
#include "relu_recover/result_table.hpp"

namespace relu_recover {
namespace {

namespace fs = std::filesystem;

// Minimal XML well-formedness check: balanced, properly nested elements,
// quoted attributes, terminated comments, and a single root element.
bool well_formed_xml(const std::string& doc, std::string& why) {
  std::vector<std::string> stack;
  std::size_t i = 0;
  int roots = 0;
  while (i < doc.size()) {
    if (doc[i] != '<') {
      if (stack.empty() && !std::isspace(static_cast<unsigned char>(doc[i]))) {
        why = "text outside root";
        return false;
      }
      ++i;
      continue;
    }
    if (doc.compare(i, 4, "<!--") == 0) {
      const std::size_t end = doc.find("-->", i + 4);
      if (end == std::string::npos) {
        why = "unterminated comment";
        return false;
      }
      if (doc.substr(i + 4, end - i - 4).find("--") != std::string::npos) {
        why = "'--' inside comment";
        return false;
      }
      i = end + 3;
      continue;
    }
    if (doc.compare(i, 2, "<?") == 0) {
      const std::size_t end = doc.find("?>", i);
      if (end == std::string::npos) return why = "bad declaration", false;
      i = end + 2;
      continue;
    }
    const bool closing = doc.compare(i, 2, "</") == 0;
    std::size_t j = i + (closing ? 2 : 1);
    const std::size_t name_start = j;
    while (j < doc.size() && (std::isalnum(static_cast<unsigned char>(doc[j])) || doc[j] == '-' ||
                              doc[j] == ':' || doc[j] == '_')) {
      ++j;
    }
    const std::string name = doc.substr(name_start, j - name_start);
    if (name.empty()) return why = "empty tag name", false;
    char quote = 0;
    while (j < doc.size() && (quote || doc[j] != '>')) {
      if (quote) {
        if (doc[j] == quote) quote = 0;
        else if (doc[j] == '<') return why = "'<' inside attribute", false;
      } else if (doc[j] == '"' || doc[j] == '\'') {
        quote = doc[j];
      }
      ++j;
    }
    if (j >= doc.size()) return why = "unterminated tag " + name, false;
    const bool self_closing = doc[j - 1] == '/';
    if (closing) {
      if (stack.empty() || stack.back() != name) return why = "mismatched </" + name + ">", false;
      stack.pop_back();
    } else if (!self_closing) {
      if (stack.empty()) ++roots;
      stack.push_back(name);
    } else if (stack.empty()) {
      ++roots;
    }
    i = j + 1;
  }
  if (!stack.empty()) return why = "unclosed <" + stack.back() + ">", false;
  if (roots != 1) return why = "expected one root element", false;
  return true;
}

std::size_t count_of(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (std::size_t p = text.find(needle); p != std::string::npos; p = text.find(needle, p + 1)) ++n;
  return n;
}

std::string csv_of(const ResultTable& t) {
  std::ostringstream out;
  t.write_csv(out);
  return out.str();
}

ExperimentConfig small_fig2a() {
  auto c = ExperimentConfig::preset(Experiment::fig2a);
  c.n = 400;
  c.iters = 60;
  return c;
}

ExperimentConfig small_fig2b() {
  auto c = ExperimentConfig::preset(Experiment::fig2b);
  c.d_list = {6, 8};
  c.ratios = {5, 20};
  c.trials = 2;
  c.iters = 100;
  return c;
}

ExperimentConfig small_fig2c() {
  auto c = ExperimentConfig::preset(Experiment::fig2c);
  c.d_list = {6, 8};
  c.ratios = {20, 40};
  c.trials = 2;
  c.iters = 100;
  return c;
}

ExperimentConfig small_theory() {
  auto c = ExperimentConfig::preset(Experiment::check_theory);
  c.d = 5;
  c.k = 3;
  c.theory_n = 2000;
  c.probes = 3;
  c.lipschitz_pairs = 3;
  c.n_mc = 10000;
  c.conc_trials = 2;
  c.n_mc_ref = 20000;
  c.conc_n = {256, 512, 1024, 4096};
  return c;
}

TEST(Config, PresetsCarryExperimentDefaults) {
  const auto a = ExperimentConfig::preset(Experiment::fig2a);
  EXPECT_EQ(a.d, 10);
  EXPECT_EQ(a.k, 5);
  EXPECT_EQ(a.n, 5000);
  EXPECT_EQ(a.eta, 0.5);
  EXPECT_EQ(a.nu, 0.0);
  EXPECT_EQ(a.iters, 1000);

  const auto b = ExperimentConfig::preset(Experiment::fig2b);
  EXPECT_EQ(b.d_list, (std::vector<int>{20, 50, 100}));
  EXPECT_EQ(b.ratios, (std::vector<double>{2, 4, 6, 8, 10, 15, 20, 30, 50}));
  EXPECT_EQ(b.trials, 10);
  EXPECT_EQ(b.init, InitKind::random);
  EXPECT_EQ(b.nu, 0.0);

  const auto c = ExperimentConfig::preset(Experiment::fig2c);
  EXPECT_EQ(c.d_list, (std::vector<int>{10, 25, 50}));
  EXPECT_NEAR(c.nu * c.nu, 0.1, 1e-15);
  EXPECT_EQ(c.init, InitKind::warm);
  EXPECT_EQ(c.trials, 10);
}

TEST(Config, SetParsesAndRejects) {
  ExperimentConfig c;
  c.set("d", "12");
  c.set("noise_var", "0.25");
  c.set("init", "random");
  c.set("ratios", "2,4.5,8");
  c.set("seed", "77");
  EXPECT_EQ(c.d, 12);
  EXPECT_EQ(c.nu, 0.5);
  EXPECT_EQ(c.init, InitKind::random);
  EXPECT_EQ(c.ratios, (std::vector<double>{2, 4.5, 8}));
  EXPECT_EQ(c.master_seed, 77u);
  EXPECT_THROW(c.set("no_such_key", "1"), UsageError);
  EXPECT_THROW(c.set("d", "ten"), UsageError);
  EXPECT_THROW(c.set("init", "tensor"), UsageError);
  EXPECT_THROW(c.set("iters", "5x"), UsageError);
}

TEST(Config, ValidateRejectsBadFields) {
  auto c = ExperimentConfig::preset(Experiment::train);
  EXPECT_NO_THROW(c.validate());
  c.k = 20;
  EXPECT_THROW(c.validate(), UsageError);
  c = ExperimentConfig::preset(Experiment::train);
  c.eta = -1;
  EXPECT_THROW(c.validate(), UsageError);
  c = ExperimentConfig::preset(Experiment::train);
  c.nu = -0.1;
  EXPECT_THROW(c.validate(), UsageError);
}

TEST(Config, FileParsingWithComments) {
  ExperimentConfig c = ExperimentConfig::preset(Experiment::train);
  std::istringstream text("# a comment\n\n  d = 7  \nk=3 # trailing\neta = 0.25\n");
  apply_config_text(c, text);
  EXPECT_EQ(c.d, 7);
  EXPECT_EQ(c.k, 3);
  EXPECT_EQ(c.eta, 0.25);
  std::istringstream bad("d 7\n");
  EXPECT_THROW(apply_config_text(c, bad), UsageError);
  EXPECT_THROW(apply_config_file(c, "/nonexistent/relu.cfg"), IoError);
}

TEST(Config, LinesRoundTrip) {
  auto original = small_theory();
  original.nu = std::sqrt(0.1);
  original.out_path = "out.csv";
  original.hessian_lipschitz = true;
  ExperimentConfig back = ExperimentConfig::preset(Experiment::train);
  std::string text;
  for (const auto& line : original.to_lines()) text += line + "\n";
  std::istringstream in(text);
  apply_config_text(back, in);
  EXPECT_EQ(back, original);
}

TEST(ResultTable, EchoRoundTripForEveryExperiment) {
  for (const auto& config : {small_fig2a(), small_fig2b(), small_fig2c(), small_theory()}) {
    const ResultTable table = run_experiment(config);
    std::istringstream in(csv_of(table));
    EXPECT_EQ(parse_config_echo(in), config) << to_string(config.experiment);
  }
}

TEST(ResultTable, CsvRoundTripAndAccessors) {
  ResultTable t;
  t.schema = {"a", "b"};
  t.rows = {{"1", "2.5"}, {"3", ""}};
  t.config = ExperimentConfig::preset(Experiment::train);
  t.notes = {"hello"};
  const std::string csv = csv_of(t);
  EXPECT_NE(csv.find("\na,b\n1,2.5\n3,\n"), std::string::npos);
  EXPECT_EQ(csv.find('\r'), std::string::npos);
  std::istringstream in(csv);
  const ResultTable back = read_result_table(in);
  EXPECT_EQ(back.schema, t.schema);
  EXPECT_EQ(back.rows, t.rows);
  EXPECT_EQ(back.notes, t.notes);
  EXPECT_EQ(back.config, t.config);
  EXPECT_EQ(t.number(0, "b"), 2.5);
  EXPECT_TRUE(std::isnan(t.number(1, "b")));
  EXPECT_THROW(t.column("c"), std::out_of_range);
}

TEST(ResultTable, SaveToMissingDirectoryIsIoError) {
  ResultTable t;
  t.schema = {"a"};
  EXPECT_THROW(t.save("/nonexistent/dir/out.csv"), IoError);
}

TEST(Experiments, SchemasAndRowCounts) {
  const auto a = run_fig2a(small_fig2a());
  EXPECT_EQ(a.schema, (std::vector<std::string>{"iter", "log10_loss_warm", "log10_loss_random"}));
  EXPECT_EQ(a.rows.size(), 61u);
  const auto b = run_fig2b(small_fig2b());
  EXPECT_EQ(b.schema, (std::vector<std::string>{"d", "N", "ratio", "success_count", "trials"}));
  EXPECT_EQ(b.rows.size(), 4u);
  const auto c = run_fig2c(small_fig2c());
  EXPECT_EQ(c.schema, (std::vector<std::string>{"d", "N", "ratio", "avg_error"}));
  EXPECT_EQ(c.rows.size(), 4u);
  EXPECT_EQ(c.number(0, "N"), 120.0);
  const auto t = run_check_theory(small_theory());
  EXPECT_EQ(t.schema, (std::vector<std::string>{"check", "probe_id", "seed", "N", "radius", "value"}));
}

TEST(Experiments, Fig2aLabelsWarmStartAsSurrogate) {
  const auto a = run_fig2a(small_fig2a());
  bool labeled = false;
  for (const auto& note : a.notes) labeled |= note.find("warm-start (tensor-init surrogate)") != std::string::npos;
  EXPECT_TRUE(labeled);
}

TEST(Experiments, RerunsAreByteIdentical) {
  for (const auto& config : {small_fig2a(), small_fig2b(), small_fig2c(), small_theory()}) {
    EXPECT_EQ(csv_of(run_experiment(config)), csv_of(run_experiment(config)))
        << to_string(config.experiment);
  }
}

TEST(Experiments, AddingGridPointsLeavesExistingCellsUnchanged) {
  auto narrow = small_fig2c();
  auto wide = narrow;
  wide.ratios = {20, 30, 40};
  const auto a = run_fig2c(narrow);
  const auto b = run_fig2c(wide);
  EXPECT_EQ(a.rows[0], b.rows[0]);
  EXPECT_EQ(a.rows[1], b.rows[2]);
  EXPECT_EQ(a.rows[2], b.rows[3]);
  EXPECT_EQ(a.rows[3], b.rows[5]);
  EXPECT_NE(trial_seed(narrow, 6, 120, 0), trial_seed(narrow, 6, 120, 1));
  EXPECT_NE(trial_seed(narrow, 6, 120, 0), trial_seed(small_fig2b(), 6, 120, 0));
}

TEST(Experiments, MasterSeedChangesResults) {
  auto c = small_fig2c();
  const auto a = csv_of(run_fig2c(c));
  c.master_seed = 2;
  EXPECT_NE(a, csv_of(run_fig2c(c)));
}

TEST(Experiments, TrainOnLoadedDataset) {
  auto gen = ExperimentConfig::preset(Experiment::gen_data);
  gen.d = 4;
  gen.k = 2;
  gen.n = 200;
  const Dataset data = run_gen_data(gen);
  const fs::path path = fs::temp_directory_path() / "relu_recover_harness_data.csv";
  save_dataset(path.string(), data);
  auto train = ExperimentConfig::preset(Experiment::train);
  train.d = 4;
  train.k = 2;
  train.iters = 20;
  train.init = InitKind::random;
  train.data_path = path.string();
  const auto table = run_train(train);
  EXPECT_EQ(table.schema, (std::vector<std::string>{"iter", "loss", "grad_norm", "param_error"}));
  EXPECT_EQ(table.rows.size(), 21u);
  train.init = InitKind::warm;
  EXPECT_THROW(run_train(train), UsageError);
  fs::remove(path);
}

TEST(ParallelFor, VisitsEveryIndexOnce) {
  std::vector<std::atomic<int>> hits(1000);
  parallel_for(hits.size(), [&](std::size_t i) { hits[i].fetch_add(1); });
  for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
  parallel_for(0, [](std::size_t) { FAIL(); });
}

TEST(Plot, WellFormedSvgForEverySchema) {
  const std::vector<std::pair<ResultTable, PlotKind>> cases = {
      {run_fig2a(small_fig2a()), PlotKind::line},
      {run_fig2b(small_fig2b()), PlotKind::line},
      {run_fig2c(small_fig2c()), PlotKind::line},
      {run_check_theory(small_theory()), PlotKind::scatter},
  };
  for (const auto& [table, kind] : cases) {
    const std::string svg = emit_plot(table, kind);
    std::string why;
    EXPECT_TRUE(well_formed_xml(svg, why)) << to_string(table.config.experiment) << ": " << why;
    EXPECT_NE(svg.find("<svg"), std::string::npos);
    EXPECT_NE(svg.find("config begin"), std::string::npos);
    EXPECT_EQ(svg.find("href="), std::string::npos);
  }
}

TEST(Plot, SeriesPerSchema) {
  const std::string a = emit_plot(run_fig2a(small_fig2a()), PlotKind::line);
  EXPECT_EQ(count_of(a, "<polyline"), 2u);
  auto b_cfg = small_fig2b();
  b_cfg.d_list = {6, 7, 8};
  const std::string b = emit_plot(run_fig2b(b_cfg), PlotKind::line);
  EXPECT_EQ(count_of(b, "<polyline"), 3u);
}

TEST(Plot, RejectsEmptyAndUnknownTables) {
  ResultTable empty;
  empty.schema = {"iter", "log10_loss_warm"};
  EXPECT_THROW(emit_plot(empty, PlotKind::line), std::invalid_argument);
  ResultTable unknown;
  unknown.schema = {"x", "y"};
  unknown.rows = {{"1", "2"}};
  EXPECT_THROW(emit_plot(unknown, PlotKind::line), std::invalid_argument);
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("relu_recover_cli_" + std::to_string(::getpid()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  static int run(const std::string& args) {
    const std::string cmd = std::string(RELU_RECOVER_CLI) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  static std::string slurp(const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
  }

  fs::path dir_;
};

TEST_F(Cli, UsageErrorsExitOne) {
  EXPECT_EQ(run(""), 1);
  EXPECT_EQ(run("no-such-command"), 1);
  EXPECT_EQ(run("train --bogus 3"), 1);
  EXPECT_EQ(run("train --d ten"), 1);
  EXPECT_EQ(run("train --k 20 --d 5"), 1);
}

TEST_F(Cli, HelpExitsZero) { EXPECT_EQ(run("--help"), 0); }

TEST_F(Cli, IoErrorsExitThree) {
  EXPECT_EQ(run("train --d 4 --k 2 --n 50 --iters 2 --out /nonexistent/dir/x.csv"), 3);
  EXPECT_EQ(run("train --d 4 --k 2 --init random --data /nonexistent/data.csv"), 3);
  EXPECT_EQ(run("train --config /nonexistent/run.cfg"), 3);
}

TEST_F(Cli, DivergenceExitsTwo) {
  EXPECT_EQ(run("train --d 10 --k 5 --n 200 --init random --eta 1e6 --iters 200 --out " + path("div.csv")), 2);
}

TEST_F(Cli, TrainWritesCsvAndPlot) {
  ASSERT_EQ(run("train --d 4 --k 2 --n 100 --iters 10 --out " + path("t.csv") + " --plot " + path("t.svg")), 0);
  const std::string csv = slurp(path("t.csv"));
  EXPECT_NE(csv.find("iter,loss,grad_norm,param_error\n"), std::string::npos);
  std::string why;
  EXPECT_TRUE(well_formed_xml(slurp(path("t.svg")), why)) << why;
}

TEST_F(Cli, FlagsOverrideConfigFile) {
  {
    std::ofstream cfg(path("run.cfg"));
    cfg << "# small run\nd = 4\nk = 2\nn = 100\niters = 7\neta = 0.25\n";
  }
  ASSERT_EQ(run("train --config " + path("run.cfg") + " --iters 3 --out " + path("o.csv")), 0);
  std::ifstream in(path("o.csv"));
  const ExperimentConfig echo = parse_config_echo(in);
  EXPECT_EQ(echo.iters, 3);
  EXPECT_EQ(echo.eta, 0.25);
  EXPECT_EQ(echo.d, 4);
}

TEST_F(Cli, GenDataThenTrainOnIt) {
  ASSERT_EQ(run("gen-data --d 4 --k 2 --n 100 --nu 0.1 --out " + path("data.csv")), 0);
  const Dataset data = load_dataset(path("data.csv"));
  EXPECT_EQ(data.n(), 100);
  EXPECT_EQ(data.dim(), 4);
  EXPECT_EQ(run("train --d 4 --k 2 --init random --iters 5 --data " + path("data.csv") + " --out " +
                path("t.csv")),
            0);
}

}  // namespace
}  // namespace relu_recover
