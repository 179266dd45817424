#include "relu_recover/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>

#include "relu_recover/dataset_io.hpp"
#include "relu_recover/errors.hpp"

namespace relu_recover {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <typename T>
T parse_integer(std::string_view key, std::string_view text) {
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw UsageError("config '" + std::string(key) + "': expected an integer, got '" +
                     std::string(text) + "'");
  }
  return value;
}

double parse_real(std::string_view key, std::string_view text) {
  const std::string owned(text);
  char* end = nullptr;
  const double value = std::strtod(owned.c_str(), &end);
  if (owned.empty() || end != owned.c_str() + owned.size() || !std::isfinite(value)) {
    throw UsageError("config '" + std::string(key) + "': expected a finite number, got '" + owned +
                     "'");
  }
  return value;
}

bool parse_bool(std::string_view key, std::string_view text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw UsageError("config '" + std::string(key) + "': expected true/false, got '" +
                   std::string(text) + "'");
}

template <typename F>
void for_each_item(std::string_view text, F&& f) {
  while (!text.empty()) {
    const auto comma = text.find(',');
    const auto item = trim(text.substr(0, comma));
    if (!item.empty()) f(item);
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
}

template <typename T>
std::string join(const std::vector<T>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ',';
    if constexpr (std::is_floating_point_v<T>) out += format_real(items[i]);
    else out += std::to_string(items[i]);
  }
  return out;
}

}  // namespace

std::string to_string(Experiment e) {
  switch (e) {
    case Experiment::fig2a: return "fig2a";
    case Experiment::fig2b: return "fig2b";
    case Experiment::fig2c: return "fig2c";
    case Experiment::check_theory: return "check-theory";
    case Experiment::train: return "train";
    case Experiment::gen_data: return "gen-data";
  }
  return "unknown";
}

std::string to_string(InitKind k) { return k == InitKind::warm ? "warm" : "random"; }

Experiment parse_experiment(std::string_view name) {
  for (auto e : {Experiment::fig2a, Experiment::fig2b, Experiment::fig2c, Experiment::check_theory,
                 Experiment::train, Experiment::gen_data}) {
    if (name == to_string(e)) return e;
  }
  throw UsageError("unknown experiment '" + std::string(name) + "'");
}

InitKind parse_init(std::string_view name) {
  if (name == "warm") return InitKind::warm;
  if (name == "random") return InitKind::random;
  throw UsageError("init must be 'warm' or 'random', got '" + std::string(name) + "'");
}

ExperimentConfig ExperimentConfig::preset(Experiment e) {
  ExperimentConfig c;
  c.experiment = e;
  switch (e) {
    case Experiment::fig2a:
      c.d = 10;
      c.n = 5000;
      c.iters = 1000;
      c.trials = 1;
      break;
    case Experiment::fig2b:
      c.d_list = {20, 50, 100};
      c.ratios = {2, 4, 6, 8, 10, 15, 20, 30, 50};
      c.init = InitKind::random;
      c.iters = 3000;
      break;
    case Experiment::fig2c:
      c.d_list = {10, 25, 50};
      c.ratios = {20, 40, 80, 160, 320};
      c.nu = std::sqrt(0.1);
      c.init = InitKind::warm;
      c.iters = 1000;
      break;
    case Experiment::check_theory:
      c.nu = std::sqrt(0.1);
      c.conc_n = {1024, 2048, 4096, 8192, 16384, 32768, 65536};
      break;
    case Experiment::train:
    case Experiment::gen_data:
      break;
  }
  return c;
}

void ExperimentConfig::set(std::string_view key, std::string_view raw) {
  const std::string_view value = trim(raw);
  if (key == "experiment") experiment = parse_experiment(value);
  else if (key == "d") d = parse_integer<int>(key, value);
  else if (key == "d_list") {
    d_list.clear();
    for_each_item(value, [&](std::string_view item) { d_list.push_back(parse_integer<int>(key, item)); });
  } else if (key == "k") k = parse_integer<int>(key, value);
  else if (key == "n") n = parse_integer<long long>(key, value);
  else if (key == "ratios") {
    ratios.clear();
    for_each_item(value, [&](std::string_view item) { ratios.push_back(parse_real(key, item)); });
  } else if (key == "sigma_min") sigma_min = parse_real(key, value);
  else if (key == "sigma_max") sigma_max = parse_real(key, value);
  else if (key == "nu") nu = parse_real(key, value);
  else if (key == "noise_var") {
    const double var = parse_real(key, value);
    if (var < 0.0) throw UsageError("config 'noise_var': must be >= 0");
    nu = std::sqrt(var);
  } else if (key == "eta") eta = parse_real(key, value);
  else if (key == "iters") iters = parse_integer<int>(key, value);
  else if (key == "grad_tol") grad_tol = parse_real(key, value);
  else if (key == "record_every") record_every = parse_integer<int>(key, value);
  else if (key == "init") init = parse_init(value);
  else if (key == "warm_radius") warm_radius = parse_real(key, value);
  else if (key == "trials") trials = parse_integer<int>(key, value);
  else if (key == "seed" || key == "master_seed") master_seed = parse_integer<std::uint64_t>(key, value);
  else if (key == "theory_n") theory_n = parse_integer<long long>(key, value);
  else if (key == "probes") probes = parse_integer<int>(key, value);
  else if (key == "probe_radius") probe_radius = parse_real(key, value);
  else if (key == "lipschitz_pairs") lipschitz_pairs = parse_integer<int>(key, value);
  else if (key == "n_mc") n_mc = parse_integer<long long>(key, value);
  else if (key == "conc_trials") conc_trials = parse_integer<int>(key, value);
  else if (key == "n_mc_ref") n_mc_ref = parse_integer<long long>(key, value);
  else if (key == "conc_n") {
    conc_n.clear();
    for_each_item(value, [&](std::string_view item) { conc_n.push_back(parse_integer<long long>(key, item)); });
  } else if (key == "hessian_lipschitz") hessian_lipschitz = parse_bool(key, value);
  else if (key == "data") data_path = std::string(value);
  else if (key == "out") out_path = std::string(value);
  else if (key == "plot") plot_path = std::string(value);
  else throw UsageError("unknown config key '" + std::string(key) + "'");
}

std::vector<std::string> ExperimentConfig::to_lines() const {
  return {
      "experiment = " + to_string(experiment),
      "d = " + std::to_string(d),
      "d_list = " + join(d_list),
      "k = " + std::to_string(k),
      "n = " + std::to_string(n),
      "ratios = " + join(ratios),
      "sigma_min = " + format_real(sigma_min),
      "sigma_max = " + format_real(sigma_max),
      "nu = " + format_real(nu),
      "eta = " + format_real(eta),
      "iters = " + std::to_string(iters),
      "grad_tol = " + format_real(grad_tol),
      "record_every = " + std::to_string(record_every),
      "init = " + to_string(init),
      "warm_radius = " + format_real(warm_radius),
      "trials = " + std::to_string(trials),
      "master_seed = " + std::to_string(master_seed),
      "theory_n = " + std::to_string(theory_n),
      "probes = " + std::to_string(probes),
      "probe_radius = " + format_real(probe_radius),
      "lipschitz_pairs = " + std::to_string(lipschitz_pairs),
      "n_mc = " + std::to_string(n_mc),
      "conc_trials = " + std::to_string(conc_trials),
      "n_mc_ref = " + std::to_string(n_mc_ref),
      "conc_n = " + join(conc_n),
      std::string("hessian_lipschitz = ") + (hessian_lipschitz ? "true" : "false"),
      "data = " + data_path,
      "out = " + out_path,
      "plot = " + plot_path,
  };
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& what) { throw UsageError("invalid config: " + what); };
  if (k < 1) fail("k must be >= 1");
  const bool grid = experiment == Experiment::fig2b || experiment == Experiment::fig2c;
  if (grid) {
    if (d_list.empty()) fail("d_list must not be empty");
    if (ratios.empty()) fail("ratios must not be empty");
    for (int v : d_list) if (v < k) fail("every d in d_list must be >= k");
    for (double r : ratios) if (!(r > 0.0)) fail("ratios must be positive");
  } else if (d < k) {
    fail("d must be >= k");
  }
  if (experiment != Experiment::train || data_path.empty()) {
    if (k < 2) fail("k must be >= 2 to build a teacher");
    if (!(sigma_min > 0.0) || sigma_max < sigma_min) fail("need 0 < sigma_min <= sigma_max");
  }
  if (n < 1) fail("n must be >= 1");
  if (!(nu >= 0.0)) fail("nu must be >= 0");
  if (!(eta > 0.0)) fail("eta must be > 0");
  if (iters < 1) fail("iters must be >= 1");
  if (grad_tol < 0.0) fail("grad_tol must be >= 0");
  if (record_every < 1) fail("record_every must be >= 1");
  if (!(warm_radius > 0.0)) fail("warm_radius must be > 0");
  if (trials < 1) fail("trials must be >= 1");
  if (experiment == Experiment::check_theory) {
    if (theory_n < static_cast<long long>(d) * k) fail("theory_n must be >= d*k");
    if (probes < 1 || lipschitz_pairs < 1 || conc_trials < 1) fail("probe counts must be >= 1");
    if (!(probe_radius > 0.0) || probe_radius > 0.5) fail("probe_radius must lie in (0, 0.5]");
    if (n_mc < 10000 || n_mc_ref < 10000) fail("n_mc and n_mc_ref must be >= 10000");
    if (conc_n.size() < 4) fail("conc_n needs at least 4 values");
  }
}

void apply_config_text(ExperimentConfig& config, std::istream& in) {
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    for (std::size_t i = 1; i < view.size(); ++i) {
      if (view[i] == '#' && (view[i - 1] == ' ' || view[i - 1] == '\t')) {
        view = view.substr(0, i);
        break;
      }
    }
    view = trim(view);
    if (view.empty() || view.front() == '#') continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) {
      throw UsageError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    config.set(trim(view.substr(0, eq)), view.substr(eq + 1));
  }
}

void apply_config_file(ExperimentConfig& config, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  apply_config_text(config, in);
}

ExperimentConfig parse_config_echo(std::istream& in) {
  ExperimentConfig config;
  std::string line;
  bool inside = false, seen = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] != '#') break;
    std::string_view body = trim(std::string_view(line).substr(1));
    if (body == kConfigBegin) {
      inside = true;
      seen = true;
      continue;
    }
    if (body == kConfigEnd) break;
    if (!inside) continue;
    const auto eq = body.find(" = ");
    if (eq == std::string_view::npos) {
      // "out = " style lines with empty value lose the trailing space to trim.
      const auto bare = body.find(" =");
      if (bare == std::string_view::npos) throw IoError("malformed config echo line: " + line);
      config.set(body.substr(0, bare), "");
      continue;
    }
    config.set(body.substr(0, eq), body.substr(eq + 3));
  }
  if (!seen) throw IoError("no config echo found in preamble");
  return config;
}

}  // namespace relu_recover
