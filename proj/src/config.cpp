#include "fdrelay/harness.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace fdrelay {

namespace {

[[noreturn]] void bad_key(std::string_view key, const std::string& why) {
  throw std::invalid_argument("config key '" + std::string(key) + "': " + why);
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_list(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '[' && s.back() == ']') s = trim(s.substr(1, s.size() - 2));
  std::vector<std::string_view> out;
  if (s.empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto comma = s.find(',', start);
    out.push_back(trim(s.substr(start, comma == std::string_view::npos ? s.npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

double to_double(std::string_view key, std::string_view text) {
  text = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    bad_key(key, "'" + std::string(text) + "' is not a number");
  }
  if (!std::isfinite(v)) bad_key(key, "must be finite");
  return v;
}

long long to_integer(std::string_view key, std::string_view text) {
  text = trim(text);
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    bad_key(key, "'" + std::string(text) + "' is not an integer");
  }
  return v;
}

int to_count(std::string_view key, std::string_view text, int min) {
  const long long v = to_integer(key, text);
  if (v < min || v > 1'000'000'000) bad_key(key, "must be >= " + std::to_string(min));
  return static_cast<int>(v);
}

std::vector<double> to_doubles(std::string_view key, std::string_view text) {
  std::vector<double> out;
  for (auto item : split_list(text)) out.push_back(to_double(key, item));
  return out;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_list(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + fmt(v[i]);
  return s;
}

std::vector<double> range(double first, double last, double step) {
  std::vector<double> v;
  for (int i = 0; first + i * step <= last + 1e-9; ++i) v.push_back(first + i * step);
  return v;
}

bool is_integral(double v) { return std::floor(v) == v; }

void flatten_json(const nlohmann::json& j, const std::string& prefix,
                  std::vector<std::pair<std::string, std::string>>& out) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it) {
      flatten_json(it.value(), prefix.empty() ? it.key() : prefix + "_" + it.key(), out);
    }
    return;
  }
  auto scalar = [](const nlohmann::json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_float()) return fmt(v.get<double>());
    return v.dump();
  };
  if (j.is_array()) {
    std::string s;
    for (std::size_t i = 0; i < j.size(); ++i) s += (i ? "," : "") + scalar(j[i]);
    out.emplace_back(prefix, s);
  } else {
    out.emplace_back(prefix, scalar(j));
  }
}

}  // namespace

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

std::string_view to_string(Experiment e) {
  switch (e) {
    case Experiment::kTrainingSweep: return "training_sweep";
    case Experiment::kInrSweep: return "inr_sweep";
    case Experiment::kSnrSweep: return "snr_sweep";
    case Experiment::kContour: return "contour";
    case Experiment::kAntennaSweep: return "antenna_sweep";
    case Experiment::kApproxContour: return "approx_contour";
  }
  return "?";
}

std::optional<Experiment> experiment_from_string(std::string_view name) {
  std::string key(trim(name));
  std::replace(key.begin(), key.end(), '-', '_');
  for (auto e : {Experiment::kTrainingSweep, Experiment::kInrSweep, Experiment::kSnrSweep,
                 Experiment::kContour, Experiment::kAntennaSweep, Experiment::kApproxContour}) {
    if (key == to_string(e)) return e;
  }
  return std::nullopt;
}

void ExperimentConfig::validate() const {
  if (trials < 1) bad_key("trials", "must be >= 1");
  if (n_s < 1) bad_key("n_s", "must be >= 1");
  if (n_r < 1) bad_key("n_r", "must be >= 1");
  if (m_r < 1) bad_key("m_r", "must be >= 1");
  if (m_d < 1) bad_key("m_d", "must be >= 1");
  if (train_len < 1) bad_key("train_len", "must be >= 1");
  if (workers < 0) bad_key("workers", "must be >= 0");
  if (db_to_linear(kappa_db) >= 1.0) bad_key("kappa_db", "must be < 0 dB");
  if (db_to_linear(beta_db) >= 1.0) bad_key("beta_db", "must be < 0 dB");
  if (tau_grid.empty()) bad_key("tau_grid", "must not be empty");
  for (double t : tau_grid) {
    if (!(t > 0.0 && t < 1.0)) bad_key("tau_grid", "values must lie in (0, 1)");
  }
  try {
    gp.validate();
  } catch (const std::invalid_argument& e) {
    bad_key("gp", e.what());
  }

  const bool contour =
      experiment == Experiment::kContour || experiment == Experiment::kApproxContour;
  if (contour) {
    if (rho_r_db_values.empty()) bad_key("rho_r_db_values", "must not be empty");
    if (eta_r_db_values.empty()) bad_key("eta_r_db_values", "must not be empty");
  } else if (sweep_values.empty()) {
    bad_key("sweep_values", "must not be empty");
  }
  if (experiment != Experiment::kApproxContour && schemes.empty()) {
    bad_key("schemes", "must not be empty");
  }
  for (double v : sweep_values) {
    switch (experiment) {
      case Experiment::kTrainingSweep:
        if (v < 1.0 || !is_integral(v)) bad_key("sweep_values", "training lengths must be integers >= 1");
        break;
      case Experiment::kAntennaSweep:
        if (v < 1.0 || v > antenna_total - 1 || !is_integral(v)) {
          bad_key("sweep_values", "antenna counts must be integers in [1, antenna_total - 1]");
        }
        break;
      default:
        break;
    }
  }
  if (experiment == Experiment::kApproxContour && (n_s != n_r || m_r != m_d)) {
    bad_key("n_s", "the approximation needs n_s = n_r and m_r = m_d");
  }
}

SystemParams ExperimentConfig::params() const {
  SystemParams p;
  p.rho_r = db_to_linear(rho_r_db);
  p.rho_d = db_to_linear(rho_r_db - rho_ratio_db);
  p.eta_r = db_to_linear(eta_r_db);
  p.eta_d = db_to_linear(eta_d_db);
  p.kappa = db_to_linear(kappa_db);
  p.beta = db_to_linear(beta_db);
  p.n_s = n_s;
  p.n_r = n_r;
  p.m_r = m_r;
  p.m_d = m_d;
  p.train_len = train_len;
  return p;
}

SystemParams ExperimentConfig::params_at(double value, double value2) const {
  ExperimentConfig c = *this;
  switch (experiment) {
    case Experiment::kTrainingSweep:
      c.train_len = static_cast<int>(value);
      break;
    case Experiment::kInrSweep:
      c.eta_r_db = value;
      break;
    case Experiment::kSnrSweep:
      c.rho_r_db = value;
      break;
    case Experiment::kContour:
    case Experiment::kApproxContour:
      c.rho_r_db = value;
      c.eta_r_db = value2;
      break;
    case Experiment::kAntennaSweep:
      c.n_s = c.n_r = static_cast<int>(value);
      c.m_r = c.m_d = antenna_total - static_cast<int>(value);
      break;
  }
  return c.params();
}

std::vector<std::pair<std::string, std::string>> ExperimentConfig::to_settings() const {
  std::string scheme_list;
  for (std::size_t i = 0; i < schemes.size(); ++i) {
    scheme_list += (i ? "," : "") + std::string(to_string(schemes[i]));
  }
  return {
      {"experiment", std::string(to_string(experiment))},
      {"rho_r_db", fmt(rho_r_db)},
      {"rho_ratio_db", fmt(rho_ratio_db)},
      {"eta_r_db", fmt(eta_r_db)},
      {"eta_d_db", fmt(eta_d_db)},
      {"kappa_db", fmt(kappa_db)},
      {"beta_db", fmt(beta_db)},
      {"n_s", std::to_string(n_s)},
      {"n_r", std::to_string(n_r)},
      {"m_r", std::to_string(m_r)},
      {"m_d", std::to_string(m_d)},
      {"train_len", std::to_string(train_len)},
      {"sweep_values", fmt_list(sweep_values)},
      {"schemes", scheme_list},
      {"trials", std::to_string(trials)},
      {"seed", std::to_string(seed)},
      {"tau_grid", fmt_list(tau_grid)},
      {"gp_sigma", fmt(gp.sigma)},
      {"gp_nu", fmt(gp.nu)},
      {"gp_eps", fmt(gp.eps_stop)},
      {"gp_max_outer_iters", std::to_string(gp.max_outer_iters)},
      {"out_path", out_path},
      {"rho_r_db_values", fmt_list(rho_r_db_values)},
      {"eta_r_db_values", fmt_list(eta_r_db_values)},
      {"antenna_total", std::to_string(antenna_total)},
      {"workers", std::to_string(workers)},
  };
}

ExperimentConfig default_config(Experiment e, bool paper_scale) {
  ExperimentConfig c;
  c.experiment = e;
  c.rho_r_db_values = range(0.0, 40.0, 5.0);
  c.eta_r_db_values = range(0.0, 120.0, 15.0);
  switch (e) {
    case Experiment::kTrainingSweep:
      c.sweep_values = paper_scale ? std::vector<double>{1, 2, 5, 10, 20, 50, 100}
                                   : std::vector<double>{1, 5, 50};
      c.schemes = {Scheme::kTco2Ic};
      break;
    case Experiment::kInrSweep:
      c.sweep_values = range(0.0, 100.0, paper_scale ? 10.0 : 20.0);
      c.schemes = {Scheme::kTco2Ic, Scheme::kTco2, Scheme::kTco1Ic, Scheme::kOhd};
      break;
    case Experiment::kSnrSweep:
      c.eta_r_db = 20.0;
      c.sweep_values = range(0.0, 40.0, paper_scale ? 5.0 : 10.0);
      c.schemes = {Scheme::kTco2Ic, Scheme::kOhd};
      break;
    case Experiment::kContour:
      c.schemes = {Scheme::kTco2Ic};
      break;
    case Experiment::kAntennaSweep:
      c.eta_r_db = 30.0;
      c.sweep_values = {1, 2, 3, 4, 5, 6};
      c.schemes = {Scheme::kTco2Ic, Scheme::kOhd};
      break;
    case Experiment::kApproxContour:
      c.trials = 1;
      break;
  }
  if (paper_scale) {
    if (e != Experiment::kApproxContour) c.trials = e == Experiment::kContour ? 250 : 100;
    c.tau_grid = range(0.1, 0.9, 0.1);
  }
  return c;
}

void apply_setting(ExperimentConfig& cfg, std::string_view raw_key, std::string_view value) {
  const std::string key(trim(raw_key));
  const std::string_view v = trim(value);
  if (key == "experiment") {
    const auto e = experiment_from_string(v);
    if (!e) bad_key(key, "unknown experiment '" + std::string(v) + "'");
    cfg.experiment = *e;
  } else if (key == "rho_r_db") {
    cfg.rho_r_db = to_double(key, v);
  } else if (key == "rho_ratio_db") {
    cfg.rho_ratio_db = to_double(key, v);
  } else if (key == "eta_r_db") {
    cfg.eta_r_db = to_double(key, v);
  } else if (key == "eta_d_db") {
    cfg.eta_d_db = to_double(key, v);
  } else if (key == "kappa_db") {
    cfg.kappa_db = to_double(key, v);
    if (db_to_linear(cfg.kappa_db) >= 1.0) bad_key(key, "must be < 0 dB");
  } else if (key == "beta_db") {
    cfg.beta_db = to_double(key, v);
    if (db_to_linear(cfg.beta_db) >= 1.0) bad_key(key, "must be < 0 dB");
  } else if (key == "n" || key == "nt") {
    cfg.n_s = cfg.n_r = to_count(key, v, 1);
  } else if (key == "m" || key == "mr") {
    cfg.m_r = cfg.m_d = to_count(key, v, 1);
  } else if (key == "n_s") {
    cfg.n_s = to_count(key, v, 1);
  } else if (key == "n_r") {
    cfg.n_r = to_count(key, v, 1);
  } else if (key == "m_r") {
    cfg.m_r = to_count(key, v, 1);
  } else if (key == "m_d") {
    cfg.m_d = to_count(key, v, 1);
  } else if (key == "train_len") {
    cfg.train_len = to_count(key, v, 1);
  } else if (key == "sweep_values") {
    cfg.sweep_values = to_doubles(key, v);
  } else if (key == "schemes") {
    cfg.schemes.clear();
    for (auto item : split_list(v)) {
      if (!item.empty() && (item.front() == '"' || item.front() == '\'')) {
        item = item.substr(1, item.size() - 2);
      }
      const auto s = scheme_from_string(item);
      if (!s) bad_key(key, "unknown scheme '" + std::string(item) + "'");
      cfg.schemes.push_back(*s);
    }
  } else if (key == "trials") {
    cfg.trials = to_count(key, v, 1);
  } else if (key == "seed") {
    std::uint64_t s = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), s);
    if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) {
      bad_key(key, "'" + std::string(v) + "' is not an unsigned 64-bit integer");
    }
    cfg.seed = s;
  } else if (key == "tau_grid") {
    cfg.tau_grid = to_doubles(key, v);
    for (double t : cfg.tau_grid) {
      if (!(t > 0.0 && t < 1.0)) bad_key(key, "values must lie in (0, 1)");
    }
  } else if (key == "gp_sigma") {
    cfg.gp.sigma = to_double(key, v);
  } else if (key == "gp_nu") {
    cfg.gp.nu = to_double(key, v);
  } else if (key == "gp_eps") {
    cfg.gp.eps_stop = to_double(key, v);
  } else if (key == "gp_max_outer_iters") {
    cfg.gp.max_outer_iters = to_count(key, v, 1);
  } else if (key == "out_path") {
    cfg.out_path = std::string(v);
  } else if (key == "rho_r_db_values") {
    cfg.rho_r_db_values = to_doubles(key, v);
  } else if (key == "eta_r_db_values") {
    cfg.eta_r_db_values = to_doubles(key, v);
  } else if (key == "antenna_total") {
    cfg.antenna_total = to_count(key, v, 2);
  } else if (key == "workers") {
    cfg.workers = to_count(key, v, 0);
  } else {
    bad_key(key, "unknown key");
  }
}

std::vector<std::pair<std::string, std::string>> read_settings(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();

  std::vector<std::pair<std::string, std::string>> out;
  if (trim(text).substr(0, 1) == "{") {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw std::invalid_argument("config file '" + path + "': " + e.what());
    }
    flatten_json(j, "", out);
    return out;
  }

  std::istringstream lines(text);
  std::string line;
  int lineno = 0;
  while (std::getline(lines, line)) {
    ++lineno;
    std::string_view s = line;
    if (const auto hash = s.find('#'); hash != s.npos) s = s.substr(0, hash);
    s = trim(s);
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == s.npos) {
      throw std::invalid_argument("config file '" + path + "' line " + std::to_string(lineno) +
                                  ": expected key = value");
    }
    std::string_view value = trim(s.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    }
    out.emplace_back(std::string(trim(s.substr(0, eq))), std::string(value));
  }
  return out;
}

ExperimentConfig parse_config(const std::string& path, std::optional<Experiment> experiment,
                              bool paper_scale) {
  const auto settings = read_settings(path);
  Experiment e = Experiment::kInrSweep;
  for (const auto& [k, v] : settings) {
    if (k == "experiment") {
      const auto parsed = experiment_from_string(v);
      if (!parsed) bad_key(k, "unknown experiment '" + v + "'");
      e = *parsed;
    }
  }
  if (experiment) e = *experiment;
  ExperimentConfig cfg = default_config(e, paper_scale);
  for (const auto& [k, v] : settings) {
    if (k != "experiment") apply_setting(cfg, k, v);
  }
  return cfg;
}

}  // namespace fdrelay
