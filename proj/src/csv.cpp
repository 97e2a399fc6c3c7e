#include "fdrelay/harness.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace fdrelay {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17e", v);
  return buf;
}

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_num(const std::string& s, int lineno) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || *end != '\0') {
    throw std::runtime_error("csv line " + std::to_string(lineno) + ": bad number '" + s + "'");
  }
  return v;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << content;
  out.flush();
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

}  // namespace

std::vector<SummaryRow> summarize(const std::vector<TrialRecord>& records) {
  std::vector<SummaryRow> rows;
  std::map<std::tuple<double, double, std::string>, std::size_t> index;
  std::vector<std::vector<const TrialRecord*>> members;
  for (const auto& r : records) {
    const auto key = std::make_tuple(r.sweep_value, r.sweep_value_2, r.scheme);
    auto [it, fresh] = index.emplace(key, rows.size());
    if (fresh) {
      SummaryRow s;
      s.sweep_value = r.sweep_value;
      s.sweep_value_2 = r.sweep_value_2;
      s.scheme = r.scheme;
      rows.push_back(s);
      members.emplace_back();
    }
    members[it->second].push_back(&r);
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& m = members[i];
    const double n = static_cast<double>(m.size());
    double sl = 0.0;
    double su = 0.0;
    for (const auto* r : m) {
      sl += r->rate_lower;
      su += r->rate_upper;
    }
    rows[i].count = static_cast<int>(m.size());
    rows[i].mean_lower = sl / n;
    rows[i].mean_upper = su / n;
    if (m.size() > 1) {
      double vl = 0.0;
      double vu = 0.0;
      for (const auto* r : m) {
        vl += (r->rate_lower - rows[i].mean_lower) * (r->rate_lower - rows[i].mean_lower);
        vu += (r->rate_upper - rows[i].mean_upper) * (r->rate_upper - rows[i].mean_upper);
      }
      rows[i].std_lower = std::sqrt(vl / (n - 1.0));
      rows[i].std_upper = std::sqrt(vu / (n - 1.0));
    }
  }
  return rows;
}

void write_csv(const std::vector<TrialRecord>& records, std::ostream& out, const CsvOptions& opts) {
  if (records.empty()) throw std::invalid_argument("emit_csv: no records");
  out << "trial_index,sweep_value,sweep_value_2,scheme,rate_lower,rate_upper,tau_star,zeta,converged";
  if (opts.include_wall_time) out << ",wall_time";
  out << '\n';
  for (const auto& r : records) {
    out << r.trial_index << ',' << num(r.sweep_value) << ',' << num(r.sweep_value_2) << ','
        << r.scheme << ',' << num(r.rate_lower) << ',' << num(r.rate_upper) << ','
        << num(r.tau_star) << ',' << num(r.zeta) << ',' << (r.converged ? 1 : 0);
    if (opts.include_wall_time) out << ',' << num(r.wall_time);
    out << '\n';
  }
  out << "# summary\n";
  out << "# sweep_value,sweep_value_2,scheme,count,mean_lower,std_lower,mean_upper,std_upper\n";
  for (const auto& s : summarize(records)) {
    out << "# " << num(s.sweep_value) << ',' << num(s.sweep_value_2) << ',' << s.scheme << ','
        << s.count << ',' << num(s.mean_lower) << ',' << num(s.std_lower) << ','
        << num(s.mean_upper) << ',' << num(s.std_upper) << '\n';
  }
}

void emit_csv(const std::vector<TrialRecord>& records, const std::string& path,
              const CsvOptions& opts) {
  std::ostringstream buf;
  write_csv(records, buf, opts);
  write_file(path, buf.str());
}

std::vector<TrialRecord> parse_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("'" + path + "' is empty");
  const auto header = split_row(line);
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
  for (const char* name : {"trial_index", "sweep_value", "sweep_value_2", "scheme", "rate_lower",
                           "rate_upper", "tau_star", "zeta", "converged"}) {
    if (!col.count(name)) throw std::runtime_error(std::string("csv header lacks ") + name);
  }

  std::vector<TrialRecord> out;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line.front() == '#') break;
    const auto cells = split_row(line);
    if (cells.size() != header.size()) {
      throw std::runtime_error("csv line " + std::to_string(lineno) + ": wrong field count");
    }
    TrialRecord r;
    r.trial_index = static_cast<int>(parse_num(cells[col["trial_index"]], lineno));
    r.sweep_value = parse_num(cells[col["sweep_value"]], lineno);
    r.sweep_value_2 = parse_num(cells[col["sweep_value_2"]], lineno);
    r.scheme = cells[col["scheme"]];
    r.rate_lower = parse_num(cells[col["rate_lower"]], lineno);
    r.rate_upper = parse_num(cells[col["rate_upper"]], lineno);
    r.tau_star = parse_num(cells[col["tau_star"]], lineno);
    r.zeta = parse_num(cells[col["zeta"]], lineno);
    r.converged = parse_num(cells[col["converged"]], lineno) != 0.0;
    if (col.count("wall_time")) r.wall_time = parse_num(cells[col["wall_time"]], lineno);
    out.push_back(std::move(r));
  }
  return out;
}

void emit_contour_csv(const ContourGrid& grid, const std::string& path) {
  std::ostringstream out;
  out << "rho_r_db,eta_r_db,scheme,mean_rate\n";
  for (std::size_t i = 0; i < grid.rho_r_db.size(); ++i) {
    for (std::size_t j = 0; j < grid.eta_r_db.size(); ++j) {
      out << num(grid.rho_r_db[i]) << ',' << num(grid.eta_r_db[j]) << ',' << grid.scheme << ','
          << num(grid.mean_rate[i][j]) << '\n';
    }
  }
  write_file(path, out.str());
}

void write_metadata(const ExperimentConfig& cfg, const std::vector<TrialRecord>& records,
                    double elapsed_seconds, const std::string& path) {
  nlohmann::ordered_json j;
  nlohmann::ordered_json c;
  for (const auto& [k, v] : cfg.to_settings()) c[k] = v;
  j["config"] = c;
  j["seed"] = cfg.seed;
  j["records"] = records.size();
  double busy = 0.0;
  for (const auto& r : records) busy += r.wall_time;
  j["elapsed_seconds"] = elapsed_seconds;
  j["summed_record_seconds"] = busy;
  j["workers"] = cfg.workers > 0 ? cfg.workers
                                 : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  write_file(path, j.dump(2) + "\n");
}

}  // namespace fdrelay
