// tqx: batch experiment harness over the transitory-queue library.
//
// Subcommands emit CSV tables (and self-rendered SVG plots) into an output
// directory resolved from --out, the config file, or TQX_OUTPUT_DIR.
// Exit codes: 0 success, 2 validation error, 3 optimizer non-convergence
// (output files are still written, flagged by their residual columns).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tq/tq.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitNonConvergence = 3;

// ---------------------------------------------------------------------------
// formatting and atomic file output
// ---------------------------------------------------------------------------

std::string fmt(double v) {
  if (std::isnan(v)) return "inf";  // never emit NaN
  if (std::isinf(v)) return v < 0 ? "-inf" : "inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string fmt(std::size_t v) { return std::to_string(v); }

void atomic_write(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string());
    out << content;
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string to_string() const {
    std::ostringstream out;
    for (std::size_t i = 0; i < header.size(); ++i)
      out << (i ? "," : "") << header[i];
    out << "\n";
    for (const auto& row : rows) {
      for (std::size_t i = 0; i < row.size(); ++i)
        out << (i ? "," : "") << row[i];
      out << "\n";
    }
    return out.str();
  }
};

// ---------------------------------------------------------------------------
// configuration
// ---------------------------------------------------------------------------

struct Config {
  std::string arrival_kind = "uniform01";
  std::string service_kind = "exponential";
  double rate = 1.0;                     // exponential
  double value = 1.0;                    // deterministic
  double shape = 1.0, scale = 1.0;       // gamma
  std::vector<tq::Atom> atoms;           // empirical
  std::vector<std::size_t> n_list = {100};
  double t = 0.5;
  std::vector<double> thresholds = {0.3};
  std::size_t reps = 10000;
  std::uint64_t seed = 1;
  std::size_t m = 200;
  std::string output_dir;
};

[[noreturn]] void config_error(const std::string& msg) {
  throw std::invalid_argument("config: " + msg);
}

void check_keys(const json& obj, const std::string& path,
                const std::set<std::string>& allowed) {
  if (!obj.is_object()) config_error(path + " must be an object");
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key()))
      config_error("unknown key " + path + "." + it.key());
}

double want_number(const json& v, const std::string& path) {
  if (!v.is_number()) config_error(path + " must be a number");
  return v.get<double>();
}

Config load_config(const std::string& file) {
  Config cfg;
  std::ifstream in(file);
  if (!in) config_error("cannot read " + file);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    config_error(std::string("invalid JSON: ") + e.what());
  }
  check_keys(doc, "$", {"arrival", "service", "n_list", "t", "thresholds",
                        "reps", "seed", "m", "output_dir"});
  if (doc.contains("arrival")) {
    check_keys(doc["arrival"], "$.arrival", {"kind"});
    cfg.arrival_kind = doc["arrival"].value("kind", "uniform01");
    if (cfg.arrival_kind != "uniform01")
      config_error("$.arrival.kind: only \"uniform01\" is supported");
  }
  if (doc.contains("service")) {
    const json& s = doc["service"];
    check_keys(s, "$.service", {"kind", "params"});
    cfg.service_kind = s.value("kind", "exponential");
    const json params = s.contains("params") ? s["params"] : json::object();
    if (cfg.service_kind == "exponential") {
      check_keys(params, "$.service.params", {"rate"});
      if (params.contains("rate"))
        cfg.rate = want_number(params["rate"], "$.service.params.rate");
    } else if (cfg.service_kind == "deterministic") {
      check_keys(params, "$.service.params", {"value"});
      if (params.contains("value"))
        cfg.value = want_number(params["value"], "$.service.params.value");
    } else if (cfg.service_kind == "gamma") {
      check_keys(params, "$.service.params", {"shape", "scale"});
      if (params.contains("shape"))
        cfg.shape = want_number(params["shape"], "$.service.params.shape");
      if (params.contains("scale"))
        cfg.scale = want_number(params["scale"], "$.service.params.scale");
    } else if (cfg.service_kind == "empirical") {
      check_keys(params, "$.service.params", {"atoms"});
      if (!params.contains("atoms") || !params["atoms"].is_array())
        config_error("$.service.params.atoms must be an array of [value, weight] pairs");
      for (std::size_t i = 0; i < params["atoms"].size(); ++i) {
        const json& a = params["atoms"][i];
        const std::string p =
            "$.service.params.atoms[" + std::to_string(i) + "]";
        if (!a.is_array() || a.size() != 2)
          config_error(p + " must be a [value, weight] pair");
        cfg.atoms.push_back(
            {want_number(a[0], p + "[0]"), want_number(a[1], p + "[1]")});
      }
    } else {
      config_error("$.service.kind: unknown kind \"" + cfg.service_kind +
                   "\"");
    }
  }
  if (doc.contains("n_list")) {
    if (!doc["n_list"].is_array()) config_error("$.n_list must be an array");
    cfg.n_list.clear();
    for (std::size_t i = 0; i < doc["n_list"].size(); ++i) {
      const double v = want_number(doc["n_list"][i],
                                   "$.n_list[" + std::to_string(i) + "]");
      if (v < 1.0) config_error("$.n_list entries must be >= 1");
      cfg.n_list.push_back(static_cast<std::size_t>(v));
    }
  }
  if (doc.contains("t")) cfg.t = want_number(doc["t"], "$.t");
  if (doc.contains("thresholds")) {
    if (!doc["thresholds"].is_array())
      config_error("$.thresholds must be an array");
    cfg.thresholds.clear();
    for (std::size_t i = 0; i < doc["thresholds"].size(); ++i)
      cfg.thresholds.push_back(want_number(
          doc["thresholds"][i], "$.thresholds[" + std::to_string(i) + "]"));
  }
  if (doc.contains("reps"))
    cfg.reps = static_cast<std::size_t>(want_number(doc["reps"], "$.reps"));
  if (doc.contains("seed"))
    cfg.seed = static_cast<std::uint64_t>(want_number(doc["seed"], "$.seed"));
  if (doc.contains("m"))
    cfg.m = static_cast<std::size_t>(want_number(doc["m"], "$.m"));
  if (doc.contains("output_dir")) {
    if (!doc["output_dir"].is_string())
      config_error("$.output_dir must be a string");
    cfg.output_dir = doc["output_dir"].get<std::string>();
  }
  return cfg;
}

tq::ServiceModel make_service(const Config& cfg) {
  if (cfg.service_kind == "exponential")
    return tq::ServiceModel::exponential(cfg.rate);
  if (cfg.service_kind == "deterministic")
    return tq::ServiceModel::deterministic(cfg.value);
  if (cfg.service_kind == "gamma")
    return tq::ServiceModel::gamma(cfg.shape, cfg.scale);
  if (cfg.service_kind == "empirical")
    return tq::ServiceModel::empirical(cfg.atoms);
  throw std::invalid_argument("unknown service kind: " + cfg.service_kind);
}

fs::path resolve_out_dir(const std::string& flag_out, const Config& cfg) {
  std::string dir = flag_out;
  if (dir.empty()) dir = cfg.output_dir;
  if (dir.empty())
    if (const char* env = std::getenv("TQX_OUTPUT_DIR")) dir = env;
  if (dir.empty()) dir = ".";
  fs::create_directories(dir);
  return dir;
}

std::vector<double> linspace(double lo, double hi, std::size_t count) {
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i)
    out[i] = lo + (hi - lo) * static_cast<double>(i) /
                      static_cast<double>(count - 1);
  return out;
}

// ---------------------------------------------------------------------------
// SVG rendering
// ---------------------------------------------------------------------------

struct Series {
  std::string label;
  std::vector<std::pair<double, double>> points;
};

std::string render_svg(const std::vector<Series>& series,
                       const std::string& x_label,
                       const std::string& y_label) {
  const double width = 800.0, height = 600.0;
  const double left = 70.0, right = 620.0, top = 40.0, bottom = 555.0;
  double x_lo = tq::kInf, x_hi = -tq::kInf, y_lo = tq::kInf, y_hi = -tq::kInf;
  for (const auto& s : series)
    for (const auto& [x, y] : s.points) {
      x_lo = std::min(x_lo, x);
      x_hi = std::max(x_hi, x);
      y_lo = std::min(y_lo, y);
      y_hi = std::max(y_hi, y);
    }
  if (!(x_lo < x_hi)) {
    x_lo -= 1.0;
    x_hi += 1.0;
  }
  if (!(y_lo < y_hi)) {
    y_lo -= 1.0;
    y_hi += 1.0;
  }
  auto sx = [&](double x) {
    return left + (right - left) * (x - x_lo) / (x_hi - x_lo);
  };
  auto sy = [&](double y) {
    return bottom - (bottom - top) * (y - y_lo) / (y_hi - y_lo);
  };
  auto coord = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return std::string(buf);
  };
  auto tick_label = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return std::string(buf);
  };
  static const std::array<const char*, 8> palette = {
      "#1f77b4", "#d62728", "#2ca02c", "#9467bd",
      "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" "
         "height=\"600\" viewBox=\"0 0 800 600\">\n";
  out << "<rect width=\"800\" height=\"600\" fill=\"white\"/>\n";
  // axes
  out << "<line x1=\"" << coord(left) << "\" y1=\"" << coord(bottom)
      << "\" x2=\"" << coord(right) << "\" y2=\"" << coord(bottom)
      << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << coord(left) << "\" y1=\"" << coord(top)
      << "\" x2=\"" << coord(left) << "\" y2=\"" << coord(bottom)
      << "\" stroke=\"black\"/>\n";
  const int ticks = 6;
  for (int i = 0; i < ticks; ++i) {
    const double fx = x_lo + (x_hi - x_lo) * i / (ticks - 1.0);
    const double fy = y_lo + (y_hi - y_lo) * i / (ticks - 1.0);
    out << "<line x1=\"" << coord(sx(fx)) << "\" y1=\"" << coord(bottom)
        << "\" x2=\"" << coord(sx(fx)) << "\" y2=\"" << coord(bottom + 6.0)
        << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << coord(sx(fx)) << "\" y=\"" << coord(bottom + 20.0)
        << "\" font-size=\"12\" text-anchor=\"middle\">" << tick_label(fx)
        << "</text>\n";
    out << "<line x1=\"" << coord(left - 6.0) << "\" y1=\"" << coord(sy(fy))
        << "\" x2=\"" << coord(left) << "\" y2=\"" << coord(sy(fy))
        << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << coord(left - 10.0) << "\" y=\"" << coord(sy(fy) + 4.0)
        << "\" font-size=\"12\" text-anchor=\"end\">" << tick_label(fy)
        << "</text>\n";
  }
  out << "<text x=\"" << coord(0.5 * (left + right)) << "\" y=\"590\" "
         "font-size=\"14\" text-anchor=\"middle\">"
      << x_label << "</text>\n";
  out << "<text x=\"18\" y=\"" << coord(0.5 * (top + bottom))
      << "\" font-size=\"14\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
      << coord(0.5 * (top + bottom)) << ")\">" << y_label << "</text>\n";
  // polylines
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = palette[s % palette.size()];
    out << "<polyline fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& [x, y] : series[s].points)
      out << coord(sx(x)) << "," << coord(sy(y)) << " ";
    out << "\"/>\n";
  }
  // legend
  for (std::size_t s = 0; s < series.size(); ++s) {
    const double ly = top + 18.0 * static_cast<double>(s);
    const char* color = palette[s % palette.size()];
    out << "<line x1=\"640\" y1=\"" << coord(ly) << "\" x2=\"668\" y2=\""
        << coord(ly) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"674\" y=\"" << coord(ly + 4.0)
        << "\" font-size=\"12\">" << series[s].label << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

// ---------------------------------------------------------------------------
// CSV reading (for the plot subcommand)
// ---------------------------------------------------------------------------

struct CsvData {
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;  // NaN = non-numeric cell
};

double parse_cell(const std::string& s) {
  if (s == "inf") return tq::kInf;
  if (s == "-inf") return -tq::kInf;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0')
    return std::numeric_limits<double>::quiet_NaN();
  return v;
}

CsvData read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read " + path.string());
  CsvData data;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (first) {
      data.header = cells;
      data.columns.resize(cells.size());
      first = false;
      continue;
    }
    for (std::size_t i = 0; i < data.columns.size(); ++i)
      data.columns[i].push_back(i < cells.size()
                                    ? parse_cell(cells[i])
                                    : std::numeric_limits<double>::quiet_NaN());
  }
  if (data.header.empty()) throw std::invalid_argument("empty CSV: " + path.string());
  return data;
}

// ---------------------------------------------------------------------------
// subcommand bodies
// ---------------------------------------------------------------------------

int run_simulate(const Config& cfg, const fs::path& out_dir, std::size_t n,
                 std::size_t reps, std::uint64_t seed, std::uint64_t stream) {
  auto model = make_service(cfg);
  auto arrival = tq::ArrivalModel::uniform01();
  auto fluid = tq::fluid_workload(arrival, 1.0 / model.mean());
  CsvTable table;
  table.header = {"rep", "s", "workload", "fluid"};
  tq::Rng rng({seed, stream});
  for (std::size_t r = 0; r < reps; ++r) {
    auto q = tq::simulate_realization(n, arrival, model,
                                      tq::OrderStatMethod::expo_ratio, rng);
    auto w = tq::workload_path(q);
    for (std::size_t j = 0; j < w.grid.size(); ++j)
      table.rows.push_back({fmt(r), fmt(w.grid[j]), fmt(w.values[j]),
                            fmt(fluid(w.grid[j]))});
  }
  atomic_write(out_dir / "simulate.csv", table.to_string());
  std::printf("wrote %s (%zu rows)\n", (out_dir / "simulate.csv").c_str(),
              table.rows.size());
  return kExitOk;
}

int run_rate_os(const fs::path& out_dir, std::vector<double> ts,
                std::vector<double> xs) {
  if (xs.empty()) xs = linspace(0.02, 0.98, 49);
  CsvTable table;
  table.header = {"t", "x_or_y", "rate", "argmin", "residual"};
  for (double t : ts)
    for (double x : xs) {
      auto r = tq::rate_os(t, x);
      table.rows.push_back(
          {fmt(t), fmt(x), fmt(r.value), "inf", fmt(r.residual)});
    }
  atomic_write(out_dir / "rate_os.csv", table.to_string());
  std::printf("wrote %s (%zu rows)\n", (out_dir / "rate_os.csv").c_str(),
              table.rows.size());
  return kExitOk;
}

int run_rate_offered(const Config& cfg, const fs::path& out_dir,
                     std::vector<double> ts, std::vector<double> ys) {
  auto model = make_service(cfg);
  if (ys.empty()) ys = linspace(-0.4, 0.9, 66);
  CsvTable table;
  table.header = {"t", "x_or_y", "rate", "argmin", "residual"};
  for (double t : ts)
    for (double y : ys) {
      auto r = tq::rate_offered(t, y, model);
      const std::string argmin =
          r.optimizer.empty() ? "inf" : fmt(r.optimizer[0]);
      table.rows.push_back(
          {fmt(t), fmt(y), fmt(r.value), argmin, fmt(r.residual)});
    }
  atomic_write(out_dir / "rate_offered.csv", table.to_string());
  std::printf("wrote %s (%zu rows)\n", (out_dir / "rate_offered.csv").c_str(),
              table.rows.size());
  return kExitOk;
}

int run_rate_workload(const Config& cfg, const fs::path& out_dir, double t,
                      std::vector<double> ys, std::size_t m) {
  auto model = make_service(cfg);
  if (ys.empty()) ys = linspace(0.05, 0.6, 12);
  tq::PathOptimizerConfig pcfg;
  pcfg.m = m;
  CsvTable table;
  table.header = {"t", "x_or_y", "rate", "argmin", "residual"};
  bool nonconverged = false;
  for (double y : ys) {
    auto r = tq::rate_workload(t, y, model, pcfg);
    nonconverged = nonconverged || r.upper_bound_only;
    const std::string argmin = std::isfinite(r.rate.value)
                                   ? fmt(r.psi.reflected_terminal())
                                   : "inf";
    table.rows.push_back(
        {fmt(t), fmt(y), fmt(r.rate.value), argmin, fmt(r.rate.residual)});
  }
  atomic_write(out_dir / "rate_workload.csv", table.to_string());
  std::printf("wrote %s (%zu rows)\n", (out_dir / "rate_workload.csv").c_str(),
              table.rows.size());
  if (nonconverged) {
    std::fprintf(stderr,
                 "warning: constrained path optimizer did not certify all "
                 "rows (see residual column)\n");
    return kExitNonConvergence;
  }
  return kExitOk;
}

int run_rate_increments(const fs::path& out_dir, double t,
                        const std::vector<double>& points,
                        const std::vector<double>& ys) {
  tq::Partition part(t, points);
  auto r = tq::rate_increments(part, ys);
  double total = 0.0;
  for (double y : ys) total += y;
  CsvTable table;
  table.header = {"t", "x_or_y", "rate", "argmin", "residual"};
  table.rows.push_back({fmt(t), fmt(total), fmt(r.value), "inf",
                        fmt(r.residual)});
  atomic_write(out_dir / "rate_increments.csv", table.to_string());
  std::printf("rate = %s\nwrote %s\n", fmt(r.value).c_str(),
              (out_dir / "rate_increments.csv").c_str());
  return kExitOk;
}

int run_oracle_os_tail(const fs::path& out_dir, std::size_t n, double t,
                       double a) {
  auto lp = tq::exact_os_tail(n, t, a);
  CsvTable table;
  table.header = {"n", "t", "a", "p", "log_p"};
  table.rows.push_back({fmt(n), fmt(t), fmt(a), fmt(lp.p), fmt(lp.log_p)});
  atomic_write(out_dir / "os_tail.csv", table.to_string());
  std::printf("p = %.6g\nwrote %s\n", lp.p,
              (out_dir / "os_tail.csv").c_str());
  return kExitOk;
}

int run_mc_tail(const Config& cfg, const fs::path& out_dir,
                std::vector<std::size_t> ns, double t, std::vector<double> ws,
                std::size_t reps, const std::string& method,
                const tq::TiltSpec& tilt, std::uint64_t seed,
                std::uint64_t stream) {
  auto model = make_service(cfg);
  auto arrival = tq::ArrivalModel::uniform01();
  if (ns.empty()) ns = cfg.n_list;
  if (ws.empty()) ws = cfg.thresholds;
  CsvTable table;
  table.header = {"n",     "t",     "threshold", "method", "p_hat",
                  "ci_lo", "ci_hi", "reps",      "theta1", "theta2"};
  std::uint64_t row_stream = stream;
  for (std::size_t n : ns)
    for (double w : ws) {
      tq::McEstimate e;
      if (method == "naive")
        e = tq::mc_workload_tail(n, arrival, model, t, w, reps,
                                 {seed, row_stream});
      else
        e = tq::is_workload_tail(n, arrival, model, t, w, tilt, reps,
                                 {seed, row_stream});
      ++row_stream;
      table.rows.push_back({fmt(n), fmt(t), fmt(w), method, fmt(e.p_hat),
                            fmt(e.ci_lo), fmt(e.ci_hi), fmt(e.replications),
                            fmt(e.theta1), fmt(e.theta2)});
      std::printf("n=%zu w=%s %s p_hat=%s [%s, %s]\n", n, fmt(w).c_str(),
                  method.c_str(), fmt(e.p_hat).c_str(), fmt(e.ci_lo).c_str(),
                  fmt(e.ci_hi).c_str());
    }
  atomic_write(out_dir / "mc_tail.csv", table.to_string());
  std::printf("wrote %s (%zu rows)\n", (out_dir / "mc_tail.csv").c_str(),
              table.rows.size());
  return kExitOk;
}

int run_ldp_slope(const fs::path& out_dir, std::vector<std::size_t> ns,
                  double t, double a) {
  if (ns.empty()) ns = {100, 500, 2000, 5000};
  const double rate_ref = tq::rate_os(t, a).value;
  auto rep = tq::ldp_slope(
      ns, [&](std::size_t n) { return tq::exact_os_tail(n, t, a).p; },
      rate_ref);
  CsvTable table;
  table.header = {"n", "neg_log_p_over_n", "rate_ref", "gap"};
  for (const auto& row : rep.rows)
    table.rows.push_back({fmt(row.n), fmt(row.neg_log_p_over_n),
                          fmt(rep.rate_ref), fmt(row.gap)});
  atomic_write(out_dir / "ldp_slope.csv", table.to_string());
  std::printf("gaps %s\nwrote %s (%zu rows, %zu excluded)\n",
              rep.gaps_decreasing ? "decreasing" : "not decreasing",
              (out_dir / "ldp_slope.csv").c_str(), table.rows.size(),
              rep.excluded.size());
  return kExitOk;
}

int run_bandwidth(const Config& cfg, const fs::path& out_dir, double w,
                  std::size_t n, std::vector<double> ps,
                  std::size_t t_points, std::size_t m) {
  auto model = make_service(cfg);
  if (ps.empty()) ps = {1e-1, 1e-2, 1e-3};
  tq::PathOptimizerConfig pcfg;
  pcfg.m = m;
  tq::BandwidthQuery q;
  q.w = w;
  q.n = n;
  q.model = model;
  q.cfg = pcfg;
  for (std::size_t i = 1; i <= t_points; ++i)
    q.t_grid.push_back(static_cast<double>(i) /
                       static_cast<double>(t_points));
  q.p = 1.0;
  q.validate();

  bool nonconverged = false;
  CsvTable audit;
  audit.header = {"t", "rate", "bound", "residual"};
  std::vector<tq::CriticalTimeRow> rows;
  for (double t : q.t_grid) {
    auto r = tq::rate_tail(t, w, model, pcfg);
    tq::CriticalTimeRow row;
    row.t = t;
    row.rate = r.rate.value;
    row.bound = std::exp(-static_cast<double>(n) * r.rate.value);
    row.residual = r.rate.residual;
    row.upper_bound_only = r.upper_bound_only;
    nonconverged = nonconverged || r.upper_bound_only;
    rows.push_back(row);
    audit.rows.push_back(
        {fmt(row.t), fmt(row.rate), fmt(row.bound), fmt(row.residual)});
  }
  CsvTable table;
  table.header = {"w", "n", "p", "t_star"};
  for (double p : ps) {
    double t_star = tq::kInf;
    for (const auto& row : rows)
      if (row.bound <= p) {
        t_star = row.t;
        break;
      }
    table.rows.push_back({fmt(w), fmt(n), fmt(p), fmt(t_star)});
    std::printf("p=%s t*=%s\n", fmt(p).c_str(), fmt(t_star).c_str());
  }
  atomic_write(out_dir / "bandwidth.csv", table.to_string());
  atomic_write(out_dir / "bandwidth_audit.csv", audit.to_string());
  std::printf("wrote %s and %s\n", (out_dir / "bandwidth.csv").c_str(),
              (out_dir / "bandwidth_audit.csv").c_str());
  if (nonconverged) {
    std::fprintf(stderr,
                 "warning: path optimizer could not certify every grid "
                 "point (see residual column)\n");
    return kExitNonConvergence;
  }
  return kExitOk;
}

int run_plot(const fs::path& out_dir, const std::string& input,
             std::string output, std::string x_col,
             std::vector<std::string> y_cols, std::string group_col) {
  CsvData data = read_csv(input);
  auto col_index = [&](const std::string& name) {
    for (std::size_t i = 0; i < data.header.size(); ++i)
      if (data.header[i] == name) return i;
    throw std::invalid_argument("no column named \"" + name + "\" in " +
                                input);
  };
  // sensible defaults for the rate-table schema; otherwise first column is
  // the abscissa and every other column a series
  if (x_col.empty()) {
    if (data.header.size() >= 3 && data.header[0] == "t" &&
        data.header[1] == "x_or_y") {
      x_col = "x_or_y";
      if (group_col.empty()) group_col = "t";
      if (y_cols.empty()) y_cols = {"rate"};
    } else {
      x_col = data.header.front();
    }
  }
  if (y_cols.empty())
    for (const auto& name : data.header)
      if (name != x_col && name != group_col) y_cols.push_back(name);

  const std::size_t xi = col_index(x_col);
  std::vector<Series> series;
  const std::size_t nrows = data.columns[xi].size();
  if (!group_col.empty()) {
    const std::size_t gi = col_index(group_col);
    for (const auto& y_name : y_cols) {
      const std::size_t yi = col_index(y_name);
      std::vector<double> groups;
      for (double g : data.columns[gi])
        if (std::find(groups.begin(), groups.end(), g) == groups.end())
          groups.push_back(g);
      for (double g : groups) {
        Series s;
        s.label = (y_cols.size() > 1 ? y_name + ", " : std::string()) +
                  group_col + "=" + fmt(g);
        for (std::size_t r = 0; r < nrows; ++r) {
          const double x = data.columns[xi][r], y = data.columns[yi][r];
          if (data.columns[gi][r] == g && std::isfinite(x) &&
              std::isfinite(y))
            s.points.push_back({x, y});
        }
        if (!s.points.empty()) series.push_back(std::move(s));
      }
    }
  } else {
    for (const auto& y_name : y_cols) {
      const std::size_t yi = col_index(y_name);
      Series s;
      s.label = y_name;
      for (std::size_t r = 0; r < nrows; ++r) {
        const double x = data.columns[xi][r], y = data.columns[yi][r];
        if (std::isfinite(x) && std::isfinite(y)) s.points.push_back({x, y});
      }
      if (!s.points.empty()) series.push_back(std::move(s));
    }
  }
  if (series.empty())
    throw std::invalid_argument("no finite data to plot in " + input);
  if (output.empty())
    output = (out_dir / (fs::path(input).stem().string() + ".svg")).string();
  atomic_write(output, render_svg(series, x_col, y_cols.size() == 1
                                                    ? y_cols.front()
                                                    : "value"));
  std::printf("wrote %s (%zu series)\n", output.c_str(), series.size());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  // the config file (if any) supplies defaults; explicit flags override it
  Config cfg;
  try {
    for (int i = 1; i + 1 < argc; ++i)
      if (std::string(argv[i]) == "--config") cfg = load_config(argv[i + 1]);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  }

  CLI::App app{"transitory-queue experiment harness"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path, out_flag;
  app.add_option("--config", config_path, "JSON experiment configuration");
  app.add_option("--out", out_flag,
                 "output directory (default: config output_dir, then "
                 "TQX_OUTPUT_DIR, then .)");

  // simulate
  auto* sim = app.add_subcommand(
      "simulate", "simulate workload paths with the fluid-limit overlay");
  std::size_t sim_n = cfg.n_list.front(), sim_reps = 5;
  std::uint64_t sim_seed = cfg.seed, sim_stream = 0;
  sim->add_option("--n", sim_n, "population size");
  sim->add_option("--reps", sim_reps, "number of sample paths");
  sim->add_option("--seed", sim_seed, "RNG seed");
  sim->add_option("--stream", sim_stream, "RNG stream");

  // rate family
  auto* rate = app.add_subcommand("rate", "rate-function tables");
  rate->require_subcommand(1);
  rate->fallthrough();
  std::vector<double> rate_ts, rate_xs, rate_ys;
  auto* rate_os_cmd =
      rate->add_subcommand("os", "arrival-epoch pointwise rate");
  rate_os_cmd->add_option("--t", rate_ts, "time points (repeatable)");
  rate_os_cmd->add_option("--x", rate_xs,
                          "levels (repeatable; default: sweep (0,1))");
  auto* rate_off_cmd =
      rate->add_subcommand("offered", "offered-load pointwise rate");
  rate_off_cmd->add_option("--t", rate_ts, "time points (repeatable)");
  rate_off_cmd->add_option("--y", rate_ys,
                           "levels (repeatable; default: sweep)");
  auto* rate_wl_cmd =
      rate->add_subcommand("workload", "workload rate via path optimization");
  double rate_wl_t = cfg.t;
  std::size_t rate_wl_m = cfg.m;
  rate_wl_cmd->add_option("--t", rate_wl_t, "time point");
  rate_wl_cmd->add_option("--y", rate_ys,
                          "levels (repeatable; default: sweep)");
  rate_wl_cmd->add_option("--m", rate_wl_m, "path grid segments");
  auto* rate_inc_cmd =
      rate->add_subcommand("increments", "finite-dimensional increment rate");
  double rate_inc_t = cfg.t;
  std::vector<double> inc_points, inc_ys;
  rate_inc_cmd->add_option("--t", rate_inc_t, "horizon");
  rate_inc_cmd->add_option("--point", inc_points,
                           "partition points (repeatable)")
      ->required();
  rate_inc_cmd->add_option("--y", inc_ys, "increment levels (repeatable)")
      ->required();

  // oracle
  auto* oracle = app.add_subcommand("oracle", "exact probability oracles");
  oracle->require_subcommand(1);
  oracle->fallthrough();
  auto* os_tail_cmd = oracle->add_subcommand(
      "os-tail", "exact lower tail of an arrival order statistic");
  std::size_t ot_n = cfg.n_list.front();
  double ot_t = cfg.t, ot_a = 0.3;
  os_tail_cmd->add_option("--n", ot_n, "population size");
  os_tail_cmd->add_option("--t", ot_t, "time point");
  os_tail_cmd->add_option("--a", ot_a, "level");

  // mc
  auto* mc = app.add_subcommand("mc", "Monte Carlo estimators");
  mc->require_subcommand(1);
  mc->fallthrough();
  auto* mc_tail_cmd = mc->add_subcommand(
      "tail", "workload exceedance probability (naive or tilted)");
  std::vector<std::size_t> mc_ns;
  std::vector<double> mc_ws;
  double mc_t = cfg.t;
  std::size_t mc_reps = cfg.reps;
  std::uint64_t mc_seed = cfg.seed, mc_stream = 0;
  std::string mc_method = "naive";
  double th1 = 0.0, th2 = 0.0, th3 = 0.0;
  double epoch_target = -1.0, service_target = -1.0;
  mc_tail_cmd->add_option("--n", mc_ns, "population sizes (repeatable)");
  mc_tail_cmd->add_option("--t", mc_t, "time point");
  mc_tail_cmd->add_option("--w", mc_ws, "thresholds (repeatable)");
  mc_tail_cmd->add_option("--reps", mc_reps, "replications");
  mc_tail_cmd->add_option("--method", mc_method, "naive or is")
      ->check(CLI::IsMember({"naive", "is"}));
  mc_tail_cmd->add_option("--theta1", th1, "first-block epoch tilt");
  mc_tail_cmd->add_option("--theta2", th2, "service tilt");
  mc_tail_cmd->add_option("--theta3", th3, "second-block epoch tilt");
  mc_tail_cmd->add_option("--epoch-target", epoch_target,
                          "derive epoch tilts from this target");
  mc_tail_cmd->add_option("--service-target", service_target,
                          "derive the service tilt from this target mean");
  mc_tail_cmd->add_option("--seed", mc_seed, "RNG seed");
  mc_tail_cmd->add_option("--stream", mc_stream, "RNG stream");

  // ldp-slope
  auto* slope_cmd = app.add_subcommand(
      "ldp-slope", "empirical decay rate against the reference rate");
  std::vector<std::size_t> slope_ns;
  double slope_t = cfg.t, slope_a = 0.3;
  slope_cmd->add_option("--n", slope_ns, "population sizes (repeatable)");
  slope_cmd->add_option("--t", slope_t, "time point");
  slope_cmd->add_option("--a", slope_a, "level");

  // bandwidth
  auto* bw_cmd = app.add_subcommand(
      "bandwidth", "critical time scale of the workload tail bound");
  double bw_w = cfg.thresholds.front();
  std::size_t bw_n = cfg.n_list.front(), bw_tpoints = 20,
              bw_m = std::min<std::size_t>(cfg.m, 60);
  std::vector<double> bw_ps;
  bw_cmd->add_option("--w", bw_w, "buffer level");
  bw_cmd->add_option("--n", bw_n, "population size");
  bw_cmd->add_option("--p", bw_ps, "target probabilities (repeatable)");
  bw_cmd->add_option("--t-points", bw_tpoints, "time grid resolution");
  bw_cmd->add_option("--m", bw_m, "path grid segments");

  // plot
  auto* plot_cmd =
      app.add_subcommand("plot", "render a CSV table as an SVG line plot");
  std::string plot_in, plot_out, plot_x, plot_group;
  std::vector<std::string> plot_ys;
  plot_cmd->add_option("--input", plot_in, "CSV file to plot")->required();
  plot_cmd->add_option("--output", plot_out, "SVG output path");
  plot_cmd->add_option("--x", plot_x, "abscissa column");
  plot_cmd->add_option("--y", plot_ys, "ordinate columns (repeatable)");
  plot_cmd->add_option("--group", plot_group,
                       "split series by this column's values");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    const fs::path out_dir = resolve_out_dir(out_flag, cfg);
    if (sim->parsed())
      return run_simulate(cfg, out_dir, sim_n, sim_reps, sim_seed, sim_stream);
    if (rate_os_cmd->parsed()) {
      if (rate_ts.empty()) rate_ts = {cfg.t};
      return run_rate_os(out_dir, rate_ts, rate_xs);
    }
    if (rate_off_cmd->parsed()) {
      if (rate_ts.empty()) rate_ts = {cfg.t};
      return run_rate_offered(cfg, out_dir, rate_ts, rate_ys);
    }
    if (rate_wl_cmd->parsed())
      return run_rate_workload(cfg, out_dir, rate_wl_t, rate_ys, rate_wl_m);
    if (rate_inc_cmd->parsed())
      return run_rate_increments(out_dir, rate_inc_t, inc_points, inc_ys);
    if (os_tail_cmd->parsed())
      return run_oracle_os_tail(out_dir, ot_n, ot_t, ot_a);
    if (mc_tail_cmd->parsed()) {
      tq::TiltSpec tilt{th1, th2, th3};
      if (epoch_target >= 0.0 || service_target >= 0.0) {
        auto model = make_service(cfg);
        tilt = tq::suggest_tilts(
            mc_t, epoch_target >= 0.0 ? epoch_target : mc_t,
            service_target >= 0.0 ? service_target : model.mean(), model);
      }
      return run_mc_tail(cfg, out_dir, mc_ns, mc_t, mc_ws, mc_reps, mc_method,
                         tilt, mc_seed, mc_stream);
    }
    if (slope_cmd->parsed())
      return run_ldp_slope(out_dir, slope_ns, slope_t, slope_a);
    if (bw_cmd->parsed())
      return run_bandwidth(cfg, out_dir, bw_w, bw_n, bw_ps, bw_tpoints, bw_m);
    if (plot_cmd->parsed())
      return run_plot(out_dir, plot_in, plot_out, plot_x, plot_ys, plot_group);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  }
  return kExitValidation;
}
