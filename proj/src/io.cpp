#include "detlab/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace detlab::io {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double parse_double(const std::string& s) {
  if (s == "nan" || s.empty()) return kNaN;
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double x = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), x);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw std::invalid_argument("not a number: '" + s + "'");
  }
  return x;
}

double json_number(const nlohmann::ordered_json& j) {
  if (j.is_null()) return kNaN;
  return j.get<double>();
}

nlohmann::ordered_json json_number_or_null(double x) {
  if (!std::isfinite(x)) return nullptr;
  return x;
}

}  // namespace

void write_timeseries_csv(std::ostream& os, const TimeSeries& ts) {
  os << kTimeSeriesHeader << '\n';
  const bool abr = ts.has_abr_columns();
  for (std::size_t i = 0; i < ts.times.size(); ++i) {
    os << format_double(ts.times[i]) << ',' << format_double(ts.norm_sq[i]) << ','
       << format_double(ts.rho_T_norm[i]) << ',' << format_double(abr ? ts.rho_T_flux[i] : kNaN) << ','
       << format_double(abr ? ts.rho_T_pointwise[i] : kNaN) << '\n';
  }
}

void write_density_csv(std::ostream& os, const TimeSeries& ts) {
  os << kDensityHeader << '\n';
  for (const auto& snap : ts.place_density) {
    for (std::size_t i = 0; i < snap.x.size(); ++i) {
      os << format_double(snap.x[i]) << ',' << format_double(snap.time) << ',' << format_double(snap.density[i])
         << '\n';
    }
  }
}

void write_outcomes_csv(std::ostream& os, const std::vector<TrajectoryOutcome>& outcomes) {
  os << kOutcomesHeader << '\n';
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const auto& o = outcomes[i];
    os << i << ',' << (o.detected ? 1 : 0) << ',' << format_double(o.detected ? o.detection_time : kNaN) << ','
       << format_double(o.detected ? o.detection_place : kNaN) << '\n';
  }
}

void write_histogram_csv(std::ostream& os, const std::vector<HistogramBin>& bins) {
  os << kHistogramHeader << '\n';
  for (const auto& b : bins) {
    os << format_double(b.lo) << ',' << format_double(b.hi) << ',' << b.count << ',' << format_double(b.density)
       << '\n';
  }
}

void write_eigen_table_csv(std::ostream& os, const std::vector<Eigenmode>& modes) {
  os << kEigenHeader << '\n';
  for (const auto& m : modes) {
    const auto ra = reflection_absorption(m);
    const bool soft = m.lambda.has_value();
    os << format_double(m.k.real()) << ',' << format_double(m.c.real()) << ',' << format_double(m.c.imag()) << ','
       << format_double(ra.R) << ',' << format_double(ra.A) << ','
       << format_double(soft ? m.lambda->real() : kNaN) << ',' << format_double(soft ? m.lambda->imag() : kNaN)
       << ',' << format_double(soft ? std::abs(m.a) : kNaN) << ',' << format_double(soft ? std::abs(m.b) : kNaN)
       << '\n';
  }
}

void write_spectrum_csv(std::ostream& os, const SpectrumResult& spectrum) {
  os << kSpectrumHeader << '\n';
  for (const auto& p : spectrum.points) {
    os << format_double(p.k.real()) << ',' << format_double(p.k.imag()) << ',' << format_double(p.energy.real())
       << ',' << format_double(p.mu) << ',' << format_double(p.residual) << '\n';
  }
}

void write_report_csv(std::ostream& os, const ConvergenceReport& report) {
  os << "parameter,error";
  for (const auto& [name, values] : report.auxiliary) os << ',' << name;
  os << '\n';
  for (std::size_t i = 0; i < report.parameters.size(); ++i) {
    os << format_double(report.parameters[i]) << ',' << format_double(report.errors[i]);
    for (const auto& [name, values] : report.auxiliary) os << ',' << format_double(values[i]);
    os << '\n';
  }
}

nlohmann::ordered_json report_to_json(const ConvergenceReport& report) {
  nlohmann::ordered_json j;
  j["sweep"] = report.sweep;
  j["parameter_name"] = report.parameter_name;
  j["parameters"] = report.parameters;
  j["errors"] = report.errors;
  auto aux = nlohmann::ordered_json::object();
  for (const auto& [name, values] : report.auxiliary) {
    auto arr = nlohmann::ordered_json::array();
    for (double v : values) arr.push_back(json_number_or_null(v));
    aux[name] = arr;
  }
  j["auxiliary"] = aux;
  auto scalars = nlohmann::ordered_json::object();
  for (const auto& [name, value] : report.scalars) scalars[name] = json_number_or_null(value);
  j["scalars"] = scalars;
  j["slope"] = report.slope ? nlohmann::ordered_json(*report.slope) : nlohmann::ordered_json(nullptr);
  j["slope_residual"] =
      report.slope_residual ? nlohmann::ordered_json(*report.slope_residual) : nlohmann::ordered_json(nullptr);
  j["verdict"] = to_string(report.verdict);
  j["limit_reached"] = report.limit_reached;
  j["limit_tolerance"] = report.limit_tolerance;
  return j;
}

ConvergenceReport report_from_json(const nlohmann::ordered_json& j) {
  ConvergenceReport r;
  r.sweep = j.at("sweep").get<std::string>();
  r.parameter_name = j.at("parameter_name").get<std::string>();
  r.parameters = j.at("parameters").get<std::vector<double>>();
  r.errors = j.at("errors").get<std::vector<double>>();
  for (const auto& [name, arr] : j.at("auxiliary").items()) {
    std::vector<double> values;
    for (const auto& v : arr) values.push_back(json_number(v));
    r.auxiliary.emplace_back(name, std::move(values));
  }
  for (const auto& [name, v] : j.at("scalars").items()) r.scalars[name] = json_number(v);
  if (!j.at("slope").is_null()) r.slope = j.at("slope").get<double>();
  if (!j.at("slope_residual").is_null()) r.slope_residual = j.at("slope_residual").get<double>();
  const auto verdict = j.at("verdict").get<std::string>();
  if (verdict == "converging") {
    r.verdict = Verdict::Converging;
  } else if (verdict == "non-converging") {
    r.verdict = Verdict::NonConverging;
  } else {
    throw std::invalid_argument("unknown verdict '" + verdict + "'");
  }
  r.limit_reached = j.at("limit_reached").get<bool>();
  r.limit_tolerance = j.at("limit_tolerance").get<double>();
  return r;
}

std::size_t CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw std::out_of_range("no CSV column '" + std::string(name) + "'");
}

std::vector<double> CsvTable::numeric(std::string_view name) const {
  const std::size_t c = column(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& row : rows) out.push_back(parse_double(row.at(c)));
  return out;
}

CsvTable read_csv(std::istream& is) {
  auto split = [](const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
  };
  CsvTable table;
  std::string line;
  if (!std::getline(is, line)) throw std::invalid_argument("empty CSV");
  table.header = split(line);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto cells = split(line);
    if (cells.size() != table.header.size()) throw std::invalid_argument("ragged CSV row");
    table.rows.push_back(std::move(cells));
  }
  return table;
}

std::string fnv1a64_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace detlab::io
