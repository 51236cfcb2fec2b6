// CSV and JSON encodings of the library's results. Column names are part of
// the public contract with downstream plotting and must not change.

#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "detlab/bohm.hpp"
#include "detlab/eigen.hpp"
#include "detlab/evolve.hpp"
#include "detlab/limits.hpp"

namespace detlab::io {

inline constexpr std::string_view kTimeSeriesHeader = "t,norm_sq,rho_T_norm,rho_T_flux,rho_T_pointwise";
inline constexpr std::string_view kDensityHeader = "x,t,density";
inline constexpr std::string_view kOutcomesHeader = "index,detected,T,X";
inline constexpr std::string_view kHistogramHeader = "t_lo,t_hi,count,density";
inline constexpr std::string_view kEigenHeader = "k,re_c,im_c,R,A,re_lambda,im_lambda,abs_a,abs_b";
inline constexpr std::string_view kSpectrumHeader = "re_k,im_k,re_E,mu,residual";

/// Shortest decimal text that parses back to the same double; "nan" for NaN.
[[nodiscard]] std::string format_double(double x);

void write_timeseries_csv(std::ostream& os, const TimeSeries& ts);
void write_density_csv(std::ostream& os, const TimeSeries& ts);
void write_outcomes_csv(std::ostream& os, const std::vector<TrajectoryOutcome>& outcomes);
void write_histogram_csv(std::ostream& os, const std::vector<HistogramBin>& bins);
void write_eigen_table_csv(std::ostream& os, const std::vector<Eigenmode>& modes);
void write_spectrum_csv(std::ostream& os, const SpectrumResult& spectrum);

/// parameter,error,<auxiliary columns in report order>
void write_report_csv(std::ostream& os, const ConvergenceReport& report);

[[nodiscard]] nlohmann::ordered_json report_to_json(const ConvergenceReport& report);
[[nodiscard]] ConvergenceReport report_from_json(const nlohmann::ordered_json& j);

/// Minimal CSV reader used by tests and by consumers of the CSV contracts.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  [[nodiscard]] std::size_t column(std::string_view name) const;
  [[nodiscard]] std::vector<double> numeric(std::string_view name) const;
};

[[nodiscard]] CsvTable read_csv(std::istream& is);

/// 64-bit FNV-1a digest in hex, used for manifest checksums.
[[nodiscard]] std::string fnv1a64_hex(std::string_view bytes);

}  // namespace detlab::io
