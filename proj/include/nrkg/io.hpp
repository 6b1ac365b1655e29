#pragma once

// Persistence: record CSV (fixed column order, shortest round-trip doubles),
// JSON summary, SVG log-log plots, energy series and full case dumps.

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "nrkg/errors.hpp"
#include "nrkg/expansion.hpp"
#include "nrkg/field_io.hpp"
#include "nrkg/fit.hpp"
#include "nrkg/sweep.hpp"

namespace nrkg {

/// Column order of the record CSV. Wall time is deliberately absent so that
/// identical configs give identical bytes.
inline const std::vector<std::string>& record_columns() {
  static const std::vector<std::string> cols{
      "eps",          "t",         "family",
      "A0",           "alpha",     "delta0",
      "u1_mode",      "data_path", "dim",
      "points",       "half_width", "formulation",
      "scheme",       "dt_kg",     "dt_v",
      "dt_w",         "first_order_error_L2", "second_order_error_L2",
      "energy_drift", "w_h2_growth", "w_growth_flag",
      "status",       "diagnostic"};
  return cols;
}

namespace detail {

inline std::string format_double(double x) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

inline double parse_double(std::string_view s, const std::string& where) {
  double x = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), x);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) {
    throw IoError(where, "cannot parse number '" + std::string(s) + "'");
  }
  return x;
}

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

/// Splits CSV text into rows of fields; quoted fields may hold commas,
/// doubled quotes and newlines.
inline std::vector<std::vector<std::string>> csv_parse(const std::string& text, const std::string& where) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (any || !field.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
      }
      row.clear();
      field.clear();
      any = false;
    } else {
      field += c;
      any = true;
    }
  }
  if (quoted) throw IoError(where, "unterminated quoted field");
  if (any || !field.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  out << text;
  if (!out) throw IoError(path.string(), "write failed");
}

}  // namespace detail

inline std::string records_to_csv(const std::vector<SweepRecord>& records) {
  if (records.empty()) throw ContractViolation("cannot emit an empty record list");
  std::string out;
  const auto& cols = record_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out += (i ? "," : "") + cols[i];
  out += '\n';
  using detail::format_double;
  for (const auto& r : records) {
    const std::vector<std::string> f{format_double(r.eps),
                                     format_double(r.t),
                                     to_string(r.data.family),
                                     format_double(r.data.A0),
                                     format_double(r.data.alpha),
                                     format_double(r.data.delta0),
                                     to_string(r.data.u1_mode),
                                     detail::csv_escape(r.data.path),
                                     std::to_string(r.grid.dim),
                                     std::to_string(r.grid.points),
                                     format_double(r.grid.half_width),
                                     to_string(r.formulation),
                                     to_string(r.scheme),
                                     format_double(r.dt_kg),
                                     format_double(r.dt_v),
                                     format_double(r.dt_w),
                                     format_double(r.first_order_error_L2),
                                     format_double(r.second_order_error_L2),
                                     format_double(r.energy_drift),
                                     format_double(r.w_h2_growth),
                                     r.w_growth_flag ? "1" : "0",
                                     to_string(r.status),
                                     detail::csv_escape(r.diagnostic)};
    for (std::size_t i = 0; i < f.size(); ++i) out += (i ? "," : "") + f[i];
    out += '\n';
  }
  return out;
}

inline std::vector<SweepRecord> records_from_csv(const std::string& text, const std::string& where = "<csv>") {
  const auto rows = detail::csv_parse(text, where);
  if (rows.empty()) throw IoError(where, "empty CSV");
  const auto& cols = record_columns();
  if (rows.front() != cols) throw IoError(where, "unexpected header (column order is fixed)");
  std::vector<SweepRecord> out;
  for (std::size_t k = 1; k < rows.size(); ++k) {
    const auto& f = rows[k];
    const std::string at = where + ":" + std::to_string(k + 1);
    if (f.size() != cols.size()) throw IoError(at, "expected " + std::to_string(cols.size()) + " fields");
    const auto num = [&](std::size_t i) { return detail::parse_double(f[i], at); };
    try {
      SweepRecord r;
      r.eps = num(0);
      r.t = num(1);
      r.data.family = parse_data_family(f[2]);
      r.data.A0 = num(3);
      r.data.alpha = num(4);
      r.data.delta0 = num(5);
      r.data.u1_mode = parse_u1_mode(f[6]);
      r.data.path = f[7];
      r.grid.dim = static_cast<int>(num(8));
      r.grid.points = static_cast<std::size_t>(num(9));
      r.grid.half_width = num(10);
      r.formulation = parse_formulation(f[11]);
      r.scheme = parse_kg_scheme(f[12]);
      r.dt_kg = num(13);
      r.dt_v = num(14);
      r.dt_w = num(15);
      r.first_order_error_L2 = num(16);
      r.second_order_error_L2 = num(17);
      r.energy_drift = num(18);
      r.w_h2_growth = num(19);
      r.w_growth_flag = f[20] == "1";
      r.status = parse_record_status(f[21]);
      r.diagnostic = f[22];
      out.push_back(std::move(r));
    } catch (const ConfigError& e) {
      throw IoError(at, e.what());
    }
  }
  return out;
}

inline void write_records_csv(const std::filesystem::path& path, const std::vector<SweepRecord>& records) {
  detail::write_text(path, records_to_csv(records));
}

inline std::vector<SweepRecord> read_records_csv(const std::filesystem::path& path) {
  return records_from_csv(detail::read_text(path), path.string());
}

struct NamedFit {
  FitSpec spec;
  FitResult result;
};

inline nlohmann::json fit_to_json(const NamedFit& f) {
  nlohmann::json j{{"name", f.spec.name},
                   {"abscissa", to_string(f.result.abscissa)},
                   {"response", f.result.response},
                   {"slope", f.result.slope},
                   {"intercept", f.result.intercept},
                   {"r_squared", f.result.r_squared},
                   {"points", f.result.points},
                   {"dropped", f.result.dropped}};
  if (f.spec.t) j["t"] = *f.spec.t;
  if (f.spec.eps) j["eps"] = *f.spec.eps;
  if (f.spec.family) j["family"] = to_string(*f.spec.family);
  if (f.spec.expect) {
    j["expect"] = {f.spec.expect->first, f.spec.expect->second};
    j["within_expected"] = f.result.slope >= f.spec.expect->first && f.result.slope <= f.spec.expect->second;
  }
  return j;
}

/// Structured summary of a sweep: counts by status, flagged w growth, fits
/// and any fit errors, total wall time.
inline nlohmann::json summary_json(const std::vector<SweepRecord>& records, const std::vector<NamedFit>& fits,
                                   const std::vector<std::pair<std::string, std::string>>& fit_errors = {}) {
  if (records.empty()) throw ContractViolation("cannot summarize an empty record list");
  std::map<std::string, std::size_t> by_status;
  std::size_t flagged = 0;
  double wall = 0.0;
  double max_drift = 0.0;
  for (const auto& r : records) {
    ++by_status[to_string(r.status)];
    flagged += r.w_growth_flag ? 1 : 0;
    wall += r.wall_time_s;
    if (r.valid()) max_drift = std::max(max_drift, r.energy_drift);
  }
  nlohmann::json j;
  j["records"] = records.size();
  j["by_status"] = by_status;
  j["w_growth_flagged"] = flagged;
  j["max_energy_drift_valid"] = max_drift;
  j["record_wall_time_s"] = wall;
  j["fits"] = nlohmann::json::array();
  for (const auto& f : fits) j["fits"].push_back(fit_to_json(f));
  j["fit_errors"] = nlohmann::json::array();
  for (const auto& [name, what] : fit_errors) j["fit_errors"].push_back({{"name", name}, {"error", what}});
  j["diagnostics"] = nlohmann::json::array();
  for (const auto& r : records) {
    if (!r.diagnostic.empty()) {
      j["diagnostics"].push_back({{"eps", r.eps}, {"t", r.t}, {"status", to_string(r.status)}, {"message", r.diagnostic}});
    }
  }
  return j;
}

inline void write_summary_json(const std::filesystem::path& path, const nlohmann::json& summary) {
  detail::write_text(path, summary.dump(2) + "\n");
}

struct PlotSpec {
  Abscissa abscissa = Abscissa::eps;
  std::string response = "second_order_error_L2";
  std::string title;
};

/// Log-log SVG: one <g class="series"> per eps (valid records with positive
/// response) and one <line class="fit"> per fit. Fits must share the plot's
/// abscissa and response.
inline std::string render_loglog_svg(const std::vector<SweepRecord>& records, const PlotSpec& plot,
                                     const std::vector<NamedFit>& fits) {
  if (records.empty()) throw ContractViolation("cannot plot an empty record list");
  for (const auto& f : fits) {
    detail::require(f.result.abscissa == plot.abscissa && f.result.response == plot.response,
                    "fit '" + f.spec.name + "' does not match the plot axes");
  }
  std::map<double, std::vector<std::pair<double, double>>, std::greater<>> series;
  for (const auto& r : records) {
    const double y = record_response(r, plot.response);
    const double x = abscissa_value(plot.abscissa, r.eps, r.t);
    if (!r.valid() || !(y > 0.0) || !(x > 0.0) || !std::isfinite(y)) continue;
    series[r.eps].emplace_back(x, y);
  }
  if (series.empty()) throw ContractViolation("no plottable records (all invalid or nonpositive)");

  double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
  for (const auto& [eps, pts] : series) {
    for (const auto& [x, y] : pts) {
      xmin = std::min(xmin, std::log10(x));
      xmax = std::max(xmax, std::log10(x));
      ymin = std::min(ymin, std::log10(y));
      ymax = std::max(ymax, std::log10(y));
    }
  }
  xmin = std::floor(xmin * 2.0) / 2.0 - 0.1;
  xmax = std::ceil(xmax * 2.0) / 2.0 + 0.1;
  ymin = std::floor(ymin) - 0.1;
  ymax = std::ceil(ymax) + 0.1;

  const double W = 720, H = 480, ml = 80, mr = 170, mt = 40, mb = 60;
  const auto px = [&](double lx) { return ml + (lx - xmin) / (xmax - xmin) * (W - ml - mr); };
  const auto py = [&](double ly) { return H - mb - (ly - ymin) / (ymax - ymin) * (H - mt - mb); };
  const auto num = detail::format_double;
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
    << ' ' << H << "\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  const std::string title =
      plot.title.empty() ? plot.response + " vs " + to_string(plot.abscissa) : plot.title;
  s << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << title << "</text>\n";
  s << "<g class=\"axes\" stroke=\"black\" fill=\"none\">\n";
  s << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << (W - ml - mr) << "\" height=\"" << (H - mt - mb)
    << "\"/>\n</g>\n";
  s << "<g class=\"ticks\" font-size=\"11\">\n";
  for (double d = std::ceil(ymin); d <= ymax; d += 1.0) {
    s << "<text x=\"" << ml - 6 << "\" y=\"" << py(d) + 4 << "\" text-anchor=\"end\">1e" << static_cast<int>(d)
      << "</text>\n";
  }
  for (double d = std::ceil(xmin * 2.0) / 2.0; d <= xmax; d += 0.5) {
    s << "<text x=\"" << px(d) << "\" y=\"" << H - mb + 16 << "\" text-anchor=\"middle\">" << num(std::pow(10.0, d))
      .substr(0, 7)
      << "</text>\n";
  }
  s << "<text x=\"" << (ml + W - mr) / 2 << "\" y=\"" << H - 18 << "\" text-anchor=\"middle\">"
    << to_string(plot.abscissa) << "</text>\n";
  s << "</g>\n";

  std::size_t c = 0;
  double legend_y = mt + 10;
  for (const auto& [eps, pts_in] : series) {
    auto pts = pts_in;
    std::sort(pts.begin(), pts.end());
    const char* color = palette[c++ % std::size(palette)];
    s << "<g class=\"series\" data-eps=\"" << num(eps) << "\" stroke=\"" << color << "\" fill=\"" << color << "\">\n";
    if (pts.size() > 1) {
      s << "<polyline fill=\"none\" points=\"";
      for (const auto& [x, y] : pts) s << px(std::log10(x)) << ',' << py(std::log10(y)) << ' ';
      s << "\"/>\n";
    }
    for (const auto& [x, y] : pts) {
      s << "<circle cx=\"" << px(std::log10(x)) << "\" cy=\"" << py(std::log10(y)) << "\" r=\"3.5\"/>\n";
    }
    s << "<text x=\"" << W - mr + 12 << "\" y=\"" << legend_y << "\" stroke=\"none\" font-size=\"12\">eps="
      << num(eps) << "</text>\n";
    s << "</g>\n";
    legend_y += 16;
  }
  for (const auto& f : fits) {
    double fx0 = INFINITY, fx1 = -INFINITY;
    for (const auto& r : records) {
      if (!fit_selects(f.spec, r)) continue;
      const double lx = std::log10(abscissa_value(plot.abscissa, r.eps, r.t));
      fx0 = std::min(fx0, lx);
      fx1 = std::max(fx1, lx);
    }
    if (!std::isfinite(fx0)) fx0 = xmin, fx1 = xmax;
    // log10 y = (intercept + slope ln x) / ln 10
    const auto fy = [&](double lx) { return (f.result.intercept + f.result.slope * lx * std::log(10.0)) / std::log(10.0); };
    s << "<line class=\"fit\" data-name=\"" << f.spec.name << "\" data-slope=\"" << num(f.result.slope) << "\" x1=\""
      << px(fx0) << "\" y1=\"" << py(fy(fx0)) << "\" x2=\"" << px(fx1) << "\" y2=\"" << py(fy(fx1))
      << "\" stroke=\"black\" stroke-dasharray=\"6,4\"/>\n";
    s << "<text x=\"" << W - mr + 12 << "\" y=\"" << legend_y << "\" font-size=\"12\">" << f.spec.name
      << " slope=" << num(f.result.slope).substr(0, 6) << "</text>\n";
    legend_y += 16;
  }
  s << "</svg>\n";
  return s.str();
}

inline void write_svg(const std::filesystem::path& path, const std::string& svg) { detail::write_text(path, svg); }

/// time,energy rows.
inline void write_energy_csv(const std::filesystem::path& path, const std::vector<double>& times,
                             const std::vector<double>& energies) {
  detail::require(times.size() == energies.size(), "time and energy lengths differ");
  if (times.empty()) throw ContractViolation("cannot emit an empty energy series");
  std::string out = "time,energy\n";
  for (std::size_t i = 0; i < times.size(); ++i) {
    out += detail::format_double(times[i]) + "," + detail::format_double(energies[i]) + "\n";
  }
  detail::write_text(path, out);
}

/// Writes u, u_t, v, w, Phi1, Phi2 field dumps for every sample of a case
/// plus manifest.json, energy.csv and records.csv into `dir`.
inline void write_case_dump(const std::filesystem::path& dir, const CaseResult& res) {
  if (res.kg_states.empty()) throw ContractViolation("cannot dump an empty case");
  std::filesystem::create_directories(dir);
  const double eps = res.kg_states.front().eps;
  nlohmann::json manifest;
  const Grid& g = res.kg_states.front().u.grid();
  manifest["eps"] = eps;
  manifest["grid"] = {{"dim", g.dim()}, {"points", g.points_per_axis()}, {"half_width", g.half_width()}};
  manifest["samples"] = nlohmann::json::array();
  std::vector<double> times;
  for (std::size_t k = 0; k < res.kg_states.size(); ++k) {
    const KGState& s = res.kg_states[k];
    const double t = res.profiles.sample_times[k];
    times.push_back(t);
    char tag[32];
    std::snprintf(tag, sizeof tag, "%04zu", k);
    const std::string id(tag);
    const SpectralField& v = res.profiles.v_samples[k];
    const SpectralField& w = res.profiles.w_samples[k];
    write_field(dir / ("u_" + id), s.u, t, eps);
    write_field(dir / ("ut_" + id), s.ut, t, eps);
    write_field(dir / ("v_" + id), v, t, eps);
    write_field(dir / ("w_" + id), w, t, eps);
    write_field(dir / ("phi1_" + id), phi1_at(v, t, eps), t, eps);
    write_field(dir / ("phi2_" + id), phi2_at(v, w, t, eps), t, eps);
    manifest["samples"].push_back({{"time", t},
                                   {"energy", res.energies[k]},
                                   {"u", "u_" + id},
                                   {"ut", "ut_" + id},
                                   {"v", "v_" + id},
                                   {"w", "w_" + id},
                                   {"phi1", "phi1_" + id},
                                   {"phi2", "phi2_" + id}});
  }
  detail::write_text(dir / "manifest.json", manifest.dump(2) + "\n");
  write_energy_csv(dir / "energy.csv", times, res.energies);
  if (!res.records.empty()) write_records_csv(dir / "records.csv", res.records);
}

}  // namespace nrkg
