// nrkg: command-line front end.
//
//   nrkg simulate --config cfg.json --out DIR [--eps E] [--data-index I]
//   nrkg sweep    --config cfg.json --out DIR [--jobs N] [--quiet]
//   nrkg fit      --records records.csv (--config cfg.json | --abscissa A [--response R] [--t T] [--eps E] [--family F])
//   nrkg report   --records records.csv --out DIR [--config cfg.json]
//
// Exit codes: 0 success, 2 configuration error, 3 numerical validity failure
// (energy breach or non-finite values), 1 anything else.

#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "nrkg/nrkg.hpp"

namespace {

using namespace nrkg;

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

int status_exit_code(const std::vector<SweepRecord>& records) {
  bool config = false, numerical = false;
  for (const auto& r : records) {
    config = config || r.status == RecordStatus::config_error;
    numerical = numerical || r.status == RecordStatus::energy_breach || r.status == RecordStatus::failure;
  }
  if (config) return kExitConfig;
  if (numerical) return kExitNumerical;
  return 0;
}

void report_invalid(const std::vector<SweepRecord>& records) {
  for (const auto& r : records) {
    if (!r.valid()) {
      std::cerr << "record eps=" << r.eps << " t=" << r.t << " " << to_string(r.status) << ": " << r.diagnostic << "\n";
    }
  }
}

std::vector<NamedFit> run_fits(const std::vector<SweepRecord>& records, const std::vector<FitSpec>& specs,
                               std::vector<std::pair<std::string, std::string>>& errors) {
  std::vector<NamedFit> fits;
  for (const auto& spec : specs) {
    try {
      fits.push_back({spec, apply_fit(records, spec)});
    } catch (const FitError& e) {
      std::cerr << "fit '" << spec.name << "': " << e.what() << "\n";
      errors.emplace_back(spec.name, e.what());
    }
  }
  return fits;
}

int cmd_simulate(const std::string& config_path, const std::string& out, std::optional<double> eps,
                 std::size_t data_index) {
  const auto cfg = load_config(config_path);
  if (data_index >= cfg.sweep.data.size()) {
    throw ConfigError("data index " + std::to_string(data_index) + " out of range (config has " +
                      std::to_string(cfg.sweep.data.size()) + " data entries)");
  }
  if (!eps && cfg.sweep.eps.empty()) throw ConfigError("no eps given and the config eps list is empty");
  const double e = eps.value_or(cfg.sweep.eps.front());
  const auto res =
      run_case_full(cfg.sweep.data[data_index], e, cfg.sweep.times, cfg.sweep.grid, cfg.sweep.solver);
  write_case_dump(out, res);
  for (const auto& r : res.records) {
    std::printf("t=%g first_order=%.6e second_order=%.6e energy_drift=%.3e %s\n", r.t, r.first_order_error_L2,
                r.second_order_error_L2, r.energy_drift, to_string(r.status).c_str());
  }
  report_invalid(res.records);
  return status_exit_code(res.records);
}

int cmd_sweep(const std::string& config_path, const std::string& out, std::optional<unsigned> jobs, bool quiet) {
  auto cfg = load_config(config_path);
  if (jobs) cfg.sweep.jobs = *jobs;
  const auto records = run_sweep(cfg.sweep, [&](const SweepProgress& p) {
    if (quiet) return;
    std::fprintf(stderr, "[%zu/%zu] %s eps=%g %.2fs\n", p.done, p.total, to_string(p.data->family).c_str(), p.eps,
                 p.wall_time_s);
  });
  std::filesystem::create_directories(out);
  write_records_csv(std::filesystem::path(out) / "records.csv", records);
  std::vector<std::pair<std::string, std::string>> fit_errors;
  const auto fits = run_fits(records, cfg.fits, fit_errors);
  write_summary_json(std::filesystem::path(out) / "summary.json", summary_json(records, fits, fit_errors));
  for (const auto& f : fits) {
    std::printf("%s: slope %.4f (r^2 %.4f, %zu points)\n", f.spec.name.c_str(), f.result.slope, f.result.r_squared,
                f.result.points);
  }
  report_invalid(records);
  return status_exit_code(records);
}

int cmd_fit(const std::string& records_path, const std::string& config_path, const FitSpec& cli_spec) {
  const auto records = read_records_csv(records_path);
  std::vector<FitSpec> specs;
  if (!config_path.empty()) {
    specs = load_config(config_path).fits;
    if (specs.empty()) throw ConfigError("config '" + config_path + "' defines no fits");
  } else {
    specs.push_back(cli_spec);
  }
  nlohmann::json out = nlohmann::json::array();
  std::vector<std::pair<std::string, std::string>> errors;
  for (const auto& f : run_fits(records, specs, errors)) out.push_back(fit_to_json(f));
  std::cout << out.dump(2) << "\n";
  return errors.empty() ? 0 : 1;
}

std::string plot_stem(const PlotSpec& p) { return p.response + "_vs_" + to_string(p.abscissa); }

int cmd_report(const std::string& records_path, const std::string& config_path, const std::string& out) {
  const auto records = read_records_csv(records_path);
  std::vector<FitSpec> specs;
  if (!config_path.empty()) specs = load_config(config_path).fits;
  std::vector<std::pair<std::string, std::string>> fit_errors;
  const auto fits = run_fits(records, specs, fit_errors);
  std::filesystem::create_directories(out);
  write_summary_json(std::filesystem::path(out) / "summary.json", summary_json(records, fits, fit_errors));

  // One plot per (abscissa, response) pair carrying the fits that share it.
  std::map<std::pair<Abscissa, std::string>, std::vector<NamedFit>> groups;
  for (const auto& s : specs) groups[{s.abscissa, s.response}];
  for (const auto& f : fits) groups[{f.spec.abscissa, f.spec.response}].push_back(f);
  if (groups.empty()) groups[{Abscissa::eps, "second_order_error_L2"}];
  for (const auto& [key, group] : groups) {
    const PlotSpec plot{key.first, key.second, key.second + " vs " + to_string(key.first)};
    const auto path = std::filesystem::path(out) / (plot_stem(plot) + ".svg");
    write_svg(path, render_loglog_svg(records, plot, group));
    std::printf("wrote %s\n", path.string().c_str());
  }
  return fit_errors.empty() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Modulated-Fourier expansion experiments for cubic NLKG"};
  app.require_subcommand(1);

  std::string config, out, records;
  std::optional<double> eps;
  std::size_t data_index = 0;
  std::optional<unsigned> jobs;
  bool quiet = false;

  auto* simulate = app.add_subcommand("simulate", "Run one case and dump fields, energy and records");
  simulate->add_option("-c,--config", config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  simulate->add_option("-o,--out", out, "Output directory")->required();
  simulate->add_option("--eps", eps, "eps (default: first entry of the config list)");
  simulate->add_option("--data-index", data_index, "Index into the config data list");

  auto* sweep = app.add_subcommand("sweep", "Run the config's data x eps matrix");
  sweep->add_option("-c,--config", config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  sweep->add_option("-o,--out", out, "Output directory")->required();
  sweep->add_option("-j,--jobs", jobs, "Worker threads (0 = all cores)");
  sweep->add_flag("-q,--quiet", quiet, "No progress output");

  FitSpec cli_fit;
  cli_fit.name = "cli";
  std::string abscissa = "eps", family;
  std::optional<double> fit_t, fit_eps;
  auto* fit = app.add_subcommand("fit", "Re-fit convergence orders from a records CSV");
  fit->add_option("-r,--records", records, "Records CSV")->required()->check(CLI::ExistingFile);
  fit->add_option("-c,--config", config, "Take fit specs from this config")->check(CLI::ExistingFile);
  fit->add_option("--abscissa", abscissa, "eps, eps2_t or t");
  fit->add_option("--response", cli_fit.response, "first_order_error_L2, second_order_error_L2 or energy_drift");
  fit->add_option("--t", fit_t, "Keep only records at this t");
  fit->add_option("--eps", fit_eps, "Keep only records at this eps");
  fit->add_option("--family", family, "Keep only this data family");
  fit->add_option("--name", cli_fit.name, "Fit name in the output");

  auto* report = app.add_subcommand("report", "Write SVG plots and a summary from a records CSV");
  report->add_option("-r,--records", records, "Records CSV")->required()->check(CLI::ExistingFile);
  report->add_option("-o,--out", out, "Output directory")->required();
  report->add_option("-c,--config", config, "Config whose fits are drawn")->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*simulate) return cmd_simulate(config, out, eps, data_index);
    if (*sweep) return cmd_sweep(config, out, jobs, quiet);
    if (*fit) {
      cli_fit.abscissa = parse_abscissa(abscissa);
      cli_fit.t = fit_t;
      cli_fit.eps = fit_eps;
      if (!family.empty()) cli_fit.family = parse_data_family(family);
      record_response(SweepRecord{}, cli_fit.response);
      return cmd_fit(records, config, cli_fit);
    }
    if (*report) return cmd_report(records, config, out);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const NumericalFailure& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
