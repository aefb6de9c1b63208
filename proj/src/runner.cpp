#include "runner.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "errors.hpp"
#include "quantized_pump.hpp"
#include "quasiprob.hpp"
#include "semiclassical.hpp"

namespace ionjc {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

class CsvTable {
 public:
  CsvTable(const RunConfig& config, std::vector<std::string> columns) : columns_(std::move(columns)) {
    meta("mode", std::string(to_string(config.mode)));
    meta("name", config.name);
    meta("config_hash", config_hash(config));
    meta("version", kVersion);
  }

  void meta(const std::string& key, const std::string& value) { text_ += "# " + key + ": " + value + "\n"; }

  void row(std::initializer_list<double> values) { row(std::vector<double>(values)); }

  void row(const std::vector<double>& values) {
    if (!header_written_) {
      for (std::size_t i = 0; i < columns_.size(); ++i) text_ += (i ? "," : "") + columns_[i];
      text_ += "\n";
      header_written_ = true;
    }
    char buf[32];
    for (std::size_t i = 0; i < values.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%.17g", values[i]);
      if (i) text_ += ',';
      text_ += buf;
    }
    text_ += "\n";
  }

  fs::path write(const fs::path& file) const {
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + file.string());
    out << text_;
    if (!out) throw Error(ErrorKind::Io, "failed writing " + file.string());
    return file;
  }

 private:
  std::vector<std::string> columns_;
  std::string text_;
  bool header_written_ = false;
};

std::string number_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

json params_json(const ModelParams& p) {
  return {{"k", p.k},
          {"eta", p.eta},
          {"delta_phi", p.delta_phi},
          {"delta_omega_tilde", p.delta_omega_tilde},
          {"nu_tilde", p.nu_tilde},
          {"omega21_tilde", p.omega21_tilde},
          {"arg_kappa", p.arg_kappa}};
}

json config_json(const RunConfig& c) {
  json j = json::object();
  const std::string text = serialize(c);
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto eol = text.find('\n', pos);
    const auto line = text.substr(pos, eol - pos);
    const auto eq = line.find('=');
    j[line.substr(0, eq)] = line.substr(eq + 1);
    pos = eol + 1;
  }
  return j;
}

// Upper index of the Poisson window of |amplitude|^2, checked against an
// explicit override when one is given.
PoissonWindow checked_window(double amplitude, double eps, int override_max, int extra, const char* what) {
  auto w = poisson_window(amplitude * amplitude, eps);
  if (override_max > 0 && w.hi + extra > override_max) {
    throw Error(ErrorKind::TruncationTooSmall, std::string(what) + " truncation " + std::to_string(override_max) +
                                                   " is below the required " + std::to_string(w.hi + extra));
  }
  return w;
}

int classical_cutoff(const RunConfig& c) {
  if (c.n_max_motion > 0) return c.n_max_motion;
  return std::max(c.params.k, suggest_truncation(c.alpha0_abs, c.tail_epsilon));
}

json classical_truncation(const RunConfig& c, int cutoff) {
  return {{"motion_cutoff", cutoff},
          {"motion_tail_mass", poisson_tail_above(c.alpha0_abs * c.alpha0_abs, cutoff)},
          {"motion_window_excluded_mass", poisson_window(c.alpha0_abs * c.alpha0_abs, c.tail_epsilon).excluded_mass}};
}

json run_classical_ordered(const RunConfig& c, const fs::path& dir, RunResult& res) {
  const auto taus = c.time_grid();
  const int cutoff = classical_cutoff(c);
  const auto psi0 = semiclassical::VibronicState::ground_coherent(c.alpha0(), cutoff, c.tail_epsilon);
  semiclassical::TimeOrderedPropagator prop(c.params, c.r, cutoff, c.ode_tol);
  const auto states = prop.run(psi0, taus);
  CsvTable csv(c, {"tau", "sigma22"});
  csv.meta("time_axis", "tau");
  double drift = 0.0;
  for (std::size_t i = 0; i < taus.size(); ++i) {
    csv.row({taus[i], states[i].excited_population()});
    drift = std::max(drift, std::abs(states[i].norm() - psi0.norm()));
  }
  res.csv_files.push_back(csv.write(dir / (c.output_stem() + ".csv")));
  return {{"truncation", classical_truncation(c, cutoff)},
          {"report", {{"ode_steps", prop.steps_taken()}, {"max_norm_drift", drift}}}};
}

json run_classical_noordering(const RunConfig& c, const fs::path& dir, RunResult& res) {
  const auto taus = c.time_grid();
  CsvTable csv(c, {"tau", "sigma22_noordering"});
  csv.meta("time_axis", "tau");
  for (double tau : taus) {
    csv.row({tau, semiclassical::sigma22_no_ordering({tau, c.t_start, c.r}, c.alpha0(), c.params, c.tail_epsilon)});
  }
  res.csv_files.push_back(csv.write(dir / (c.output_stem() + ".csv")));
  const auto w = checked_window(c.alpha0_abs, c.tail_epsilon, c.n_max_motion, 0, "motion");
  return {{"truncation", {{"motion_window", {w.lo, w.hi}}, {"motion_window_excluded_mass", w.excluded_mass}}}};
}

json run_quantized(const RunConfig& c, const fs::path& dir, RunResult& res) {
  const auto ts = c.time_grid();
  const auto wa = checked_window(c.alpha0_abs, c.tail_epsilon, c.n_max_motion, 0, "motion");
  const auto wb = checked_window(c.beta0_abs, c.tail_epsilon, c.m_max_pump, 0, "pump");
  const auto values = quantized::sigma22_quantized_series(ts, c.alpha0(), c.beta0(), c.params, c.tail_epsilon);
  CsvTable csv(c, {"t_tilde", "sigma22"});
  csv.meta("time_axis", "t_tilde");
  for (std::size_t i = 0; i < ts.size(); ++i) csv.row({ts[i], values[i]});
  res.csv_files.push_back(csv.write(dir / (c.output_stem() + ".csv")));
  return {{"truncation",
           {{"motion_window", {wa.lo, wa.hi}},
            {"motion_window_excluded_mass", wa.excluded_mass},
            {"pump_window", {wb.lo, wb.hi}},
            {"pump_window_excluded_mass", wb.excluded_mass}}}};
}

json run_compare_ordering(const RunConfig& c, const fs::path& dir, RunResult& res) {
  const auto taus = c.time_grid();
  const int cutoff = classical_cutoff(c);
  const auto psi0 = semiclassical::VibronicState::ground_coherent(c.alpha0(), cutoff, c.tail_epsilon);
  const auto states = semiclassical::propagate_time_ordered(psi0, taus, c.r, c.params, c.ode_tol);
  std::vector<double> ordered, unordered;
  for (std::size_t i = 0; i < taus.size(); ++i) {
    ordered.push_back(states[i].excited_population());
    unordered.push_back(
        semiclassical::sigma22_no_ordering({taus[i], c.t_start, c.r}, c.alpha0(), c.params, c.tail_epsilon));
  }
  const auto rep = semiclassical::compare_series(taus, ordered, unordered, c.threshold);
  CsvTable csv(c, {"tau", "sigma22_ordered", "sigma22_noordering"});
  csv.meta("time_axis", "tau");
  for (std::size_t i = 0; i < taus.size(); ++i) csv.row({taus[i], ordered[i], unordered[i]});
  res.csv_files.push_back(csv.write(dir / (c.output_stem() + ".csv")));
  json first = rep.first_crossing ? json(*rep.first_crossing) : json(nullptr);
  return {{"truncation", classical_truncation(c, cutoff)},
          {"report",
           {{"sup_distance", rep.sup_distance}, {"threshold", c.threshold}, {"first_crossing_tau", first}}}};
}

json run_compare_pump(const RunConfig& c, const fs::path& dir, RunResult& res) {
  const auto taus = c.time_grid();
  const auto rep = quantized::convergence_metric(c.beta0_list, c.r, taus, c.params, c.alpha0(), c.ode_tol,
                                                 c.tail_epsilon);
  std::vector<std::string> columns = {"tau", "sigma22_classical"};
  for (double b : c.beta0_list) columns.push_back("sigma22_quantized_beta" + number_label(b));
  CsvTable csv(c, columns);
  csv.meta("time_axis", "tau");
  csv.meta("t_tilde", "tau / beta0");
  for (std::size_t i = 0; i < taus.size(); ++i) {
    std::vector<double> row = {taus[i], rep.classical[i]};
    for (const auto& curve : rep.quantized) row.push_back(curve[i]);
    csv.row(row);
  }
  res.csv_files.push_back(csv.write(dir / (c.output_stem() + ".csv")));

  json per_beta = json::array();
  for (std::size_t b = 0; b < c.beta0_list.size(); ++b) {
    const auto wb = checked_window(c.beta0_list[b], c.tail_epsilon, c.m_max_pump, 0, "pump");
    per_beta.push_back({{"beta0", c.beta0_list[b]},
                        {"delta_omega_tilde", c.beta0_list[b] * c.r},
                        {"sup_distance", rep.distances[b]},
                        {"pump_window", {wb.lo, wb.hi}},
                        {"pump_window_excluded_mass", wb.excluded_mass}});
  }
  const int cutoff = classical_cutoff(c);
  return {{"truncation", classical_truncation(c, cutoff)}, {"report", {{"per_beta0", per_beta}}}};
}

json run_pfunction(const RunConfig& c, const fs::path& dir, RunResult& res) {
  const int extra = c.initial_level == 2 ? c.params.k : 0;
  const auto wa = checked_window(c.alpha0_abs, c.tail_epsilon, 0, 0, "motion");
  const auto wb = checked_window(c.beta0_abs, c.tail_epsilon, c.m_max_pump, 0, "pump");

  std::vector<quantized::DensityMatrixVib> rhos;
  for (double t : c.t_snapshots) {
    rhos.push_back(quantized::rho_vib(t, c.alpha0(), c.beta0(), c.params, c.initial_level, c.tail_epsilon));
  }
  const int needed = rhos.front().dim() - 1;
  if (c.n_max_motion > 0 && c.n_max_motion < needed) {
    throw Error(ErrorKind::TruncationTooSmall, "n_max_motion " + std::to_string(c.n_max_motion) +
                                                   " is below the density-matrix support " + std::to_string(needed));
  }
  const int n_max = c.n_max_motion > 0 ? c.n_max_motion : needed;

  fs::path cache = c.cache_dir;
  if (cache.is_relative()) cache = dir / cache;
  bool loaded = false;
  const auto table = quasiprob::PElementTable::load_or_build(n_max, c.grid, c.filter, cache, &loaded);

  json snaps = json::array();
  for (std::size_t s = 0; s < rhos.size(); ++s) {
    const auto field = table.apply(rhos[s].rho);
    CsvTable csv(c, {"re", "im", "p_omega"});
    csv.meta("t_tilde", number_label(c.t_snapshots[s]));
    csv.meta("grid", std::to_string(c.grid.n_re) + "x" + std::to_string(c.grid.n_im));
    for (std::size_t i = 0; i < field.values.size(); ++i) {
      const cd a = c.grid.point(i);
      csv.row({a.real(), a.imag(), field.values[i]});
    }
    const auto file = dir / (c.output_stem() + "_t" + number_label(c.t_snapshots[s]) + ".csv");
    res.csv_files.push_back(csv.write(file));
    snaps.push_back({{"t_tilde", c.t_snapshots[s]},
                     {"file", file.filename().string()},
                     {"p_min", field.min()},
                     {"p_max", field.max()},
                     {"quadrature_error", field.quadrature_error},
                     {"max_imag_residue", field.max_imag_residue},
                     {"rho_trace", rhos[s].trace()},
                     {"rho_trace_defect", rhos[s].trace_defect},
                     {"rho_hermiticity_error", rhos[s].hermiticity_error()},
                     {"rho_min_eigenvalue", rhos[s].min_eigenvalue()}});
  }
  return {{"truncation",
           {{"motion_window", {wa.lo, wa.hi}},
            {"motion_window_excluded_mass", wa.excluded_mass},
            {"motion_dim", needed + 1},
            {"extra_levels", extra},
            {"pump_window", {wb.lo, wb.hi}},
            {"pump_window_excluded_mass", wb.excluded_mass}}},
          {"element_table",
           {{"content_key", table.content_key()},
            {"loaded_from_cache", loaded},
            {"n_max", table.n_max()},
            {"radius_count", table.radius_count()}}},
          {"report", {{"snapshots", snaps}}}};
}

}  // namespace

RunResult run(const RunConfig& config, const fs::path& out_dir) {
  config.validate();
  fs::create_directories(out_dir);
  RunResult res;
  json body;
  switch (config.mode) {
    case Mode::Sigma22ClassicalOrdered: body = run_classical_ordered(config, out_dir, res); break;
    case Mode::Sigma22ClassicalNoOrdering: body = run_classical_noordering(config, out_dir, res); break;
    case Mode::Sigma22Quantized: body = run_quantized(config, out_dir, res); break;
    case Mode::CompareOrdering: body = run_compare_ordering(config, out_dir, res); break;
    case Mode::ComparePump: body = run_compare_pump(config, out_dir, res); break;
    case Mode::PFunction: body = run_pfunction(config, out_dir, res); break;
  }

  json files = json::array();
  for (const auto& f : res.csv_files) files.push_back(f.filename().string());
  res.summary = {{"status", "ok"},
                 {"version", kVersion},
                 {"mode", std::string(to_string(config.mode))},
                 {"name", config.name},
                 {"config_hash", config_hash(config)},
                 {"config", config_json(config)},
                 {"params", params_json(config.params)},
                 {"tolerances",
                  {{"tail_epsilon", config.tail_epsilon},
                   {"ode_tol", config.ode_tol},
                   {"quadrature_order", config.filter.quadrature_order},
                   {"quadrature_doubling_tol", 1e-10}}},
                 {"files", files}};
  for (auto& [key, value] : body.items()) res.summary[key] = value;

  res.sidecar = out_dir / (config.output_stem() + ".json");
  std::ofstream out(res.sidecar, std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + res.sidecar.string());
  out << res.summary.dump(2) << "\n";
  return res;
}

json error_json(const std::exception& e) {
  json j = {{"status", "error"}, {"message", e.what()}};
  if (const auto* err = dynamic_cast<const Error*>(&e)) {
    j["kind"] = std::string(to_string(err->kind()));
    if (const auto* v = dynamic_cast<const ValidationError*>(&e)) j["field"] = v->field();
    if (const auto* p = dynamic_cast<const ParseError*>(&e)) j["line"] = p->line();
  } else {
    j["kind"] = "Internal";
  }
  return j;
}

}  // namespace ionjc
