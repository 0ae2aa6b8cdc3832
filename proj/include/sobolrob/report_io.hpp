#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "sobolrob/pipeline.hpp"

namespace sobolrob::io {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Config parsing. JSON dimension indices are 1-based to match the usual
// variable numbering x1..xp; they are converted to 0-based internally.
// ---------------------------------------------------------------------------

inline Marginal parse_marginal(const json& j, const std::string& path) {
  if (!j.is_object()) throw std::invalid_argument(path + ": expected an object");
  if (!j.contains("family") || !j["family"].is_string())
    throw std::invalid_argument(path + ".family: expected a string");
  if (!j.contains("support") || !j["support"].is_array() || j["support"].size() != 2)
    throw std::invalid_argument(path + ".support: expected [lo, hi]");
  const Interval support{j["support"][0].get<double>(), j["support"][1].get<double>()};
  const std::string family = j["family"].get<std::string>();
  try {
    if (family == "uniform") return Marginal::uniform(support);
    if (family == "beta") {
      const auto& prm = j.at("params");
      return Marginal::beta_shape(prm.at("alpha").get<double>(), prm.at("beta").get<double>(),
                                  support);
    }
    if (family == "truncnorm") {
      const auto& prm = j.at("params");
      return Marginal::truncated_normal(prm.at("mean").get<double>(), prm.at("sd").get<double>(),
                                        support);
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(path + ".params: " + e.what());
  }
  throw std::invalid_argument(path + ".family: unknown family '" + family + "'");
}

inline RunConfig parse_config(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("config: expected a JSON object");
  RunConfig cfg;
  try {
    cfg.model_name = j.at("model").get<std::string>();
  } catch (const json::exception&) {
    throw std::invalid_argument("config.model: expected a string");
  }
  if (!j.contains("marginals") || !j["marginals"].is_array())
    throw std::invalid_argument("config.marginals: expected an array");
  for (std::size_t i = 0; i < j["marginals"].size(); ++i)
    cfg.marginals.push_back(
        parse_marginal(j["marginals"][i], "config.marginals[" + std::to_string(i) + "]"));
  if (!j.contains("n") || !j["n"].is_number_unsigned())
    throw std::invalid_argument("config.n: expected a positive integer");
  cfg.n = j["n"].get<std::size_t>();
  cfg.min_leaf = j.value("L", 50);
  cfg.delta_grid = j.value("r", 60);
  cfg.tau = j.value("tau", 1.5);
  cfg.seed = j.value("seed", std::uint64_t{0});
  cfg.subsample_reps = j.value("subsample_reps", 50);
  cfg.output_dir = j.value("output_dir", std::string("."));
  if (j.contains("allowed_dims")) {
    if (!j["allowed_dims"].is_array())
      throw std::invalid_argument("config.allowed_dims: expected an array of 1-based indices");
    for (const auto& d : j["allowed_dims"]) {
      const int dim = d.get<int>();
      if (dim < 1) throw std::invalid_argument("config.allowed_dims: indices are 1-based");
      cfg.allowed_dims.push_back(dim - 1);
    }
  }
  if (j.contains("quantile_refine")) {
    const auto& qr = j["quantile_refine"];
    if (!qr.is_object() || !qr.contains("dim") || !qr.contains("q"))
      throw std::invalid_argument("config.quantile_refine: expected {\"dim\": d, \"q\": q}");
    const int dim = qr["dim"].get<int>();
    if (dim < 1) throw std::invalid_argument("config.quantile_refine.dim: indices are 1-based");
    cfg.quantile_refine = QuantileRefineSpec{dim - 1, qr["q"].get<int>()};
  }
  validate_config(cfg);
  return cfg;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error("config file '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_config(j);
}

// ---------------------------------------------------------------------------
// Report serialization. Keys are sorted (nlohmann objects are ordered maps)
// and every number is a plain double, so a fixed result serializes to fixed
// bytes. Execution details (threads, output paths) are deliberately not
// echoed: they must not affect the report.
// ---------------------------------------------------------------------------

inline json marginal_json(const Marginal& m) {
  json j;
  j["support"] = {m.support().lo, m.support().hi};
  switch (m.family()) {
    case MarginalFamily::Uniform:
      j["family"] = "uniform";
      break;
    case MarginalFamily::BetaShape:
      j["family"] = "beta";
      j["params"] = {{"alpha", m.param_a()}, {"beta", m.param_b()}};
      break;
    case MarginalFamily::TruncatedNormal:
      j["family"] = "truncnorm";
      j["params"] = {{"mean", m.param_a()}, {"sd", m.param_b()}};
      break;
  }
  return j;
}

inline json config_json(const RunConfig& cfg) {
  json j;
  j["model"] = cfg.model_name;
  json marg = json::array();
  for (const auto& m : cfg.marginals) marg.push_back(marginal_json(m));
  j["marginals"] = marg;
  j["n"] = cfg.n;
  j["L"] = cfg.min_leaf;
  j["r"] = cfg.delta_grid;
  j["tau"] = cfg.tau;
  j["seed"] = cfg.seed;
  j["subsample_reps"] = cfg.subsample_reps;
  if (!cfg.allowed_dims.empty()) {
    json dims = json::array();
    for (const int d : cfg.allowed_dims) dims.push_back(d + 1);
    j["allowed_dims"] = dims;
  }
  if (cfg.quantile_refine)
    j["quantile_refine"] = {{"dim", cfg.quantile_refine->dim + 1}, {"q", cfg.quantile_refine->q}};
  return j;
}

inline json candidate_json(const PerturbationCandidate& cand) {
  json j;
  j["target"] = cand.target.label();
  j["delta"] = cand.delta;
  j["t"] = cand.t;
  j["admissible"] = cand.admissible;
  j["T"] = cand.T;
  j["N"] = cand.N;
  j["abs_change"] = cand.abs_change;
  j["rel_change"] = cand.rel_change;
  return j;
}

inline json report_json(const RunConfig& cfg, const PipelineResult& result) {
  const RobustnessReport& rep = result.report;
  json j;
  j["config"] = config_json(cfg);
  j["nominal"] = {{"T", rep.nominal.T}, {"N", rep.nominal.N}, {"std", rep.nominal.std_T}};
  json norm_t = json::array(), norm_n = json::array();
  for (std::size_t d = 0; d < rep.direction_norms.size(); ++d)
    (d % 2 == 0 ? norm_t : norm_n).push_back(rep.direction_norms[d]);
  j["derivative_norms"] = {{"T", norm_t}, {"N", norm_n}};
  json cands = json::array();
  for (const auto& cand : rep.candidates) cands.push_back(candidate_json(cand));
  j["candidates"] = cands;
  j["extremes"] = {{"abs", candidate_json(rep.candidates[static_cast<std::size_t>(rep.extreme_abs)])},
                   {"rel", candidate_json(rep.candidates[static_cast<std::size_t>(rep.extreme_rel)])}};
  return j;
}

inline std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
}

inline void write_report_json(const RunConfig& cfg, const PipelineResult& result,
                              const std::filesystem::path& path) {
  write_text(path, report_json(cfg, result).dump(2) + "\n");
}

// Flat tabular mirror of report.json: one row per vector-valued record.
inline std::string report_csv(const PipelineResult& result) {
  const RobustnessReport& rep = result.report;
  const std::size_t p = rep.nominal.T.size();
  std::string csv = "kind,target,delta,t,admissible,abs_change,rel_change";
  for (std::size_t k = 1; k <= p; ++k) csv += ",T_" + std::to_string(k);
  for (std::size_t k = 1; k <= p; ++k) csv += ",N_" + std::to_string(k);
  csv += "\n";
  auto vec_cells = [&](const IndexVector& t, const IndexVector& n) {
    std::string cells;
    for (std::size_t k = 0; k < p; ++k) cells += "," + (k < t.size() ? format_g17(t[k]) : "");
    for (std::size_t k = 0; k < p; ++k) cells += "," + (k < n.size() ? format_g17(n[k]) : "");
    return cells;
  };
  csv += "nominal,,,,,," + vec_cells(rep.nominal.T, rep.nominal.N) + "\n";
  csv += "std,,,,,," + vec_cells(rep.nominal.std_T, {}) + "\n";
  IndexVector norm_t(p), norm_n(p);
  for (std::size_t k = 0; k < p; ++k) {
    norm_t[k] = rep.direction_norms[2 * k];
    norm_n[k] = rep.direction_norms[2 * k + 1];
  }
  csv += "derivative_norm,,,,,," + vec_cells(norm_t, norm_n) + "\n";
  auto candidate_row = [&](const std::string& kind, const PerturbationCandidate& cand) {
    return kind + "," + cand.target.label() + "," + format_g17(cand.delta) + "," +
           format_g17(cand.t) + "," + (cand.admissible ? "1" : "0") + "," +
           format_g17(cand.abs_change) + "," + format_g17(cand.rel_change) +
           vec_cells(cand.T, cand.N) + "\n";
  };
  for (const auto& cand : rep.candidates) csv += candidate_row("candidate", cand);
  csv += candidate_row("extreme_abs", rep.candidates[static_cast<std::size_t>(rep.extreme_abs)]);
  csv += candidate_row("extreme_rel", rep.candidates[static_cast<std::size_t>(rep.extreme_rel)]);
  return csv;
}

// All 2p perturbed index vectors, one row per candidate; column T_k feeds a
// histogram of the perturbed values of index k.
inline std::string histogram_csv(const RobustnessReport& rep) {
  const std::size_t p = rep.nominal.T.size();
  std::string csv = "target,delta";
  for (std::size_t k = 1; k <= p; ++k) csv += ",T_" + std::to_string(k);
  csv += "\n";
  for (const auto& cand : rep.candidates) {
    csv += cand.target.label() + "," + format_g17(cand.delta);
    for (std::size_t k = 0; k < p; ++k) csv += "," + format_g17(cand.T[k]);
    csv += "\n";
  }
  return csv;
}

// One row per box: index, per-dimension bounds, row count, floor, volume.
inline std::string partition_csv(const Partition& part) {
  const std::size_t p = part.omega.size();
  std::string csv = "box";
  for (std::size_t d = 1; d <= p; ++d)
    csv += ",lo_" + std::to_string(d) + ",hi_" + std::to_string(d);
  csv += ",count,floor,volume\n";
  for (std::size_t i = 0; i < part.boxes.size(); ++i) {
    csv += std::to_string(i);
    for (std::size_t d = 0; d < p; ++d)
      csv += "," + format_g17(part.boxes[i].intervals[d].lo) + "," +
             format_g17(part.boxes[i].intervals[d].hi);
    csv += "," + std::to_string(part.counts.empty() ? 0 : part.counts[i]);
    csv += "," + (i < part.floors.size() ? format_g17(part.floors[i]) : std::string("")) + "," +
           (i < part.volumes.size() ? format_g17(part.volumes[i]) : std::string("")) + "\n";
  }
  return csv;
}

// Derivative diagnostics: one row per (variable, box) cell.
inline std::string derivative_table_csv(const DerivativeTable& table) {
  std::string csv = "k,i,dT,dN\n";
  for (std::size_t k = 0; k < table.dT.rows; ++k)
    for (std::size_t i = 0; i < table.dT.cols; ++i)
      csv += std::to_string(k + 1) + "," + std::to_string(i) + "," + format_g17(table.dT(k, i)) +
             "," + format_g17(table.dN(k, i)) + "\n";
  return csv;
}

inline std::string delta_scan_csv(const DeltaScanResult& scan) {
  const std::size_t p = scan.nominal.T.size();
  std::string csv = "delta,t,admissible,abs_change,rel_change";
  for (std::size_t k = 1; k <= p; ++k) csv += ",T_" + std::to_string(k);
  for (std::size_t k = 1; k <= p; ++k) csv += ",N_" + std::to_string(k);
  csv += "\n";
  for (const auto& cand : scan.grid) {
    csv += format_g17(cand.delta) + "," + format_g17(cand.t) + "," +
           (cand.admissible ? "1" : "0") + "," + format_g17(cand.abs_change) + "," +
           format_g17(cand.rel_change);
    for (std::size_t k = 0; k < p; ++k) csv += "," + format_g17(cand.T[k]);
    for (std::size_t k = 0; k < p; ++k) csv += "," + format_g17(cand.N[k]);
    csv += "\n";
  }
  return csv;
}

// ---------------------------------------------------------------------------
// Bar chart: per variable, the nominal index next to the two extreme
// perturbations. Pure text SVG with fixed formatting, so identical reports
// produce identical bytes.
// ---------------------------------------------------------------------------

inline std::string bars_svg(const RobustnessReport& rep) {
  const std::size_t p = rep.nominal.T.size();
  const auto& ext_abs = rep.candidates[static_cast<std::size_t>(rep.extreme_abs)];
  const auto& ext_rel = rep.candidates[static_cast<std::size_t>(rep.extreme_rel)];

  double max_value = 1e-12;
  for (std::size_t k = 0; k < p; ++k) {
    max_value = std::max(max_value, rep.nominal.T[k]);
    max_value = std::max(max_value, ext_abs.T[k]);
    max_value = std::max(max_value, ext_rel.T[k]);
  }
  const double y_max = std::max(0.1, std::ceil(max_value * 10.0 + 1e-9) / 10.0);

  const double bar_w = 30.0, bar_gap = 4.0, group_gap = 40.0;
  const double group_w = 3.0 * bar_w + 2.0 * bar_gap;
  const double left = 80.0, top = 70.0, plot_h = 280.0, bottom = 50.0;
  const double width = left + p * group_w + (p > 0 ? (p - 1) * group_gap : 0.0) + 40.0;
  const double height = top + plot_h + bottom;

  char buf[256];
  std::string svg;
  auto emit = [&](const char* fmt, auto... args) {
    std::snprintf(buf, sizeof buf, fmt, args...);
    svg += buf;
  };

  emit("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" "
       "viewBox=\"0 0 %.0f %.0f\" font-family=\"Helvetica,sans-serif\">\n",
       width, height, width, height);
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  static constexpr const char* kColors[3] = {"#4472c4", "#2fc6e0", "#f0c330"};
  static constexpr const char* kLabels[3] = {"nominal", "largest absolute change",
                                             "largest relative change"};
  double legend_x = left;
  for (int s = 0; s < 3; ++s) {
    emit("<rect x=\"%.2f\" y=\"20\" width=\"14\" height=\"14\" fill=\"%s\"/>\n", legend_x,
         kColors[s]);
    emit("<text x=\"%.2f\" y=\"32\" font-size=\"12\">%s</text>\n", legend_x + 20.0, kLabels[s]);
    legend_x += 30.0 + 7.2 * static_cast<double>(std::string(kLabels[s]).size()) + 24.0;
  }

  for (int tick = 0; tick <= 4; ++tick) {
    const double frac = tick / 4.0;
    const double y = top + plot_h * (1.0 - frac);
    emit("<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"#cccccc\"/>\n", left - 6.0,
         y, width - 20.0, y);
    emit("<text x=\"%.2f\" y=\"%.2f\" font-size=\"11\" text-anchor=\"end\">%.3g</text>\n",
         left - 10.0, y + 4.0, y_max * frac);
  }

  for (std::size_t k = 0; k < p; ++k) {
    const double gx = left + static_cast<double>(k) * (group_w + group_gap);
    const double values[3] = {rep.nominal.T[k], ext_abs.T[k], ext_rel.T[k]};
    for (int s = 0; s < 3; ++s) {
      const double v = values[s];
      const double h = plot_h * (std::clamp(v, 0.0, y_max) / y_max);
      const double x = gx + s * (bar_w + bar_gap);
      const double y = top + plot_h - h;
      emit("<rect class=\"bar\" x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" "
           "fill=\"%s\"/>\n",
           x, y, bar_w, h, kColors[s]);
      emit("<text x=\"%.2f\" y=\"%.2f\" font-size=\"9\" text-anchor=\"middle\">%.4f</text>\n",
           x + bar_w / 2.0, y - 3.0, v);
    }
    emit("<text x=\"%.2f\" y=\"%.2f\" font-size=\"12\" text-anchor=\"middle\">x%zu</text>\n",
         gx + group_w / 2.0, top + plot_h + 18.0, k + 1);
  }
  emit("<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"black\"/>\n", left - 6.0,
       top + plot_h, width - 20.0, top + plot_h);
  svg += "</svg>\n";
  return svg;
}

// Write the full output set of a run into the output directory.
inline void write_run_outputs(const RunConfig& cfg, const PipelineResult& result,
                              const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  write_report_json(cfg, result, out_dir / "report.json");
  write_text(out_dir / "report.csv", report_csv(result));
  write_text(out_dir / "histogram.csv", histogram_csv(result.report));
  write_text(out_dir / "bars.svg", bars_svg(result.report));
}

}  // namespace sobolrob::io
