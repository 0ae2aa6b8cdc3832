// Acceptance suite: numbered end-to-end checks, one PASS/FAIL line each.
// Run all: ./acceptance            Run a subset: ./acceptance 3 7 12

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "sobolrob/models.hpp"
#include "sobolrob/pipeline.hpp"
#include "sobolrob/report_io.hpp"
#include "sobolrob/rng.hpp"

using namespace sobolrob;
namespace fs = std::filesystem;

namespace {

struct Check {
  bool ok = true;
  std::string detail;

  void expect(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
  void note(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
};

ProductDensity unit_uniform(int p) {
  std::vector<Marginal> m;
  for (int j = 0; j < p; ++j) m.push_back(Marginal::uniform({0.0, 1.0}));
  return ProductDensity(std::move(m));
}

std::vector<Marginal> lorenz_case1_marginals() {
  return {Marginal::uniform({9.7, 10.3}),                   // sigma
          Marginal::uniform({27.16, 28.84}),                // rho
          Marginal::uniform({194.0 / 75.0, 206.0 / 75.0}),  // beta
          Marginal::uniform({0.8, 1.2}),                    // alpha1
          Marginal::uniform({0.8, 1.2}),                    // alpha2
          Marginal::uniform({0.8, 1.2})};                   // alpha3
}

std::vector<Marginal> lorenz_case2_marginals() {
  auto m = lorenz_case1_marginals();
  m[5] = Marginal::beta_shape(1.0, 4.0, {0.8, 1.2});
  return m;
}

RunConfig lorenz_config(std::vector<Marginal> marginals, std::uint64_t seed) {
  RunConfig cfg;
  cfg.model_name = "lorenz";
  cfg.marginals = std::move(marginals);
  cfg.n = 10000;
  cfg.seed = seed;
  return cfg;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double sample_std(const std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

// ---------------------------------------------------------------------------

Check c01_gfunction_nominal() {
  Check c;
  const auto start = std::chrono::steady_clock::now();
  const auto d10 = unit_uniform(10);
  const SampleSet s = build_sample_set(d10, models::g_function, 50000, 101, 1);
  const IndexVector t = total_indices(s);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  c.expect(std::abs(t[0] - 0.6743) <= 0.02,
           "T1 = " + fmt(t[0]) + " not within 0.02 of 0.6743");
  c.expect(seconds < 30.0, "runtime " + fmt(seconds) + " s exceeds 30 s");
  c.note("T1 = " + fmt(t[0]) + ", " + fmt(seconds) + " s single-threaded");
  return c;
}

Check c02_gfunction_convergence() {
  Check c;
  const auto d10 = unit_uniform(10);
  const std::size_t sizes[] = {1000, 5000, 10000, 50000};
  const int reps = 32;

  double prev_spread = std::numeric_limits<double>::infinity();
  std::vector<double> nominal_50k, low_50k, high_50k;
  for (const std::size_t n : sizes) {
    std::vector<double> t1(static_cast<std::size_t>(reps));
    for (int rep = 0; rep < reps; ++rep) {
      const std::uint64_t seed = 7000 + static_cast<std::uint64_t>(rep);
      const SampleSet s = build_sample_set(d10, models::g_function, n, seed, 1);
      const IndexVector t = total_indices(s);
      t1[static_cast<std::size_t>(rep)] = t[0];
      if (n == 50000) {
        Partition part = fit_tree(s.X0, s.F0, 50, all_dims(10), d10.support());
        part.floors = compute_floors(part, d10);
        part.volumes = estimate_volumes(part, s.X0, s.Phi0);
        const PairContext ctx = make_pair_context(s, part, d10);
        const DerivativeTable table = derivative_table(s, part, ctx);
        const auto dir =
            optimal_direction(table.dT.row(0), part.floors, {Target::Kind::TotalIndex, 0});
        const Mat lines = direction_line_sums(s, part, dir.a);
        for (const double delta : {-0.33, 0.33}) {
          const auto spec = make_perturbed_spec(d10, part, dir, delta);
          const IndexVector pt = perturbed_total_indices(s, ctx, lines, spec);
          (delta < 0 ? low_50k : high_50k).push_back(pt[0]);
        }
        nominal_50k.push_back(t[0]);
      }
    }
    const double spread = sample_std(t1);
    c.expect(spread < prev_spread,
             "spread at n=" + std::to_string(n) + " did not decrease (" + fmt(spread) + ")");
    prev_spread = spread;
  }
  const double med_lo = median(low_50k), med_nom = median(nominal_50k), med_hi = median(high_50k);
  c.expect(med_lo < med_nom, "delta=-0.33 median " + fmt(med_lo) + " !< nominal " + fmt(med_nom));
  c.expect(med_nom < med_hi, "nominal median " + fmt(med_nom) + " !< delta=+0.33 " + fmt(med_hi));
  c.note("medians " + fmt(med_lo) + " < " + fmt(med_nom) + " < " + fmt(med_hi));
  return c;
}

Check c03_linear_model() {
  Check c;
  RunConfig cfg;
  cfg.model_name = "linear3";
  for (int j = 0; j < 3; ++j) cfg.marginals.push_back(Marginal::uniform({0.0, 1.0}));
  cfg.n = 5000;
  cfg.seed = 1;
  const PipelineResult result = run_pipeline(cfg);
  const auto& rep = result.report;

  const double exact[] = {36.0 / 77.0, 25.0 / 77.0, 16.0 / 77.0};
  for (int k = 0; k < 3; ++k)
    c.expect(std::abs(rep.nominal.T[static_cast<std::size_t>(k)] - exact[k]) <= 0.03,
             "nominal T" + std::to_string(k + 1) + " off by more than 0.03");

  const auto& ea = rep.candidates[static_cast<std::size_t>(rep.extreme_abs)];
  const double shift0 = ea.T[0] - rep.nominal.T[0];
  bool same_direction = true;
  for (int k = 0; k < 3; ++k)
    same_direction =
        same_direction &&
        (ea.T[static_cast<std::size_t>(k)] - rep.nominal.T[static_cast<std::size_t>(k)]) * shift0 >
            0.0;
  c.expect(same_direction, "extreme-absolute shift is not one-directional");
  c.expect(ea.rel_change < 0.5 * ea.abs_change,
           "extreme-absolute rel_change " + fmt(ea.rel_change) + " !< 0.5 * abs_change " +
               fmt(ea.abs_change));

  const auto& er = rep.candidates[static_cast<std::size_t>(rep.extreme_rel)];
  const double gap_nominal = rep.nominal.N[0] - rep.nominal.N[1];
  const double gap_perturbed = er.N[0] - er.N[1];
  c.expect(gap_perturbed < gap_nominal, "extreme-relative did not reduce the N1-N2 gap (" +
                                            fmt(gap_perturbed) + " vs " + fmt(gap_nominal) + ")");
  c.note("abs_change " + fmt(ea.abs_change) + " (rel part " + fmt(ea.rel_change) + "), gap " +
         fmt(gap_nominal) + " -> " + fmt(gap_perturbed));
  return c;
}

Check c04_admissible_delta() {
  Check c;
  const auto d10 = unit_uniform(10);
  const SampleSet s = build_sample_set(d10, models::g_function, 50000, 101, 1);
  Nominal nominal;
  nominal.T = total_indices(s);
  nominal.N = normalized_indices(nominal.T);
  nominal.std_T = subsample_std(s, &total_indices_rows, 50, 101);
  Partition part = fit_tree(s.X0, s.F0, 50, all_dims(10), d10.support());
  part.floors = compute_floors(part, d10);
  part.volumes = estimate_volumes(part, s.X0, s.Phi0);
  const PairContext ctx = make_pair_context(s, part, d10);
  const DerivativeTable table = derivative_table(s, part, ctx);
  const auto dir = optimal_direction(table.dT.row(0), part.floors, {Target::Kind::TotalIndex, 0});
  const auto grid = scan_direction(s, part, d10, ctx, dir, 60, 1.5, nominal, 50, 101, 1);
  double max_adm = 0.0, t_third = 0.0;
  for (const auto& cand : grid) {
    if (cand.admissible) max_adm = std::max(max_adm, std::abs(cand.delta));
    if (std::abs(cand.delta - 1.0 / 3.0) < 1e-9) t_third = cand.t;
  }
  c.expect(max_adm >= 0.23 && max_adm <= 0.43,
           "max admissible |delta| = " + fmt(max_adm) + " outside [0.23, 0.43]");
  c.note("max admissible |delta| = " + fmt(max_adm) + " (reference 0.33); measured t(+1/3) = " +
         fmt(t_third) + " vs threshold 1.5");
  return c;
}

Check c05_fd_validation() {
  Check c;
  const auto d3 = unit_uniform(3);
  const SampleSet s = build_sample_set(d3, models::linear3, 20000, 11, 1);
  Partition part = fit_tree(s.X0, s.F0, 2500, all_dims(3), d3.support());
  part.floors = compute_floors(part, d3);
  part.volumes = estimate_volumes(part, s.X0, s.Phi0);
  const PairContext ctx = make_pair_context(s, part, d3);
  const DerivativeTable table = derivative_table(s, part, ctx);
  const IndexVector nominal = table.T_hat;

  const double eps = 0.01;
  int checked = 0;
  double worst = 0.0;
  for (int k = 0; k < 3; ++k) {
    for (int i = 0; i < part.size(); ++i) {
      const double d_ki = table.dT(static_cast<std::size_t>(k), static_cast<std::size_t>(i));
      const double b_i = part.floors[static_cast<std::size_t>(i)];
      if (std::abs(d_ki) <= 0.05 || b_i == 0.0) continue;
      PerturbationDirection dir;
      dir.target = {Target::Kind::TotalIndex, k};
      dir.a.assign(static_cast<std::size_t>(part.size()), 0.0);
      dir.a[static_cast<std::size_t>(i)] = b_i;
      const auto spec = make_perturbed_spec(d3, part, dir, eps);
      const Mat lines = direction_line_sums(s, part, dir.a);
      const IndexVector t_eps = perturbed_total_indices(s, ctx, lines, spec);
      const double fd =
          (t_eps[static_cast<std::size_t>(k)] - nominal[static_cast<std::size_t>(k)]) /
          (eps * b_i);
      const double rel = std::abs(fd - d_ki) / std::abs(d_ki);
      worst = std::max(worst, rel);
      c.expect(rel <= 0.05, "cell (k=" + std::to_string(k + 1) + ", i=" + std::to_string(i) +
                                "): relative error " + fmt(rel));
      ++checked;
    }
  }
  c.expect(checked >= 3, "only " + std::to_string(checked) + " cells exceeded |dT| > 0.05");
  c.note(std::to_string(checked) + " cells checked, worst relative error " + fmt(worst));
  return c;
}

Check c06_closed_form_optimizer() {
  Check c;
  int failures = 0;
  for (std::uint64_t trial = 0; trial < 1000; ++trial) {
    const std::size_t m =
        2 + static_cast<std::size_t>(rng::uniform01(4242, 0, trial) * 9.0);  // 2..10
    std::vector<double> d(m), b(m);
    for (std::size_t i = 0; i < m; ++i) {
      d[i] = 6.0 * rng::uniform01(4242, 1, trial * 16 + i) - 3.0;
      const double u = rng::uniform01(4242, 2, trial * 16 + i);
      b[i] = u < 0.25 ? 0.0 : 2.0 * u;
    }
    const auto dir = optimal_direction(d, b, {Target::Kind::TotalIndex, 0});
    double dot = 0.0;
    bool feasible = true;
    for (std::size_t i = 0; i < m; ++i) {
      feasible = feasible && std::abs(dir.a[i]) <= b[i];
      dot += d[i] * dir.a[i];
    }
    const double best = oracles::enumerate_best_objective(d, b);
    if (!feasible || std::abs(std::abs(dot) - best) > 1e-12 * std::max(1.0, best) ||
        std::abs(dir.norm_value - best) > 1e-12 * std::max(1.0, best))
      ++failures;
  }
  c.expect(failures == 0, std::to_string(failures) + " of 1000 trials disagreed");
  c.note("1000 random (d, b) trials against 3^M enumeration");
  return c;
}

Check c07_identity_suite() {
  Check c;
  const auto d3 = unit_uniform(3);
  const SampleSet s = build_sample_set(d3, models::linear3, 4000, 21, 1);
  Partition part = fit_tree(s.X0, s.F0, 400, all_dims(3), d3.support());
  part.floors = compute_floors(part, d3);
  part.volumes = estimate_volumes(part, s.X0, s.Phi0);
  const PairContext ctx = make_pair_context(s, part, d3);
  const DerivativeTable table = derivative_table(s, part, ctx);

  // delta = 0 reproduces the nominal estimator bit for bit
  const auto dir = optimal_direction(table.dT.row(0), part.floors, {Target::Kind::TotalIndex, 0});
  const auto spec0 = make_perturbed_spec(d3, part, dir, 0.0);
  const IndexVector nominal = total_indices(s);
  const IndexVector at_zero = perturbed_total_indices(s, part, d3, spec0);
  c.expect(at_zero == nominal, "delta = 0 is not bit-exact");

  // normalized indices sum to one
  const IndexVector norm = normalized_indices(nominal);
  double sum = 0.0;
  for (double v : norm) sum += v;
  c.expect(std::abs(sum - 1.0) <= 1e-12, "normalized indices sum deviates: " + fmt(sum - 1.0));

  // columns of dN vanish
  double worst_col = 0.0;
  for (int i = 0; i < part.size(); ++i) {
    double col = 0.0;
    for (int k = 0; k < 3; ++k)
      col += table.dN(static_cast<std::size_t>(k), static_cast<std::size_t>(i));
    worst_col = std::max(worst_col, std::abs(col));
  }
  c.expect(worst_col <= 1e-10, "dN column sum " + fmt(worst_col));

  // derivative along psi = phi on the single uniform box cancels exactly,
  // far inside 3 Monte Carlo standard deviations
  Partition whole = partition_from_boxes({Box{{{0.0, 1.0}, {0.0, 1.0}, {0.0, 1.0}}}},
                                         d3.support(), &s.X0);
  whole.floors = compute_floors(whole, d3);
  whole.volumes = estimate_volumes(whole, s.X0, s.Phi0);
  const DerivativeTable single = derivative_table(s, whole, d3);
  double worst_single = 0.0;
  for (int k = 0; k < 3; ++k)
    worst_single = std::max(worst_single, std::abs(single.dT(static_cast<std::size_t>(k), 0)));
  c.expect(worst_single <= 1e-10, "single-box derivative along phi: " + fmt(worst_single));
  c.note("worst dN column " + fmt(worst_col) + ", single-box dT " + fmt(worst_single));
  return c;
}

Check c08_quadrature_oracle() {
  Check c;
  const ProductDensity density({Marginal::uniform({0.0, 1.0}),
                                Marginal::truncated_normal(0.5, 0.3, {0.0, 1.0})});
  Model f = [](std::span<const double> x) { return x[0] + x[1] * x[1] + x[0] * x[1]; };
  const SampleSet s = build_sample_set(density, f, 100000, 55, 1);
  std::vector<Box> boxes;
  const double bx[] = {0.0, 0.45, 1.0};
  const double by[] = {0.0, 0.55, 1.0};
  for (int iy = 0; iy < 2; ++iy)
    for (int ix = 0; ix < 2; ++ix)
      boxes.push_back(Box{{{bx[ix], bx[ix + 1]}, {by[iy], by[iy + 1]}}});
  Partition part = partition_from_boxes(boxes, density.support(), &s.X0);
  part.floors = compute_floors(part, density);
  part.volumes = estimate_volumes(part, s.X0, s.Phi0);
  const PairContext ctx = make_pair_context(s, part, density);
  const DerivativeTable table = derivative_table(s, part, ctx);
  const auto dir = optimal_direction(table.dT.row(1), part.floors, {Target::Kind::TotalIndex, 1});
  const double delta = 0.8;
  const auto spec = make_perturbed_spec(density, part, dir, delta);
  const IndexVector perturbed = perturbed_total_indices(s, part, density, spec);

  auto locate_box = [&](double x, double y) {
    return 2 * (y < 0.55 ? 0 : 1) + (x < 0.45 ? 0 : 1);
  };
  auto eta = [&](double x, double y) {
    const double xy[] = {x, y};
    return density.pdf(xy) + delta * dir.a[static_cast<std::size_t>(locate_box(x, y))];
  };
  auto fxy = [](double x, double y) { return x + y * y + x * y; };
  double worst = 0.0;
  for (int k = 0; k < 2; ++k) {
    const double oracle =
        oracles::total_index_2d(fxy, eta, {0.0, 0.45, 1.0}, {0.0, 0.55, 1.0}, k);
    const double err = std::abs(perturbed[static_cast<std::size_t>(k)] - oracle);
    worst = std::max(worst, err);
    c.expect(err <= 0.02, "T" + std::to_string(k + 1) + " vs quadrature: error " + fmt(err));
  }
  c.note("worst |estimator - quadrature| = " + fmt(worst) + " at n = 1e5");
  return c;
}

Check c09_gaussian_oracle() {
  Check c;
  const double coeffs[] = {1.5, 1.25, 1.0};
  auto equicorr = [&](double rho) {
    Mat s(3, 3, rho);
    for (std::size_t i = 0; i < 3; ++i) s(i, i) = 1.0;
    return s;
  };
  const IndexVector base = models::linear_gaussian_total_indices(coeffs, equicorr(0.0));
  const IndexVector base_norm = normalized_indices(base);
  for (const double rho : {0.2, 0.4, 0.6, 0.8}) {
    const IndexVector t = models::linear_gaussian_total_indices(coeffs, equicorr(rho));
    const IndexVector norm = normalized_indices(t);
    for (int k = 0; k < 3; ++k) {
      c.expect(std::abs(norm[static_cast<std::size_t>(k)] -
                        base_norm[static_cast<std::size_t>(k)]) <= 1e-12,
               "normalized index changed at rho=" + fmt(rho));
      if (rho == 0.8)
        c.expect(t[static_cast<std::size_t>(k)] < base[static_cast<std::size_t>(k)],
                 "T" + std::to_string(k + 1) + " not strictly below its rho=0 value");
    }
  }
  c.note("normalized indices constant to 1e-12 over rho in {0, 0.2, 0.4, 0.6, 0.8}");
  return c;
}

PipelineResult run_lorenz_case1() {
  return run_pipeline(lorenz_config(lorenz_case1_marginals(), 2));
}

Check c10_lorenz_case1() {
  Check c;
  const PipelineResult result = run_lorenz_case1();
  const auto& rep = result.report;
  const auto& ea = rep.candidates[static_cast<std::size_t>(rep.extreme_abs)];
  const auto& er = rep.candidates[static_cast<std::size_t>(rep.extreme_rel)];

  c.expect(rep.nominal.T[5] < 0.05, "alpha3 nominal index " + fmt(rep.nominal.T[5]));
  c.expect(ea.T[5] < 0.05, "alpha3 extreme-absolute index " + fmt(ea.T[5]));
  c.expect(er.T[5] < 0.05, "alpha3 extreme-relative index " + fmt(er.T[5]));

  auto change = [&](int k) {
    const auto kk = static_cast<std::size_t>(k);
    return std::max(std::abs(ea.T[kk] - rep.nominal.T[kk]),
                    std::abs(er.T[kk] - rep.nominal.T[kk]));
  };
  const double stable = std::max({change(0), change(3), change(4)});  // sigma, alpha1, alpha2
  const double dominant = std::max(change(1), change(2));             // rho, beta
  c.expect(stable < 0.05, "sigma/alpha1/alpha2 changed by " + fmt(stable));
  c.expect(dominant > stable, "rho/beta changes (" + fmt(dominant) +
                                  ") do not dominate the stable group (" + fmt(stable) + ")");
  c.note("alpha3 <= " + fmt(std::max({rep.nominal.T[5], ea.T[5], er.T[5]})) + ", stable-group " +
         fmt(stable) + ", rho/beta " + fmt(dominant));
  return c;
}

Check c11_lorenz_case2() {
  Check c;
  const PipelineResult case1 = run_lorenz_case1();
  const double case1_abs =
      case1.report.candidates[static_cast<std::size_t>(case1.report.extreme_abs)].abs_change;

  const RunConfig naive_cfg = lorenz_config(lorenz_case2_marginals(), 2);
  const PipelineResult naive = run_pipeline(naive_cfg);
  const double naive_abs =
      naive.report.candidates[static_cast<std::size_t>(naive.report.extreme_abs)].abs_change;
  c.expect(naive_abs <= 0.5 * case1_abs, "naive-tree abs change " + fmt(naive_abs) +
                                             " !<= half of case 1 (" + fmt(case1_abs) + ")");

  RunConfig refined_cfg = lorenz_config(lorenz_case2_marginals(), 2);
  refined_cfg.min_leaf = 200;  // 4L
  refined_cfg.allowed_dims = {0, 1, 2, 3, 4};
  refined_cfg.quantile_refine = QuantileRefineSpec{5, 4};
  const PipelineResult refined = run_pipeline(refined_cfg);
  const double refined_abs =
      refined.report.candidates[static_cast<std::size_t>(refined.report.extreme_abs)].abs_change;
  c.expect(refined_abs > naive_abs,
           "refined abs change " + fmt(refined_abs) + " !> naive " + fmt(naive_abs));
  c.expect(refined_abs < case1_abs,
           "refined abs change " + fmt(refined_abs) + " !< case 1 " + fmt(case1_abs));
  c.note("case1 " + fmt(case1_abs) + ", naive " + fmt(naive_abs) + ", refined " +
         fmt(refined_abs));
  return c;
}

Check c12_reproducibility() {
  Check c;
  RunConfig cfg;
  cfg.model_name = "linear3";
  for (int j = 0; j < 3; ++j) cfg.marginals.push_back(Marginal::uniform({0.0, 1.0}));
  cfg.n = 2000;
  cfg.seed = 5;
  cfg.delta_grid = 12;

  const fs::path dir = fs::temp_directory_path() / "sobolrob_acceptance_c12";
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::vector<std::string> blobs;
  for (const int threads : {1, 4, 1}) {
    cfg.threads = threads;
    const PipelineResult result = run_pipeline(cfg);
    const fs::path path = dir / ("report_" + std::to_string(blobs.size()) + ".json");
    io::write_report_json(cfg, result, path);
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    blobs.push_back(ss.str());
  }
  c.expect(blobs[0] == blobs[1], "threads=1 vs threads=4 reports differ");
  c.expect(blobs[0] == blobs[2], "repeated runs differ");
  c.note("3 runs, " + std::to_string(blobs[0].size()) + " bytes each, byte-identical");
  return c;
}

struct Criterion {
  int id;
  const char* name;
  std::function<Check()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria = {
      {1, "g-function nominal index at n=50000", [] { return c01_gfunction_nominal(); }},
      {2, "g-function convergence study (32 repetitions)",
       [] { return c02_gfunction_convergence(); }},
      {3, "linear model: nominal accuracy and extreme patterns", [] { return c03_linear_model(); }},
      {4, "admissible delta for the g-function at tau=1.5", [] { return c04_admissible_delta(); }},
      {5, "finite-difference derivative validation", [] { return c05_fd_validation(); }},
      {6, "closed-form optimizer vs exhaustive enumeration",
       [] { return c06_closed_form_optimizer(); }},
      {7, "identity suite", [] { return c07_identity_suite(); }},
      {8, "reweighting vs tensor-grid quadrature", [] { return c08_quadrature_oracle(); }},
      {9, "linear-Gaussian correlation sweep oracle", [] { return c09_gaussian_oracle(); }},
      {10, "Lorenz case 1", [] { return c10_lorenz_case1(); }},
      {11, "Lorenz case 2: naive vs refined partition", [] { return c11_lorenz_case2(); }},
      {12, "byte-identical reports across thread counts", [] { return c12_reproducibility(); }},
  };

  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));

  int failures = 0;
  for (const auto& criterion : criteria) {
    if (!selected.empty() &&
        std::find(selected.begin(), selected.end(), criterion.id) == selected.end())
      continue;
    const auto start = std::chrono::steady_clock::now();
    Check result;
    try {
      result = criterion.run();
    } catch (const std::exception& e) {
      result.ok = false;
      result.detail = std::string("exception: ") + e.what();
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("C%02d %s [%s] (%.1f s)%s%s\n", criterion.id, result.ok ? "PASS" : "FAIL",
                criterion.name, seconds, result.detail.empty() ? " " : " -- ",
                result.detail.c_str());
    std::fflush(stdout);
    if (!result.ok) ++failures;
  }
  return failures;
}
