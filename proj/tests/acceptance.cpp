// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "chaosctl/scenarios.hpp"
#include "chaosctl/search.hpp"
#include "oracles.hpp"

using namespace chaosctl;
namespace sc = chaosctl::scenario;

namespace {

struct Verdict {
  bool pass = true;
  std::ostringstream note;
  std::string failed;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      failed += " [failed: " + what + "]";
    }
  }
};

struct Criterion {
  std::string id;
  double budget_seconds;
  std::function<void(Verdict&)> body;
};

/// Runs that converged without noise, kept for the contraction check.
struct Converged {
  std::string name;
  SimulationResult result;
  PeriodicOrbit orbit;
  double epsilon;
};
std::vector<Converged> g_converged;

void keep(const std::string& name, const SimulationResult& res, const SimulationConfig& cfg) {
  if (res.converged_at && cfg.noise.amplitude == 0.0) {
    g_converged.push_back({name, res, cfg.law.orbit, cfg.law.epsilon});
  }
}

double interval_error(const GainRange& g, double lo, double hi) {
  return std::max(std::abs(g.lower - lo), std::abs(g.upper - hi));
}

/// Ascending coefficients of prod (x - lambda_i) over the Eigen spectrum.
std::vector<double> eigen_char_poly(const Eigen::MatrixXd& a) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(a, false);
  std::vector<std::complex<double>> c{1.0};
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const std::complex<double> lam = es.eigenvalues()[i];
    std::vector<std::complex<double>> next(c.size() + 1, 0.0);
    for (std::size_t k = 0; k < c.size(); ++k) {
      next[k + 1] += c[k];
      next[k] -= lam * c[k];
    }
    c = std::move(next);
  }
  std::vector<double> out;
  for (const auto& z : c) out.push_back(z.real());
  return out;
}

void ac1(Verdict& v) {
  const ParamMap map = logistic(3.8);
  const PeriodicOrbit p = find_fixed_point(map, 3.8);
  const GainRange beta = beta_range(map, p.points[0]);
  v.note << "p=" << p.points[0] << " beta=(" << beta.lower << ", " << beta.upper << ")";
  v.require(std::abs(p.points[0] - 0.7368) <= 0.001, "fixed point 0.7368 +- 0.001");
  v.require(interval_error(beta, 4.126, 14.44) <= 0.01, "beta range +- 0.01");
}

void ac2(Verdict& v) {
  const GainRange gr = gamma_fixed_range(3.8);
  std::vector<std::pair<std::string, LawVariant>> laws;
  for (double b : sc::kFig2Betas) laws.emplace_back("beta=" + format_double(b), SpfBeta{{b}});
  for (int i = 1; i <= 9; ++i) {
    const double g = gr.lower + (gr.upper - gr.lower) * i / 10.0;
    laws.emplace_back("gamma=" + format_double(g), DfcFix{g});
  }
  long worst_k = 0;
  double worst_u = 0.0;
  for (auto& [name, law] : laws) {
    auto cfg = sc::fixed_point_config(law, 100000);
    cfg.convergence_window = 8;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const auto res = run(cfg);
      const double secs =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      v.require(res.converged_at.has_value(), name + " converges");
      v.require(res.peak_u <= 0.2, name + " peak_u <= 0.2");
      v.require(secs < 1.0, name + " under 1 s");
      if (res.converged_at) worst_k = std::max(worst_k, *res.converged_at);
      worst_u = std::max(worst_u, res.peak_u);
      keep("fixed " + name, res, cfg);
    } catch (const std::exception& e) {
      v.require(false, name + ": " + e.what());
    }
  }
  v.note << laws.size() << " runs, latest convergence k=" << worst_k << ", max peak_u=" << worst_u;
}

void delay_reproduction(Verdict& v, const std::string& name, const sc::DelayScenario& s) {
  auto cfg = sc::delay_config(s, 100000);
  const auto gains = law_gains(cfg.law.variant);
  const double poly = closed_loop_radius(cfg.map, cfg.law.orbit, gains, s.R);
  const double mat = oracle::eigen_radius(s.R == 0.0
                                              ? jacobian_product(orbit_jacobians(cfg.map, cfg.law.orbit, gains))
                                              : edfc_product(cfg.map, cfg.law.orbit, gains, s.R));
  v.require(poly < 1.0 && mat < 1.0, name + " radius < 1");
  try {
    const auto res = run(cfg);
    v.require(res.converged_at.has_value(), name + " converges");
    v.note << name << ": radius=" << poly << " (matrix " << mat << "), converged_at="
           << (res.converged_at ? std::to_string(*res.converged_at) : "none")
           << ", peak_u=" << res.peak_u << ", saturations=" << res.saturation_count << "; ";
    keep(name, res, cfg);
  } catch (const std::exception& e) {
    v.require(false, name + ": " + e.what());
  }
}

void ac3(Verdict& v) {
  const auto s = sc::fig4();
  const ParamMap map = logistic(s.r);
  const PeriodicOrbit o = find_upo(map, s.r, 4);
  const std::size_t a = anchor_index(o, s.anchor);
  double worst = 0.0;
  for (std::size_t j = 0; j < 4; ++j) worst = std::max(worst, std::abs(o.point(a + j) - sc::kFig4Points[j]));
  v.require(worst <= 5e-4, "orbit points within 5e-4");
  v.note << "orbit error=" << worst << "; ";
  delay_reproduction(v, "fig4", s);
}

void ac4(Verdict& v) {
  const ParamMap map = logistic(3.62);
  const PeriodicOrbit o = find_upo(map, 3.62, 4);
  const Feasibility f = feasibility_condition(map, o);
  const std::size_t i = anchor_index(o, 0.8121);
  const GainRange g = single_gamma_range(map, o, i);
  v.require(std::abs(f.value - 1.83) <= 0.02 && f.value < 2.0, "feasibility 1.83 +- 0.02");
  v.require(g.feasible && g.lower < 4.7997 && 4.7997 < g.upper, "range contains 4.7997");
  int agree = 0;
  for (int k = 0; k < 20; ++k) {
    const double gamma = g.lower - 0.5 + (g.upper - g.lower + 1.0) * (k + 0.5) / 20.0;
    std::vector<double> gains(4, 0.0);
    gains[i] = gamma;
    const Eigen::MatrixXd prod = jacobian_product(orbit_jacobians(map, o, gains));
    // Roots of the product's characteristic polynomial, plus an Eigen cross-check.
    const double by_roots = spectral_radius(characteristic_polynomial(prod));
    const double by_eigen = oracle::eigen_radius(prod);
    const bool in_range = g.lower < gamma && gamma < g.upper;
    if ((by_roots < 1.0) == in_range && (by_eigen < 1.0) == in_range) ++agree;
  }
  v.require(agree == 20, "range verdict agrees with the product spectrum at 20 gammas");
  v.note << "feasibility=" << f.value << " range=(" << g.lower << ", " << g.upper
         << ") verdict agreement " << agree << "/20";
}

void ac5(Verdict& v) { delay_reproduction(v, "fig5", sc::fig5()); }

void ac6(Verdict& v) {
  for (const auto& [name, s] : {std::pair{"fig7", sc::fig7()}, std::pair{"fig8", sc::fig8()}}) {
    delay_reproduction(v, name, s);
    const ParamMap map = logistic(s.r);
    const PeriodicOrbit o = find_upo(map, s.r, 4);
    const auto gains = sc::stored_gains(s, o);
    double worst = 0.0;
    for (std::size_t j = 0; j < 4; ++j) {
      const double p = o.points[j];
      const double gamma = gains[(j + 1) % 4];
      const auto expected = edfc_char_poly(map.deriv_x(p, s.r), map.deriv_r(p, s.r), gamma, s.R);
      const auto got = eigen_char_poly(edfc_jacobian(map, p, gamma, s.R, 4));
      for (std::size_t k = 0; k < got.size(); ++k) worst = std::max(worst, std::abs(got[k] - expected[k]));
    }
    v.require(worst <= 1e-10, std::string(name) + " single-matrix polynomial to 1e-10");
    v.note << name << " polynomial error=" << worst << "; ";
  }
}

void scan(Verdict& v, const std::string& name, double lo, double hi, DelayLaw law, double R) {
  SearchConfig tmpl;
  tmpl.m = 4;
  tmpl.law = law;
  tmpl.R = R;
  tmpl.budget = 20000;
  const auto rows = stabilizable_range_scan(lo, hi, 0.005, tmpl);
  std::size_t found = 0;
  std::string missing;
  for (const auto& row : rows) {
    if (row.found) {
      ++found;
    } else {
      missing += " " + format_double(row.r);
    }
  }
  v.require(found == rows.size() && !rows.empty(), name + " all grid points");
  v.note << name << " " << found << "/" << rows.size() << (missing.empty() ? "" : " missing:" + missing)
         << "; ";
}

void ac7(Verdict& v) {
  scan(v, "dfc [3.625, 3.67]", 3.625, 3.67, DelayLaw::Dfc, 0.0);
  scan(v, "edfc (3.67, 3.8]", 3.675, 3.8, DelayLaw::Edfc, sc::kEdfcR);
}

void ac8(Verdict& v) {
  const double tube = 3.0 * sc::kFixedEpsilon;
  std::vector<SimulationConfig> cfgs;
  for (int w = 0; w <= 4; ++w) {
    for (int s = 0; s < sc::kEnsembleSeeds; ++s) cfgs.push_back(sc::fig1_config(w, static_cast<std::uint64_t>(s)));
  }
  const auto out = batch(cfgs);
  std::vector<double> mean(5, 0.0);
  int errors = 0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!out[i].ok()) {
      ++errors;
      continue;
    }
    mean[i / sc::kEnsembleSeeds] += lock_fraction(*out[i].result, cfgs[i].law.orbit, tube) / sc::kEnsembleSeeds;
  }
  v.require(errors == 0, "switching ensemble runs without errors");
  for (int w = 1; w <= 4; ++w) v.require(mean[0] > mean[static_cast<std::size_t>(w)], "switch beats OGY label " + std::to_string(w));
  v.note << "mean lock fraction switch=" << mean[0] << " ogy=(" << mean[1] << ", " << mean[2] << ", "
         << mean[3] << ", " << mean[4] << "); ";

  std::vector<SimulationConfig> noisy;
  for (int s = 0; s < sc::kEnsembleSeeds; ++s) noisy.push_back(sc::fig6_config(static_cast<std::uint64_t>(s)));
  int locked = 0;
  int noisy_errors = 0;
  for (const auto& o : batch(noisy)) {
    if (!o.ok()) {
      ++noisy_errors;
    } else if (stays_locked(*o.result, noisy[0].law.orbit, 0.05)) {
      ++locked;
    }
  }
  v.require(noisy_errors == 0, "delay ensemble runs without errors");
  v.require(locked >= 90, "delay law stays locked in >= 90/100 seeds");
  v.note << "delay ensemble stays locked " << locked << "/100";
}

void ac9(Verdict& v) {
  // Contraction: d_l <= sigma^l eps with sigma < 1 along every converged run.
  if (g_converged.empty()) v.require(false, "converged runs available");
  double worst_sigma = 0.0;
  double worst_step = 0.0;
  std::string worst_name;
  std::size_t contracting = 0;
  for (const auto& c : g_converged) {
    const auto d = cycle_distances(c.result, c.orbit);
    const double sigma = sc::envelope_rate(d, c.epsilon);
    v.require(!d.empty() && d[0] <= c.epsilon, c.name + " starts inside epsilon");
    v.require(sigma < 1.0, c.name + " contraction rate " + format_double(sigma) + " with " +
                               std::to_string(c.result.saturation_count) + " saturated steps");
    if (sigma < 1.0) ++contracting;
    if (sigma >= worst_sigma) {
      worst_sigma = sigma;
      worst_name = c.name;
    }
    worst_step = std::max(worst_step, sc::stepwise_rate(d));
  }
  v.note << contracting << "/" << g_converged.size() << " runs contract, max envelope rate " << worst_sigma << " (" << worst_name
         << "), max one-cycle ratio " << worst_step << "; ";

  // Zero gains leave the free multiplier as the only nonzero eigenvalue.
  double zero_err = 0.0;
  for (double r : {3.6, 3.62, 3.67, 3.7, 3.76, 3.8, 3.85}) {
    const ParamMap map = logistic(r);
    for (int m : {1, 2, 4}) {
      const PeriodicOrbit o = find_upo(map, r, m);
      const std::vector<double> zeros(o.size(), 0.0);
      zero_err = std::max(zero_err, std::abs(closed_loop_radius(map, o, zeros) - std::abs(o.multiplier)));
      zero_err = std::max(zero_err, std::abs(closed_loop_radius_matrix(map, o, zeros) - std::abs(o.multiplier)));
    }
  }
  v.require(zero_err <= 1e-9, "zero-gain radius equals |multiplier| to 1e-9");
  v.note << "zero-gain error " << zero_err << "; ";

  // Extended law without memory replays the plain delay law bit for bit.
  bool identical = true;
  for (const auto& s : {sc::fig4(), sc::fig5(), sc::fig8()}) {
    auto dfc = sc::delay_config(s, 3000);
    dfc.law.variant = DfcPhase{law_gains(dfc.law.variant)};
    auto edfc = dfc;
    edfc.law.variant = EdfcPhase{law_gains(dfc.law.variant), 0.0};
    const auto a = run(dfc);
    const auto b = run(edfc);
    identical = identical && a.states == b.states && a.controls == b.controls && a.phases == b.phases;
  }
  v.require(identical, "EDFC with R = 0 bit-identical to DFC_PHASE");
  v.note << "R=0 replay " << (identical ? "identical" : "differs") << "; ";

  // Orbit finder against a 1e5-point grid scan.
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> dist(3.57, 3.9);
  int cases = 0;
  int agree = 0;
  for (int t = 0; t < 20; ++t) {
    const double r = dist(rng);
    const ParamMap map = logistic(r);
    for (int m = 1; m <= 4; ++m) {
      ++cases;
      const auto expected = oracle::grid_roots(r, m);
      const auto got = composite_roots(map, r, m, 1e-12);
      bool ok = got.size() == expected.size();
      for (std::size_t i = 0; ok && i < got.size(); ++i) ok = std::abs(got[i] - expected[i]) <= 1e-9;
      const auto prime = oracle::prime_period_roots(r, m);
      try {
        const PeriodicOrbit o = find_upo(map, r, m);
        for (double p : o.points) {
          const auto it = std::min_element(prime.begin(), prime.end(), [&](double a, double b) {
            return std::abs(a - p) < std::abs(b - p);
          });
          ok = ok && it != prime.end() && std::abs(*it - p) <= 1e-9;
        }
      } catch (const NoOrbitError&) {
        // Acceptable only if no grid cycle of this period lies on the attractor.
        for (double x : prime) {
          bool covered = true;
          double y = x;
          for (int j = 0; j < m; ++j, y = oracle::logistic_power(r, 1, y)) {
            covered = covered && oracle::attractor_distance(r, y) < 1e-3;
          }
          ok = ok && !covered;
        }
      }
      if (ok) ++agree;
    }
  }
  v.require(agree == cases, "orbit finder matches grid oracle");
  v.note << "grid oracle agreement " << agree << "/" << cases;
}

}  // namespace

int main() {
  std::vector<Criterion> criteria{
      {"AC1", 1.0, ac1},   {"AC2", 15.0, ac2}, {"AC3", 1.0, ac3},  {"AC4", 1.0, ac4},
      {"AC5", 1.0, ac5},   {"AC6", 2.0, ac6},  {"AC7", 300.0, ac7}, {"AC8", 60.0, ac8},
      {"AC9", 120.0, ac9},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    Verdict v;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.body(v);
    } catch (const std::exception& e) {
      v.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::ostringstream limit;
    limit << "runtime " << secs << " s < " << c.budget_seconds << " s";
    v.require(secs < c.budget_seconds, limit.str());
    if (!v.pass) ++failures;
    std::printf("%s %s (%.2f s) %s%s\n", c.id.c_str(), v.pass ? "PASS" : "FAIL", secs,
                v.note.str().c_str(), v.failed.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
