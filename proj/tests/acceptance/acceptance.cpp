// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Criteria that the model cannot meet are still evaluated as stated and
// reported red; the numbers behind every verdict are printed alongside it.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "oracles/oracles.hpp"
#include "synlat/analysis.hpp"
#include "synlat/observables.hpp"
#include "synlat/spam.hpp"

using namespace synlat;

namespace {

constexpr double kPi = std::numbers::pi;

// Pinned tolerances.
constexpr double kBlochOmegaRel = 0.02;
constexpr double kBlochAmpRel = 0.05;
constexpr double kBlochSeconds = 10.0;
constexpr double kRefocusRel = 0.05;
constexpr double kFlatPeakMin = 0.3;
constexpr double kPbcObcMaxAbs = 0.05;
constexpr double kScanOmegaRel = 0.10;
constexpr double kGammaRatio = 10.0;
constexpr double kGapOracleAbs = 1e-6;
constexpr double kGapApproxRel = 0.05;
constexpr double kPairRateRel = 0.10;
constexpr double kStaticPairFloor = 0.9;
constexpr double kSlopeTarget = 2.0, kSlopeTol = 0.2;
constexpr double kLineR2 = 0.99;
constexpr double kBetaOmegaRel = 0.20;
constexpr double kStaticUnitarity = 1e-10;
constexpr double kTimedepUnitarity = 1e-6;
constexpr double kReversalLoss = 1e-8;
constexpr double kLabFrameDev = 1e-3;
constexpr double kOrderTarget = 2.0, kOrderTol = 0.3;
constexpr double kFluxTol = 0.02 * kPi;
constexpr double kSpamRoundtrip = 1e-12;

int failures = 0;

void verdict(const char* id, bool ok, const std::string& detail) {
  std::printf("%s %s %s\n", ok ? "PASS" : "FAIL", id, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double median(std::vector<double> v) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double unitarity_defect(const StateTrajectory& traj) {
  double worst = 0;
  for (const auto& s : traj.states) worst = std::max(worst, std::abs(1.0 - s.squaredNorm()));
  return worst;
}

void bloch_law() {
  const double rabi = 0.45;
  const auto start = std::chrono::steady_clock::now();
  bool omega_ok = true, amp_ok = true;
  std::string detail;
  for (double delta : {0.2, 0.4, 0.6, 0.8, 1.0}) {
    const auto run = bloch_oscillation_run(delta, rabi);
    const double w = run.fit.value("omega"), a = run.fit.value("A");
    const double w_rel = std::abs(w - delta) / delta;
    omega_ok = omega_ok && run.fit.converged && w_rel <= kBlochOmegaRel;
    if (delta >= rabi) {
      const double a_rel = std::abs(a - rabi / (2 * delta)) / (rabi / (2 * delta));
      amp_ok = amp_ok && a_rel <= kBlochAmpRel;
      detail += fmt(" [D=%.1f w=%.4f A=%.4f (%.1f%%)]", delta, w, a, 100 * a_rel);
    } else {
      detail += fmt(" [D=%.1f w=%.4f]", delta, w);
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  verdict("C1a bloch-frequency", omega_ok, fmt("omega within %.0f%% of the tilt;", 100 * kBlochOmegaRel) + detail);
  verdict("C1b bloch-amplitude", amp_ok, fmt("A within %.0f%% of rabi/(2 tilt) for tilt >= rabi", 100 * kBlochAmpRel));
  verdict("C1c bloch-runtime", secs < kBlochSeconds, fmt("%.2f s for five runs", secs));
}

StateTrajectory ring_run(double delta, double t_end = 4.0) {
  const auto h = build_single_hamiltonian(LatticeSpec::ring(-3, 4, 0.9, {delta > 0 ? DriveType::Escher : DriveType::Static, delta}));
  TimedepOptions opts;
  opts.tol = 1e-8;
  return evolve(h, QuantumState::site(h.basis(), 0), uniform_grid(t_end, 401), opts);
}

void escher_refocusing() {
  bool peaks_ok = true;
  std::string detail;
  for (double delta : {0.30, 0.45}) {
    const auto traj = ring_run(delta);
    const auto p0 = column_of(site_populations(traj), 3);  // site 0 sits at index 3 of -3..4
    const auto peak = find_refocusing_peak(traj.times_us, p0);
    const double want = *refocusing_time(delta);
    const bool ok = peak && std::abs(peak->time_us - want) / want <= kRefocusRel;
    peaks_ok = peaks_ok && ok;
    detail += peak ? fmt(" [D=%.2f peak %.3f us (P0=%.3f) vs %.3f]", delta, peak->time_us, peak->value, want)
                   : fmt(" [D=%.2f no peak]", delta);
  }
  verdict("C2a escher-refocusing-time", peaks_ok, fmt("within %.0f%%;", 100 * kRefocusRel) + detail);

  const auto flat = ring_run(0.0);
  const auto p = site_populations(flat);
  const auto p0 = column_of(p, 3), p4 = column_of(p, 7);
  const auto back = find_refocusing_peak(flat.times_us, p0);
  const auto far = find_max(flat.times_us, p4);
  const bool flat_ok = back && back->value > kFlatPeakMin && far.value > kFlatPeakMin;
  verdict("C2b flat-ring-refocusing", flat_ok,
          fmt("P0 revival %.3f at %.3f us, P4 max %.3f at %.3f us (> %.1f)", back ? back->value : 0.0,
              back ? back->time_us : 0.0, far.value, far.time_us, kFlatPeakMin));

  // Delta = rabi / 2: escher ring against an open chain carrying the same tilt
  const double delta = 0.45;
  const auto pbc = site_populations(ring_run(delta));
  const auto chain = build_single_hamiltonian(LatticeSpec::chain(-3, 4, 0.9, delta));
  const auto obc = site_populations(evolve_static(chain, QuantumState::site(chain.basis(), 0), uniform_grid(4.0, 401)));
  // the compared traces are P_0 and P_4 (columns 3 and 7); all sites are reported for context
  const double d0 = (pbc.col(3) - obc.col(3)).cwiseAbs().maxCoeff();
  const double d4 = (pbc.col(7) - obc.col(7)).cwiseAbs().maxCoeff();
  const double all = (pbc - obc).cwiseAbs().maxCoeff();
  verdict("C2c pbc-vs-obc", std::max(d0, d4) <= kPbcObcMaxAbs,
          fmt("max |P_pbc - P_obc| over 4 us: P_0 %.4f, P_4 %.4f (<= %.2f); any site %.4f", d0, d4, kPbcObcMaxAbs, all));
}

void interacting_bloch() {
  const double delta = 0.8, rabi = 0.45;
  std::vector<double> v;
  for (int k = 0; k <= 20; ++k) v.push_back(0.1 * k);
  const auto rows = frequency_vs_interaction_scan(delta, rabi, v);
  bool omega_ok = true;
  std::vector<double> inside, outside;
  std::string misses;
  for (const auto& r : rows) {
    if (!r.error.empty()) {
      omega_ok = false;
      misses += fmt(" [V=%.1f error]", r.v_mhz);
      continue;
    }
    const bool in = r.v_mhz > delta - rabi && r.v_mhz < delta + rabi;
    (in ? inside : outside).push_back(r.gamma_per_us);
    if (!in) {
      const double want = gap_approx(delta, r.v_mhz, rabi);
      const double rel = std::abs(r.omega_mhz - want) / want;
      if (rel > kScanOmegaRel) {
        omega_ok = false;
        misses += fmt(" [V=%.1f w=%.3f vs %.3f, %.0f%%]", r.v_mhz, r.omega_mhz, want, 100 * rel);
      }
    }
  }
  verdict("C3a scan-frequency", omega_ok,
          fmt("omega within %.0f%% of sqrt((D-V)^2+W^2) outside the window;", 100 * kScanOmegaRel) +
              (misses.empty() ? std::string(" all points agree") : misses));
  const double med_in = median(inside), med_out = median(outside);
  verdict("C3b scan-damping", med_in > kGammaRatio * med_out,
          fmt("median gamma inside %.4f /us vs %.0fx median outside %.4f /us (min inside %.4f)", med_in, kGammaRatio,
              med_out, *std::min_element(inside.begin(), inside.end())));
}

void gap_oracle() {
  const double delta = 0.8;
  double worst = 0;
  for (int i = 0; i < 20; ++i)
    for (int k = 0; k < 20; ++k) {
      const double v = 2.0 * delta * i / 19.0;
      const double om = 0.02 + (delta - 0.02) * k / 19.0;
      worst = std::max(worst, std::abs(gap_exact(delta, v, om) - oracle::three_site_gap(delta, v, om)));
    }
  verdict("C4a gap-vs-eigensolver", worst < kGapOracleAbs, fmt("max deviation %.2e over 20x20 (V, rabi)", worst));

  double worst_rel = 0, at_v = 0, at_om = 0;
  for (int i = 0; i < 20; ++i)
    for (int k = 0; k < 20; ++k) {
      const double v = 2.0 * delta * i / 19.0;
      const double om = 0.01 + (0.25 * delta - 0.01) * k / 19.0;
      const double exact = gap_exact(delta, v, om);
      const double rel = std::abs(gap_approx(delta, v, om) - exact) / exact;
      if (rel > worst_rel) worst_rel = rel, at_v = v, at_om = om;
    }
  verdict("C4b gap-approx", worst_rel <= kGapApproxRel,
          fmt("worst relative deviation %.1f%% at V=%.3f rabi=%.3f (rabi <= D/4)", 100 * worst_rel, at_v, at_om));
}

void pair_hopping() {
  const double rabi = 1.92, delta = 7.2;
  bool ok = true;
  std::string detail;
  for (double v : {0.5, 1.0, 1.5, 2.0, 2.2}) {
    const auto run = pair_hopping_run(v, rabi, delta);
    const double rel = (run.fit.value("omega") - run.omega_eff_mhz) / run.omega_eff_mhz;
    ok = ok && run.fit.converged && std::abs(rel) <= kPairRateRel;
    detail += fmt(" [V=%.1f %.4f vs %.4f, %+.1f%%]", v, run.fit.value("omega"), run.omega_eff_mhz, 100 * rel);
  }
  verdict("C5a pair-hopping-rate", ok, fmt("within %.0f%%;", 100 * kPairRateRel) + detail);

  const auto h = build_pair_hamiltonian(LatticeSpec::bichromatic_chain(0, 1, rabi, delta), InteractionSpec::with_default_table(0.0));
  TimedepOptions opts;
  opts.tol = 1e-8;
  const auto traj = evolve_timedep(h, QuantumState::pair(h.basis(), 0, 0), uniform_grid(4.0, 801), opts);
  // P_0 is the per-atom population of site 0 (pair average), not P(0,0)
  const auto p0 = column_of(pair_site_populations(traj), 0);
  const auto p00 = pair_state_population(traj);
  const double lowest = *std::min_element(p0.begin(), p0.end());
  verdict("C5b no-interaction-static", lowest >= kStaticPairFloor,
          fmt("min P_0 over 4 us on a dense grid = %.4f (>= %.1f); min P(0,0) = %.4f", lowest, kStaticPairFloor,
              *std::min_element(p00.begin(), p00.end())));
}

void gaussian_scaling() {
  const double rabi = 0.9, delta = 5.0;
  std::vector<double> lv, lb, vs, ws;
  bool converged = true;
  double worst_ratio_dev = 0;
  std::string detail;
  for (double v : {0.2, 0.4, 0.6, 0.8, 1.0}) {
    const auto run = gaussian_decay_run(v, rabi, delta);
    const double beta = run.gaussian.value("beta"), w = run.cosine.value("omega");
    converged = converged && run.gaussian.converged && run.cosine.converged;
    lv.push_back(std::log(v));
    lb.push_back(std::log(beta));
    vs.push_back(v);
    ws.push_back(w);
    const double ratio = beta / (w * w / 4);
    worst_ratio_dev = std::max(worst_ratio_dev, std::abs(ratio - 1));
    detail += fmt(" [V=%.1f beta=%.4f w=%.4f beta/(w^2/4)=%.2f]", v, beta, w, ratio);
  }
  const auto slope = fit_line(lv, lb);
  verdict("C6a beta-power-law", converged && std::abs(slope.slope - kSlopeTarget) <= kSlopeTol,
          fmt("log-log slope %.3f +- %.3f (target %.1f +- %.1f)", slope.slope, slope.slope_error, kSlopeTarget, kSlopeTol));
  const auto line = fit_line(vs, ws);
  verdict("C6b long-time-linear", line.r_squared > kLineR2,
          fmt("omega(V) slope %.4f, R^2 = %.5f (> %.2f)", line.slope, line.r_squared, kLineR2));
  verdict("C6c beta-vs-omega", worst_ratio_dev <= kBetaOmegaRel,
          fmt("worst |beta/(w^2/4) - 1| = %.2f (<= %.2f);", worst_ratio_dev, kBetaOmegaRel) + detail);
}

void solver_properties() {
  const auto stat = build_pair_hamiltonian(LatticeSpec::chain(-4, 4, 0.45, 0.8), InteractionSpec::with_default_table(0.8));
  const double d_static = unitarity_defect(evolve_static(stat, QuantumState::pair(stat.basis(), 0, 0), uniform_grid(10.0, 201)));

  const auto dyn = build_pair_hamiltonian(LatticeSpec::bichromatic_chain(-2, 2, 0.9, 5.0), InteractionSpec::with_default_table(0.6));
  TimedepOptions opts;
  opts.tol = 1e-8;
  const double d_dyn = unitarity_defect(evolve_timedep(dyn, QuantumState::pair(dyn.basis(), 0, 0), uniform_grid(3.0, 31), opts));
  verdict("C7a unitarity", d_static < kStaticUnitarity && d_dyn < kTimedepUnitarity,
          fmt("static %.2e (< %.0e), time-dependent at tol 1e-8 %.2e (< %.0e)", d_static, kStaticUnitarity, d_dyn,
              kTimedepUnitarity));

  const auto ring = build_single_hamiltonian(LatticeSpec::ring(-3, 4, 0.9, {DriveType::Escher, 0.45}));
  const auto psi0 = QuantumState::site(ring.basis(), 0);
  auto grid = uniform_grid(4.0, 9);
  opts.tol = 1e-9;
  const auto fwd = evolve_timedep(ring, psi0, grid, opts);
  QuantumState end = fwd.state(fwd.size() - 1);
  end.amplitudes.normalize();
  std::reverse(grid.begin(), grid.end());
  const auto back = evolve_timedep(ring, end, grid, opts);
  const double loss = 1 - std::norm(back.states.back().dot(psi0.amplitudes));
  verdict("C7b time-reversal", loss < kReversalLoss, fmt("escher ring forth and back over 4 us: 1 - fidelity = %.2e", loss));

  const LabFrameSpec lab{{0.0, 500.0, 1000.0}, 0.9, 5.0, -1};
  const auto h_lab = build_lab_frame_hamiltonian(lab, 3);
  const auto h_rot = rotating_frame_reduce(LatticeSpec::bichromatic_chain(-1, 1, 0.9, 5.0));
  const auto t = uniform_grid(1.0, 11);
  TimedepOptions lab_opts;
  lab_opts.tol = 1e-7;
  const auto p_lab = evolve_timedep(h_lab, QuantumState::site(h_lab.basis(), 0), t, lab_opts).probabilities();
  const auto p_rot = evolve_timedep(h_rot, QuantumState::site(h_rot.basis(), 0), t, lab_opts).probabilities();
  const double dev = (p_lab - p_rot).cwiseAbs().maxCoeff();
  verdict("C7c lab-vs-rotating", dev < kLabFrameDev, fmt("max population deviation %.2e at 500 MHz transitions", dev));

  const auto report = convergence_probe(dyn, QuantumState::pair(dyn.basis(), 0, 0), 2.0, 6, 0.013);
  const double order = report.observed_order.value_or(std::nan(""));
  verdict("C7d convergence-order", std::abs(order - kOrderTarget) <= kOrderTol,
          fmt("observed order %.3f (target %.1f +- %.1f)", order, kOrderTarget, kOrderTol));
}

void flux_closed_loop() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> phase(-kPi, kPi);
  double worst = 0;
  for (int k = 0; k < 10; ++k) {
    const double bias = phase(rng);
    const auto cal = calibrate_flux(LatticeSpec::ring(-3, 4, 0.9, {}, bias), 0.9);
    worst = std::max(worst, std::abs(phase_difference(cal.inferred_bias_rad, bias)));
  }
  verdict("C8 flux-calibration", worst <= kFluxTol, fmt("worst recovery error %.2e rad over 10 phases (<= 0.02 pi)", worst));
}

void spam() {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0;
  for (const SpamModel& m : {SpamModel::single(), SpamModel::pair_state()}) {
    for (int k = 0; k < 1000; ++k) {
      const double x = u(rng);
      worst = std::max(worst, std::abs(forward(m, renormalize(m, x).value) - x));
      worst = std::max(worst, std::abs(renormalize(m, forward(m, x)).value - x));
    }
  }
  const SpamModel single = SpamModel::single();
  const bool exact = renormalize(single, 0.32).value == 0.0 && renormalize(single, 0.93).value == 1.0;
  verdict("C9 spam", worst < kSpamRoundtrip && exact,
          fmt("roundtrip %.2e (< 1e-12); 0.32 -> 0 and 0.93 -> 1 %s", worst, exact ? "exact" : "NOT exact"));
}

void correlations() {
  const std::vector<int> sites{-4, -3, -2, -1, 0, 1, 2, 3, 4};
  const auto stat = build_pair_hamiltonian(LatticeSpec::chain(-4, 4, 0.45, 0.8), InteractionSpec::with_default_table(0.8));
  const auto t1 = evolve_static(stat, QuantumState::pair(stat.basis(), 0, 0), uniform_grid(2.0, 201));
  const auto c1 = pair_correlation(t1, 2.0).c;
  const double diag1 = diagonal_weight(c1), anti1 = anti_diagonal_weight(c1, sites);

  const auto bi = build_pair_hamiltonian(LatticeSpec::bichromatic_chain(-4, 4, 0.9, 5.0), InteractionSpec::with_default_table(0.8));
  TimedepOptions opts;
  opts.tol = 1e-6;
  const auto t2 = evolve_timedep(bi, QuantumState::pair(bi.basis(), 0, 0), stroboscopic_grid(5.0, 2.0), opts);
  const auto c2 = pair_correlation(t2, 2.0).c;
  const double diag2 = diagonal_weight(c2), anti2 = anti_diagonal_weight(c2, sites);

  verdict("C10 correlation-structure", anti1 > diag1 && diag2 > anti2,
          fmt("static tilt V=D: anti %.4f > diag %.4f; bichromatic: diag %.4f > anti %.4f (t = 2 us)", anti1, diag1,
              diag2, anti2));
}

}  // namespace

int main() {
  bloch_law();
  escher_refocusing();
  interacting_bloch();
  gap_oracle();
  pair_hopping();
  gaussian_scaling();
  solver_properties();
  flux_closed_loop();
  spam();
  correlations();
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
