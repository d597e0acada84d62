#include "rdpi/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <sstream>

#include "json.hpp"

namespace rdpi {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::ofstream open_out(const fs::path& file) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + file.string());
  return out;
}

// End of the transient a segment starts: its start plus the longest finite
// duration among its terms.
double segment_settles(const Segment& seg) {
  double d = 0.0;
  for (const Primitive& p : seg.terms) {
    if (const auto* r = std::get_if<Ramp>(&p)) d = std::max(d, r->duration);
    if (const auto* s = std::get_if<Smoothstep>(&p)) d = std::max(d, s->duration);
    if (const auto* b = std::get_if<Burst>(&p)) d = std::max(d, b->duration);
  }
  return seg.start + d;
}

json fit_json(const std::optional<DecayFit>& fit) {
  if (!fit) return nullptr;
  return {{"kappa_hat", fit->kappa_hat},
          {"intercept", fit->intercept},
          {"window_start", fit->window_start},
          {"window_end", fit->window_end},
          {"log_residual", fit->residual},
          {"samples", fit->samples}};
}

json finite_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

json summary_json(const RunSummary& s) {
  const RegulationReport& r = s.regulation;
  json j;
  j["label"] = s.label;
  j["h"] = s.h ? json(*s.h) : json(nullptr);
  j["diverged"] = s.diverged;
  if (s.diverged) {
    j["divergence_time"] = s.divergence_time;
    return j;
  }
  j["regulation"] = {{"final_error", r.final_error},
                     {"settled", r.settled},
                     {"settle_time", r.settle_time},
                     {"band", r.band},
                     {"max_overshoot", r.max_overshoot},
                     {"window_start", r.window_start},
                     {"window_max_error", r.window_max_error},
                     {"window_mean_error", r.window_mean_error},
                     {"window_rms_error", r.window_rms_error}};
  j["recovery"] = {{"from", s.recovery_from},
                   {"tolerance", 0.05},
                   {"time", finite_or_null(s.recovery)}};
  j["decay_fit"] = fit_json(s.decay);
  j["state_norm_initial"] = s.state_norm_0;
  j["state_norm_final"] = s.state_norm_end;
  return j;
}

std::vector<Complex> sorted_spectrum(const Eigen::MatrixXd& m) {
  auto eig = small_eigenvalues(m);
  for (Complex& z : eig) {
    if (std::abs(z.imag()) < 1e-9 * std::max(1.0, std::abs(z))) z = {z.real(), 0.0};
  }
  std::sort(eig.begin(), eig.end(), [](const Complex& x, const Complex& y) {
    if (x.real() != y.real()) return x.real() > y.real();
    return x.imag() > y.imag();
  });
  return eig;
}

std::string complex_text(const Complex& z, const char* f) {
  char buf[112];
  if (z.imag() == 0.0) {
    std::snprintf(buf, sizeof buf, f, z.real());
    return buf;
  }
  char re[48], im[48];
  std::snprintf(re, sizeof re, f, z.real());
  std::snprintf(im, sizeof im, f, std::abs(z.imag()));
  std::snprintf(buf, sizeof buf, "%s%s%si", re, z.imag() < 0 ? "-" : "+", im);
  return buf;
}

std::string sweep_dir_name(double h) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "h_%g", h);
  return buf;
}

}  // namespace

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::optional<DecayFit> fit_state_decay(const Trajectory& traj) {
  if (traj.size() < 2) return std::nullopt;
  double end = traj.times.back();
  for (std::size_t i = 0; i < traj.size(); ++i) {
    if (!(traj.state_norm[i] > 1e-10)) {
      end = traj.times[i > 0 ? i - 1 : 0];
      break;
    }
  }
  try {
    return fit_decay_rate(traj.times, traj.state_norm, 0.5, end);
  } catch (const ValidationError&) {
    return std::nullopt;
  }
}

RunSummary summarize(const Trajectory& traj) {
  RunSummary s;
  s.label = traj.scenario.name;
  s.regulation = regulation_metrics(traj);
  s.decay = fit_state_decay(traj);
  for (const Segment& seg : traj.scenario.perturbation.segments()) {
    s.recovery_from = std::max(s.recovery_from, segment_settles(seg));
  }
  s.recovery_from = std::min(s.recovery_from, traj.times.back());
  s.recovery = recovery_time(traj, s.recovery_from, 0.05);
  s.state_norm_0 = traj.state_norm.front();
  s.state_norm_end = traj.state_norm.back();
  return s;
}

std::string design_report(const Design& design, const PlantParams& plant) {
  const AugmentedModel& m = design.model;
  const int N = m.base.N;
  std::ostringstream out;
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "plant: a=%.6g b=%.6g c=%.6g theta=%.6g h in [%.6g, %.6g]\n",
                plant.a, plant.b, plant.c, plant.theta, plant.h_min, plant.h_max);
  out << buf;

  out << "eigenvalues:\n";
  const int shown = std::min(design.basis.size(), std::max(N + 3, 6));
  for (int n = 0; n < shown; ++n) {
    const ModeData& md = design.basis.mode(n);
    std::snprintf(buf, sizeof buf, "  lambda_%d = %.4f  (r = %.6f)\n", n,
                  md.lambda, md.r);
    out << buf;
  }
  std::snprintf(buf, sizeof buf,
                "mode count: N = %d  (lambda_%d = %.4f < -2 sqrt(5)|c| = %.4f)\n",
                N, N + 1, design.basis.mode(N + 1).lambda, design.threshold);
  out << buf;
  std::snprintf(buf, sizeof buf, "alpha = %.10f  (tail bound %.1e)\n", m.alpha,
                m.alpha_remainder);
  out << buf;
  std::snprintf(buf, sizeof buf, "kalman rank = %d of %d\n", design.kalman_rank,
                m.dimension());
  out << buf;
  std::snprintf(buf, sizeof buf, "controllability condition = %.3e\n",
                m.controllability_condition);
  out << buf;
  if (!m.warning.empty()) out << "warning: " << m.warning << "\n";

  out << "requested poles:";
  for (const Complex& p : m.poles) out << " " << complex_text(p, "%.6g");
  out << "\nK =";
  for (Eigen::Index i = 0; i < m.K->size(); ++i) {
    std::snprintf(buf, sizeof buf, " %.6f", (*m.K)(i));
    out << buf;
  }
  out << "\nclosed-loop spectrum:";
  for (const Complex& z : sorted_spectrum(m.closed_loop())) {
    out << " " << complex_text(z, "%.6f");
  }
  std::snprintf(buf, sizeof buf, "\nspectrum residual = %.1e\n",
                m.spectrum_residual);
  out << buf;
  return out.str();
}

void write_trace_csv(const fs::path& file, const Trajectory& traj) {
  std::ofstream out = open_out(file);
  out << "t,y1,u,zeta,state_norm,r,p,h,h_hat\n";
  for (std::size_t i = 0; i < traj.size(); ++i) {
    out << format_number(traj.times[i]) << ',' << format_number(traj.y1[i])
        << ',' << format_number(traj.u[i]) << ','
        << format_number(traj.zeta[i]) << ','
        << format_number(traj.state_norm[i]) << ','
        << format_number(traj.r[i]) << ',' << format_number(traj.p[i]) << ','
        << format_number(traj.h[i]) << ',' << format_number(traj.h_hat[i])
        << '\n';
  }
}

void write_field_csv(const fs::path& file, const Trajectory& traj,
                     const SpectralBasis& basis, const EmitOptions& emit) {
  if (emit.field_points < 2) throw ValidationError("field grid needs >= 2 points");
  if (!(emit.field_interval > 0.0)) {
    throw ValidationError("field snapshot interval must be > 0");
  }
  std::vector<double> grid(static_cast<std::size_t>(emit.field_points));
  for (std::size_t k = 0; k < grid.size(); ++k) {
    grid[k] = static_cast<double>(k) / static_cast<double>(grid.size() - 1);
  }
  std::ofstream out = open_out(file);
  out << "t";
  for (double x : grid) out << ',' << format_number(x);
  out << '\n';

  double next = traj.times.front();
  const double eps = 1e-9 * std::max(1.0, traj.times.back());
  for (std::size_t i = 0; i < traj.size(); ++i) {
    if (traj.times[i] + eps < next) continue;
    const Eigen::VectorXd modal = traj.modal.row(static_cast<Eigen::Index>(i)).transpose();
    out << format_number(traj.times[i]);
    for (double v : field_on_grid(modal, basis, traj.u[i], grid)) {
      out << ',' << format_number(v);
    }
    out << '\n';
    next += emit.field_interval;
  }
}

void write_report_json(const fs::path& file, const RunSummary& summary,
                       const Design& design) {
  json j = summary_json(summary);
  const AugmentedModel& m = design.model;
  json K = json::array();
  for (Eigen::Index i = 0; i < m.K->size(); ++i) K.push_back((*m.K)(i));
  json poles = json::array();
  for (const Complex& p : m.poles) poles.push_back({p.real(), p.imag()});
  json lambdas = json::array();
  for (int n = 0; n <= m.base.N + 1; ++n) lambdas.push_back(design.basis.mode(n).lambda);
  j["design"] = {{"N", m.base.N},
                 {"modes", design.basis.size()},
                 {"lambda", lambdas},
                 {"threshold", design.threshold},
                 {"alpha", m.alpha},
                 {"alpha_tail_bound", m.alpha_remainder},
                 {"K", K},
                 {"poles", poles},
                 {"spectrum_residual", m.spectrum_residual},
                 {"kalman_rank", design.kalman_rank},
                 {"controllability_condition", m.controllability_condition}};
  std::ofstream out = open_out(file);
  out << j.dump(2) << '\n';
}

void write_plot_script(const fs::path& dir, bool sweep,
                       const std::vector<std::string>& run_dirs,
                       bool with_field) {
  std::ofstream out = open_out(dir / "plot.py");
  out << "#!/usr/bin/env python3\n"
         "\"\"\"Plots the CSV outputs next to this script.\"\"\"\n"
         "import csv\n"
         "import os\n"
         "import matplotlib\n"
         "matplotlib.use('Agg')\n"
         "import matplotlib.pyplot as plt\n\n"
         "HERE = os.path.dirname(os.path.abspath(__file__))\n\n\n"
         "def load(path):\n"
         "    with open(path) as f:\n"
         "        rows = list(csv.reader(f))\n"
         "    head, body = rows[0], rows[1:]\n"
         "    return {k: [float(r[i]) for r in body] for i, k in enumerate(head)}\n\n\n";
  if (!sweep) {
    out << "d = load(os.path.join(HERE, 'trace.csv'))\n"
           "fig, ax = plt.subplots(3, 1, sharex=True, figsize=(8, 8))\n"
           "ax[0].plot(d['t'], d['y1'], label='y(t,1)')\n"
           "ax[0].plot(d['t'], d['r'], '--', label='r(t)')\n"
           "ax[0].legend()\n"
           "ax[1].plot(d['t'], d['u'], label='u(t)')\n"
           "ax[1].plot(d['t'], d['p'], '--', label='p(t)')\n"
           "ax[1].legend()\n"
           "ax[2].semilogy(d['t'], d['state_norm'], label='modal state norm')\n"
           "ax[2].legend()\n"
           "ax[2].set_xlabel('t')\n"
           "fig.tight_layout()\n"
           "fig.savefig(os.path.join(HERE, 'trace.png'), dpi=120)\n";
    if (with_field) {
      out << "\nwith open(os.path.join(HERE, 'field_y.csv')) as f:\n"
             "    rows = list(csv.reader(f))\n"
             "xs = [float(v) for v in rows[0][1:]]\n"
             "ts = [float(r[0]) for r in rows[1:]]\n"
             "ys = [[float(v) for v in r[1:]] for r in rows[1:]]\n"
             "fig = plt.figure(figsize=(8, 5))\n"
             "plt.pcolormesh(xs, ts, ys, shading='auto')\n"
             "plt.colorbar(label='y(t,x)')\n"
             "plt.xlabel('x')\n"
             "plt.ylabel('t')\n"
             "fig.savefig(os.path.join(HERE, 'field_y.png'), dpi=120)\n";
    }
    return;
  }
  out << "RUNS = [";
  for (std::size_t i = 0; i < run_dirs.size(); ++i) {
    out << (i ? ", " : "") << "'" << run_dirs[i] << "'";
  }
  out << "]\n"
         "fig, ax = plt.subplots(2, 1, sharex=True, figsize=(8, 7))\n"
         "for name in RUNS:\n"
         "    path = os.path.join(HERE, name, 'trace.csv')\n"
         "    if not os.path.exists(path):\n"
         "        continue\n"
         "    d = load(path)\n"
         "    ax[0].plot(d['t'], d['y1'], label=name)\n"
         "    ax[1].plot(d['t'], d['u'], label=name)\n"
         "ax[0].plot(d['t'], d['r'], 'k--', label='r(t)')\n"
         "ax[0].set_ylabel('y(t,1)')\n"
         "ax[0].legend()\n"
         "ax[1].set_ylabel('u(t)')\n"
         "ax[1].set_xlabel('t')\n"
         "fig.tight_layout()\n"
         "fig.savefig(os.path.join(HERE, 'sweep.png'), dpi=120)\n";
}

RunSummary run_single(const Scenario& scn, const fs::path& dir,
                      const EmitOptions& emit) {
  const Design design = synthesize(scn.plant, scn.sim_modes, scn.design);
  fs::create_directories(dir);
  RunSummary summary;
  summary.label = scn.name;
  Trajectory traj;
  try {
    traj = run(scn, design);
  } catch (const DivergenceError& e) {
    summary.diverged = true;
    summary.divergence_time = e.time();
    write_report_json(dir / "report.json", summary, design);
    throw;
  }
  fill_outputs(traj, design.basis);
  summary = summarize(traj);
  if (emit.trace) write_trace_csv(dir / "trace.csv", traj);
  if (emit.field) write_field_csv(dir / "field_y.csv", traj, design.basis, emit);
  write_report_json(dir / "report.json", summary, design);
  if (emit.plot) write_plot_script(dir, false, {}, emit.field);
  return summary;
}

std::vector<RunSummary> run_sweep(const Experiment& ex, const fs::path& dir,
                                  const EmitOptions& emit) {
  if (ex.sweep_delays.empty()) throw ValidationError("experiment has no sweep");
  const Scenario& base = ex.scenario;
  const Design design = synthesize(base.plant, base.sim_modes, base.design);
  fs::create_directories(dir);

  std::vector<std::future<RunSummary>> jobs;
  std::vector<std::string> names;
  for (double h : ex.sweep_delays) {
    names.push_back(sweep_dir_name(h));
    jobs.push_back(std::async(std::launch::async, [&, h, name = names.back()] {
      Scenario scn = base;
      scn.name = base.name + "/" + name;
      scn.h = ConstantDelay{h};
      if (scn.zeta_delay == ZetaDelay::Exact) scn.h_hat = scn.h;
      scn.validate();
      const fs::path sub = dir / name;
      fs::create_directories(sub);
      RunSummary s;
      try {
        Trajectory traj = run(scn, design);
        fill_outputs(traj, design.basis);
        s = summarize(traj);
        if (emit.trace) write_trace_csv(sub / "trace.csv", traj);
        if (emit.field) write_field_csv(sub / "field_y.csv", traj, design.basis, emit);
      } catch (const DivergenceError& e) {
        s.label = scn.name;
        s.diverged = true;
        s.divergence_time = e.time();
      }
      s.h = h;
      write_report_json(sub / "report.json", s, design);
      return s;
    }));
  }
  std::vector<RunSummary> out;
  for (auto& job : jobs) out.push_back(job.get());

  std::ofstream csv = open_out(dir / "summary.csv");
  csv << "h,diverged,final_error,window_max_error,window_rms_error,settle_time,"
         "recovery_time\n";
  json all = json::array();
  for (const RunSummary& s : out) {
    csv << format_number(*s.h) << ',' << (s.diverged ? 1 : 0) << ',';
    if (s.diverged) {
      csv << "nan,nan,nan,nan,nan\n";
    } else {
      csv << format_number(s.regulation.final_error) << ','
          << format_number(s.regulation.window_max_error) << ','
          << format_number(s.regulation.window_rms_error) << ','
          << format_number(s.regulation.settled ? s.regulation.settle_time : NAN)
          << ',' << format_number(s.recovery) << '\n';
    }
    all.push_back(summary_json(s));
  }
  std::ofstream js = open_out(dir / "summary.json");
  js << json{{"scenario", base.name}, {"runs", all}}.dump(2) << '\n';
  if (emit.plot) write_plot_script(dir, true, names, false);
  return out;
}

std::vector<RunSummary> run_experiment(const Experiment& ex, const fs::path& dir,
                                       const EmitOptions& emit) {
  ex.scenario.validate();
  fs::create_directories(dir);
  {
    std::ofstream cfg = open_out(dir / "scenario.yaml");
    cfg << serialize_experiment(ex);
  }
  if (!ex.sweep_delays.empty()) return run_sweep(ex, dir, emit);
  return {run_single(ex.scenario, dir, emit)};
}

}  // namespace rdpi
