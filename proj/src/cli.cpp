#include "ou/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <map>
#include <set>

#include "ou/covariance.hpp"
#include "ou/error.hpp"
#include "ou/evolution.hpp"
#include "ou/inequalities.hpp"
#include "ou/measures.hpp"
#include "ou/mehler.hpp"
#include "ou/parallel.hpp"
#include "ou/rng.hpp"
#include "ou/spde.hpp"

namespace ou::cli {

namespace {

using nlohmann::json;

std::string brief(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

struct Context {
  const ExperimentConfig& config;
  OperatorFamily model;
  std::filesystem::path output;
  std::vector<std::string> artifacts;

  void emit(const CsvTable& table) {
    table.write(output);
    artifacts.push_back(table.name() + ".csv");
  }

  std::uint64_t seed(std::string_view label, std::uint64_t index = 0) const {
    return rng::seed_stream(config.seed, label, index).value;
  }

  std::vector<std::pair<double, double>> pairs() const {
    return ordered_pairs(config.s_values, config.t_values);
  }

  Vector e(int i) const { return Vector::Unit(model.dim, i); }
};

CheckResult verdict(std::string name, bool ok, std::string summary, bool asserted = true) {
  CheckResult c;
  c.name = std::move(name);
  c.status = ok ? Verdict::Pass : (asserted ? Verdict::Fail : Verdict::Report);
  c.asserted = asserted;
  c.summary = std::move(summary);
  return c;
}

CheckResult errored(std::string name, const std::exception& e, bool asserted = true) {
  CheckResult c = verdict(std::move(name), false, e.what(), asserted);
  c.failures.push_back(e.what());
  return c;
}

std::string pair_label(double s, double t) { return "s=" + format_number(s) + " t=" + format_number(t); }

void emit_matrix(CsvTable& table, const std::string& kind, double s, double t, const Matrix& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) table.row(kind, s, t, i, j, m(i, j));
  }
}

DecayCertificate cameron_martin_certificate(const Context& ctx) {
  return fit_decay(ctx.model, ctx.pairs(), NormMode::CameronMartin);
}

// ---------------------------------------------------------------- evolve

std::vector<CheckResult> run_evolve(Context& ctx) {
  const auto& model = ctx.model;
  const auto& cfg = ctx.config;
  std::vector<CheckResult> out;

  CsvTable table("evolve", {"s", "t", "method", "steps", "op_norm", "trace"});
  CsvTable matrices("evolve_matrix", {"kind", "s", "t", "row", "col", "value"});
  CsvTable adjoint("adjoint", {"s", "t", "defect"});
  double worst_adjoint = 0.0;
  std::vector<std::string> adjoint_failures;
  for (const auto& [s, t] : ctx.pairs()) {
    const EvolutionMap u = evolve(model, s, t);
    table.row(s, t, to_string(u.method), u.steps, spectral_norm(u.matrix), trace(u.matrix));
    emit_matrix(matrices, "U", s, t, u.matrix);
    const Matrix v = integrate_adjoint(model, s, t).matrix;
    const double defect = spectral_norm(Matrix(v - u.matrix.transpose())) / std::max(1.0, spectral_norm(u.matrix));
    adjoint.row(s, t, defect);
    worst_adjoint = std::max(worst_adjoint, defect);
    if (!(defect <= 1e-8)) adjoint_failures.push_back("adjoint " + pair_label(s, t) + " defect " + brief(defect));
  }
  ctx.emit(table);
  ctx.emit(matrices);
  ctx.emit(adjoint);

  {
    double lo = std::max(model.window.t_min, *std::min_element(cfg.s_values.begin(), cfg.s_values.end()));
    double hi = std::min(model.window.t_max, *std::max_element(cfg.t_values.begin(), cfg.t_values.end()));
    if (!(lo < hi)) std::swap(lo, hi);
    const rng::CounterStream stream(rng::seed_stream(cfg.seed, "chain"));
    CsvTable chain("chain", {"triple", "s", "r", "t", "defect"});
    double worst = 0.0;
    std::vector<std::string> failures;
    for (std::size_t i = 0; i < cfg.chain_triples; ++i) {
      double x[3];
      for (int k = 0; k < 3; ++k) x[k] = lo + (hi - lo) * stream.uniform(3 * i + k);
      std::sort(x, x + 3);
      const Matrix direct = evolve(model, x[0], x[2]).matrix;
      const Matrix composed = evolve(model, x[1], x[2]).matrix * evolve(model, x[0], x[1]).matrix;
      const double defect = spectral_norm(Matrix(direct - composed));
      chain.row(i, x[0], x[1], x[2], defect);
      worst = std::max(worst, defect);
      if (!(defect <= cfg.tol_chain)) {
        failures.push_back("triple " + std::to_string(i) + " s=" + format_number(x[0]) + " r=" + format_number(x[1]) +
                           " t=" + format_number(x[2]) + " defect " + brief(defect));
      }
    }
    ctx.emit(chain);
    CheckResult c = verdict("evolve.chain", failures.empty(),
                std::to_string(cfg.chain_triples) + " triples, max defect " + brief(worst));
    c.failures = failures;
    c.details = {{"max_defect", worst}, {"tolerance", cfg.tol_chain}, {"range", {lo, hi}}};
    out.push_back(c);
  }

  CheckResult adj = verdict("evolve.adjoint", adjoint_failures.empty(), "max defect " + brief(worst_adjoint));
  adj.failures = adjoint_failures;
  adj.details = {{"max_defect", worst_adjoint}, {"tolerance", 1e-8}};
  out.push_back(adj);

  CsvTable decay("decay", {"mode", "s", "t", "measured", "bound"});
  try {
    const DecayCertificate op = fit_decay(model, ctx.pairs(), NormMode::OperatorNorm);
    for (std::size_t i = 0; i < op.grid.size(); ++i) {
      decay.row(to_string(op.mode), op.grid[i].first, op.grid[i].second, op.measured[i], op.bound[i]);
    }
    CheckResult c = verdict("evolve.decay", op.sound, "M=" + brief(op.M) + " zeta=" + brief(op.zeta));
    c.details = to_json(op);
    if (!op.sound) c.failures.push_back("operator-norm certificate does not majorize the samples");
    out.push_back(c);
  } catch (const std::exception& e) {
    out.push_back(errored("evolve.decay", e));
  }
  try {
    const DecayCertificate cm = cameron_martin_certificate(ctx);
    for (std::size_t i = 0; i < cm.grid.size(); ++i) {
      decay.row(to_string(cm.mode), cm.grid[i].first, cm.grid[i].second, cm.measured[i], cm.bound[i]);
    }
    CheckResult c = verdict("evolve.cameron-martin", cm.sound,
                            "C=" + brief(cm.C) + " eta=" + brief(cm.eta) + " alpha=" + brief(cm.alpha) +
                                " kappa=" + brief(kappa(cm)),
                            false);
    c.details = to_json(cm);
    c.details["kappa"] = kappa(cm);
    c.details["certified_window"] = {*std::min_element(cfg.s_values.begin(), cfg.s_values.end()),
                                     *std::max_element(cfg.t_values.begin(), cfg.t_values.end())};
    out.push_back(c);
  } catch (const std::exception& e) {
    out.push_back(errored("evolve.cameron-martin", e, false));
  }
  ctx.emit(decay);
  return out;
}

// ---------------------------------------------------------------- covariance

std::vector<CheckResult> run_covariance(Context& ctx) {
  const auto& model = ctx.model;
  const auto& cfg = ctx.config;
  std::vector<CheckResult> out;

  CsvTable table("covariance", {"s", "t", "method", "nodes", "trace", "min_eigenvalue", "max_eigenvalue"});
  CsvTable matrices("covariance_matrix", {"kind", "s", "t", "row", "col", "value"});
  CsvTable flow("flow", {"s", "r", "t", "defect"});
  std::vector<std::string> psd_failures, flow_failures;
  double worst_flow = 0.0;
  std::map<std::pair<double, double>, Matrix> kernels;
  for (const auto& [s, t] : ctx.pairs()) {
    const CovarianceKernel k = q_kernel(model, s, t);
    const auto d = spectral(k.Q);
    const double lo = d.min_eigenvalue(), hi = d.max_eigenvalue();
    table.row(s, t, k.method, k.nodes, trace(k.Q), lo, hi);
    emit_matrix(matrices, "Q", s, t, k.Q);
    if (lo < -1e-12 * std::max(1.0, hi) || !is_symmetric(k.Q)) {
      psd_failures.push_back("Q " + pair_label(s, t) + " min eigenvalue " + brief(lo));
    }
    kernels[{s, t}] = k.Q;

    const double r = 0.5 * (s + t);
    const Matrix u = evolve(model, r, t).matrix;
    const Matrix split = q_kernel(model, r, t).Q + u * q_kernel(model, s, r).Q * u.transpose();
    const double defect = spectral_norm(Matrix(k.Q - split)) / std::max(1e-300, spectral_norm(k.Q));
    flow.row(s, r, t, defect);
    worst_flow = std::max(worst_flow, defect);
    if (!(defect <= cfg.tol_chain)) flow_failures.push_back("flow " + pair_label(s, t) + " defect " + brief(defect));
  }

  CheckResult psd = verdict("covariance.psd", psd_failures.empty(), std::to_string(kernels.size()) + " kernels");
  psd.failures = psd_failures;
  out.push_back(psd);
  CheckResult fl = verdict("covariance.flow", flow_failures.empty(), "max relative defect " + brief(worst_flow));
  fl.failures = flow_failures;
  fl.details = {{"max_defect", worst_flow}, {"tolerance", cfg.tol_chain}};
  out.push_back(fl);

  std::set<double> times(cfg.t_values.begin(), cfg.t_values.end());
  times.insert(cfg.s_values.begin(), cfg.s_values.end());
  CsvTable qinf("q_infinity", {"t", "s_star", "tail_bound", "trace", "min_eigenvalue", "max_eigenvalue"});
  std::map<double, Matrix> stationary;
  try {
    for (double t : times) {
      const CovarianceKernel k = q_infinity(model, t, cfg.tol_tail);
      const auto d = spectral(k.Q);
      qinf.row(t, k.s_star, k.tail_bound, trace(k.Q), d.min_eigenvalue(), d.max_eigenvalue());
      emit_matrix(matrices, "Q_infinity", k.s_star, t, k.Q);
      stationary[t] = k.Q;
    }
    CsvTable stat("stationarity", {"s", "t", "defect"});
    double worst = 0.0;
    std::vector<std::string> failures;
    for (const auto& [s, t] : ctx.pairs()) {
      const Matrix u = evolve(model, s, t).matrix;
      const Matrix& qt = stationary.at(t);
      const Matrix rhs = u * stationary.at(s) * u.transpose() + kernels.at({s, t});
      const double defect = spectral_norm(Matrix(qt - rhs)) / std::max(1.0, spectral_norm(qt));
      stat.row(s, t, defect);
      worst = std::max(worst, defect);
      if (!(defect <= cfg.tol_chain)) failures.push_back("stationarity " + pair_label(s, t) + " defect " + brief(defect));
    }
    ctx.emit(qinf);
    ctx.emit(stat);
    CheckResult c = verdict("covariance.stationarity", failures.empty(), "max relative defect " + brief(worst));
    c.failures = failures;
    c.details = {{"max_defect", worst}, {"tol_tail", cfg.tol_tail}};
    out.push_back(c);
  } catch (const std::exception& e) {
    ctx.emit(qinf);
    out.push_back(errored("covariance.stationarity", e));
  }
  ctx.emit(table);
  ctx.emit(matrices);
  ctx.emit(flow);

  CsvTable deriv("derivatives", {"kind", "s", "t", "probe", "fd", "formula", "abs", "rel"});
  const auto probes = make_probes(model.dim, std::min<std::size_t>(4, default_probe_count(model.dim)), cfg.seed);
  double worst = 0.0;
  std::vector<std::string> failures;
  for (const auto& [s, t] : ctx.pairs()) {
    for (std::size_t j = 0; j < probes.size(); ++j) {
      const DerivativeCheck dt = check_dt_quadratic_form(model, s, t, probes[j], cfg.fd_step);
      const DerivativeCheck ds = check_ds_quadratic_form(model, s, t, probes[j], cfg.fd_step);
      for (const auto& [kind, d] : {std::pair{"d/dt", dt}, std::pair{"d/ds", ds}}) {
        deriv.row(std::string(kind), s, t, j, d.fd, d.formula, d.abs, d.rel);
        const double score = d.abs / std::max(1.0, std::abs(d.formula));
        worst = std::max(worst, score);
        if (!(score <= cfg.tol_derivative)) {
          failures.push_back(std::string(kind) + " " + pair_label(s, t) + " probe " + std::to_string(j) + " |fd-formula| " +
                             brief(d.abs));
        }
      }
    }
  }
  ctx.emit(deriv);
  CheckResult dc = verdict("covariance.derivatives", failures.empty(), "max discrepancy " + brief(worst));
  dc.failures = failures;
  dc.details = {{"max_discrepancy", worst}, {"fd_step", cfg.fd_step}, {"tolerance", cfg.tol_derivative}};
  out.push_back(dc);
  return out;
}

// ---------------------------------------------------------------- invariance

std::vector<CheckResult> run_invariance(Context& ctx) {
  const auto& cfg = ctx.config;
  const std::size_t count = cfg.probe_count ? cfg.probe_count : default_probe_count(ctx.model.dim);
  const auto probes = make_probes(ctx.model.dim, count, cfg.seed);
  std::vector<std::pair<std::string, EvolutionSystem>> systems{{"gamma", gaussian_system(ctx.model, cfg.tol_tail)}};
  if (ctx.model.mode_one_scale) systems.emplace_back("shifted", nonunique_shifted_system(ctx.model, cfg.tol_tail));

  CsvTable table("invariance",
                 {"system", "s", "t", "probe", "lhs_re", "lhs_im", "rhs_re", "rhs_im", "discrepancy"});
  std::vector<CheckResult> out;
  for (const auto& [key, system] : systems) {
    const std::string name = "invariance." + key;
    try {
      const InvarianceReport rep = verify_invariance(system, ctx.model, ctx.pairs(), probes, cfg.tol_invariance);
      for (const auto& r : rep.rows) {
        table.row(system.label, r.s, r.t, r.probe, r.lhs.real(), r.lhs.imag(), r.rhs.real(), r.rhs.imag(),
                  r.discrepancy);
      }
      CheckResult c = verdict(name, rep.pass,
                              system.label + ": max discrepancy " + brief(rep.max_discrepancy) + " over " +
                                  std::to_string(rep.probe_count) + " probes");
      for (const auto& r : rep.rows) {
        if (!(r.discrepancy <= rep.tolerance)) {
          c.failures.push_back(pair_label(r.s, r.t) + " probe " + std::to_string(r.probe) + " discrepancy " +
                               brief(r.discrepancy));
        }
      }
      if (!(rep.form_agreement <= 1e-10)) c.failures.push_back("dual form disagrees by " + brief(rep.form_agreement));
      c.details = {{"system", system.label},
                   {"max_discrepancy", rep.max_discrepancy},
                   {"dual_discrepancy", rep.dual_discrepancy},
                   {"form_agreement", rep.form_agreement},
                   {"probe_count", rep.probe_count},
                   {"tolerance", rep.tolerance}};
      out.push_back(c);
    } catch (const std::exception& e) {
      out.push_back(errored(name, e));
    }
  }
  ctx.emit(table);
  return out;
}

// ---------------------------------------------------------------- diffcheck

std::vector<CheckResult> run_diffcheck(Context& ctx) {
  const auto& model = ctx.model;
  const auto& cfg = ctx.config;
  const int n = model.dim;
  const auto probes = make_probes(n, cfg.diff_probes + 1, cfg.seed);
  const Vector x = n == 1 ? Vector::Constant(1, 0.5) : Vector(Vector::LinSpaced(n, 0.5, -0.5));
  const double s = cfg.diff_s, t = cfg.diff_t;

  CsvTable table("diffcheck", {"probe", "fd_step", "discrepancy_s", "discrepancy_t", "discrepancy_s_half",
                               "discrepancy_t_half", "ratio_s", "ratio_t", "generator_re", "generator_im",
                               "generator_numeric_re", "generator_numeric_im", "generator_gap"});
  std::vector<std::string> disc_fail, ratio_fail, gen_fail;
  double worst_disc = 0.0, worst_gap = 0.0, lo_ratio = INFINITY, hi_ratio = -INFINITY;
  // Below this the central difference is dominated by rounding, not h^2.
  const double noise_floor = 100.0 * std::numeric_limits<double>::epsilon() / cfg.fd_step;
  std::size_t resolved = 0;
  for (std::size_t j = 0; j < cfg.diff_probes; ++j) {
    const TrigPolynomial phi = TrigPolynomial::exponential(probes[j]) + TrigPolynomial::cosine(probes[j + 1], 0.5);
    const DifferentiationReport rep = check_differentiation(model, s, t, phi, x, cfg.fd_step);
    const Complex closed = transported_generator(model, s, t, phi, x);
    const Complex numeric = transported_generator_numeric(model, s, t, phi, x);
    const double gap = std::abs(closed - numeric) / std::max(1.0, std::abs(closed));
    table.row(j, cfg.fd_step, rep.discrepancy_s, rep.discrepancy_t, rep.discrepancy_s_half, rep.discrepancy_t_half,
              rep.ratio_s, rep.ratio_t, closed.real(), closed.imag(), numeric.real(), numeric.imag(), gap);
    const std::string tag = "probe " + std::to_string(j);
    const double disc = std::max(rep.discrepancy_s, rep.discrepancy_t);
    worst_disc = std::max(worst_disc, disc);
    if (!(disc <= cfg.tol_derivative)) disc_fail.push_back(tag + " discrepancy " + brief(disc));
    for (const auto& [full, ratio] : {std::pair{rep.discrepancy_s, rep.ratio_s}, std::pair{rep.discrepancy_t, rep.ratio_t}}) {
      if (full < noise_floor) continue;
      ++resolved;
      lo_ratio = std::min(lo_ratio, ratio);
      hi_ratio = std::max(hi_ratio, ratio);
      if (!(ratio >= 3.5 && ratio <= 4.5)) ratio_fail.push_back(tag + " step-halving ratio " + brief(ratio));
    }
    worst_gap = std::max(worst_gap, gap);
    if (!(gap <= cfg.tol_derivative)) gen_fail.push_back(tag + " closed form vs numeric " + brief(gap));
  }
  ctx.emit(table);

  std::vector<CheckResult> out;
  CheckResult d = verdict("diffcheck.discrepancy", disc_fail.empty(),
                          std::to_string(cfg.diff_probes) + " probes, max discrepancy " + brief(worst_disc));
  d.failures = disc_fail;
  d.details = {{"max_discrepancy", worst_disc}, {"fd_step", cfg.fd_step}, {"tolerance", cfg.tol_derivative}};
  out.push_back(d);
  CheckResult o = verdict("diffcheck.order", resolved > 0 && ratio_fail.empty(),
                          resolved ? std::to_string(resolved) + " resolved differences, ratios in [" + brief(lo_ratio) +
                                         ", " + brief(hi_ratio) + "]"
                                   : "every discrepancy is below the rounding floor " + brief(noise_floor),
                          resolved > 0);
  o.failures = ratio_fail;
  o.details = {{"resolved", resolved},
               {"noise_floor", noise_floor},
               {"interval", {3.5, 4.5}}};
  if (resolved) {
    o.details["min_ratio"] = lo_ratio;
    o.details["max_ratio"] = hi_ratio;
  }
  out.push_back(o);
  CheckResult g = verdict("diffcheck.generator", gen_fail.empty(), "max relative gap " + brief(worst_gap));
  g.failures = gen_fail;
  g.details = {{"max_gap", worst_gap}, {"tolerance", cfg.tol_derivative}};
  out.push_back(g);

  try {
    const Vector h0 = probes[0];
    const Vector h1 = probes.size() > 1 ? probes[1] : probes[0];
    SmoothObservable obs;
    obs.value = [=](const Vector& y) { return std::cos(y.dot(h0)) + 0.5 * std::sin(y.dot(h1)); };
    obs.gradient = [=](const Vector& y) {
      return Vector(-std::sin(y.dot(h0)) * h0 + 0.5 * std::cos(y.dot(h1)) * h1);
    };
    const double norm = measured_norm(model, s, t, NormMode::CameronMartin);
    const GradientEstimateReport rep =
        gradient_estimate_check(model, s, t, obs, x, norm, cfg.mc_count, ctx.seed("gradient"));
    CsvTable grad("gradient", {"s", "t", "lhs", "rhs", "lhs_stderr", "rhs_stderr", "norm_factor", "count", "verdict"});
    grad.row(s, t, rep.lhs, rep.rhs, rep.lhs_stderr, rep.rhs_stderr, rep.norm_factor, rep.count,
             rep.pass ? Verdict::Pass : Verdict::Fail);
    ctx.emit(grad);
    CheckResult c = verdict("diffcheck.gradient", rep.pass, "lhs " + brief(rep.lhs) + " <= rhs " + brief(rep.rhs));
    if (!rep.pass) c.failures.push_back("gradient estimate lhs " + brief(rep.lhs) + " > rhs " + brief(rep.rhs));
    c.details = {{"lhs", rep.lhs}, {"rhs", rep.rhs}, {"norm_factor", norm}};
    out.push_back(c);
  } catch (const Error& e) {
    out.push_back(errored("diffcheck.gradient", e, e.code() != ErrorCode::FitFailed));
  }
  return out;
}

// ---------------------------------------------------------------- logsob

std::vector<CheckResult> run_logsob(Context& ctx) {
  const auto& model = ctx.model;
  const auto& cfg = ctx.config;
  std::vector<CheckResult> out;
  DecayCertificate cert;
  double k = 0.0;
  try {
    cert = cameron_martin_certificate(ctx);
    k = kappa(cert);
  } catch (const std::exception& e) {
    out.push_back(errored("logsob.inequality", e));
    return out;
  }
  const Matrix gamma = q_infinity(model, cfg.logsob_t, cfg.tol_tail).Q;
  const auto suite = logsob_probe_suite(model.dim);

  CsvTable table("logsob", {"t", "p", "phi", "method", "kappa", "lhs", "rhs", "slack", "lhs_error", "rhs_error",
                            "error", "verdict"});
  std::vector<std::string> failures, disagreements;
  double worst_z = 0.0;
  std::size_t index = 0;
  for (double p : cfg.logsob_p) {
    for (const auto& phi : suite) {
      const auto quad = entropy_gap(model, cfg.logsob_t, gamma, phi, p, k, EntropyMethod::quadrature());
      const auto mc = entropy_gap(model, cfg.logsob_t, gamma, phi, p, k,
                                  EntropyMethod::monte_carlo(cfg.logsob_count, ctx.seed("logsob", index++)));
      for (const auto* r : {&quad, &mc}) {
        table.row(r->t, r->p, r->phi, r->method, r->kappa, r->lhs, r->rhs, r->slack, r->lhs_error, r->rhs_error,
                  r->error, r->verdict);
        if (r->verdict != Verdict::Pass) {
          failures.push_back(r->phi + " p=" + format_number(p) + " " + r->method + " slack " + brief(r->slack) +
                             " error " + brief(r->error));
        }
      }
      if (phi.active() == 1) {
        for (const auto& [a, b, se] : {std::tuple{quad.lhs, mc.lhs, mc.lhs_error + quad.lhs_error},
                                       std::tuple{quad.rhs, mc.rhs, mc.rhs_error + quad.rhs_error}}) {
          const double z = se > 0.0 ? std::abs(a - b) / se : (a == b ? 0.0 : INFINITY);
          worst_z = std::max(worst_z, z);
          if (!(z <= 4.0)) {
            disagreements.push_back(phi.name + " p=" + format_number(p) + " quadrature " + brief(a) + " vs MC " +
                                    brief(b) + " (" + brief(z) + " stderr)");
          }
        }
      }
    }
  }
  ctx.emit(table);

  json cert_json = to_json(cert);
  cert_json["kappa"] = k;
  CheckResult c = verdict("logsob.inequality", failures.empty(),
                          std::to_string(suite.size()) + " functions x " + std::to_string(cfg.logsob_p.size()) +
                              " exponents, kappa " + brief(k));
  c.failures = failures;
  c.details = {{"certificate", cert_json}, {"t", cfg.logsob_t}};
  out.push_back(c);
  CheckResult a = verdict("logsob.agreement", disagreements.empty(),
                          "one-dimensional quadrature vs MC, max " + brief(worst_z) + " stderr");
  a.failures = disagreements;
  a.details = {{"max_z", worst_z}, {"limit", 4.0}};
  out.push_back(a);
  return out;
}

// ---------------------------------------------------------------- hyper

std::vector<CheckResult> run_hyper(Context& ctx) {
  const auto& model = ctx.model;
  const auto& cfg = ctx.config;
  std::vector<CheckResult> out;
  DecayCertificate cert;
  double k = 0.0;
  try {
    cert = cameron_martin_certificate(ctx);
    k = kappa(cert);
  } catch (const std::exception& e) {
    out.push_back(errored("hyper.lattice", e));
    return out;
  }
  const double s = cfg.hyper_s, t = cfg.hyper_t;
  const HyperInput in = hyper_input(model, s, t, cfg.tol_tail);
  const auto suite = hyper_probe_suite(model.dim);
  HyperOptions opts;
  opts.outer = cfg.hyper_count;
  opts.seed = ctx.seed("hyper");
  opts.asserted = cfg.hyper_assert;

  const std::vector<std::string> columns{"s", "t", "q", "p", "p_max", "lhs", "rhs", "slack", "stderr", "verdict", "phi"};
  CsvTable lattice("hyper", columns);
  CsvTable contraction("contraction", columns);
  std::vector<std::string> lattice_fail, contraction_fail;
  std::size_t above_curve = 0;
  for (double q : cfg.hyper_q) {
    for (double p : cfg.hyper_p) {
      for (const auto& probe : suite) {
        const HyperReport r = hyper_check(in, s, t, q, p, probe.phi, probe.name, k, opts);
        lattice.row(s, t, q, p, r.p_max, r.lhs, r.rhs, r.rhs - r.lhs, r.error(), r.verdict, r.phi);
        if (p > r.p_max * (1.0 + 1e-12)) ++above_curve;
        if (r.verdict == Verdict::Fail) {
          lattice_fail.push_back("q=" + format_number(q) + " p=" + format_number(p) + " p_max=" + brief(r.p_max) +
                                 " " + r.phi + " lhs " + brief(r.lhs) + " rhs " + brief(r.rhs));
        }
      }
    }
    HyperOptions same = opts;
    same.asserted = true;
    for (const auto& probe : suite) {
      const HyperReport r = hyper_check(in, s, t, q, q, probe.phi, probe.name, k, same);
      contraction.row(s, t, q, q, r.p_max, r.lhs, r.rhs, r.rhs - r.lhs, r.error(), r.verdict, r.phi);
      if (r.verdict != Verdict::Pass) {
        contraction_fail.push_back("q=p=" + format_number(q) + " " + r.phi + " lhs " + brief(r.lhs) + " rhs " +
                                   brief(r.rhs));
      }
    }
  }
  ctx.emit(lattice);
  ctx.emit(contraction);

  CsvTable sharp("sharpness", {"q", "p", "p_max", "lambda", "radius", "ratio", "error", "violation"});
  std::vector<std::string> evidence;
  json sharp_json = json::array();
  if (!cfg.sharpness_p.empty()) {
    RampFamily family;
    family.direction = ctx.e(0);
    for (double q : cfg.hyper_q) {
      const SharpnessTable st = sharpness_probe(in, s, t, q, cfg.sharpness_p, k, family);
      for (const auto& r : st.rows) sharp.row(q, r.p, r.p_max, r.lambda, r.radius, r.ratio, r.error, r.violation);
      for (std::size_t i = 0; i < cfg.sharpness_p.size(); ++i) {
        std::size_t violations = 0;
        for (const auto& r : st.rows) violations += (r.p == cfg.sharpness_p[i] && r.violation) ? 1 : 0;
        evidence.push_back("sharpness q=" + format_number(q) + " p=" + format_number(cfg.sharpness_p[i]) +
                           " max ratio " + format_number(st.max_ratio[i]) + " violations " + std::to_string(violations));
        sharp_json.push_back({{"q", q}, {"p", cfg.sharpness_p[i]}, {"max_ratio", st.max_ratio[i]},
                              {"violations", violations}});
      }
    }
  }
  ctx.emit(sharp);

  json cert_json = to_json(cert);
  cert_json["kappa"] = k;
  CheckResult l = verdict("hyper.lattice", lattice_fail.empty(),
                          std::to_string(suite.size()) + " probes, p_max " +
                              brief(p_max(cfg.hyper_q.front(), t - s, k)) + ", " + std::to_string(above_curve) +
                              " rows above the curve");
  l.failures = lattice_fail;
  if (!lattice_fail.empty()) l.failures.insert(l.failures.end(), evidence.begin(), evidence.end());
  l.details = {{"certificate", cert_json}, {"tau", t - s}, {"asserted", cfg.hyper_assert}};
  out.push_back(l);
  CheckResult c = verdict("hyper.contraction", contraction_fail.empty(), "p = q on every probe");
  c.failures = contraction_fail;
  out.push_back(c);
  if (!cfg.sharpness_p.empty()) {
    CheckResult sh;
    sh.name = "hyper.sharpness";
    sh.status = Verdict::Report;
    sh.asserted = false;
    std::string summary;
    for (const auto& line : evidence) summary += (summary.empty() ? "" : "; ") + line.substr(10);
    sh.summary = summary;
    sh.details = {{"rows", sharp_json}};
    out.push_back(sh);
  }
  return out;
}

// ---------------------------------------------------------------- spde

std::vector<CheckResult> run_spde(Context& ctx) {
  const auto& model = ctx.model;
  const auto& cfg = ctx.config;
  Vector x0 = ctx.e(0);
  if (!cfg.spde_x0.empty()) x0 = Eigen::Map<const Vector>(cfg.spde_x0.data(), static_cast<Eigen::Index>(cfg.spde_x0.size()));
  const PathEnsemble ens = simulate(model, cfg.spde_s, cfg.spde_t, x0, cfg.spde_h, cfg.spde_paths, ctx.seed("spde"));
  const LawCheckReport law = law_check(ens, model, cfg.z_limit);

  CsvTable table("spde", {"quantity", "i", "j", "sample", "predicted", "z"});
  std::vector<std::string> failures;
  const Eigen::Index d = law.mean.size();
  for (Eigen::Index i = 0; i < d; ++i) {
    table.row("mean", i, i, law.mean(i), law.predicted_mean(i), law.mean_z(i));
    if (!(law.mean_z(i) <= cfg.z_limit)) failures.push_back("mean[" + std::to_string(i) + "] z " + brief(law.mean_z(i)));
  }
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      table.row("cov", i, j, law.cov(i, j), law.predicted_cov(i, j), law.cov_z(i, j));
      if (!(law.cov_z(i, j) <= cfg.z_limit)) {
        failures.push_back("cov[" + std::to_string(i) + "," + std::to_string(j) + "] z " + brief(law.cov_z(i, j)));
      }
    }
  }

  Vector h = ctx.e(0);
  if (model.dim > 1) h = 0.8 * ctx.e(0) + 0.6 * ctx.e(1);
  const TrigPolynomial phi = TrigPolynomial::cosine(h);
  const double exact = apply_exact(model, cfg.spde_s, cfg.spde_t, phi, x0).real();
  const MCEstimate mc = sample_mean(ens.terminal(), [&](const Vector& y) { return phi(y).real(); });
  const double allowance = law.mean_bias * h.norm() + 0.5 * law.cov_bias * h.squaredNorm();
  const double gap = std::abs(mc.value - exact);
  const bool obs_ok = gap <= 4.0 * mc.std_error + allowance;
  table.row("observable", 0, 0, mc.value, exact, mc.std_error > 0.0 ? gap / mc.std_error : 0.0);
  ctx.emit(table);

  PathEnsemble head = ens;
  head.count = std::min<std::size_t>(ens.count, 64);
  for (auto& m : head.states) m = Matrix(m.leftCols(static_cast<Eigen::Index>(head.count)));
  CsvTable paths("spde_paths", {"path_id", "time", "coord", "value"});
  for (std::size_t p = 0; p < head.count; ++p) {
    for (std::size_t k = 0; k < head.times.size(); ++k) {
      for (Eigen::Index i = 0; i < d; ++i) paths.row(p, head.times[k], i, head.states[k](i, static_cast<Eigen::Index>(p)));
    }
  }
  ctx.emit(paths);

  std::vector<CheckResult> out;
  CheckResult l = verdict("spde.law", law.pass,
                          ens.scheme + ", " + std::to_string(ens.count) + " paths, max z mean " +
                              brief(law.max_mean_z) + " cov " + brief(law.max_cov_z));
  l.failures = failures;
  l.details = {{"scheme", ens.scheme},       {"step", ens.step},          {"steps", ens.steps},
               {"paths", ens.count},         {"max_mean_z", law.max_mean_z}, {"max_cov_z", law.max_cov_z},
               {"mean_bias", law.mean_bias}, {"cov_bias", law.cov_bias},  {"z_limit", cfg.z_limit}};
  out.push_back(l);
  CheckResult o = verdict("spde.observable", obs_ok,
                          "MC " + brief(mc.value) + " vs exact " + brief(exact) + " (stderr " + brief(mc.std_error) + ")");
  if (!obs_ok) o.failures.push_back("cos observable gap " + brief(gap) + " > 4 stderr " + brief(4.0 * mc.std_error));
  o.details = {{"mc", mc.value}, {"stderr", mc.std_error}, {"exact", exact}, {"allowance", allowance}};
  out.push_back(o);
  return out;
}

// ---------------------------------------------------------------- ergodic

std::vector<CheckResult> run_ergodic(Context& ctx) {
  const auto& cfg = ctx.config;
  CsvTable table("ergodic", {"s", "t", "value_re", "value_im", "limit_re", "limit_im", "distance", "schedule"});
  try {
    const TrigPolynomial phi = TrigPolynomial::exponential(ctx.e(0));
    const ErgodicReport rep =
        verify_ergodic_limit(ctx.model, cfg.ergodic_t, ctx.e(0), cfg.ergodic_s, phi, cfg.ergodic_tol, cfg.tol_tail);
    for (const auto& r : rep.rows) {
      table.row(r.s, rep.t, r.value.real(), r.value.imag(), rep.limit.real(), rep.limit.imag(), r.distance, r.schedule);
    }
    ctx.emit(table);
    CheckResult c = verdict("ergodic.limit", rep.pass,
                            "final distance " + brief(rep.final_distance) + (rep.monotone ? ", monotone" : ", not monotone"));
    if (!rep.monotone) c.failures.push_back("distances do not decrease along s");
    if (!rep.within_schedule) c.failures.push_back("a distance exceeds the decay schedule");
    if (!(rep.final_distance <= rep.tolerance)) {
      c.failures.push_back("final distance " + brief(rep.final_distance) + " > " + brief(rep.tolerance));
    }
    c.details = {{"final_distance", rep.final_distance}, {"tolerance", rep.tolerance}, {"monotone", rep.monotone},
                 {"within_schedule", rep.within_schedule}};
    return {c};
  } catch (const Error& e) {
    ctx.emit(table);
    return {errored("ergodic.limit", e, e.code() != ErrorCode::NoDecay)};
  }
}

using Runner = std::vector<CheckResult> (*)(Context&);

const std::map<std::string, Runner>& runners() {
  static const std::map<std::string, Runner> table{
      {"evolve", run_evolve}, {"covariance", run_covariance}, {"invariance", run_invariance},
      {"diffcheck", run_diffcheck}, {"logsob", run_logsob},   {"hyper", run_hyper},
      {"spde", run_spde},     {"ergodic", run_ergodic}};
  return table;
}

std::vector<double> times_used(const ExperimentConfig& c, const std::string& check) {
  std::vector<double> out;
  auto add = [&out](const std::vector<double>& v) { out.insert(out.end(), v.begin(), v.end()); };
  if (check == "evolve" || check == "covariance" || check == "invariance" || check == "logsob" || check == "hyper") {
    add(c.s_values);
    add(c.t_values);
  }
  if (check == "diffcheck") add({c.diff_s, c.diff_t});
  if (check == "logsob") out.push_back(c.logsob_t);
  if (check == "hyper") add({c.hyper_s, c.hyper_t});
  if (check == "spde") add({c.spde_s, c.spde_t});
  if (check == "ergodic") {
    add(c.ergodic_s);
    out.push_back(c.ergodic_t);
  }
  return out;
}

std::vector<std::string> selected(const std::string& subcommand, const ExperimentConfig& config) {
  if (subcommand != "report-all") return {subcommand};
  std::vector<std::string> out;
  for (const auto& name : check_names()) {
    if (config.checks.empty() || std::count(config.checks.begin(), config.checks.end(), name)) out.push_back(name);
  }
  return out;
}

bool is_config_error(ErrorCode code) {
  return code == ErrorCode::ConfigInvalid || code == ErrorCode::BadParameter || code == ErrorCode::WindowExceeded;
}

}  // namespace

const std::vector<std::string>& check_names() {
  static const std::vector<std::string> names{"evolve", "covariance", "invariance", "diffcheck",
                                              "logsob", "hyper",      "spde",       "ergodic"};
  return names;
}

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names = [] {
    auto v = check_names();
    v.push_back("report-all");
    return v;
  }();
  return names;
}

std::filesystem::path resolve_output(const ExperimentConfig& config, const RunOptions& options) {
  if (options.output) return *options.output;
  if (!options.ignore_environment) {
    if (const char* env = std::getenv("OULAB_OUTPUT_DIR"); env && *env) return env;
  }
  return config.output;
}

RunReport execute(const std::string& subcommand, const ExperimentConfig& config, const std::filesystem::path& output) {
  if (std::find(subcommands().begin(), subcommands().end(), subcommand) == subcommands().end()) {
    throw Error(ErrorCode::ConfigInvalid, "unknown subcommand '" + subcommand + "'");
  }
  validate(config);
  Context ctx{config, make_model(config.model, config.params), output, {}};
  const auto checks = selected(subcommand, config);
  for (const auto& check : checks) {
    for (double time : times_used(config, check)) {
      if (!ctx.model.window.contains(time)) {
        throw Error(ErrorCode::ConfigInvalid, check + ": time " + format_number(time) + " lies outside the window [" +
                                                  format_number(ctx.model.window.t_min) + ", " +
                                                  format_number(ctx.model.window.t_max) + "]");
      }
    }
  }
  if (ctx.model.dim < 2 && std::count(checks.begin(), checks.end(), "hyper")) {
    throw Error(ErrorCode::ConfigInvalid, "hyper needs n >= 2");
  }
  std::filesystem::create_directories(output);

  const int previous_workers = worker_count();
  set_worker_count(config.workers);
  RunReport report;
  report.subcommand = subcommand;
  report.config = config;
  for (const auto& check : checks) {
    const auto start = std::chrono::steady_clock::now();
    std::vector<CheckResult> results;
    try {
      results = runners().at(check)(ctx);
    } catch (const std::exception& e) {
      results.push_back(errored(check, e));
    }
    report.timings[check] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    report.checks.insert(report.checks.end(), results.begin(), results.end());
  }
  set_worker_count(previous_workers);
  report.artifacts = ctx.artifacts;
  report.artifacts.push_back("report.json");
  report.write(output);
  return report;
}

int run(const std::string& subcommand, const ExperimentConfig& config, std::ostream& out, std::ostream& err,
        const RunOptions& options) {
  RunReport report;
  try {
    report = execute(subcommand, config, resolve_output(config, options));
  } catch (const Error& e) {
    if (is_config_error(e.code())) {
      err << "ConfigInvalid: " << e.what() << "\n";
      return kExitConfigInvalid;
    }
    err << to_string(e.code()) << ": " << e.what() << "\n";
    return kExitCheckFailed;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "ConfigInvalid: " << e.what() << "\n";
    return kExitConfigInvalid;
  }
  for (const auto& c : report.checks) out << to_string(c.status) << "  " << c.name << "  " << c.summary << "\n";
  if (report.passed()) return kExitPass;
  err << "CheckFailed\n";
  for (const auto& c : report.checks) {
    if (!c.asserted || c.status != Verdict::Fail) continue;
    for (const auto& row : c.failures) err << "  " << c.name << ": " << row << "\n";
  }
  return kExitCheckFailed;
}

int run(const std::string& subcommand, const std::string& config_path, std::ostream& out, std::ostream& err,
        const RunOptions& options) {
  ExperimentConfig config;
  try {
    config = load_config(config_path);
  } catch (const Error& e) {
    err << "ConfigInvalid: " << e.what() << "\n";
    return kExitConfigInvalid;
  }
  return run(subcommand, config, out, err, options);
}

}  // namespace ou::cli
