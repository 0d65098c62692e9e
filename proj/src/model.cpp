#include "ou/model.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "ou/quadrature.hpp"

namespace ou {

namespace {

std::string format_double(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::BadParameter, what);
}

bool finite_window(const TimeWindow& w) {
  return std::isfinite(w.t_min) && std::isfinite(w.t_max) && w.t_min < w.t_max;
}

double raw_integral(const DiagonalCoefficients& c, int k, double s, double t) {
  if (c.a_integral) return c.a_integral(k, s, t);
  return integrate_adaptive([&](double tau) { return c.a(k, tau); }, s, t, 1e-14).value;
}

std::vector<double> sample_times(const TimeWindow& w, int count) {
  std::vector<double> out(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) out[i] = w.t_min + (w.t_max - w.t_min) * i / (count - 1);
  return out;
}

}  // namespace

bool ResultCache::find(Kind kind, double s, double t, double tol_a, double tol_b, Entry& out) const {
  std::lock_guard lock(mutex_);
  const auto it = entries_.find(Key{static_cast<double>(kind), s, t, tol_a, tol_b});
  if (it == entries_.end()) return false;
  out = it->second;
  return true;
}

void ResultCache::store(Kind kind, double s, double t, double tol_a, double tol_b, Entry entry) const {
  std::lock_guard lock(mutex_);
  if (entries_.size() >= kCapacity) entries_.clear();
  entries_.emplace(Key{static_cast<double>(kind), s, t, tol_a, tol_b}, std::move(entry));
}

void ResultCache::clear() const {
  std::lock_guard lock(mutex_);
  entries_.clear();
}

std::size_t ResultCache::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

double OperatorFamily::a(int k, double t) const { return diagonal().a(k, effective_time(t)); }

double OperatorFamily::b(int k, double t) const { return diagonal().b(k, effective_time(t)); }

double OperatorFamily::a_integral(int k, double s, double t) const {
  if (s > t) return -a_integral(k, t, s);
  if (s == t) return 0.0;
  const auto& c = diagonal();
  const double h = history_start;
  if (s >= h) return raw_integral(c, k, s, t);
  const double frozen = c.a(k, h);
  if (t <= h) return frozen * (t - s);
  return frozen * (h - s) + raw_integral(c, k, h, t);
}

Matrix OperatorFamily::A(double t) const {
  if (is_diagonal()) {
    Vector d(dim);
    for (int k = 1; k <= dim; ++k) d(k - 1) = a(k, t);
    return d.asDiagonal();
  }
  return dense().A(effective_time(t));
}

Matrix OperatorFamily::B(double t) const {
  if (is_diagonal()) {
    Vector d(dim);
    for (int k = 1; k <= dim; ++k) d(k - 1) = b(k, t);
    return d.asDiagonal();
  }
  return dense().B(effective_time(t));
}

Matrix OperatorFamily::Q(double t) const {
  const Matrix b_t = B(t);
  return symmetrize(Matrix(b_t * b_t.transpose()));
}

void OperatorFamily::require_window(double s, double t) const {
  if (!(s <= t) || !window.contains(s, t)) {
    std::ostringstream msg;
    msg << name << ": interval [" << s << ", " << t << "] outside window [" << window.t_min << ", "
        << window.t_max << "]";
    throw Error(ErrorCode::WindowExceeded, msg.str());
  }
}

double coefficient_supremum(const std::function<double(double)>& f, double lo, double hi, double step) {
  require(lo <= hi && step > 0.0, "supremum needs lo <= hi and step > 0");
  const auto points = static_cast<long>(std::ceil((hi - lo) / step));
  double best_x = lo;
  double best = f(lo);
  for (long i = 1; i <= points; ++i) {
    const double x = std::min(hi, lo + static_cast<double>(i) * step);
    const double v = f(x);
    if (v > best) {
      best = v;
      best_x = x;
    }
  }
  // golden-section on the bracket around the best grid point
  double a = std::max(lo, best_x - step);
  double b = std::min(hi, best_x + step);
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int it = 0; it < 100 && (b - a) > 1e-15 * std::max(1.0, std::abs(best_x)); ++it) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return std::max({best, fc, fd, f(lo), f(hi)});
}

OperatorFamily make_diagonal_paper(int n, double c1, double c2, TimeWindow window) {
  require(n >= 1, "diagonal-paper: n must be >= 1");
  require(c1 > 0.0, "diagonal-paper: c1 must be > 0");
  require(c2 > 1.0, "diagonal-paper: c2 must be > 1");
  require(finite_window(window), "diagonal-paper: window must be finite and nonempty");

  DiagonalCoefficients coeffs;
  coeffs.a = [c1](int k, double t) {
    return -(k * k + c1) / (std::pow(t, 2 * k) + 1.0);
  };
  coeffs.b = [c2](int k, double t) { return std::sin(k * t) + c2; };

  OperatorFamily f;
  f.name = "diagonal-paper";
  f.dim = n;
  f.window = window;
  f.history_start = window.t_min;
  f.coefficients = coeffs;
  f.noise_bound = 1.0 + c2;

  double window_sup = -std::numeric_limits<double>::infinity();
  double partial_sum = 0.0;
  for (int k = 1; k <= n; ++k) {
    auto ak = [&](double t) { return coeffs.a(k, t); };
    const double lambda = coefficient_supremum(ak, -50.0, 50.0);
    f.lambda_sup.push_back(lambda);
    window_sup = std::max(window_sup, coefficient_supremum(ak, window.t_min, window.t_max,
                                                           std::min(1e-3, (window.t_max - window.t_min) / 1e3)));
    partial_sum += f.noise_bound * f.noise_bound / std::abs(lambda);
  }
  f.decay = DecayBound{1.0, -window_sup};
  f.metadata["c1"] = format_double(c1);
  f.metadata["c2"] = format_double(c2);
  f.metadata["history"] = "coefficients frozen at t_min for earlier times";
  f.metadata["trace_partial_sum"] = format_double(partial_sum);
  f.metadata["window_decay_rate"] = format_double(-window_sup);
  return f;
}

OperatorFamily make_diagonal_constant(int n, double lambda, double b, TimeWindow window) {
  require(n >= 1, "diagonal-constant: n must be >= 1");
  require(lambda < 0.0, "diagonal-constant: lambda must be < 0");
  DiagonalCoefficients coeffs;
  coeffs.a = [lambda](int, double) { return lambda; };
  coeffs.b = [b](int, double) { return b; };
  coeffs.a_integral = [lambda](int, double s, double t) { return lambda * (t - s); };

  OperatorFamily f;
  f.name = "diagonal-constant";
  f.dim = n;
  f.window = window;
  f.coefficients = coeffs;
  f.closed_form = true;
  f.noise_bound = std::abs(b);
  f.decay = DecayBound{1.0, -lambda};
  f.hr_decay = CameronMartinBound{1.0, -lambda, 0.0};
  f.lambda_sup.assign(static_cast<std::size_t>(n), lambda);
  f.metadata["lambda"] = format_double(lambda);
  f.metadata["b"] = format_double(b);
  return f;
}

OperatorFamily make_scalar(int n, std::function<double(double)> a, std::function<Matrix(double)> B,
                           TimeWindow window, ScalarOptions options) {
  require(n >= 1, "scalar: n must be >= 1");
  require(finite_window(window), "scalar: window must be finite and nonempty");
  require(static_cast<bool>(a) && static_cast<bool>(B), "scalar: a and B are required");

  const double a0 = coefficient_supremum(a, window.t_min, window.t_max,
                                         std::min(1e-3, (window.t_max - window.t_min) / 1e4));
  if (options.require_negative_sup) {
    require(a0 < 0.0, "scalar: sup a must be < 0 for inequality experiments, got " + format_double(a0));
  }

  auto integral = options.a_integral;
  if (!integral) {
    integral = [a](double s, double t) { return integrate_adaptive(a, s, t, 1e-14).value; };
  }

  DenseCoefficients coeffs;
  coeffs.A = [a, n](double t) { return Matrix(a(t) * Matrix::Identity(n, n)); };
  coeffs.B = B;
  coeffs.evolution = [integral, n](double s, double t) {
    return Matrix(std::exp(integral(s, t)) * Matrix::Identity(n, n));
  };

  OperatorFamily f;
  f.name = "scalar";
  f.dim = n;
  f.window = window;
  f.coefficients = coeffs;
  f.closed_form = static_cast<bool>(options.a_integral);
  f.decay = DecayBound{1.0, -a0};

  const auto times = sample_times(window, 201);
  const Matrix b_first = B(times.front());
  require(b_first.rows() == n && b_first.cols() == n, "scalar: B(t) must be n x n");
  bool constant_b = true;
  for (double t : times) {
    const Matrix bt = B(t);
    f.noise_bound = std::max(f.noise_bound, spectral_norm(bt));
    constant_b = constant_b && (bt - b_first).norm() <= 1e-14 * std::max(1.0, b_first.norm());
  }
  if (constant_b) f.hr_decay = CameronMartinBound{1.0, -a0, 0.0};
  f.metadata["a_sup"] = format_double(a0);
  return f;
}

OperatorFamily make_parabolic_1d(int m, std::function<double(double, double)> a,
                                 std::function<double(double, double)> a0, TimeWindow window,
                                 std::function<Matrix(double)> B) {
  require(m >= 1, "parabolic-1d: need at least one interior point");
  require(finite_window(window), "parabolic-1d: window must be finite and nonempty");
  const double h = 1.0 / (m + 1);

  auto assemble = [a, a0, m, h](double t) {
    Matrix A = Matrix::Zero(m, m);
    for (int i = 0; i < m; ++i) {
      const double x = (i + 1) * h;
      const double left = a(t, x - h / 2);
      const double right = a(t, x + h / 2);
      A(i, i) = -(left + right) / (h * h) + a0(t, x);
      if (i > 0) A(i, i - 1) = left / (h * h);
      if (i + 1 < m) A(i, i + 1) = right / (h * h);
    }
    return A;
  };

  const auto times = sample_times(window, 201);
  double max_eig = -std::numeric_limits<double>::infinity();
  for (double t : times) {
    for (int j = 0; j <= 2 * (m + 1); ++j) {
      const double x = j * h / 2;
      require(a(t, x) > 0.0, "parabolic-1d: diffusion coefficient must be positive on the window");
      require(a0(t, x) <= 0.0, "parabolic-1d: reaction coefficient must be <= 0 on the window");
    }
    max_eig = std::max(max_eig, spectral(assemble(t)).max_eigenvalue());
  }

  DenseCoefficients coeffs;
  coeffs.A = assemble;
  const bool identity_noise = !B;
  coeffs.B = B ? B : [m](double) { return Matrix(Matrix::Identity(m, m)); };

  OperatorFamily f;
  f.name = "parabolic-1d";
  f.dim = m;
  f.window = window;
  f.history_start = window.t_min;
  f.coefficients = coeffs;
  // A(t) symmetric: ||U(t,s)|| <= exp(int lambda_max(A)), so M = 1.
  f.decay = DecayBound{1.0, -max_eig};
  for (double t : times) f.noise_bound = std::max(f.noise_bound, spectral_norm(coeffs.B(t)));
  if (identity_noise) f.hr_decay = CameronMartinBound{1.0, -max_eig, 0.0};
  f.metadata["grid_step"] = format_double(h);
  f.metadata["history"] = "coefficients frozen at t_min for earlier times";
  return f;
}

double nonunique_mode_one_antiderivative(double t) {
  const double r2 = std::numbers::sqrt2;
  const double log_term = 0.5 * std::log((t * t - r2 * t + 1.0) / (t * t + r2 * t + 1.0));
  return (log_term + std::atan(r2 * t + 1.0) + std::atan(r2 * t - 1.0) + std::numbers::pi) / (2.0 * r2);
}

OperatorFamily make_nonunique_demo(int n, TimeWindow window) {
  require(n >= 2, "nonunique-demo: n must be >= 2");
  DiagonalCoefficients coeffs;
  coeffs.a = [](int k, double t) {
    if (k == 1) return -t * t / (1.0 + t * t * t * t);
    return -static_cast<double>(k * k);
  };
  coeffs.b = [](int k, double t) { return k == 1 ? 1.0 / (1.0 + t * t) : 1.0; };
  coeffs.a_integral = [](int k, double s, double t) {
    if (k == 1) return -(nonunique_mode_one_antiderivative(t) - nonunique_mode_one_antiderivative(s));
    return -static_cast<double>(k * k) * (t - s);
  };

  OperatorFamily f;
  f.name = "nonunique-demo";
  f.dim = n;
  f.window = window;
  f.coefficients = coeffs;
  f.closed_form = true;
  f.noise_bound = 1.0;
  f.decay = DecayBound{1.0, 0.0};
  for (int k = 1; k <= n; ++k) {
    f.lambda_sup.push_back(coefficient_supremum([&](double t) { return coeffs.a(k, t); }, -50.0, 50.0));
  }
  f.tail_bound = [n](double t, double s_star) {
    double bound = s_star < 0.0 ? 1.0 / (3.0 * std::pow(-s_star, 3)) : std::numbers::pi / 2.0;
    for (int k = 2; k <= n; ++k) {
      const double rate = 2.0 * k * k;
      bound += std::exp(-rate * (t - s_star)) / rate;
    }
    return bound;
  };
  f.mode_one_scale = [](double t) { return std::exp(-nonunique_mode_one_antiderivative(t)); };

  // m_t through quadrature on (-inf, 0] as a cross-check of the closed form
  const auto tail = integrate_adaptive([&](double tau) { return coeffs.a(1, tau); },
                                       -std::numeric_limits<double>::infinity(), 0.0, 1e-13);
  f.metadata["m0_quadrature"] = format_double(std::exp(tail.value));
  f.metadata["m0_closed_form"] = format_double(f.mode_one_scale(0.0));
  f.metadata["mode_one_integral_total"] = format_double(-std::numbers::pi / std::numbers::sqrt2);
  return f;
}

const std::vector<ModelCatalogEntry>& model_catalog() {
  static const std::vector<ModelCatalogEntry> catalog = {
      {"diagonal-constant",
       {{"n", 8}, {"lambda", -1}, {"b", 1}, {"t_min", -50}, {"t_max", 50}},
       "constant diagonal model a_k = lambda, b_k = b; lambda=-1, b=1 is the DC reference model"},
      {"diagonal-paper",
       {{"n", 4}, {"c1", 1}, {"c2", 2}, {"t_min", -2}, {"t_max", 2}},
       "diagonal model a_k(t) = -(k^2+c1)/(t^{2k}+1), b_k(t) = sin(kt)+c2"},
      {"scalar",
       {{"n", 4}, {"a_mean", -1}, {"a_amp", 0}, {"a_freq", 1}, {"b", 1}, {"t_min", -20}, {"t_max", 20}},
       "A(t) = a(t) I with a(t) = a_mean + a_amp sin(a_freq t), B = b I"},
      {"parabolic-1d",
       {{"n", 5},
        {"diffusion", 1},
        {"diffusion_amp", 0.5},
        {"reaction", -1},
        {"reaction_amp", 0.5},
        {"frequency", 1},
        {"t_min", -5},
        {"t_max", 5}},
       "1-D Dirichlet finite differences of (a u')' + a0 u, a = diffusion (1 + diffusion_amp sin(frequency t) x), "
       "a0 = reaction (1 + reaction_amp cos(frequency t)), B = I"},
      {"nonunique-demo",
       {{"n", 3}, {"t_min", -10}, {"t_max", 10}},
       "a_1 = -t^2/(1+t^4) (sup 0, integrable), a_k = -k^2; two evolution systems of measures"},
  };
  return catalog;
}

OperatorFamily make_model(const std::string& name, const std::map<std::string, double>& params) {
  const std::string key = (name == "dc") ? "diagonal-constant" : name;
  const ModelCatalogEntry* entry = nullptr;
  for (const auto& e : model_catalog()) {
    if (e.name == key) entry = &e;
  }
  require(entry != nullptr, "unknown model '" + name + "'");
  std::map<std::string, double> p = entry->defaults;
  for (const auto& [k, v] : params) {
    require(p.count(k) == 1, "model '" + key + "' has no parameter '" + k + "'");
    p[k] = v;
  }
  const int n = static_cast<int>(p.at("n"));
  require(static_cast<double>(n) == p.at("n"), "parameter n must be an integer");
  const TimeWindow window{p.at("t_min"), p.at("t_max")};
  require(window.t_min < window.t_max, "window must satisfy t_min < t_max");

  if (key == "diagonal-constant") return make_diagonal_constant(n, p.at("lambda"), p.at("b"), window);
  if (key == "diagonal-paper") return make_diagonal_paper(n, p.at("c1"), p.at("c2"), window);
  if (key == "scalar") {
    const double mean = p.at("a_mean"), amp = p.at("a_amp"), freq = p.at("a_freq"), b = p.at("b");
    require(freq != 0.0, "scalar: a_freq must be nonzero");
    ScalarOptions opts;
    opts.a_integral = [=](double s, double t) {
      return mean * (t - s) - amp / freq * (std::cos(freq * t) - std::cos(freq * s));
    };
    return make_scalar(
        n, [=](double t) { return mean + amp * std::sin(freq * t); },
        [=](double) { return Matrix(b * Matrix::Identity(n, n)); }, window, opts);
  }
  if (key == "parabolic-1d") {
    const double d0 = p.at("diffusion"), d1 = p.at("diffusion_amp"), r0 = p.at("reaction"),
                 r1 = p.at("reaction_amp"), w = p.at("frequency");
    return make_parabolic_1d(
        n, [=](double t, double x) { return d0 * (1.0 + d1 * std::sin(w * t) * x); },
        [=](double t, double) { return r0 * (1.0 + r1 * std::cos(w * t)); }, window);
  }
  return make_nonunique_demo(n, window);
}

}  // namespace ou
