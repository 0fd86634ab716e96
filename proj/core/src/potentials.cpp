#include "mckv/potentials.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <sstream>

#include "mckv/errors.hpp"

namespace mckv {
namespace {

constexpr double kPi = std::numbers::pi;

// --- small polynomial calculus for the smooth cutoff -------------------------

struct Poly {
  std::vector<double> c;  // c[k] is the coefficient of t^k

  double operator()(double t) const {
    double v = 0.0;
    for (std::size_t k = c.size(); k-- > 0;) v = v * t + c[k];
    return v;
  }
  Poly derivative() const {
    Poly d;
    if (c.size() <= 1) return d;
    d.c.resize(c.size() - 1);
    for (std::size_t k = 1; k < c.size(); ++k) d.c[k - 1] = c[k] * double(k);
    return d;
  }
  Poly antiderivative() const {
    Poly a;
    a.c.resize(c.size() + 1, 0.0);
    for (std::size_t k = 0; k < c.size(); ++k) a.c[k + 1] = c[k] / double(k + 1);
    return a;
  }
};

double binomial(int n, int k) {
  double v = 1.0;
  for (int i = 1; i <= k; ++i) v = v * double(n - k + i) / double(i);
  return v;
}

// Even C^K cutoff: 1 on [-1,1], 0 outside [-2,2], polynomial smoothstep in
// between. Derivatives available up to any order (they vanish beyond 2K+1).
class SmoothCutoff {
 public:
  explicit SmoothCutoff(int order_K, int max_deriv) {
    // s(t) = int_0^t u^K (1-u)^K du / B(K+1, K+1), rising from 0 to 1 on [0,1]
    Poly p;
    p.c.resize(2 * order_K + 1, 0.0);
    for (int k = 0; k <= order_K; ++k)
      p.c[order_K + k] = binomial(order_K, k) * ((k % 2 == 0) ? 1.0 : -1.0);
    Poly s = p.antiderivative();
    const double norm = s(1.0);
    for (double& v : s.c) v /= norm;
    derivs_.push_back(s);
    for (int n = 0; n < max_deriv; ++n) derivs_.push_back(derivs_.back().derivative());
  }

  // n-th derivative of the cutoff at x.
  double eval(double x, int n) const {
    const double ax = std::abs(x);
    if (ax <= 1.0) return (n == 0) ? 1.0 : 0.0;
    if (ax >= 2.0) return 0.0;
    // chi(x) = s(2 - |x|) for positive x; chain rule gives (-1)^n, and the
    // even extension contributes another (-1)^n for negative x.
    double v = derivs_[std::size_t(n)](2.0 - ax);
    if (n % 2 == 1) v = -v;
    if (x < 0.0 && n % 2 == 1) v = -v;
    return v;
  }

 private:
  std::vector<Poly> derivs_;
};

// --- generic numeric scans ----------------------------------------------------

// Dense scan plus golden-section refinement of min f on [lo, hi].
double scan_min(const std::function<double(double)>& f, double lo, double hi, int n = 20000) {
  double best = std::numeric_limits<double>::infinity();
  double bx = lo;
  for (int i = 0; i <= n; ++i) {
    const double x = lo + (hi - lo) * double(i) / double(n);
    const double v = f(x);
    if (v < best) {
      best = v;
      bx = x;
    }
  }
  const double h = (hi - lo) / double(n);
  double a = std::max(lo, bx - h), b = std::min(hi, bx + h);
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < 80; ++it) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = f(x2);
    }
  }
  return std::min({best, f1, f2});
}

// Composite 16-point Gauss-Legendre on [0, x] with panels of width <= 0.5.
double integrate_from_zero(const std::function<double(double)>& f, double x) {
  static const double nodes[8] = {0.0950125098376374, 0.2816035507792589,
                                  0.4580167776572274, 0.6178762444026438,
                                  0.7554044083550030, 0.8656312023878318,
                                  0.9445750230732326, 0.9894009349916499};
  static const double weights[8] = {0.1894506104550685, 0.1826034150449236,
                                    0.1691565193950025, 0.1495959888165767,
                                    0.1246289712555339, 0.0951585116824928,
                                    0.0622535239386479, 0.0271524594117541};
  const double sign = (x < 0.0) ? -1.0 : 1.0;
  const double len = std::abs(x);
  const int panels = std::max(1, int(std::ceil(len / 0.5)));
  const double w = len / double(panels);
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double a = p * w, mid = a + 0.5 * w, half = 0.5 * w;
    double s = 0.0;
    for (int k = 0; k < 8; ++k)
      s += weights[k] * (f(sign * (mid + half * nodes[k])) + f(sign * (mid - half * nodes[k])));
    total += s * half;
  }
  return sign * total;
}

double support_radius_of(const std::function<double(double)>& w_prime, double sup) {
  if (sup <= 0.0) return 0.0;
  const double floor = 1e-12 * sup;
  double r = 0.0;
  for (double x = 0.0; x <= 40.0; x += 0.01)
    if (std::abs(w_prime(x)) > floor) r = x;
  return r + 0.01;
}

InteractionPotential make_zero_interaction() {
  InteractionPotential ip;
  ip.w = [](double) { return 0.0; };
  ip.w_prime = [](double) { return 0.0; };
  ip.w_second = [](double) { return 0.0; };
  ip.C_W = 0.0;
  ip.tail_p = std::numeric_limits<double>::infinity();
  ip.kind = PairKind::zero;
  return ip;
}

InteractionPotential make_hermite_interaction(double theta) {
  if (!(theta > 0.0)) throw ConfigError("hermite: theta must be positive");
  InteractionPotential ip;
  ip.w = [theta](double x) { return theta * (1.0 - std::exp(-0.5 * x * x)); };
  ip.w_prime = [theta](double x) { return theta * x * std::exp(-0.5 * x * x); };
  ip.w_second = [theta](double x) { return theta * (1.0 - x * x) * std::exp(-0.5 * x * x); };
  ip.C_W = 2.0 * theta * std::exp(-1.5);  // -min of W'' at x = sqrt(3)
  ip.l1_norm_wprime = 2.0 * theta;
  ip.sup_norm_wprime = theta * std::exp(-0.5);
  ip.tail_p = 0.95;  // squared tails decay like exp(-x^2); any p < 1 works
  ip.support_radius = support_radius_of(ip.w_prime, ip.sup_norm_wprime);
  ip.kind = PairKind::hermite;
  ip.theta = theta;
  return ip;
}

// W' = f0 + f_{delta,m} with f0(x) = -sqrt(2/pi) exp(-x^2/2) sin x and
// f_{delta,m}(x) = -delta sqrt(2/pi) exp(-x^2/2) sin(m x). Pass delta = 0
// for the plain f0 pair member.
InteractionPotential make_gauss_sine_interaction(double delta, double m) {
  const double amp = std::sqrt(2.0 / kPi);
  auto wp = [amp, delta, m](double x) {
    return -amp * std::exp(-0.5 * x * x) * (std::sin(x) + delta * std::sin(m * x));
  };
  auto ws = [amp, delta, m](double x) {
    const double e = std::exp(-0.5 * x * x);
    return -amp * e *
           ((std::cos(x) + delta * m * std::cos(m * x)) -
            x * (std::sin(x) + delta * std::sin(m * x)));
  };
  // W = int_0^|x| W' + shift, shifted so that min W = 0.
  const double w_min = scan_min([&](double x) { return integrate_from_zero(wp, x); }, 0.0, 12.0);
  auto w = [wp, w_min](double x) { return integrate_from_zero(wp, std::abs(x)) - w_min; };

  InteractionPotential ip;
  ip.w = w;
  ip.w_prime = wp;
  ip.w_second = ws;
  ip.C_W = -scan_min(ws, 0.0, 12.0);
  ip.l1_norm_wprime =
      2.0 * integrate_from_zero([&](double x) { return std::abs(wp(x)); }, 12.0);
  ip.sup_norm_wprime = -scan_min([&](double x) { return -std::abs(wp(x)); }, 0.0, 12.0);
  ip.tail_p = 0.95;
  ip.support_radius = support_radius_of(wp, ip.sup_norm_wprime);
  ip.kind = PairKind::gauss_sine;
  ip.fdm_delta = delta;
  ip.fdm_m = m;
  return ip;
}

ConfinementPotential make_quadratic_confinement(double alpha) {
  if (!(alpha > 0.0)) throw ConfigError("confinement: alpha must be positive");
  ConfinementPotential cp;
  cp.alpha = alpha;
  cp.C_V = alpha;
  cp.max_tilde_order = std::numeric_limits<int>::max();
  return cp;
}

// tilde_v(x) = kappa |x|^{J+1} chi(x): C^J but not C^{J+1} at the origin,
// even, compactly supported. chi is C^{J+3} so derivatives up to J+2 exist
// away from 0 and stay bounded.
ConfinementPotential make_nonsmooth_confinement(double alpha, double kappa, int J) {
  if (!(alpha > 0.0)) throw ConfigError("confinement: alpha must be positive");
  if (J < 2) throw ConfigError("nonsmooth_confinement_J: J must be >= 2");
  if (!(kappa > 0.0)) throw ConfigError("nonsmooth_confinement_J: kappa must be positive");
  const int max_order = J + 2;
  auto chi = std::make_shared<SmoothCutoff>(J + 3, max_order);

  auto tilde = [chi, kappa, J, max_order](double x, int n) -> double {
    if (n > max_order) throw ConfigError("tilde_v: derivative order not supported");
    const double ax = std::abs(x);
    if (ax >= 2.0) return 0.0;
    if (x == 0.0) return 0.0;  // one-sided limits differ only at order J+1
    // Leibniz on kappa * ax^{J+1} * chi(ax), then mirror for x < 0.
    double v = 0.0;
    double fall = 1.0;  // (J+1)! / (J+1-i)!
    for (int i = 0; i <= std::min(n, J + 1); ++i) {
      if (i > 0) fall *= double(J + 2 - i);
      v += binomial(n, i) * fall * std::pow(ax, double(J + 1 - i)) * chi->eval(ax, n - i);
    }
    v *= kappa;
    if (x < 0.0 && n % 2 == 1) v = -v;
    return v;
  };

  ConfinementPotential cp;
  cp.alpha = alpha;
  cp.tilde_v_deriv = tilde;
  cp.smoothness_J = J;
  cp.max_tilde_order = max_order;
  cp.c_tilde.assign(std::size_t(J) + 1, 0.0);
  for (int j = 2; j <= J; ++j)
    cp.c_tilde[std::size_t(j)] =
        -scan_min([&](double x) { return -std::abs(tilde(x, j)); }, 1e-9, 2.1);
  const double inf_v2 = scan_min([&](double x) { return tilde(x, 2); }, 1e-9, 2.1);
  cp.C_V = alpha + std::min(inf_v2, 0.0);
  if (!(cp.C_V > 0.0))
    throw ConfigError("nonsmooth_confinement_J: alpha + inf tilde_v'' <= 0; reduce kappa");
  return cp;
}

double get_param(const std::map<std::string, double>& params, const std::string& key,
                 double fallback) {
  auto it = params.find(key);
  return (it == params.end()) ? fallback : it->second;
}

void check_param_names(const std::map<std::string, double>& params,
                       std::initializer_list<const char*> allowed) {
  for (const auto& [k, v] : params) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || (k == a);
    if (!ok) throw ConfigError("builtin_model: unknown parameter '" + k + "'");
  }
}

PotentialModel assemble(ConfinementPotential cp, InteractionPotential ip, std::string id,
                        std::map<std::string, double> params) {
  PotentialModel pm;
  pm.confinement = std::move(cp);
  pm.interaction = std::move(ip);
  pm.lambda = pm.confinement.C_V - pm.interaction.C_W;
  pm.model_id = std::move(id);
  pm.params = std::move(params);
  if (!(pm.lambda > 0.0)) {
    std::ostringstream os;
    os << "builtin_model(" << pm.model_id << "): lambda = C_V - C_W = " << pm.lambda
       << " is not positive";
    throw ConfigError(os.str());
  }
  return pm;
}

}  // namespace

double confinement_eval(const ConfinementPotential& cp, double x, int order) {
  if (order < 0) throw ConfigError("confinement_eval: negative derivative order");
  if (cp.has_tilde() && order > cp.max_tilde_order)
    throw ConfigError("confinement_eval: derivative order exceeds available smoothness");
  double v = 0.0;
  switch (order) {
    case 0: v = 0.5 * cp.alpha * x * x; break;
    case 1: v = cp.alpha * x; break;
    case 2: v = cp.alpha; break;
    default: v = 0.0; break;
  }
  if (cp.has_tilde()) v += cp.tilde_v_deriv(x, order);
  return v;
}

double interaction_eval(const InteractionPotential& ip, double x, int order) {
  switch (order) {
    case 0: return ip.w(x);
    case 1: return ip.w_prime(x);
    case 2: return ip.w_second(x);
    default: throw ConfigError("interaction_eval: order must be 0, 1 or 2");
  }
}

std::vector<std::string> builtin_model_names() {
  return {"zero_interaction", "hermite", "hermite_pair_f0", "hermite_pair_f0_plus_fdm",
          "nonsmooth_confinement_J"};
}

PotentialModel builtin_model(const std::string& name,
                             const std::map<std::string, double>& params) {
  if (name == "zero_interaction") {
    check_param_names(params, {"alpha"});
    const double alpha = get_param(params, "alpha", 1.0);
    return assemble(make_quadratic_confinement(alpha), make_zero_interaction(), name, params);
  }
  if (name == "hermite") {
    check_param_names(params, {"alpha", "theta"});
    const double alpha = get_param(params, "alpha", 0.5);
    const double theta = get_param(params, "theta", 0.5);
    return assemble(make_quadratic_confinement(alpha), make_hermite_interaction(theta), name,
                    params);
  }
  if (name == "hermite_pair_f0") {
    check_param_names(params, {"alpha"});
    const double alpha = get_param(params, "alpha", 2.0);
    return assemble(make_quadratic_confinement(alpha), make_gauss_sine_interaction(0.0, 1.0),
                    name, params);
  }
  if (name == "hermite_pair_f0_plus_fdm") {
    check_param_names(params, {"alpha", "delta", "m"});
    const double alpha = get_param(params, "alpha", 2.0);
    const double delta = get_param(params, "delta", 0.1);
    const double m = get_param(params, "m", 3.0);
    return assemble(make_quadratic_confinement(alpha), make_gauss_sine_interaction(delta, m),
                    name, params);
  }
  if (name == "nonsmooth_confinement_J") {
    check_param_names(params, {"alpha", "kappa", "J"});
    // defaults put the kink-driven polynomial decay of F(pi) in charge of
    // the scan window [10, 40]: larger alpha damps the cutoff-transition
    // contributions, kappa stays below the C_V > 0 budget
    const double alpha = get_param(params, "alpha", 3.0);
    const double kappa = get_param(params, "kappa", 0.027);
    const int J = int(std::lround(get_param(params, "J", 2.0)));
    return assemble(make_nonsmooth_confinement(alpha, kappa, J), make_zero_interaction(), name,
                    params);
  }
  throw ConfigError("builtin_model: unknown model '" + name + "'");
}

std::string ValidationReport::to_string() const {
  std::ostringstream os;
  for (const auto& e : entries)
    os << (e.pass ? "[PASS] " : "[FAIL] ") << e.check
       << (e.detail.empty() ? "" : ": " + e.detail) << "\n";
  os << (overall ? "overall: PASS" : "overall: FAIL") << "\n";
  return os.str();
}

ValidationReport validate_assumptions(const PotentialModel& pm) {
  ValidationReport rep;
  auto add = [&](const std::string& check, bool pass, const std::string& detail = {}) {
    rep.entries.push_back({check, pass, detail});
    rep.overall = rep.overall && pass;
  };
  const auto& ip = pm.interaction;
  const auto& cp = pm.confinement;
  const double R = std::max(8.0, ip.support_radius);
  const int n = 10000;

  double even_w = 0.0, odd_wp = 0.0, even_vt = 0.0, min_w = 0.0, min_w2 = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double x = R * double(i) / double(n);
    even_w = std::max(even_w, std::abs(ip.w(x) - ip.w(-x)));
    odd_wp = std::max(odd_wp, std::abs(ip.w_prime(x) + ip.w_prime(-x)));
    if (cp.has_tilde())
      even_vt = std::max(even_vt, std::abs(cp.tilde_v_deriv(x, 0) - cp.tilde_v_deriv(-x, 0)));
    min_w = std::min(min_w, ip.w(x));
    min_w2 = std::min(min_w2, ip.w_second(x));
  }
  std::ostringstream d;
  d.precision(3);

  add("W evenness", even_w <= 1e-10);
  add("W' oddness", odd_wp <= 1e-10);
  add("tilde_V evenness", even_vt <= 1e-10);
  add("W nonnegative", min_w >= -1e-12);

  d.str("");
  d << "lambda = " << pm.lambda;
  add("lambda = C_V - C_W > 0", pm.lambda > 0.0, d.str());

  const double l1 = 2.0 * integrate_from_zero([&](double x) { return std::abs(ip.w_prime(x)); },
                                              std::max(R, 1.0));
  bool l1_ok = std::isfinite(l1);
  if (ip.l1_norm_wprime > 0.0) l1_ok = l1_ok && std::abs(l1 - ip.l1_norm_wprime) <= 0.01 * ip.l1_norm_wprime;
  d.str("");
  d << "numeric |W'|_1 = " << l1;
  add("W' integrable", l1_ok, d.str());
  add("W' bounded", std::isfinite(ip.sup_norm_wprime));

  const double vt_prime_0 = cp.has_tilde() ? cp.tilde_v_deriv(0.0, 1) : 0.0;
  add("tilde_V'(0) = 0", std::abs(vt_prime_0) <= 1e-10);

  bool ct_ok = true;
  for (double c : cp.c_tilde) ct_ok = ct_ok && std::isfinite(c);
  add("c_tilde_j finite", ct_ok);

  d.str("");
  d << "min W'' = " << min_w2 << ", -C_W = " << -ip.C_W;
  add("W'' >= -C_W", min_w2 >= -ip.C_W - 1e-8, d.str());
  return rep;
}

double mean_field_drift(const PotentialModel& pm, double x, const GridDensity& mu) {
  const double R = pm.interaction.support_radius;
  if (x < mu.grid.x_min - R || x > mu.grid.x_max + R)
    throw NumericError("mean_field_drift: x beyond grid coverage of the convolution");
  double conv = 0.0;
  if (pm.interaction.kind != PairKind::zero) {
    const double dx = mu.grid.spacing();
    const std::size_t n = mu.grid.n_points;
    for (std::size_t j = 0; j < n; ++j)
      conv += pm.interaction.w_prime(x - mu.grid.point(j)) * mu.values[j] *
              trapezoid_weight(j, n, dx);
  }
  return -confinement_eval(pm.confinement, x, 1) - 0.5 * conv;
}

double empirical_drift(const PotentialModel& pm, std::size_t i,
                       std::span<const double> positions) {
  if (positions.empty()) throw ConfigError("empirical_drift: empty ensemble");
  if (i >= positions.size()) throw ConfigError("empirical_drift: particle index out of range");
  const double xi = positions[i];
  double s = 0.0;
  if (pm.interaction.kind != PairKind::zero)
    for (double xj : positions) s += pm.interaction.w_prime(xi - xj);
  return -confinement_eval(pm.confinement, xi, 1) - 0.5 * s / double(positions.size());
}

}  // namespace mckv
