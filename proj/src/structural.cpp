#include "koforge/structural.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "koforge/error.hpp"
#include "koforge/transforms.hpp"

namespace koforge {

using nlohmann::json;
using Family = FunctionSpec::Family;

namespace {

constexpr double kEqTol = 1e-12;

bool eq(double a, double b) { return std::abs(a - b) <= kEqTol * std::max(1.0, std::abs(b)); }
bool lt(double a, double b) { return a < b && !eq(a, b); }

// (a, b) >= (0, 0) in the order t^a log^b t.
bool nondecreasing_tail(const PowerLaw& p) {
  if (eq(p.exponent, 0.0)) return p.log_exponent >= -kEqTol;
  return p.exponent > 0.0;
}
bool bounded_tail(const PowerLaw& p) {
  if (eq(p.exponent, 0.0)) return p.log_exponent <= kEqTol;
  return p.exponent < 0.0;
}

bool is_power(const FunctionSpec& f) { return f.family() == Family::power; }
bool is_constant(const FunctionSpec& f) { return f.family() == Family::constant; }

bool table_in(const json& j) {
  if (j.is_object()) {
    auto it = j.find("family");
    if (it != j.end() && *it == "table") return true;
    for (const auto& [k, v] : j.items())
      if (table_in(v)) return true;
  } else if (j.is_array()) {
    for (const auto& v : j)
      if (table_in(v)) return true;
  }
  return false;
}

ConditionEntry make(std::string name, Truth holds, Method method) {
  ConditionEntry e;
  e.name = std::move(name);
  e.holds = holds;
  e.method = method;
  return e;
}

// Table-backed functions are only known on a finite range; a positive answer is not trustworthy.
void downgrade_tables(ConditionEntry& e, std::initializer_list<const FunctionSpec*> fns) {
  if (e.holds != Truth::yes) return;
  for (const auto* f : fns)
    if (involves_table(*f)) {
      e.holds = Truth::inconclusive;
      e.method = Method::sampled;
      e.note = "depends on tabulated data beyond its sampled range";
      return;
    }
}

// First grid point where pred fails, if any.
template <class Pred>
std::optional<double> first_violation(const std::vector<double>& nodes, Pred pred) {
  for (double t : nodes)
    if (!pred(t)) return t;
  return std::nullopt;
}

ConditionEntry positivity_entry(const std::string& name, const FunctionSpec& g, const LogGrid& grid,
                                bool exact_yes) {
  if (exact_yes) return make(name, Truth::yes, Method::exact);
  auto bad = first_violation(grid.nodes(), [&](double t) {
    double lv = g.log_value(t);
    if (std::isnan(lv)) return g.value(t) > 0.0;
    return lv > -std::numeric_limits<double>::infinity();
  });
  ConditionEntry e = make(name, bad ? Truth::no : Truth::yes, Method::sampled);
  if (bad) e.witness = {*bad};
  return e;
}

// Slope of log g against log t over [t_a, t_b] on the grid.
double log_slope(const FunctionSpec& g, double t_a, double t_b, int n = 64) {
  std::vector<double> xs, ys;
  for (int i = 0; i <= n; ++i) {
    double t = t_a * std::pow(t_b / t_a, static_cast<double>(i) / n);
    double lv = g.log_value(t);
    if (std::isnan(lv)) lv = std::log(g.value(t));
    xs.push_back(std::log(t));
    ys.push_back(lv);
  }
  return fit_slope(xs, ys);
}

std::optional<double> power_c_positive(const FunctionSpec& f) {
  if (!is_power(f)) return std::nullopt;
  const auto& p = f.parameters();
  if (!(p[0] > 0.0)) return std::nullopt;
  return p[1];
}

ConditionEntry arithmetic(std::string name, bool holds, std::vector<double> params, std::string note = {}) {
  ConditionEntry e = make(std::move(name), holds ? Truth::yes : Truth::no, Method::exact);
  if (!holds) e.witness = std::move(params);
  e.note = std::move(note);
  return e;
}

// Growth of t^{beta/2} b^gamma (int_1^t b^lambda)^k at infinity.
struct GrowthCheck {
  Truth holds = Truth::inconclusive;
  Method method = Method::sampled;
  double slope = 0.0;
};

GrowthCheck bounded_growth(const FunctionSpec& b, double half_beta, double gamma, double lambda, bool with_integral,
                           const LogGrid& grid) {
  GrowthCheck out;
  if (b.hints().tail && !involves_table(b)) {
    PowerLaw bt = *b.hints().tail;
    PowerLaw total{half_beta + gamma * bt.exponent, gamma * bt.log_exponent};
    if (with_integral) {
      PowerLaw g{lambda * bt.exponent, lambda * bt.log_exponent};
      PowerLaw I{0.0, 0.0};
      if (!lt(g.exponent, -1.0)) {
        if (eq(g.exponent, -1.0)) {
          if (eq(g.log_exponent, -1.0)) I = {0.0, 0.0};  // log log t: treated as unbounded below
          else if (g.log_exponent > -1.0) I = {0.0, g.log_exponent + 1.0};
        } else {
          I = {g.exponent + 1.0, g.log_exponent};
        }
      }
      bool loglog = eq(g.exponent, -1.0) && eq(g.log_exponent, -1.0);
      total.exponent += I.exponent;
      total.log_exponent += I.log_exponent;
      out.method = Method::exact;
      out.slope = total.exponent;
      bool ok = bounded_tail(total);
      // A log log t factor breaks boundedness only when the rest is exactly constant.
      if (loglog && eq(total.exponent, 0.0) && eq(total.log_exponent, 0.0)) ok = false;
      out.holds = ok ? Truth::yes : Truth::no;
      return out;
    }
    out.method = Method::exact;
    out.slope = total.exponent;
    out.holds = bounded_tail(total) ? Truth::yes : Truth::no;
    return out;
  }
  const double hi = grid.hi, lo = std::max(1.0, hi * 1e-3);
  const int n = 96;
  std::vector<double> xs, ys;
  double I = 0.0, prev = 1.0;
  if (with_integral) I = integrate([&](double s) { return std::pow(b.value(s), lambda); }, 1.0, lo, 1e-10);
  prev = lo;
  for (int i = 0; i <= n; ++i) {
    double t = lo * std::pow(hi / lo, static_cast<double>(i) / n);
    if (with_integral && t > prev)
      I += integrate([&](double s) { return std::pow(b.value(s), lambda); }, prev, t, 1e-10);
    prev = t;
    double ly = half_beta * std::log(t) + gamma * b.log_value(t);
    if (with_integral) ly += std::log(I);
    xs.push_back(std::log(t));
    ys.push_back(ly);
  }
  out.slope = fit_slope(xs, ys);
  out.holds = out.slope <= 0.02 ? Truth::yes : Truth::no;
  return out;
}

std::optional<double> ell_power_exponent(const FunctionSpec& ell) {
  if (is_constant(ell) && ell.parameters()[0] > 0.0) return 0.0;
  if (auto a = power_c_positive(ell)) return *a;
  return std::nullopt;
}

Truth combine_all(std::initializer_list<Truth> ts) {
  bool inc = false;
  for (Truth t : ts) {
    if (t == Truth::no) return Truth::no;
    if (t == Truth::inconclusive) inc = true;
  }
  return inc ? Truth::inconclusive : Truth::yes;
}

ConditionEntry integrability_entry(const std::string& name, const FunctionSpec& g) {
  ConditionEntry e = make(name, Truth::inconclusive, Method::sampled);
  ConvergenceVerdict v0, vi;
  try {
    v0 = classify_improper(g, Endpoint::zero);
    vi = classify_improper(g, Endpoint::infinity);
  } catch (const Error& ex) {
    e.note = ex.what();
    return e;
  }
  bool exact = v0.method == VerdictMethod::exact_exponent && vi.method == VerdictMethod::exact_exponent;
  e.method = exact ? Method::exact : Method::sampled;
  if (v0.verdict == Verdict::divergent) {
    e.holds = Truth::no;
    e.witness = {v0.evidence.empty() ? 1e-6 : v0.evidence.back().limit};
    e.note = "not integrable at 0";
  } else if (vi.verdict == Verdict::convergent) {
    e.holds = Truth::no;
    e.witness = {vi.evidence.empty() ? 1e6 : vi.evidence.back().limit};
    e.note = "integrable at infinity";
  } else if (v0.verdict == Verdict::convergent && vi.verdict == Verdict::divergent) {
    e.holds = Truth::yes;
  }
  return e;
}

}  // namespace

std::string to_string(Truth t) {
  switch (t) {
    case Truth::yes: return "yes";
    case Truth::no: return "no";
    case Truth::inconclusive: return "inconclusive";
  }
  return "?";
}
std::string to_string(Method m) { return m == Method::exact ? "exact" : "sampled"; }

const ConditionEntry& ConditionReport::at(const std::string& name) const {
  for (const auto& e : entries)
    if (e.name == name) return e;
  throw PreconditionError("no condition named '" + name + "' in report");
}
bool ConditionReport::contains(const std::string& name) const {
  return std::any_of(entries.begin(), entries.end(), [&](const auto& e) { return e.name == name; });
}
bool ConditionReport::any_no() const {
  return std::any_of(entries.begin(), entries.end(), [](const auto& e) { return e.holds == Truth::no; });
}
void ConditionReport::merge(const ConditionReport& other) {
  entries.insert(entries.end(), other.entries.begin(), other.entries.end());
}
json ConditionReport::to_json() const {
  json out = json::object();
  for (const auto& e : entries) {
    json j = {{"holds", to_string(e.holds)},
              {"constant", e.constant ? json(*e.constant) : json(nullptr)},
              {"witness", e.witness.empty() ? json(nullptr) : json(e.witness)},
              {"method", to_string(e.method)}};
    if (!e.note.empty()) j["note"] = e.note;
    out[e.name] = j;
  }
  return out;
}

void StructuralProfile::normalize() {
  if (!(lambda_b > 0.0)) throw PreconditionError("lambda_b must be positive");
  if (!(c_increasing_tolerance > 0.0)) throw PreconditionError("c_increasing_tolerance must be positive");
  if (beta < -2.0) {
    warnings.push_back("beta=" + std::to_string(beta) + " clamped to -2; smaller values give the same estimates");
    beta = -2.0;
  }
}

json StructuralProfile::to_json() const {
  json j = {{"phi", phi.to_json()},         {"ell", ell.to_json()},       {"f", f.to_json()},
            {"b_tilde", b_tilde.to_json()}, {"theta", theta},             {"lambda_b", lambda_b},
            {"beta", beta},                 {"mu", mu},                   {"A_bound", A_bound},
            {"delta", delta},               {"chi", chi},                 {"omega", omega},
            {"c_increasing_tolerance", c_increasing_tolerance}};
  if (rho) j["rho"] = rho->to_json();
  if (g_fn) j["g_fn"] = g_fn->to_json();
  if (h_fn) j["h_fn"] = h_fn->to_json();
  return j;
}

bool involves_table(const FunctionSpec& fn) {
  if (fn.family() == Family::table) return true;
  if (fn.family() != Family::composite) return false;
  return table_in(fn.to_json());
}

CIncreasingEstimate estimate_c_increasing(const FunctionSpec& fn, const LogGrid& grid, double cap) {
  CIncreasingEstimate out;
  double run_max = -std::numeric_limits<double>::infinity(), run_arg = 0.0;
  double best = 0.0;
  for (double t : grid.nodes()) {
    double lv = fn.log_value(t);
    if (std::isnan(lv)) {
      double v = fn.value(t);
      if (!(v > 0.0)) throw PreconditionError("C-increasing check needs a positive function; got " +
                                              std::to_string(v) + " at t=" + std::to_string(t));
      lv = std::log(v);
    }
    if (lv == -std::numeric_limits<double>::infinity())
      throw PreconditionError("C-increasing check needs a positive function; got 0 at t=" + std::to_string(t));
    if (lv > run_max) {
      run_max = lv;
      run_arg = t;
    }
    if (run_max - lv > best) {
      best = run_max - lv;
      out.witness = {run_arg, t};
    }
  }
  out.constant = std::exp(best);
  out.holds = best <= std::log(cap);
  return out;
}

ConditionEntry c_increasing_entry(const std::string& name, const FunctionSpec& g, const LogGrid& grid) {
  ConditionEntry e = make(name, Truth::inconclusive, Method::sampled);
  CIncreasingEstimate est;
  try {
    est = estimate_c_increasing(g, grid);
  } catch (const PreconditionError& ex) {
    e.holds = Truth::no;
    e.note = ex.what();
    for (double t : grid.nodes())
      if (!(g.value(t) > 0.0)) {
        e.witness = {t};
        break;
      }
    return e;
  }
  e.constant = std::min(est.constant, kCIncreasingCap);
  const auto& h = g.hints();
  if (h.origin_exponent && h.tail && !involves_table(g)) {
    e.method = Method::exact;
    bool ok = *h.origin_exponent >= -kEqTol && nondecreasing_tail(*h.tail);
    e.holds = ok ? Truth::yes : Truth::no;
    if (!ok) {
      if (est.witness.first < est.witness.second) e.witness = {est.witness.first, est.witness.second};
      else e.witness = {grid.lo, grid.hi};
    }
    return e;
  }
  e.holds = est.holds ? Truth::yes : Truth::no;
  if (!est.holds) e.witness = {est.witness.first, est.witness.second};
  downgrade_tables(e, {&g});
  return e;
}

ConditionReport check_phi(const StructuralProfile& p, const LogGrid& grid) {
  ConditionReport r;
  const FunctionSpec& phi = p.phi;
  const auto nodes = grid.nodes();

  // Phi0: phi' > 0
  {
    ConditionEntry e = make("Phi0", Truth::inconclusive, Method::sampled);
    const auto& par = phi.parameters();
    bool decided = true;
    switch (phi.family()) {
      case Family::power:
        e.holds = (par[0] > 0 && par[1] > 0) ? Truth::yes : Truth::no;
        break;
      case Family::mean_curvature:
      case Family::exp_power:
      case Family::sinh:
        e.holds = Truth::yes;
        break;
      case Family::constant:
        e.holds = Truth::no;
        break;
      case Family::power_log:
        if (par[0] > 0 && par[1] > 0 && par[2] >= 0) e.holds = Truth::yes;
        else decided = false;
        break;
      default:
        decided = false;
    }
    if (decided) {
      e.method = Method::exact;
      if (e.holds == Truth::no) e.witness = {nodes.front()};
    } else {
      auto bad = first_violation(nodes, [&](double t) { return phi.derivative(t) > 0.0; });
      e.holds = bad ? Truth::no : Truth::yes;
      if (bad) e.witness = {*bad};
      downgrade_tables(e, {&phi});
    }
    r.entries.push_back(e);
  }

  // Phi1: phi(t) <= A t^delta
  {
    ConditionEntry e = make("Phi1", Truth::inconclusive, Method::sampled);
    const double A = p.A_bound, d = p.delta;
    if (!(d > 0.0) || !(A > 0.0)) {
      e.note = "needs A_bound > 0 and delta > 0";
    } else if (is_power(phi) && phi.parameters()[0] > 0) {
      const double c = phi.parameters()[0], a = phi.parameters()[1];
      e.method = Method::exact;
      e.constant = A;
      if (eq(a, d)) {
        e.holds = c <= A * (1 + kEqTol) ? Truth::yes : Truth::no;
        if (e.holds == Truth::no) e.witness = {1.0};
      } else {
        e.holds = Truth::no;
        double ts = std::pow(A / c, 1.0 / (a - d));
        e.witness = {a > d ? 2.0 * ts : 0.5 * ts};
      }
    } else {
      double worst = -std::numeric_limits<double>::infinity(), arg = nodes.front();
      for (double t : nodes) {
        double x = phi.log_value(t) - std::log(A) - d * std::log(t);
        if (std::isnan(x)) x = std::log(phi.value(t) / A) - d * std::log(t);
        if (x > worst) {
          worst = x;
          arg = t;
        }
      }
      e.constant = A * std::exp(worst);
      e.holds = worst <= 1e-12 ? Truth::yes : Truth::no;
      if (e.holds == Truth::no) e.witness = {arg};
      downgrade_tables(e, {&phi});
    }
    r.entries.push_back(e);
  }

  // Phi2: phi >= C t phi'
  {
    ConditionEntry e = make("Phi2", Truth::inconclusive, Method::sampled);
    if (is_power(phi) && phi.parameters()[0] > 0 && phi.parameters()[1] > 0) {
      e.method = Method::exact;
      e.holds = Truth::yes;
      e.constant = 1.0 / phi.parameters()[1];
    } else if (phi.family() == Family::mean_curvature) {
      e.method = Method::exact;
      e.holds = Truth::yes;
      e.constant = 1.0;
    } else if (phi.family() == Family::exp_power) {
      // phi - t phi' = -2 t^3 e^{t^2} < 0, and the ratio 1/(1+2t^2) tends to 0.
      e.method = Method::exact;
      e.holds = Truth::no;
      for (int k = 1; k < 64; ++k) {
        double t = std::exp2(k);
        if (phi.value(t) - t * phi.derivative(t) < 0) {
          e.witness = {t};
          break;
        }
      }
    } else {
      double worst = std::numeric_limits<double>::infinity(), arg = nodes.front();
      for (double t : nodes) {
        double d1 = phi.derivative(t);
        if (!(d1 > 0.0)) continue;
        double ratio = phi.value(t) / (t * d1);
        if (ratio < worst) {
          worst = ratio;
          arg = t;
        }
      }
      if (std::isinf(worst)) worst = 1.0;
      e.constant = worst;
      e.holds = worst >= 1e-6 ? Truth::yes : Truth::no;
      if (e.holds == Truth::no) e.witness = {arg};
      downgrade_tables(e, {&phi});
    }
    r.entries.push_back(e);
  }
  return r;
}

ConditionReport check_grad_ell(const StructuralProfile& p, const LogGrid& grid) {
  ConditionReport r;
  const FunctionSpec& ell = p.ell;
  const auto& par = ell.parameters();
  const auto fam = ell.family();
  bool exact_pos = (fam == Family::power || fam == Family::constant || fam == Family::exponential ||
                    fam == Family::power_log) &&
                   par[0] > 0.0;
  exact_pos = exact_pos || fam == Family::mean_curvature || fam == Family::exp_power;
  ConditionEntry l1 = positivity_entry("L1", ell, grid, exact_pos);
  downgrade_tables(l1, {&ell});
  r.entries.push_back(l1);

  if (l1.holds == Truth::no) {
    ConditionEntry l2 = make("L2", Truth::no, Method::sampled);
    l2.witness = l1.witness;
    l2.note = "ell is not positive";
    r.entries.push_back(l2);
  } else if (fam == Family::exponential && par[0] > 0.0) {
    ConditionEntry l2 = c_increasing_entry("L2", ell, grid);
    l2.method = Method::exact;
    l2.holds = par[1] >= 0.0 ? Truth::yes : Truth::no;
    if (l2.holds == Truth::no && l2.witness.empty()) l2.witness = {grid.lo, grid.hi};
    r.entries.push_back(l2);
  } else {
    r.entries.push_back(c_increasing_entry("L2", ell, grid));
  }

  // L3: ell(t) >= C t^chi, i.e. ell / t^chi bounded below by a positive constant.
  ConditionEntry l3 = make("L3", Truth::inconclusive, Method::sampled);
  if (l1.holds == Truth::no) {
    l3.holds = Truth::no;
    l3.witness = l1.witness;
  } else {
    FunctionSpec g = ell * FunctionSpec::power(1.0, -p.chi);
    const auto nodes = grid.nodes();
    double mn = std::numeric_limits<double>::infinity(), arg = nodes.front();
    for (double t : nodes) {
      double v = std::exp(g.log_value(t));
      if (v < mn) {
        mn = v;
        arg = t;
      }
    }
    l3.constant = mn;
    const auto& h = g.hints();
    if (h.origin_exponent && h.tail && !involves_table(ell)) {
      l3.method = Method::exact;
      bool ok = *h.origin_exponent <= kEqTol && nondecreasing_tail(*h.tail);
      l3.holds = ok ? Truth::yes : Truth::no;
      if (!ok) l3.witness = {*h.origin_exponent > kEqTol ? nodes.front() : nodes.back()};
    } else {
      double s0 = log_slope(g, grid.lo, grid.lo * 1e3);
      double s1 = log_slope(g, grid.hi * 1e-3, grid.hi);
      bool ok = mn > 0.0 && s0 <= 0.02 && s1 >= -0.02;
      l3.holds = ok ? Truth::yes : Truth::no;
      if (!ok) l3.witness = {s0 > 0.02 ? nodes.front() : s1 < -0.02 ? nodes.back() : arg};
      downgrade_tables(l3, {&ell});
    }
  }
  r.entries.push_back(l3);
  return r;
}

ConditionReport check_theta(const StructuralProfile& p, const LogGrid& grid) {
  ConditionReport r;
  FunctionSpec inv_ell = p.ell.pow(-1.0);
  FunctionSpec g1 = p.phi.derivative_spec() * inv_ell * FunctionSpec::power(1.0, p.theta);
  FunctionSpec g2 = p.phi * inv_ell * FunctionSpec::power(1.0, p.theta - 1.0);
  ConditionEntry e1 = c_increasing_entry("theta_1", g1, grid);
  ConditionEntry e2 = c_increasing_entry("theta_2", g2, grid);
  downgrade_tables(e1, {&p.phi, &p.ell});
  downgrade_tables(e2, {&p.phi, &p.ell});
  r.entries.push_back(e1);
  r.entries.push_back(e2);
  return r;
}

ConditionReport check_phi_ell(const StructuralProfile& p, const LogGrid& grid) {
  ConditionReport r;
  FunctionSpec ratio = p.phi * p.ell.pow(-1.0);
  {
    ConditionEntry e = make("phi_ell_1", Truth::inconclusive, Method::sampled);
    if (ratio.origin_exponent() && !involves_table(ratio)) {
      e.method = Method::exact;
      e.holds = *ratio.origin_exponent() > kEqTol ? Truth::yes : Truth::no;
    } else {
      double s = log_slope(ratio, grid.lo, grid.lo * 10.0);
      e.holds = s > 0.02 ? Truth::yes : Truth::no;
      downgrade_tables(e, {&p.phi, &p.ell});
    }
    if (e.holds == Truth::no) e.witness = {grid.lo};
    r.entries.push_back(e);
  }
  for (Kernel k : {Kernel::K, Kernel::Khat}) {
    ConditionEntry e = integrability_entry(k == Kernel::K ? "phi_ell_2" : "phi_ell_3",
                                           kernel_integrand(p.phi, p.ell, k));
    downgrade_tables(e, {&p.phi, &p.ell});
    r.entries.push_back(e);
  }
  return r;
}

ConditionReport check_b_tilde(const StructuralProfile& p, const LogGrid& grid) {
  ConditionReport r;
  const FunctionSpec& b = p.b_tilde;
  const auto fam = b.family();
  const auto& par = b.parameters();
  bool exact_pos =
      (fam == Family::power || fam == Family::constant || fam == Family::exponential || fam == Family::power_log) &&
      par[0] > 0.0;
  ConditionEntry pos = positivity_entry("b_positive", b, grid, exact_pos);
  downgrade_tables(pos, {&b});
  r.entries.push_back(pos);

  ConditionEntry dec = make("b_eventually_nonincreasing", Truth::inconclusive, Method::exact);
  if (fam == Family::power && par[0] > 0.0) {
    dec.holds = par[1] <= 0.0 ? Truth::yes : Truth::no;
  } else if (fam == Family::constant) {
    dec.holds = Truth::yes;
  } else if (fam == Family::exponential && par[0] > 0.0) {
    dec.holds = par[1] <= 0.0 ? Truth::yes : Truth::no;
  } else {
    dec.method = Method::sampled;
    auto nodes = grid.nodes();
    std::optional<double> bad;
    for (double t : nodes) {
      if (t < 1e3) continue;
      double v = b.value(t);
      if (b.derivative(t) > 1e-9 * std::abs(v) / t + 1e-300) {
        bad = t;
        break;
      }
    }
    dec.holds = bad ? Truth::no : Truth::yes;
    if (bad) dec.witness = {*bad};
    downgrade_tables(dec, {&b});
  }
  if (dec.holds == Truth::no && dec.witness.empty()) dec.witness = {grid.hi};
  r.entries.push_back(dec);

  ConditionEntry ni = make("b_lambda_not_integrable", Truth::inconclusive, Method::sampled);
  if (pos.holds == Truth::no) {
    ni.holds = Truth::no;
    ni.witness = pos.witness;
    ni.note = "b_tilde is not positive";
  } else {
    try {
      ConvergenceVerdict v = classify_improper(b.pow(p.lambda_b), Endpoint::infinity);
      ni.method = v.method == VerdictMethod::exact_exponent ? Method::exact : Method::sampled;
      ni.holds = v.verdict == Verdict::divergent  ? Truth::yes
                 : v.verdict == Verdict::convergent ? Truth::no
                                                    : Truth::inconclusive;
      if (ni.holds == Truth::no) ni.witness = {v.evidence.empty() ? grid.hi : v.evidence.back().limit};
    } catch (const Error& ex) {
      ni.note = ex.what();
    }
    downgrade_tables(ni, {&b});
  }
  r.entries.push_back(ni);
  return r;
}

std::string to_string(RegimeKind k) {
  switch (k) {
    case RegimeKind::theta_beta_mu: return "theta_beta_mu";
    case RegimeKind::theta_beta_mu_prime: return "theta_beta_mu_prime";
    case RegimeKind::blowup_balance: return "blowup_balance";
    case RegimeKind::p_laplacian_power: return "p_laplacian_power";
    case RegimeKind::mean_curvature_power: return "mean_curvature_power";
    case RegimeKind::rho_blowup_balance: return "rho_blowup_balance";
  }
  return "?";
}

RegimeKind regime_kind_from_string(const std::string& s) {
  for (RegimeKind k : {RegimeKind::theta_beta_mu, RegimeKind::theta_beta_mu_prime, RegimeKind::blowup_balance,
                       RegimeKind::p_laplacian_power, RegimeKind::mean_curvature_power,
                       RegimeKind::rho_blowup_balance})
    if (to_string(k) == s) return k;
  throw PreconditionError("unknown regime kind '" + s + "'");
}

ConditionReport check_parameter_regimes(const StructuralProfile& p, RegimeKind kind, const LogGrid& grid) {
  ConditionReport r;
  const double th = p.theta, be = p.beta, mu = p.mu, la = p.lambda_b;
  const std::string name = to_string(kind);
  switch (kind) {
    case RegimeKind::theta_beta_mu: {
      bool ok;
      if (mu > 0.0) ok = lt(th, 1.0 - be / 2.0 - mu) || (eq(th, 1.0 - be / 2.0 - mu) && lt(th, 1.0));
      else ok = eq(mu, 0.0) && lt(th, 1.0 - be / 2.0);
      r.entries.push_back(arithmetic(name, ok, {th, be, mu}, mu < 0.0 ? "mu must be >= 0" : ""));
      break;
    }
    case RegimeKind::theta_beta_mu_prime: {
      bool c1 = th <= 1.0 + kEqTol && mu > 0.0 && lt(th, 1.0 - be / 2.0 - mu);
      bool c2 = lt(th, 1.0) && mu > 0.0 && eq(th, 1.0 - be / 2.0 - mu);
      bool c3 = th <= 1.0 + kEqTol && eq(mu, 0.0) && lt(th, 1.0 - be / 2.0);
      r.entries.push_back(arithmetic(name, c1 || c2 || c3, {th, be, mu}));
      r.entries.push_back(arithmetic(name + ".strict", c1, {th, be, mu}));
      r.entries.push_back(arithmetic(name + ".critical", c2, {th, be, mu}));
      r.entries.push_back(arithmetic(name + ".mu_zero", c3, {th, be, mu}));
      break;
    }
    case RegimeKind::blowup_balance: {
      bool lam_ok = la * (2.0 - th) >= 1.0 - kEqTol;
      ConditionEntry el = arithmetic(name + ".lambda", lam_ok, {la, th});
      GrowthCheck gi = bounded_growth(p.b_tilde, be / 2.0, la * (1.0 - th) - 1.0, la, true, grid);
      GrowthCheck gii = bounded_growth(p.b_tilde, be / 2.0, la * (1.0 - th) - 1.0, la, false, grid);
      Truth tii = lt(th, 1.0) ? gii.holds : Truth::no;
      ConditionEntry ei = make(name + ".bound_i", gi.holds, gi.method);
      ConditionEntry eii = make(name + ".bound_ii", tii, gii.method);
      if (ei.holds == Truth::no) ei.witness = {grid.hi};
      if (eii.holds == Truth::no) eii.witness = {grid.hi};
      ei.constant = gi.slope;
      eii.constant = gii.slope;
      ei.note = "constant is the growth exponent";
      eii.note = lt(th, 1.0) ? "constant is the growth exponent" : "needs theta < 1";
      Truth either = (gi.holds == Truth::yes || tii == Truth::yes)                 ? Truth::yes
                     : (gi.holds == Truth::inconclusive || tii == Truth::inconclusive) ? Truth::inconclusive
                                                                                       : Truth::no;
      ConditionEntry all = make(name, combine_all({el.holds, either}),
                                gi.method == Method::exact && gii.method == Method::exact ? Method::exact
                                                                                          : Method::sampled);
      if (all.holds == Truth::no) all.witness = lam_ok ? std::vector<double>{grid.hi} : el.witness;
      r.entries.push_back(all);
      r.entries.push_back(el);
      r.entries.push_back(ei);
      r.entries.push_back(eii);
      break;
    }
    case RegimeKind::rho_blowup_balance: {
      ConditionEntry e = make(name, Truth::no, Method::exact);
      if (th > 1.0 + kEqTol) {
        e.witness = {th};
        e.note = "needs theta <= 1";
      } else if (eq(th, 1.0)) {
        GrowthCheck g = bounded_growth(p.b_tilde, be / 2.0, -1.0, la, true, grid);
        e.method = g.method;
        e.holds = combine_all({la >= 1.0 - kEqTol ? Truth::yes : Truth::no, g.holds});
        if (e.holds == Truth::no) e.witness = la >= 1.0 - kEqTol ? std::vector<double>{grid.hi} : std::vector{la};
      } else {
        GrowthCheck g = bounded_growth(p.b_tilde, be / 2.0, la * (1.0 - th) - 1.0, la, false, grid);
        e.method = g.method;
        bool lam_ok = la * (2.0 - th) >= 1.0 - kEqTol;
        e.holds = combine_all({lam_ok ? Truth::yes : Truth::no, g.holds});
        if (e.holds == Truth::no) e.witness = lam_ok ? std::vector<double>{grid.hi} : std::vector{la, th};
      }
      r.entries.push_back(e);
      break;
    }
    case RegimeKind::p_laplacian_power: {
      auto a = power_c_positive(p.phi);
      auto q = ell_power_exponent(p.ell);
      if (!a || !q) {
        ConditionEntry e = make(name, Truth::inconclusive, Method::exact);
        e.note = "needs phi = c t^(p-1) and ell = c t^q";
        r.entries.push_back(e);
        break;
      }
      const double pp = *a + 1.0, qq = *q;
      bool ok = lt(qq + 1.0, pp) && qq >= 0.0 && mu >= -kEqTol && mu <= pp - qq + kEqTol &&
                be <= 2.0 * (pp - qq - mu - 1.0) + kEqTol;
      r.entries.push_back(arithmetic(name, ok, {pp, qq, mu, be}));
      break;
    }
    case RegimeKind::mean_curvature_power: {
      auto q = ell_power_exponent(p.ell);
      if (p.phi.family() != Family::mean_curvature || !q) {
        ConditionEntry e = make(name, Truth::inconclusive, Method::exact);
        e.note = "needs the mean curvature phi and ell = c t^q";
        r.entries.push_back(e);
        break;
      }
      bool ok = *q >= 0.0 && mu >= -kEqTol && lt(*q, -be / 2.0 - mu);
      r.entries.push_back(arithmetic(name, ok, {*q, mu, be}));
      break;
    }
  }
  return r;
}

ConditionReport check_all(const StructuralProfile& p, const LogGrid& grid) {
  ConditionReport r = check_phi(p, grid);
  r.merge(check_grad_ell(p, grid));
  r.merge(check_theta(p, grid));
  r.merge(check_phi_ell(p, grid));
  r.merge(check_b_tilde(p, grid));
  r.merge(check_parameter_regimes(p, RegimeKind::theta_beta_mu, grid));
  r.merge(check_parameter_regimes(p, RegimeKind::theta_beta_mu_prime, grid));
  r.merge(check_parameter_regimes(p, RegimeKind::blowup_balance, grid));
  if (p.rho) r.merge(check_parameter_regimes(p, RegimeKind::rho_blowup_balance, grid));
  if (is_power(p.phi)) r.merge(check_parameter_regimes(p, RegimeKind::p_laplacian_power, grid));
  if (p.phi.family() == Family::mean_curvature)
    r.merge(check_parameter_regimes(p, RegimeKind::mean_curvature_power, grid));
  return r;
}

}  // namespace koforge
