#include "molab/theory.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <sstream>

namespace molab {

Box Box::cube(int dim, double gamma) {
  if (dim < 1) throw DomainError("box dimension must be >= 1");
  if (!(gamma > 0)) throw DomainError("box half-width must be positive");
  return {VectorXd::Constant(dim, -gamma), VectorXd::Constant(dim, gamma)};
}

Box Box::interval(double lo, double hi) {
  if (!(hi > lo)) throw DomainError("interval must have hi > lo");
  return {VectorXd::Constant(1, lo), VectorXd::Constant(1, hi)};
}

EtaNet build_eta_net(const Box& domain, double eta) {
  const int d = domain.dim();
  if (d < 1 || domain.upper.size() != d) throw DimensionError("box bounds have mismatched dimensions");
  if (!(eta > 0) || !std::isfinite(eta)) throw DomainError("eta must be positive");
  if (!((domain.upper - domain.lower).array() > 0).all()) throw DomainError("box must have positive widths");
  EtaNet net;
  net.domain = domain;
  net.eta = eta;
  net.spacing = 2.0 * eta / std::sqrt(static_cast<double>(d));
  double total = 1.0;
  for (int i = 0; i < d; ++i) {
    const double w = domain.upper(i) - domain.lower(i);
    net.counts.push_back(static_cast<int>(std::floor(w / net.spacing)) + 1);
    total *= net.counts.back();
  }
  if (total > 5e7) throw DomainError("eta-net would have more than 5e7 centers");
  net.centers.resize(d, static_cast<Eigen::Index>(total));
  std::vector<int> idx(d, 0);
  for (Eigen::Index c = 0; c < net.centers.cols(); ++c) {
    for (int i = 0; i < d; ++i) {
      const double w = domain.upper(i) - domain.lower(i);
      net.centers(i, c) = domain.lower(i) + (idx[i] + 0.5) * w / net.counts[i];
    }
    for (int i = 0; i < d && ++idx[i] == net.counts[i]; ++i) idx[i] = 0;
  }
  return net;
}

VectorXd PartitionOfUnity::raw_weights(const VectorXd& x) const {
  if (x.size() != net.centers.rows()) throw DimensionError("point dimension does not match the net");
  return (1.0 - (net.centers.colwise() - x).colwise().norm().array() / net.eta).cwiseMax(0.0).matrix().transpose();
}

VectorXd pou_eval(const PartitionOfUnity& pou, const VectorXd& x) {
  VectorXd w = pou.raw_weights(x);
  const double s = w.sum();
  if (!(s > 0)) {
    std::ostringstream msg;
    msg << "cover violated at x = (" << x.transpose() << ")";
    throw DomainError(msg.str());
  }
  return w / s;
}

double project_function(const VectorXd& center_values, const PartitionOfUnity& pou, const VectorXd& x) {
  if (center_values.size() != pou.net.size()) throw DimensionError("expected one sample per net center");
  return pou_eval(pou, x).dot(center_values);
}

double lift_discrete(const VectorXd& z, const PartitionOfUnity& pou, const VectorXd& x) {
  if (z.size() != pou.net.size()) throw DimensionError("expected one coefficient per net center");
  return pou_eval(pou, x).dot(z);
}

// ---------------------------------------------------------------------------
// Magnitudes

namespace {
constexpr double kMaxLog = 300.0;
constexpr double kExact = 9e15;

// ceil that ignores rounding noise such as sqrt(2)^2 = 2.0000000000000004
double ceil_count(double x) { return std::ceil(x * (1.0 - 1e-12)); }

double loglog_of(double l) { return l > 0 ? std::log10(l) : -std::numeric_limits<double>::infinity(); }
}  // namespace

Magnitude Magnitude::from_value(double v) {
  if (!(v > 0)) throw DomainError("magnitudes must be positive");
  Magnitude m;
  m.value = v;
  m.log10 = std::log10(v);
  m.log10_log10 = loglog_of(m.log10);
  return m;
}

Magnitude Magnitude::from_log10(double l) {
  Magnitude m;
  m.log10 = l;
  m.value = l < kMaxLog ? std::pow(10.0, l) : std::numeric_limits<double>::infinity();
  m.log10_log10 = loglog_of(l);
  return m;
}

Magnitude Magnitude::from_log10_log10(double ll) {
  if (ll < kMaxLog) return from_log10(std::pow(10.0, ll));
  Magnitude m;
  m.value = m.log10 = std::numeric_limits<double>::infinity();
  m.log10_log10 = ll;
  return m;
}

std::string Magnitude::str() const {
  char buf[64];
  if (std::isfinite(value) && value < kExact && value == std::floor(value))
    std::snprintf(buf, sizeof buf, "%.0f", value);
  else if (std::isfinite(value))
    std::snprintf(buf, sizeof buf, "%.6g", value);
  else if (std::isfinite(log10))
    std::snprintf(buf, sizeof buf, "10^%.6g", log10);
  else
    std::snprintf(buf, sizeof buf, "10^(10^%.6g)", log10_log10);
  return buf;
}

std::partial_ordering operator<=>(const Magnitude& a, const Magnitude& b) {
  if (std::isfinite(a.log10) && std::isfinite(b.log10)) return a.log10 <=> b.log10;
  return a.log10_log10 <=> b.log10_log10;
}

Magnitude power_term(const Magnitude& base, const Magnitude& exponent, const Magnitude& factor) {
  if (std::isfinite(base.log10) && exponent.representable() && std::isfinite(factor.log10)) {
    const double l = exponent.value * base.log10 + factor.log10;
    if (std::isfinite(l) && l < 1e300) {
      Magnitude m = Magnitude::from_log10(l);
      const double direct = std::pow(base.value, exponent.value) * factor.value;
      if (std::isfinite(direct) && direct > 0) m.value = direct;
      return m;
    }
  }
  const double power_ll = exponent.log10 + base.log10_log10;
  return Magnitude::from_log10_log10(std::max(power_ll, factor.log10_log10));
}

Magnitude magnitude_sum(const std::vector<Magnitude>& terms) {
  if (terms.empty()) throw DomainError("cannot sum an empty list of magnitudes");
  const bool finite_logs =
      std::all_of(terms.begin(), terms.end(), [](const Magnitude& m) { return std::isfinite(m.log10); });
  if (!finite_logs) {
    double ll = -std::numeric_limits<double>::infinity();
    for (const auto& t : terms) ll = std::max(ll, t.log10_log10);
    return Magnitude::from_log10_log10(ll);
  }
  double top = -std::numeric_limits<double>::infinity();
  for (const auto& t : terms) top = std::max(top, t.log10);
  double s = 0.0, direct = 0.0;
  for (const auto& t : terms) {
    s += std::pow(10.0, t.log10 - top);
    direct += t.value;
  }
  Magnitude m = Magnitude::from_log10(top + std::log10(s));
  if (std::isfinite(direct)) m.value = direct;
  return m;
}

std::string_view to_string(BlowupSide s) { return s == BlowupSide::Branch ? "branch" : "trunk"; }

void ScalingQuery::validate() const {
  if (d_U < 1 || d_V < 1 || (d_W && *d_W < 1)) throw DomainError("dimensions must be >= 1");
  if (!(epsilon > 0)) throw DomainError("epsilon must be positive");
  if (!(epsilon < 1)) throw DomainError("epsilon must be < 1 so that log(1/epsilon) > 0");
  const auto& c = constants;
  for (double v : {c.C, c.C_prime, c.C_double_prime, c.C_delta, c.C_zeta, c.gamma_U, c.gamma_W})
    if (!(v > 0) || !std::isfinite(v)) throw DomainError("constants must be positive and finite");
}

namespace {

// A positive quantity carried both linearly (may under/overflow) and as log10.
struct Q {
  double lin;
  double lg;
};

Q q(double v) { return {v, std::log10(v)}; }
Q operator*(Q a, Q b) { return {a.lin * b.lin, a.lg + b.lg}; }
Q operator/(Q a, Q b) { return {a.lin / b.lin, a.lg - b.lg}; }
Q pw(Q a, double e) { return {std::pow(a.lin, e), e * a.lg}; }
Q sqrt_q(Q a) { return {std::sqrt(a.lin), 0.5 * a.lg}; }
bool usable(Q a) { return std::isfinite(a.lin) && a.lin > 1e-300; }

Q from_mag(const Magnitude& m) { return {m.value, m.log10}; }

Magnitude count(Q x) {
  if (usable(x) && x.lin < kExact) return Magnitude::from_value(std::max(1.0, ceil_count(x.lin)));
  if (usable(x) || x.lg > 0) return Magnitude::from_log10(x.lg);
  return Magnitude::from_value(1.0);
}

Magnitude cover(int d, double gamma, Q radius) {
  const double reach = gamma * std::sqrt(static_cast<double>(d));
  if (usable(radius) && reach / radius.lin < kExact) {
    const double m = ceil_count(reach / radius.lin);
    return Magnitude::from_log10(d * std::log10(m)).log10 < 15 ? Magnitude::from_value(std::pow(m, d))
                                                               : Magnitude::from_log10(d * std::log10(m));
  }
  return Magnitude::from_log10(d * (std::log10(reach) - radius.lg));
}

// L = K = d^2 (ln d + ln(1/eps_eff)), kappa = d^(d/2+1) eps_eff^-(d+1), p = R = 1.
NetworkClassSize class_size(const Magnitude& d, double lg_inv_eps) {
  NetworkClassSize c;
  c.input_dim = d;
  const double inner = std::numbers::ln10 * (d.log10 + lg_inv_eps);
  if (!(inner > 0)) {
    c.depth = Magnitude::from_value(1.0);
  } else if (d.representable() && d.value * d.value * inner < kExact) {
    c.depth = Magnitude::from_value(std::max(1.0, ceil_count(d.value * d.value * inner)));
  } else {
    c.depth = Magnitude::from_log10(2.0 * d.log10 + std::log10(inner));
  }
  c.sparsity = c.depth;
  const double lgk = d.representable() ? (d.value / 2 + 1) * d.log10 + (d.value + 1) * lg_inv_eps
                                       : std::numeric_limits<double>::infinity();
  if (std::isfinite(lgk) && lgk < 1e300)
    c.kappa = Magnitude::from_log10(lgk);
  else
    c.kappa = Magnitude::from_log10_log10(d.log10 + std::log10(d.log10 / 2 + lg_inv_eps));
  return c;
}

Magnitude dim_mag(int d) { return Magnitude::from_value(d); }

}  // namespace

Magnitude cover_count(int d, double gamma, double radius) {
  if (d < 1) throw DomainError("dimension must be >= 1");
  if (!(radius > 0) || !(gamma > 0)) throw DomainError("radius and gamma must be positive");
  return cover(d, gamma, q(radius));
}

Magnitude recompose_total(const SizeReport& r) {
  std::vector<Magnitude> terms{power_term(r.N, dim_mag(r.d_V), r.F1.sparsity),
                               power_term(r.H, r.n_cU, r.F2.sparsity)};
  if (r.multi) terms.push_back(power_term(*r.P, *r.n_cW, r.F3->sparsity));
  return magnitude_sum(terms);
}

namespace {
void finalize(SizeReport& r) {
  r.terms = {power_term(r.N, dim_mag(r.d_V), r.F1.sparsity), power_term(r.H, r.n_cU, r.F2.sparsity)};
  if (r.multi) r.terms.push_back(power_term(*r.P, *r.n_cW, r.F3->sparsity));
  r.total = recompose_total(r);
}
}  // namespace

SizeReport scaling_single(const ScalingQuery& q_in) {
  q_in.validate();
  if (q_in.d_W) throw DomainError("single-operator scaling takes no d_W; use the multi-operator calculator");
  const auto& k = q_in.constants;
  const double dv = q_in.d_V;
  const Q eps = q(q_in.epsilon);
  const Q two = q(2.0);
  const Q c_sqrt_dv = q(k.C * std::sqrt(dv));

  SizeReport r;
  r.order = q_in.order;
  r.d_U = q_in.d_U;
  r.d_V = q_in.d_V;
  r.epsilon = q_in.epsilon;

  if (q_in.order == ApproximationOrder::FunctionFirst) {
    r.N = count(two * c_sqrt_dv / eps);
    const Q stage = pw(eps, 1 + dv) / (pw(two, dv + 1) * pw(c_sqrt_dv, dv));  // functional-stage accuracy
    const Q delta = q(k.C_delta) * stage;
    r.delta = delta.lin;
    r.log10_delta = delta.lg;
    r.n_cU = cover(q_in.d_U, k.gamma_U, delta);
    const Q n = from_mag(r.n_cU);
    r.H = count(pw(two, dv + 1) * q(k.C_prime) * sqrt_q(n) * pw(c_sqrt_dv, dv) / pw(eps, dv + 1));
    r.F1 = class_size(dim_mag(q_in.d_V), -eps.lg);
    r.F2 = class_size(r.n_cU, -stage.lg);
    r.blowup_side = BlowupSide::Branch;
  } else {
    const Q delta = q(k.C_delta) * eps / two;
    r.delta = delta.lin;
    r.log10_delta = delta.lg;
    r.n_cU = cover(q_in.d_U, k.gamma_U, delta);
    if (!r.n_cU.representable()) throw DomainError("cover count overflows; epsilon too small for this order");
    const double n = r.n_cU.value;
    const Q cp_sqrt_n = q(k.C_prime * std::sqrt(n));
    r.H = count(two * cp_sqrt_n / eps);
    r.N = count(pw(two, n + 1) * c_sqrt_dv * pw(cp_sqrt_n, n) / pw(eps, 1 + n));
    const Q stage = pw(eps, n + 1) / (pw(two, n + 1) * pw(cp_sqrt_n, n));  // function-stage accuracy
    r.F1 = class_size(dim_mag(q_in.d_V), -stage.lg);
    r.F2 = class_size(r.n_cU, -(eps / two).lg);
    r.blowup_side = BlowupSide::Trunk;
  }
  finalize(r);
  return r;
}

SizeReport scaling_multi(const ScalingQuery& q_in) {
  q_in.validate();
  if (!q_in.d_W) throw DomainError("multi-operator scaling needs d_W");
  const auto& k = q_in.constants;
  const double dv = q_in.d_V;
  const Q eps = q(q_in.epsilon);
  const Q two = q(2.0);
  const Q c_sqrt_dv = q(k.C * std::sqrt(dv));

  SizeReport r;
  r.multi = true;
  r.order = q_in.order;
  r.d_U = q_in.d_U;
  r.d_V = q_in.d_V;
  r.d_W = q_in.d_W;
  r.epsilon = q_in.epsilon;

  const Q zeta = q(k.C_zeta) * eps;
  r.zeta = zeta.lin;
  r.n_cW = cover(*q_in.d_W, k.gamma_W, zeta);
  if (!r.n_cW->representable()) throw DomainError("parameter cover count overflows");
  const double nw = r.n_cW->value;
  const Q cpp_sqrt_nw = q(k.C_double_prime * std::sqrt(nw));
  r.P = count(two * cpp_sqrt_nw / eps);
  r.N = count(pw(two, nw + 2) * c_sqrt_dv * pw(cpp_sqrt_nw, nw) / pw(eps, nw + 1));

  const Q w_block = pw(two, nw + 1) * pw(cpp_sqrt_nw, nw);
  const Q v_block = pw(two, dv + 1) * pw(c_sqrt_dv, dv);
  const Q delta =
      q(k.C_delta) * pw(eps, (1 + dv) * (1 + nw)) / (pw(two, dv + nw + 2) * pw(c_sqrt_dv, dv) * pw(cpp_sqrt_nw, nw));
  r.delta = delta.lin;
  r.log10_delta = delta.lg;
  r.n_cU = cover(q_in.d_U, k.gamma_U, delta);
  const Q n = from_mag(r.n_cU);
  r.H = count(pw(two, (dv + 1) * (nw + 2)) * q(k.C_prime) * sqrt_q(n) * pw(c_sqrt_dv, dv) *
              pw(cpp_sqrt_nw, nw * (dv + 1)) / pw(eps, (dv + 1) * (1 + nw)));

  const Q stage1 = pw(eps, nw + 1) / w_block;
  const Q stage2 = pw(eps, (dv + 1) * (nw + 1)) / (v_block * pw(w_block, dv + 1));
  r.F1 = class_size(dim_mag(q_in.d_V), -stage1.lg);
  r.F2 = class_size(r.n_cU, -stage2.lg);
  r.F3 = class_size(*r.n_cW, -eps.lg);
  r.blowup_side = BlowupSide::Branch;
  finalize(r);
  return r;
}

namespace {
void class_row(std::ostream& out, const char* name, const NetworkClassSize& c) {
  out << std::left << std::setw(6) << name << std::setw(18) << c.input_dim.str() << std::setw(18) << c.depth.str()
      << std::setw(4) << c.width << std::setw(18) << c.sparsity.str() << std::setw(22) << c.kappa.str()
      << c.output_bound << '\n';
}
}  // namespace

void print_size_report(const SizeReport& r, std::ostream& out) {
  out << "regime        " << (r.multi ? "multi" : "single") << " / "
      << (r.order == ApproximationOrder::FunctionFirst ? "function-first" : "functional-first") << '\n';
  out << "dims          d_U=" << r.d_U << " d_V=" << r.d_V;
  if (r.d_W) out << " d_W=" << *r.d_W;
  out << "\nepsilon       " << r.epsilon << '\n';
  out << "N             " << r.N.str() << '\n';
  out << "H             " << r.H.str() << '\n';
  if (r.P) out << "P             " << r.P->str() << '\n';
  out << "delta         10^" << r.log10_delta << '\n';
  if (r.zeta) out << "zeta          " << *r.zeta << '\n';
  out << "n_cU          " << r.n_cU.str() << '\n';
  if (r.n_cW) out << "n_cW          " << r.n_cW->str() << '\n';
  out << "N_#           " << r.total.str() << '\n';
  out << "blow-up side  " << to_string(r.blowup_side) << "\n\n";
  out << std::left << std::setw(6) << "class" << std::setw(18) << "d1" << std::setw(18) << "L" << std::setw(4) << "p"
      << std::setw(18) << "K" << std::setw(22) << "kappa" << "R\n";
  class_row(out, "F1", r.F1);
  class_row(out, "F2", r.F2);
  if (r.F3) class_row(out, "F3", *r.F3);
}

void write_size_report_csv(const SizeReport& r, std::ostream& out) {
  out << "quantity,value,log10,log10_log10\n";
  auto row = [&](const std::string& name, const Magnitude& m) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g,%.17g\n", name.c_str(), m.value, m.log10, m.log10_log10);
    out << buf;
  };
  row("N", r.N);
  row("H", r.H);
  if (r.P) row("P", *r.P);
  row("n_cU", r.n_cU);
  if (r.n_cW) row("n_cW", *r.n_cW);
  auto cls = [&](const std::string& name, const NetworkClassSize& c) {
    row(name + ".L", c.depth);
    row(name + ".K", c.sparsity);
    row(name + ".kappa", c.kappa);
  };
  cls("F1", r.F1);
  cls("F2", r.F2);
  if (r.F3) cls("F3", *r.F3);
  row("N_total", r.total);
}

double epsilon_of_nparams(const Magnitude& n_params, ScalingRegime regime, int d_U, int d_V,
                          std::optional<int> d_W) {
  if (d_U < 1 || d_V < 1) throw DomainError("dimensions must be >= 1");
  const double ln10 = std::numbers::ln10;
  // ln ln N from either representation.
  const double lnln =
      std::isfinite(n_params.log10) ? std::log(n_params.log10 * ln10) : std::log(ln10) + ln10 * n_params.log10_log10;
  double numer = 0.0, exponent = 0.0;
  switch (regime) {
    case ScalingRegime::SingleFunctionFirst:
    case ScalingRegime::SingleFunctionalFirst:
      numer = std::isfinite(n_params.log10) ? n_params.log10 * ln10 : std::numeric_limits<double>::infinity();
      exponent = regime == ScalingRegime::SingleFunctionFirst ? 1.0 / ((1.0 + d_V) * d_U) : 1.0 / d_U;
      if (!std::isfinite(numer)) return 0.0;
      break;
    case ScalingRegime::Multi:
      if (!d_W || *d_W < 1) throw DomainError("multi regime needs d_W >= 1");
      numer = lnln;
      exponent = 1.0 / *d_W;
      break;
  }
  if (!(numer > 1.0)) throw DomainError("asymptotic regime not reached");
  return std::pow(numer / std::log(numer), -exponent);
}

double epsilon_of_nparams(double n_params, ScalingRegime regime, int d_U, int d_V, std::optional<int> d_W) {
  if (!(n_params > 1.0)) throw DomainError("asymptotic regime not reached");
  return epsilon_of_nparams(Magnitude::from_value(n_params), regime, d_U, d_V, d_W);
}

}  // namespace molab
