#include "fastdiff/model.hpp"

#include <algorithm>
#include <cmath>

namespace fastdiff {

namespace {

double signed_power(double r, double e) {
  if (r == 0.0) return 0.0;
  const double mag = std::exp(e * std::log(std::abs(r)));
  return r > 0.0 ? mag : -mag;
}

double abs_power(double r, double e) {
  if (e == 0.0) return 1.0;
  if (r == 0.0) return 0.0;
  return std::exp(e * std::log(std::abs(r)));
}

// Antiderivative of gamma: |s|^(alpha+1)/(alpha+1).
double gamma_antiderivative(double s, double alpha) {
  return abs_power(s, alpha + 1.0) / (alpha + 1.0);
}

}  // namespace

PiecewiseLinear::PiecewiseLinear(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
  if (x_.size() != y_.size() || x_.size() < 2)
    throw ParamError("piecewise-linear table needs >= 2 matching breakpoints");
  for (std::size_t k = 1; k < x_.size(); ++k) {
    if (!(x_[k] > x_[k - 1]))
      throw ParamError("piecewise-linear breakpoints must increase strictly");
    if (y_[k] < y_[k - 1])
      throw ParamError("piecewise-linear table must be nondecreasing");
  }
  if (std::abs((*this)(0.0)) > 1e-14 * (1.0 + std::abs(y_.back())))
    throw ParamError("piecewise-linear table must vanish at 0");
}

PiecewiseLinear PiecewiseLinear::linear(double slope) {
  return PiecewiseLinear({-1.0, 0.0, 1.0}, {-slope, 0.0, slope});
}

std::size_t PiecewiseLinear::segment(double u) const {
  // Segment k spans [x_k, x_{k+1}]; the outer segments extend to infinity.
  const auto it = std::upper_bound(x_.begin(), x_.end(), u);
  std::size_t k = static_cast<std::size_t>(it - x_.begin());
  if (k == 0) return 0;
  return std::min(k - 1, x_.size() - 2);
}

double PiecewiseLinear::operator()(double u) const {
  const std::size_t k = segment(u);
  const double slope = (y_[k + 1] - y_[k]) / (x_[k + 1] - x_[k]);
  return y_[k] + slope * (u - x_[k]);
}

double PiecewiseLinear::max_slope() const {
  double s = 0.0;
  for (std::size_t k = 0; k + 1 < x_.size(); ++k)
    s = std::max(s, (y_[k + 1] - y_[k]) / (x_[k + 1] - x_[k]));
  return s;
}

double PiecewiseLinear::primitive_of_composition(double r, double alpha) const {
  // On a segment f(u) = c0 + c1 u, so f(gamma(s)) integrates in closed form.
  // Breakpoints in u map to breakpoints beta(x_k) in s.
  const double lo = std::min(0.0, r);
  const double hi = std::max(0.0, r);
  std::vector<double> cuts{lo, hi};
  for (double xk : x_) {
    const double sk = beta(xk, alpha);
    if (sk > lo && sk < hi) cuts.push_back(sk);
  }
  std::sort(cuts.begin(), cuts.end());
  double total = 0.0;
  for (std::size_t j = 0; j + 1 < cuts.size(); ++j) {
    const double s0 = cuts[j];
    const double s1 = cuts[j + 1];
    if (s1 <= s0) continue;
    const std::size_t k = segment(gamma(0.5 * (s0 + s1), alpha));
    const double c1 = (y_[k + 1] - y_[k]) / (x_[k + 1] - x_[k]);
    const double c0 = y_[k] - c1 * x_[k];
    total += c0 * (s1 - s0) +
             c1 * (gamma_antiderivative(s1, alpha) -
                   gamma_antiderivative(s0, alpha));
  }
  return r >= 0.0 ? total : -total;
}

ProblemParams ProblemParams::make(double m, double p, double q, int a, int b,
                                  int lambda, int mu, PerturbationMode mode,
                                  bool oracle) {
  if (!(m > 0.0 && m <= 1.0)) throw ParamError("m must lie in (0, 1]");
  if (!(p > 1.0)) throw ParamError("p must exceed 1");
  if (!(q > 1.0)) throw ParamError("q must exceed 1");
  auto is_switch = [](int v) { return v == 0 || v == 1; };
  if (!is_switch(a) || !is_switch(b) || !is_switch(lambda) || !is_switch(mu))
    throw ParamError("a, b, lambda, mu must be 0 or 1");
  if (lambda + mu > 1)
    throw ParamError("(lambda, mu) must be (1,0), (0,1) or (0,0)");
  if (a + b == 0) throw ParamError("(a, b) = (0, 0) is not coercive");
  if (a + b == 2) {
    if (!oracle)
      throw ParamError("(a, b) = (1, 1) requires oracle mode");
    if (lambda + mu != 0)
      throw ParamError("oracle mode requires lambda = mu = 0");
  }
  if (const auto* c = std::get_if<CutoffPower>(&mode); c && !(c->M >= 0.0))
    throw ParamError("cutoff M must be >= 0");
  if (const auto* l = std::get_if<Lipschitz>(&mode)) {
    if (!(l->L_f >= 0.0) || !(l->L_fGamma >= 0.0))
      throw ParamError("Lipschitz constants must be >= 0");
    if (l->f.x().empty() || l->f_Gamma.x().empty())
      throw ParamError("Lipschitz mode needs both tables");
    if (l->f.max_slope() > l->L_f * (1.0 + 1e-12) ||
        l->f_Gamma.max_slope() > l->L_fGamma * (1.0 + 1e-12))
      throw ParamError("table slope exceeds the declared Lipschitz constant");
  }

  ProblemParams out;
  out.m = m;
  out.alpha = 1.0 / m;
  out.p = p;
  out.q = q;
  out.a = a;
  out.b = b;
  out.lambda = lambda;
  out.mu = mu;
  out.p_star = lambda * p + mu * q;
  out.mode = std::move(mode);
  out.oracle = oracle;
  return out;
}

double gamma(double r, double alpha) { return signed_power(r, alpha); }

double beta(double u, double alpha) { return signed_power(u, 1.0 / alpha); }

double perturbation(double u, const ProblemParams& params, Side side) {
  const double e = params.exponent(side);
  return std::visit(
      [&](const auto& mode) -> double {
        using T = std::decay_t<decltype(mode)>;
        if constexpr (std::is_same_v<T, PowerExact>) {
          return signed_power(u, e);
        } else if constexpr (std::is_same_v<T, CutoffPower>) {
          const double edge = std::pow(mode.M + 1.0, params.alpha);
          if (std::abs(u) <= edge) return signed_power(u, e);
          const double cap = signed_power(edge, e);
          return u > 0.0 ? cap : -cap;
        } else {
          return side == Side::Bulk ? mode.f(u) : mode.f_Gamma(u);
        }
      },
      params.mode);
}

double source(double u, const ProblemParams& params, Side side) {
  if (std::holds_alternative<Lipschitz>(params.mode))
    return perturbation(u, params, side);
  const int sw = side == Side::Bulk ? params.lambda : params.mu;
  return sw == 0 ? 0.0 : perturbation(u, params, side);
}

double primitive_f_gamma(double r, const ProblemParams& params, Side side) {
  const double e = params.exponent(side);
  const double alpha = params.alpha;
  return std::visit(
      [&](const auto& mode) -> double {
        using T = std::decay_t<decltype(mode)>;
        if constexpr (std::is_same_v<T, PowerExact>) {
          return abs_power(r, alpha * e + 1.0) / (alpha * e + 1.0);
        } else if constexpr (std::is_same_v<T, CutoffPower>) {
          // gamma(s) leaves the window exactly when |s| > M + 1.
          const double edge = mode.M + 1.0;
          const double ar = std::abs(r);
          if (ar <= edge) return abs_power(ar, alpha * e + 1.0) / (alpha * e + 1.0);
          return std::pow(edge, alpha * e + 1.0) / (alpha * e + 1.0) +
                 std::pow(edge, alpha * e) * (ar - edge);
        } else {
          const auto& table = side == Side::Bulk ? mode.f : mode.f_Gamma;
          return table.primitive_of_composition(r, alpha);
        }
      },
      params.mode);
}

double source_primitive(double r, const ProblemParams& params, Side side) {
  if (std::holds_alternative<Lipschitz>(params.mode))
    return primitive_f_gamma(r, params, side);
  const int sw = side == Side::Bulk ? params.lambda : params.mu;
  return sw == 0 ? 0.0 : primitive_f_gamma(r, params, side);
}

std::optional<double> lipschitz_constant(const ProblemParams& params) {
  if (const auto* l = std::get_if<Lipschitz>(&params.mode))
    return std::max(l->L_f, l->L_fGamma);
  if (!params.has_perturbation()) return 0.0;
  if (const auto* c = std::get_if<CutoffPower>(&params.mode)) {
    const double base = c->M + 1.0;
    double L = 0.0;
    if (params.lambda) L = std::max(L, params.p * std::pow(base, params.alpha * (params.p - 1.0)));
    if (params.mu) L = std::max(L, params.q * std::pow(base, params.alpha * (params.q - 1.0)));
    return L;
  }
  return std::nullopt;
}

std::array<bool, 3> check_fundamental_inequalities(double r, double s,
                                                   double alpha) {
  const double l = 0.5 * (alpha + 1.0);
  const double rl = abs_power(r, l);
  const double sl = abs_power(s, l);
  const double ra = abs_power(r, alpha);
  const double sa = abs_power(s, alpha);
  auto holds = [](double lhs, double rhs) {
    return lhs <= rhs + 1e-12 * (1.0 + std::abs(lhs) + std::abs(rhs));
  };

  const double lhs1 = 4.0 * alpha / ((alpha + 1.0) * (alpha + 1.0)) *
                      (rl - sl) * (rl - sl);
  const double rhs1 = (ra - sa) * (r - s);

  const double lhs2 = std::abs(ra - sa);
  const double rhs2 = 2.0 * alpha / (alpha + 1.0) *
                      abs_power(std::max(r, s), 0.5 * (alpha - 1.0)) *
                      std::abs(rl - sl);

  const double lhs3 = std::abs(r - s);
  const double rhs3 = abs_power(std::abs(rl - sl), 1.0 / l);

  return {holds(lhs1, rhs1), holds(lhs2, rhs2), holds(lhs3, rhs3)};
}

}  // namespace fastdiff
