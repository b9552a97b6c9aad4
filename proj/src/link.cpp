#include "tsqn/link.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/erf.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "tsqn/detail/extremum.hpp"
#include "tsqn/error.hpp"
#include "tsqn/special.hpp"

namespace tsqn {

std::string describe_violation(const SaturationSpec& s) {
  std::ostringstream os;
  if (std::isnan(s.l) || std::isnan(s.u) || std::isnan(s.L) || std::isnan(s.U)) {
    os << "saturation thresholds must not be NaN";
  } else if (!(s.L <= s.l && s.l <= s.u && s.u <= s.U)) {
    os << "threshold ordering L <= l <= u <= U violated (L=" << s.L << ", l=" << s.l << ", u=" << s.u
       << ", U=" << s.U << ")";
  } else if (s.has_lower() && !std::isfinite(s.L)) {
    os << "finite lower threshold l=" << s.l << " needs a finite clamp L";
  } else if (s.has_upper() && !std::isfinite(s.U)) {
    os << "finite upper threshold u=" << s.u << " needs a finite clamp U";
  } else if (s.l == kInf || s.u == -kInf) {
    os << "thresholds l=+inf or u=-inf leave no observable band";
  }
  return os.str();
}

SaturationSpec SaturationSpec::make(double l, double u, double L, double U) {
  SaturationSpec spec{l, u, L, U};
  if (auto why = describe_violation(spec); !why.empty()) throw Error(ErrorCode::Data, why);
  return spec;
}

double saturate(double x, const SaturationSpec& spec) {
  if (x < spec.l) return spec.L;
  if (x > spec.u) return spec.U;
  return x;
}

// ---------------------------------------------------------------------------
// Noise model

NoiseModel NoiseModel::gaussian(double variance, double eta) {
  if (!(variance > 0.0) || !std::isfinite(variance)) {
    throw Error(ErrorCode::Config, "gaussian noise needs a finite positive variance");
  }
  if (!(eta > 0.0)) throw Error(ErrorCode::Config, "moment guard eta must be positive");
  NoiseModel n;
  n.law_ = GaussianNoise{variance};
  n.eta_ = eta;
  return n;
}

NoiseModel NoiseModel::tabulated(std::vector<double> grid, std::vector<double> cdf, std::vector<double> pdf,
                                 double eta) {
  const std::size_t n = grid.size();
  if (n < 2 || cdf.size() != n || pdf.size() != n) {
    throw Error(ErrorCode::Config, "tabulated noise needs grid, cdf and pdf of equal length >= 2");
  }
  if (!(eta > 0.0)) throw Error(ErrorCode::Config, "moment guard eta must be positive");
  double mass = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(grid[i]) || !std::isfinite(cdf[i]) || !std::isfinite(pdf[i])) {
      throw Error(ErrorCode::Config, "tabulated noise entries must be finite");
    }
    if (i > 0 && !(grid[i] > grid[i - 1])) throw Error(ErrorCode::Config, "tabulated grid must be increasing");
    if (i > 0 && cdf[i] < cdf[i - 1]) throw Error(ErrorCode::Config, "tabulated CDF must be nondecreasing");
    if (cdf[i] < 0.0 || cdf[i] > 1.0) throw Error(ErrorCode::Config, "tabulated CDF must lie in [0,1]");
    if (pdf[i] < 0.0) throw Error(ErrorCode::Config, "tabulated pdf must be nonnegative");
    if (i > 0) mass += 0.5 * (pdf[i] + pdf[i - 1]) * (grid[i] - grid[i - 1]);
  }
  if (std::abs(cdf.front()) > 1e-6 || std::abs(cdf.back() - 1.0) > 1e-6) {
    throw Error(ErrorCode::Config, "tabulated CDF must start at 0 and end at 1");
  }
  if (std::abs(mass - 1.0) > 1e-6) {
    std::ostringstream os;
    os << "tabulated pdf integrates to " << mass << ", expected 1 within 1e-6";
    throw Error(ErrorCode::Config, os.str());
  }
  NoiseModel m;
  m.law_ = TabulatedNoise{std::move(grid), std::move(cdf), std::move(pdf)};
  m.eta_ = eta;
  return m;
}

namespace {

double interpolate(const std::vector<double>& xs, const std::vector<double>& ys, double z, double below,
                   double above) {
  if (z < xs.front()) return below;
  if (z > xs.back()) return above;
  auto it = std::upper_bound(xs.begin(), xs.end(), z);
  if (it == xs.end()) return ys.back();
  const auto i = static_cast<std::size_t>(it - xs.begin());
  const double t = (z - xs[i - 1]) / (xs[i] - xs[i - 1]);
  return ys[i - 1] + t * (ys[i] - ys[i - 1]);
}

}  // namespace

double NoiseModel::cdf(double z) const {
  if (const auto* g = as_gaussian()) return std_normal_cdf(z / std::sqrt(g->variance));
  const auto& t = std::get<TabulatedNoise>(law_);
  return interpolate(t.grid, t.cdf, z, 0.0, 1.0);
}

double NoiseModel::pdf(double z) const {
  if (const auto* g = as_gaussian()) {
    const double sd = std::sqrt(g->variance);
    return std_normal_pdf(z / sd) / sd;
  }
  const auto& t = std::get<TabulatedNoise>(law_);
  return interpolate(t.grid, t.pdf, z, 0.0, 0.0);
}

double NoiseModel::band(double a, double b) const {
  if (!(a < b)) return 0.0;
  if (const auto* g = as_gaussian()) {
    const double sd = std::sqrt(g->variance);
    return std::max(0.0, std_normal_band(a / sd, b / sd));
  }
  return std::max(0.0, cdf(b) - cdf(a));
}

std::pair<double, double> NoiseModel::support() const {
  if (const auto* g = as_gaussian()) {
    const double reach = 40.0 * std::sqrt(g->variance);
    return {-reach, reach};
  }
  const auto& t = std::get<TabulatedNoise>(law_);
  return {t.grid.front(), t.grid.back()};
}

double NoiseModel::variance() const {
  if (const auto* g = as_gaussian()) return g->variance;
  // Piecewise-linear density: Simpson is exact per cell for s^k f(s), k <= 2.
  const auto& t = std::get<TabulatedNoise>(law_);
  double m1 = 0.0, m2 = 0.0;
  for (std::size_t i = 1; i < t.grid.size(); ++i) {
    const double a = t.grid[i - 1], b = t.grid[i], c = 0.5 * (a + b);
    const double fa = t.pdf[i - 1], fb = t.pdf[i], fc = 0.5 * (fa + fb);
    const double w = (b - a) / 6.0;
    m1 += w * (a * fa + 4.0 * c * fc + b * fb);
    m2 += w * (a * a * fa + 4.0 * c * c * fc + b * b * fb);
  }
  return m2 - m1 * m1;
}

double NoiseModel::quantile(double q) const {
  if (!(q > 0.0 && q < 1.0)) throw Error(ErrorCode::Domain, "noise quantile level must lie in (0,1)");
  if (const auto* g = as_gaussian()) {
    return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * q) * std::sqrt(g->variance);
  }
  const auto& t = std::get<TabulatedNoise>(law_);
  auto it = std::lower_bound(t.cdf.begin(), t.cdf.end(), q);
  if (it == t.cdf.begin()) return t.grid.front();
  if (it == t.cdf.end()) return t.grid.back();
  const auto i = static_cast<std::size_t>(it - t.cdf.begin());
  const double span = t.cdf[i] - t.cdf[i - 1];
  if (span <= 0.0) return t.grid[i];
  return t.grid[i - 1] + (q - t.cdf[i - 1]) / span * (t.grid[i] - t.grid[i - 1]);
}

// ---------------------------------------------------------------------------
// Link functions

namespace {

/// Pieces of the saturated law at a given x: band [a, b] = [l - x, u - x] in noise
/// coordinates, the clamp probabilities and the density at the thresholds.
struct Pieces {
  double a, b;
  double p_low;   // P(e < a)
  double p_high;  // P(e > b)
  double f_a, f_b;
  double band;
};

Pieces pieces(double x, const SaturationSpec& s, const NoiseModel& noise) {
  Pieces p{};
  p.a = s.l - x;
  p.b = s.u - x;
  p.p_low = s.has_lower() ? noise.cdf(p.a) : 0.0;
  p.f_a = s.has_lower() ? noise.pdf(p.a) : 0.0;
  if (s.has_upper()) {
    if (const auto* g = noise.as_gaussian()) {
      p.p_high = std_normal_sf(p.b / std::sqrt(g->variance));
    } else {
      p.p_high = 1.0 - noise.cdf(p.b);
    }
    p.f_b = noise.pdf(p.b);
  } else {
    p.p_high = 0.0;
    p.f_b = 0.0;
  }
  p.band = noise.band(p.a, p.b);
  return p;
}

/// Atom contributions L-part and U-part of E[h(S)] for clamp values.
template <class H>
double atoms(const Pieces& p, const SaturationSpec& s, H&& h) {
  double acc = 0.0;
  if (s.has_lower() && p.p_low > 0.0) acc += h(s.L) * p.p_low;
  if (s.has_upper() && p.p_high > 0.0) acc += h(s.U) * p.p_high;
  return acc;
}

/// integral over e in [a, b] of h(e) f(e), adaptive Gauss-Kronrod.
template <class H>
double integrate_band(H&& h, double a, double b, const NoiseModel& noise, const LinkTolerances& tol) {
  const auto [lo_s, hi_s] = noise.support();
  a = std::max(a, lo_s);
  b = std::min(b, hi_s);
  if (!(a < b)) return 0.0;

  auto integrand = [&](double e) { return h(e) * noise.pdf(e); };
  std::vector<double> cuts{a};
  if (const auto* t = noise.as_tabulated()) {
    for (double g : t->grid) {
      if (g > a && g < b) cuts.push_back(g);
    }
  } else {
    const double sd = std::sqrt(noise.variance());
    for (double g : {-8.0 * sd, 0.0, 8.0 * sd}) {
      if (g > a && g < b) cuts.push_back(g);
    }
  }
  cuts.push_back(b);

  // Between tabulated nodes the pdf is linear and h a low-degree polynomial: one panel is exact.
  const unsigned depth = noise.as_tabulated() ? 0 : 15;
  double total = 0.0, err_total = 0.0, l1_total = 0.0;
  for (std::size_t i = 1; i < cuts.size(); ++i) {
    double err = 0.0, l1 = 0.0;
    total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, cuts[i - 1], cuts[i], depth,
                                                                            1e-12, &err, &l1);
    err_total += err;
    l1_total += l1;
  }
  const double allowed = tol.quadrature_abs * std::max(1.0, l1_total);
  if (!(err_total <= allowed)) {
    std::ostringstream os;
    os << "link quadrature did not reach tolerance " << allowed << " (achieved " << err_total << ")";
    throw NumericError(os.str(), err_total);
  }
  return total;
}

}  // namespace

double g_mean(double x, const SaturationSpec& spec, const NoiseModel& noise, const LinkTolerances& tol) {
  if (!std::isfinite(x)) throw Error(ErrorCode::Domain, "g_mean: argument must be finite");
  if (spec.is_linear() && noise.is_gaussian()) return x;
  const Pieces p = pieces(x, spec, noise);
  const double clamps = atoms(p, spec, [](double v) { return v; });
  if (const auto* g = noise.as_gaussian()) {
    return clamps + x * p.band + g->variance * (p.f_a - p.f_b);
  }
  return clamps + integrate_band([x](double e) { return x + e; }, p.a, p.b, noise, tol);
}

double g_deriv(double x, const SaturationSpec& spec, const NoiseModel& noise) {
  if (!std::isfinite(x)) throw Error(ErrorCode::Domain, "g_deriv: argument must be finite");
  if (spec.is_linear() && noise.is_gaussian()) return 1.0;
  const Pieces p = pieces(x, spec, noise);
  double d = p.band;
  if (spec.has_lower()) d += (spec.l - spec.L) * p.f_a;
  if (spec.has_upper()) d += (spec.U - spec.u) * p.f_b;
  return d;
}

double g_second_deriv(double x, const SaturationSpec& spec, const NoiseModel& noise, const LinkTolerances& tol) {
  if (spec.is_linear() && noise.is_gaussian()) return 0.0;
  const double h = tol.curvature_step;
  return (g_deriv(x + h, spec, noise) - g_deriv(x - h, spec, noise)) / (2.0 * h);
}

double sigma_var(double x, const SaturationSpec& spec, const NoiseModel& noise, const LinkTolerances& tol) {
  if (!std::isfinite(x)) throw Error(ErrorCode::Domain, "sigma_var: argument must be finite");
  if (spec.is_linear() && noise.is_gaussian()) return noise.variance();
  const double G = g_mean(x, spec, noise, tol);
  const Pieces p = pieces(x, spec, noise);
  const double clamps = atoms(p, spec, [G](double v) { return (v - G) * (v - G); });
  if (const auto* g = noise.as_gaussian()) {
    // Centred at G: with d = x - G, integral of (d + e)^2 f(e) over [a, b].
    const double v = g->variance;
    const double d = x - G;
    double val = clamps + (d * d + v) * p.band + 2.0 * d * v * (p.f_a - p.f_b);
    if (spec.has_lower()) val += v * p.a * p.f_a;
    if (spec.has_upper()) val -= v * p.b * p.f_b;
    return std::max(0.0, val);
  }
  const double d = x - G;
  return std::max(0.0, clamps + integrate_band([d](double e) { return (d + e) * (d + e); }, p.a, p.b, noise, tol));
}

double central_moment4(double x, const SaturationSpec& spec, const NoiseModel& noise, const LinkTolerances& tol) {
  if (!std::isfinite(x)) throw Error(ErrorCode::Domain, "central_moment4: argument must be finite");
  const double G = g_mean(x, spec, noise, tol);
  const Pieces p = pieces(x, spec, noise);
  const double clamps = atoms(p, spec, [G](double v) { return std::pow(v - G, 4); });
  const double d = x - G;
  return clamps + integrate_band([d](double e) { return std::pow(d + e, 4); }, p.a, p.b, noise, tol);
}

LinkBounds g_bounds(double M, const SaturationSpec& spec, const NoiseModel& noise, const LinkTolerances& tol,
                    bool with_rho) {
  if (!(M > 0.0) || !std::isfinite(M)) throw Error(ErrorCode::Domain, "g_bounds: radius M must be positive and finite");
  LinkBounds out;
  out.M = M;
  if (spec.is_linear() && noise.is_gaussian()) {
    out.g_lo = out.g_hi = 1.0;
    out.rho = 0.0;
    return out;
  }

  auto deriv = [&](double x) { return g_deriv(x, spec, noise); };
  if (noise.is_gaussian() && spec.clamps_at_thresholds()) {
    // G' = F(u-x) - F(l-x): unimodal with its peak at the band centre.
    const double centre = std::clamp(0.5 * (spec.l + spec.u), -M, M);
    out.g_hi = deriv(centre);
    out.g_lo = std::min(deriv(-M), deriv(M));
  } else {
    out.g_lo = detail::grid_minimize(deriv, -M, M, tol.grid_divisions, tol.bounds).value;
    out.g_hi = detail::grid_maximize(deriv, -M, M, tol.grid_divisions, tol.bounds).value;
  }

  if (out.g_lo <= 0.0 || out.g_lo < std::numeric_limits<double>::min()) {
    // A Gaussian band with U > L has G' > 0 everywhere; zero here is underflow.
    const bool analytically_positive = noise.is_gaussian() && spec.U > spec.L;
    if (!analytically_positive) {
      std::ostringstream os;
      os << "link derivative is not bounded away from zero on [-" << M << ", " << M << "] (inf G' = " << out.g_lo
         << ")";
      throw Error(ErrorCode::Assumption, os.str());
    }
    out.g_lo = std::numeric_limits<double>::min();
    out.g_lo_floored = true;
  }
  out.g_hi = std::max(out.g_hi, out.g_lo);

  if (with_rho) {
    auto curvature = [&](double x) { return std::abs(g_second_deriv(x, spec, noise, tol)); };
    out.rho = detail::grid_maximize(curvature, -M, M, tol.grid_divisions, tol.bounds).value;
  } else {
    out.rho = std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

}  // namespace tsqn
