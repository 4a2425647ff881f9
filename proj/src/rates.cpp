#include "airig/rates.hpp"

#include "airig/solver.hpp"

#include <algorithm>
#include <cmath>

namespace airig {

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size(), "fit_line: size mismatch");
  require(x.size() >= 2, "fit_line: need at least two points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  require(sxx > 0.0, "fit_line: abscissae are all equal");
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (syy <= 1e-300) {
    fit.r2 = 1.0;
  } else {
    double ssr = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double e = y[i] - fit.intercept - fit.slope * x[i];
      ssr += e * e;
    }
    fit.r2 = std::clamp(1.0 - ssr / syy, 0.0, 1.0);
  }
  return fit;
}

nlohmann::json RateReport::to_json() const {
  nlohmann::json j = {{"slope_f", slope_f},
                      {"slope_phi", slope_phi},
                      {"fit_window", {k_lo, k_hi}},
                      {"r2_f", r2_f},
                      {"r2_phi", r2_phi},
                      {"excluded_f", excluded_f},
                      {"excluded_phi", excluded_phi}};
  j["bound_check_f"] = bound_check_f ? nlohmann::json(*bound_check_f) : nlohmann::json(nullptr);
  j["bound_check_phi"] = bound_check_phi ? nlohmann::json(*bound_check_phi) : nlohmann::json(nullptr);
  return j;
}

RateReport fit_rates(const std::vector<IterRecord>& records, double f_star, double window_fraction,
                     const std::optional<RateBoundContext>& context) {
  require(window_fraction > 0.0 && window_fraction <= 1.0, "fit_rates: window_fraction must lie in (0, 1]");
  require(std::isfinite(f_star), "fit_rates: f_star must be finite");
  const std::size_t total = records.size();
  const auto window = static_cast<std::size_t>(std::ceil(window_fraction * static_cast<double>(total)));
  require(window >= 2, "fit_rates: only " + std::to_string(total) + " records");
  const std::size_t start = total - window;

  RateReport rep;
  rep.k_lo = records[start].k;
  rep.k_hi = records.back().k;
  std::vector<double> xf, yf, xp, yp;
  for (std::size_t i = start; i < total; ++i) {
    const auto& r = records[i];
    const double t = std::log(static_cast<double>(r.k) + 1.0);
    const double sub = r.f_bar - f_star;
    if (sub > kFitFloor) {
      xf.push_back(t);
      yf.push_back(std::log(sub));
    } else {
      ++rep.excluded_f;
    }
    if (r.phi_bar > kFitFloor) {
      xp.push_back(t);
      yp.push_back(std::log(r.phi_bar));
    } else {
      ++rep.excluded_phi;
    }
  }
  if (xf.size() < kMinFitRecords || xp.size() < kMinFitRecords) {
    throw ContractViolation("fit_rates: need " + std::to_string(kMinFitRecords) +
                            " usable records in the window, have " + std::to_string(xf.size()) +
                            " for suboptimality and " + std::to_string(xp.size()) + " for infeasibility (" +
                            std::to_string(window) + " in window, " + std::to_string(total) + " total)");
  }
  if (rep.k_lo >= rep.k_hi) throw ContractViolation("fit_rates: window spans a single iteration");
  const LineFit ff = fit_line(xf, yf);
  const LineFit fp = fit_line(xp, yp);
  rep.slope_f = ff.slope;
  rep.r2_f = ff.r2;
  rep.slope_phi = fp.slope;
  rep.r2_phi = fp.r2;

  if (context) {
    const std::int64_t n_min = rate_bound_min_iterations(context->params.r);
    bool ok_f = true, ok_phi = true;
    for (std::size_t i = start; i < total; ++i) {
      const auto& r = records[i];
      const std::int64_t N = r.k + 1;
      if (N < n_min) continue;
      ok_f = ok_f && r.f_bar - f_star <= suboptimality_bound(context->params, context->bounds, context->m, N);
      ok_phi = ok_phi && r.phi_bar <= infeasibility_bound(context->params, context->bounds, context->m, N);
    }
    rep.bound_check_f = ok_f;
    rep.bound_check_phi = ok_phi;
  }
  return rep;
}

}  // namespace airig
