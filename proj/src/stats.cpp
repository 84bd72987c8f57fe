#include "vstress/stats.hpp"

#include <cmath>
#include <limits>

#include "vstress/error.hpp"

namespace vstress::stats {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Continued fraction for the incomplete beta (modified Lentz).
double beta_continued_fraction(double x, double a, double b) {
  constexpr double tiny = 1e-300;
  constexpr double eps = 1e-15;
  constexpr int max_iter = 500;

  double qab = a + b;
  double qap = a + 1.0;
  double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < tiny)
    d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= max_iter; ++m) {
    int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny)
      d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny)
      c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny)
      d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny)
      c = tiny;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < eps)
      return h;
  }
  throw NumericError("incomplete beta continued fraction did not converge");
}

}  // namespace

double regularized_incomplete_beta(double x, double a, double b) {
  if (!(a > 0.0) || !(b > 0.0))
    throw NumericError("incomplete beta requires a, b > 0");
  if (x <= 0.0)
    return 0.0;
  if (x >= 1.0)
    return 1.0;
  double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                    a * std::log(x) + b * std::log1p(-x);
  double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0))
    return front * beta_continued_fraction(x, a, b) / a;
  return 1.0 - front * beta_continued_fraction(1.0 - x, b, a) / b;
}

double f_tail(double f, int d1, int d2) {
  if (d1 < 1 || d2 < 1)
    throw NumericError("f_tail requires d1, d2 >= 1");
  if (f <= 0.0)
    return 1.0;
  if (std::isinf(f))
    return 0.0;
  double x = d2 / (d2 + d1 * f);
  return regularized_incomplete_beta(x, d2 / 2.0, d1 / 2.0);
}

double t_two_tailed(double t, int df) {
  if (df < 1)
    throw NumericError("t_two_tailed requires df >= 1");
  if (std::isinf(t))
    return 0.0;
  double x = df / (t * t + df);
  return regularized_incomplete_beta(x, df / 2.0, 0.5);
}

double t_quantile(double p, int df) {
  if (!(p > 0.5 && p < 1.0))
    throw NumericError("t_quantile expects p in (0.5, 1)");
  // two-tailed probability at the quantile
  double target = 2.0 * (1.0 - p);
  double lo = 0.0, hi = 1.0;
  while (t_two_tailed(hi, df) > target)
    hi *= 2.0;
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (lo + hi);
    if (t_two_tailed(mid, df) > target)
      lo = mid;
    else
      hi = mid;
    if (hi - lo < 1e-13 * std::max(1.0, hi))
      break;
  }
  return 0.5 * (lo + hi);
}

double pearson_r(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    throw ValidationError("pearson_r: length mismatch");
  std::size_t n = x.size();
  if (n < 3)
    throw ValidationError("pearson_r: need n >= 3");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double dx = x[i] - mx;
    double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0)
    throw NumericError("zero variance");
  double r = sxy / std::sqrt(sxx * syy);
  return std::clamp(r, -1.0, 1.0);
}

double pearson_p(double r, int n) {
  if (n < 3)
    throw ValidationError("pearson_p: need n >= 3");
  if (std::fabs(r) >= 1.0)
    return 0.0;
  double t = r * std::sqrt((n - 2) / (1.0 - r * r));
  return t_two_tailed(t, n - 2);
}

Eigen::VectorXd vif(const Eigen::MatrixXd& X) {
  Eigen::Index n = X.rows();
  Eigen::Index p = X.cols();
  if (n <= p)
    throw ValidationError("vif: need more rows than columns");
  Eigen::VectorXd out(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    Eigen::VectorXd y = X.col(j);
    double ybar = y.mean();
    double tss = (y.array() - ybar).square().sum();
    if (tss == 0.0)
      throw NumericError(std::string("zero variance column in vif input"));
    Eigen::MatrixXd A(n, p);  // intercept + other columns
    A.col(0).setOnes();
    Eigen::Index k = 1;
    for (Eigen::Index c = 0; c < p; ++c) {
      if (c == j)
        continue;
      A.col(k++) = X.col(c);
    }
    Eigen::VectorXd beta = A.colPivHouseholderQr().solve(y);
    double rss = (y - A * beta).squaredNorm();
    double r2 = 1.0 - rss / tss;
    out[j] = (r2 >= 1.0 - 1e-12) ? kInf : 1.0 / (1.0 - r2);
  }
  return out;
}

AnovaResult anova_oneway(const std::vector<std::vector<double>>& groups) {
  if (groups.size() < 2)
    throw ValidationError("anova: need at least 2 groups");
  int k = static_cast<int>(groups.size());
  int n = 0;
  double grand_sum = 0.0;
  for (const auto& g : groups) {
    if (g.empty())
      throw ValidationError("anova: empty group");
    n += static_cast<int>(g.size());
    for (double v : g)
      grand_sum += v;
  }
  if (n <= k)
    throw ValidationError("anova: total sample size must exceed group count");
  double grand_mean = grand_sum / n;

  double ssb = 0.0, ssw = 0.0;
  for (const auto& g : groups) {
    double m = 0.0;
    for (double v : g)
      m += v;
    m /= static_cast<double>(g.size());
    ssb += static_cast<double>(g.size()) * (m - grand_mean) * (m - grand_mean);
    for (double v : g)
      ssw += (v - m) * (v - m);
  }

  AnovaResult res;
  res.df_between = k - 1;
  res.df_within = n - k;
  if (ssw == 0.0) {
    if (ssb == 0.0)
      throw NumericError("zero within and between variance");
    res.f = kInf;
    res.p = 0.0;
    return res;
  }
  res.f = (ssb / res.df_between) / (ssw / res.df_within);
  res.p = f_tail(res.f, res.df_between, res.df_within);
  return res;
}

AnovaResult anova_from_summary(const std::vector<SummaryGroup>& groups) {
  if (groups.size() < 2)
    throw ValidationError("anova: need at least 2 groups");
  int k = static_cast<int>(groups.size());
  int n = 0;
  double grand_sum = 0.0;
  for (const auto& g : groups) {
    if (g.n < 1)
      throw ValidationError("anova: group size must be >= 1");
    if (g.sd < 0.0)
      throw ValidationError("anova: negative sd");
    n += g.n;
    grand_sum += g.n * g.mean;
  }
  if (n <= k)
    throw ValidationError("anova: total sample size must exceed group count");
  double grand_mean = grand_sum / n;

  double ssb = 0.0, ssw = 0.0;
  for (const auto& g : groups) {
    ssb += g.n * (g.mean - grand_mean) * (g.mean - grand_mean);
    ssw += (g.n - 1) * g.sd * g.sd;
  }

  AnovaResult res;
  res.df_between = k - 1;
  res.df_within = n - k;
  if (ssw == 0.0) {
    if (ssb == 0.0)
      throw NumericError("zero within and between variance");
    res.f = kInf;
    res.p = 0.0;
    return res;
  }
  res.f = (ssb / res.df_between) / (ssw / res.df_within);
  res.p = f_tail(res.f, res.df_between, res.df_within);
  return res;
}

MeanDifferenceCI pooled_ci(const SummaryGroup& g1, const SummaryGroup& g2, double confidence) {
  if (g1.n < 2 || g2.n < 2)
    throw ValidationError("pooled_ci: need n >= 2 per group");
  int df = g1.n + g2.n - 2;
  double pooled_var =
      ((g1.n - 1) * g1.sd * g1.sd + (g2.n - 1) * g2.sd * g2.sd) / static_cast<double>(df);
  double se = std::sqrt(pooled_var * (1.0 / g1.n + 1.0 / g2.n));
  double tcrit = t_quantile(0.5 + confidence / 2.0, df);
  double diff = g1.mean - g2.mean;
  return {diff - tcrit * se, diff + tcrit * se};
}

std::string significance_stars(double p) {
  if (p < 0.001)
    return "***";
  if (p < 0.01)
    return "**";
  if (p < 0.05)
    return "*";
  return "";
}

CorrelationReport correlation_report(const Eigen::MatrixXd& X) {
  Eigen::Index n = X.rows();
  Eigen::Index p = X.cols();
  if (n < 3)
    throw ValidationError("correlation report: need n >= 3");

  CorrelationReport rep;
  rep.r = Eigen::MatrixXd::Identity(p, p);
  rep.p = Eigen::MatrixXd::Zero(p, p);
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = i + 1; j < p; ++j) {
      std::vector<double> xi(X.col(i).data(), X.col(i).data() + n);
      std::vector<double> xj(X.col(j).data(), X.col(j).data() + n);
      double r = pearson_r(xi, xj);
      double pv = pearson_p(r, static_cast<int>(n));
      rep.r(i, j) = rep.r(j, i) = r;
      rep.p(i, j) = rep.p(j, i) = pv;
      if (pv < 0.05)
        rep.flagged.emplace_back(static_cast<int>(i), static_cast<int>(j));
    }
  }
  rep.vif = vif(X);
  return rep;
}

}  // namespace vstress::stats
