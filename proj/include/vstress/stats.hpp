#ifndef VSTRESS_STATS_HPP
#define VSTRESS_STATS_HPP

#include <Eigen/Dense>
#include <span>
#include <string>
#include <vector>

namespace vstress::stats {

/// Regularized incomplete beta I_x(a, b) by the continued-fraction expansion
/// with the standard symmetry split; absolute error <= 1e-12.
double regularized_incomplete_beta(double x, double a, double b);

/// Upper-tail probability of F(d1, d2) at f.
double f_tail(double f, int d1, int d2);

/// Two-tailed Student-t probability at |t| with df degrees of freedom.
double t_two_tailed(double t, int df);

/// One-sided t quantile: x with P(T <= x) = p, for p in (0.5, 1).
double t_quantile(double p, int df);

/// Product-moment correlation. Throws NumericError("zero variance") on a
/// constant input; inputs must have equal length n >= 3.
double pearson_r(std::span<const double> x, std::span<const double> y);

/// Two-tailed p for an observed r at sample size n, via
/// t = r sqrt((n-2)/(1-r^2)). |r| = 1 gives p = 0 exactly.
double pearson_p(double r, int n);

/// VIF_j = 1/(1 - R^2_j) from least-squares regression of column j on the
/// remaining columns plus an intercept. Exact collinearity reports +inf.
Eigen::VectorXd vif(const Eigen::MatrixXd& X);

struct SummaryGroup {
  std::string label;
  int n = 0;
  double mean = 0.0;
  double sd = 0.0;  // sample (n-1) convention
};

struct AnovaResult {
  double f = 0.0;
  int df_between = 0;
  int df_within = 0;
  double p = 1.0;
};

AnovaResult anova_oneway(const std::vector<std::vector<double>>& groups);
AnovaResult anova_from_summary(const std::vector<SummaryGroup>& groups);

/// Pooled-variance two-group confidence interval for mean1 - mean2.
struct MeanDifferenceCI {
  double lo = 0.0;
  double hi = 0.0;
};

MeanDifferenceCI pooled_ci(const SummaryGroup& g1, const SummaryGroup& g2,
                           double confidence = 0.95);

/// "***" p < 0.001, "**" p < 0.01, "*" p < 0.05, "" otherwise.
std::string significance_stars(double p);

struct CorrelationReport {
  Eigen::MatrixXd r;    // symmetric, unit diagonal
  Eigen::MatrixXd p;    // two-tailed
  Eigen::VectorXd vif;
  std::vector<std::pair<int, int>> flagged;  // pairs with p < 0.05, i < j
};

/// Pairwise r/p over the columns of X plus the VIF vector. Needs n >= 3.
CorrelationReport correlation_report(const Eigen::MatrixXd& X);

}  // namespace vstress::stats

#endif
