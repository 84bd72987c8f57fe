#ifndef VSTRESS_CLASSIFY_HPP
#define VSTRESS_CLASSIFY_HPP

#include <Eigen/Dense>
#include <array>
#include <string>
#include <vector>

#include "vstress/indices.hpp"

namespace vstress::classify {

/// Village-by-indicator table, columns in canonical order.
struct StressMatrix {
  std::vector<std::string> ids;
  std::vector<std::string> names;
  std::vector<indices::AdminCategory> admin;
  Eigen::MatrixXd data;  // n x 4

  static constexpr std::array<const char*, 4> kColumns = {"SGI", "SREI", "WI", "AII"};
  int n() const { return static_cast<int>(data.rows()); }
};

/// Column z-scores (sample sd). Throws NumericError("zero variance: <col>")
/// on a constant column.
Eigen::MatrixXd standardize(const Eigen::MatrixXd& X,
                            const std::vector<std::string>& column_names = {});
StressMatrix standardize(const StressMatrix& m);

/// Pairwise d(i,j) = sqrt((xi-xj)' S^-1 (xi-xj)) with S the sample covariance
/// of X. When plain inversion fails, 1e-8 * trace(S)/p is added to the
/// diagonal once; a still-singular matrix is an error.
Eigen::MatrixXd mahalanobis_distances(const Eigen::MatrixXd& X);
Eigen::MatrixXd mahalanobis_matrix(const StressMatrix& m);

/// Coordinates in which Euclidean distance equals Mahalanobis distance
/// (centered, multiplied by S^-1/2).
Eigen::MatrixXd whiten(const Eigen::MatrixXd& X);

/// Two-class Fisher discriminant. Direction solves S_w w = mu_SCV - mu_ADV
/// with the pooled within-class covariance; scaled so the pooled within-class
/// variance of scores is 1; offset centers the score of the grand mean at 0;
/// sign fixed so the SCV mean score is positive.
struct DiscriminantModel {
  Eigen::VectorXd coefficients;  // one per indicator column
  double offset = 0.0;
  indices::AdminCategory positive_class = indices::AdminCategory::SCV;
  std::vector<double> scores;
  std::vector<indices::AdminCategory> labels;  // true labels, aligned with scores
};

DiscriminantModel lda_fit(const StressMatrix& m);

/// Rule: LD1 < 0 -> ADV, LD1 >= 0 -> SCV (boundary goes to SCV).
struct ClassificationReport {
  int adv_total = 0;
  int adv_correct = 0;
  int scv_total = 0;
  int scv_correct = 0;
  double accuracy = 0.0;
  std::vector<indices::AdminCategory> predicted;
};

ClassificationReport lda_classify(const DiscriminantModel& model);

/// UPGMA merge history. Leaves are 0..n-1; merge i creates node n+i.
struct Merge {
  int node_a = 0;
  int node_b = 0;  // node_a < node_b
  double height = 0.0;
  int new_node = 0;
};

struct LinkageTree {
  int leaf_count = 0;
  std::vector<Merge> merges;  // exactly leaf_count - 1, non-decreasing heights
};

/// Average linkage on a symmetric, zero-diagonal, non-negative matrix.
/// Equal-distance merges break ties toward the smallest (node_a, node_b).
LinkageTree hclust_average(const Eigen::MatrixXd& dist);

/// Cluster ids 1..k, numbered by each cluster's smallest member index.
struct ClusterAssignment {
  int k = 0;
  std::vector<int> labels;
};

ClusterAssignment cut_tree(const LinkageTree& tree, int k);

struct SilhouetteResult {
  double mean = 0.0;
  std::vector<double> scores;  // per point; singleton clusters score 0
};

SilhouetteResult silhouette(const Eigen::MatrixXd& dist, const ClusterAssignment& assignment);

/// (SSB/(k-1)) / (SSW/(n-k)) over the rows of a (whitened) coordinate matrix.
double calinski_harabasz(const Eigen::MatrixXd& coords, const ClusterAssignment& assignment);

/// Shared intermediates for one clustering run over a stress table.
struct ClusterModel {
  Eigen::MatrixXd standardized;
  Eigen::MatrixXd whitened;
  Eigen::MatrixXd distances;
  LinkageTree tree;
};

ClusterModel build_cluster_model(const StressMatrix& m);

struct ValidityRow {
  int k = 0;
  double mean_silhouette = 0.0;
  double calinski_harabasz = 0.0;
};

struct ValidityReport {
  std::vector<ValidityRow> rows;
  int silhouette_argmax_k = 0;
  int ch_argmax_k = 0;
};

/// One clustering per k from a single tree; kmax must stay below n.
ValidityReport scan_k(const ClusterModel& model, int kmin = 2, int kmax = 16);
ValidityReport scan_k(const StressMatrix& m, int kmin = 2, int kmax = 16);

/// Admin-category x cluster contingency counts (rows: ADV, SCV).
struct CrossTab {
  int k = 0;
  std::array<std::vector<int>, 2> counts;
  std::array<int, 2> row_totals = {0, 0};
  std::vector<int> col_totals;
};

CrossTab cross_tab(const std::vector<indices::AdminCategory>& admin,
                   const ClusterAssignment& assignment);

/// Relabel `labels` onto `reference` numbering by best-overlap matching.
std::vector<int> align_labels(const std::vector<int>& reference, const std::vector<int>& labels);

double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b);

}  // namespace vstress::classify

#endif
