#include "vstress/classify.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "vstress/error.hpp"

namespace vstress::classify {

namespace {

Eigen::MatrixXd sample_covariance(const Eigen::MatrixXd& X) {
  Eigen::Index n = X.rows();
  if (n < 2)
    throw NumericError("covariance needs n >= 2");
  Eigen::MatrixXd centered = X.rowwise() - X.colwise().mean();
  return centered.transpose() * centered / static_cast<double>(n - 1);
}

// Inverse of an SPD covariance; one shot of ridge regularization
// (1e-8 * trace/p on the diagonal) when the plain factorization fails.
Eigen::MatrixXd spd_inverse(Eigen::MatrixXd S) {
  Eigen::Index p = S.cols();
  Eigen::LLT<Eigen::MatrixXd> llt(S);
  if (llt.info() != Eigen::Success) {
    S.diagonal().array() += 1e-8 * S.trace() / static_cast<double>(p);
    llt.compute(S);
    if (llt.info() != Eigen::Success)
      throw NumericError("covariance matrix is singular beyond regularization");
  }
  return llt.solve(Eigen::MatrixXd::Identity(p, p));
}

}  // namespace

Eigen::MatrixXd standardize(const Eigen::MatrixXd& X,
                            const std::vector<std::string>& column_names) {
  Eigen::Index n = X.rows();
  if (n < 2)
    throw ValidationError("standardize: need n >= 2");
  Eigen::MatrixXd out = X.rowwise() - X.colwise().mean();
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    double var = out.col(j).squaredNorm() / static_cast<double>(n - 1);
    if (var == 0.0) {
      std::string name = j < static_cast<Eigen::Index>(column_names.size())
                             ? column_names[static_cast<std::size_t>(j)]
                             : std::to_string(j);
      throw NumericError("zero variance: " + name);
    }
    out.col(j) /= std::sqrt(var);
  }
  return out;
}

StressMatrix standardize(const StressMatrix& m) {
  StressMatrix out = m;
  std::vector<std::string> names(StressMatrix::kColumns.begin(), StressMatrix::kColumns.end());
  out.data = standardize(m.data, names);
  return out;
}

Eigen::MatrixXd mahalanobis_distances(const Eigen::MatrixXd& X) {
  Eigen::Index n = X.rows();
  Eigen::MatrixXd Sinv = spd_inverse(sample_covariance(X));
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      Eigen::VectorXd d = X.row(i) - X.row(j);
      double q = d.dot(Sinv * d);
      D(i, j) = D(j, i) = std::sqrt(std::max(0.0, q));
    }
  }
  return D;
}

Eigen::MatrixXd mahalanobis_matrix(const StressMatrix& m) {
  return mahalanobis_distances(m.data);
}

Eigen::MatrixXd whiten(const Eigen::MatrixXd& X) {
  Eigen::MatrixXd S = sample_covariance(X);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(S);
  if (eig.info() != Eigen::Success)
    throw NumericError("whiten: eigendecomposition failed");
  Eigen::VectorXd evals = eig.eigenvalues();
  double ridge = 1e-8 * S.trace() / static_cast<double>(S.cols());
  for (Eigen::Index i = 0; i < evals.size(); ++i) {
    if (evals[i] <= 0.0)
      evals[i] += ridge;
    if (evals[i] <= 0.0)
      throw NumericError("whiten: covariance not positive definite");
  }
  Eigen::MatrixXd W = eig.eigenvectors() * evals.array().rsqrt().matrix().asDiagonal() *
                      eig.eigenvectors().transpose();
  Eigen::MatrixXd centered = X.rowwise() - X.colwise().mean();
  return centered * W;
}

DiscriminantModel lda_fit(const StressMatrix& m) {
  Eigen::Index n = m.data.rows();
  std::vector<Eigen::Index> adv, scv;
  for (Eigen::Index i = 0; i < n; ++i) {
    (m.admin[static_cast<std::size_t>(i)] == indices::AdminCategory::ADV ? adv : scv).push_back(i);
  }
  if (adv.size() < 2 || scv.size() < 2)
    throw ValidationError("lda_fit: both classes need at least 2 members");

  auto rows_of = [&](const std::vector<Eigen::Index>& idx) {
    Eigen::MatrixXd sub(static_cast<Eigen::Index>(idx.size()), m.data.cols());
    for (std::size_t i = 0; i < idx.size(); ++i)
      sub.row(static_cast<Eigen::Index>(i)) = m.data.row(idx[i]);
    return sub;
  };
  Eigen::MatrixXd Xa = rows_of(adv);
  Eigen::MatrixXd Xs = rows_of(scv);
  Eigen::VectorXd mu_a = Xa.colwise().mean().transpose();
  Eigen::VectorXd mu_s = Xs.colwise().mean().transpose();

  double na = static_cast<double>(adv.size());
  double ns = static_cast<double>(scv.size());
  Eigen::MatrixXd Sw =
      ((na - 1.0) * sample_covariance(Xa) + (ns - 1.0) * sample_covariance(Xs)) /
      (na + ns - 2.0);

  Eigen::LLT<Eigen::MatrixXd> llt(Sw);
  if (llt.info() != Eigen::Success)
    throw NumericError("lda_fit: pooled within-class covariance is singular");
  Eigen::VectorXd w = llt.solve(mu_s - mu_a);

  // Scale so the pooled within-class variance of scores is 1 (so reported
  // score means/sds land on a comparable unit), then center the weighted
  // grand-mean score at 0 and point the positive side at SCV.
  double qw = w.dot(Sw * w);
  if (!(qw > 0.0))
    throw NumericError("lda_fit: degenerate discriminant direction");
  w /= std::sqrt(qw);
  if (w.dot(mu_s - mu_a) < 0.0)
    w = -w;

  DiscriminantModel model;
  model.coefficients = w;
  Eigen::VectorXd grand = m.data.colwise().mean().transpose();
  model.offset = -grand.dot(w);
  model.positive_class = indices::AdminCategory::SCV;
  model.scores.resize(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i)
    model.scores[static_cast<std::size_t>(i)] = m.data.row(i).dot(w) + model.offset;
  model.labels = m.admin;
  return model;
}

ClassificationReport lda_classify(const DiscriminantModel& model) {
  if (model.scores.size() != model.labels.size() || model.scores.empty())
    throw ValidationError("lda_classify: model has no scores/labels");
  ClassificationReport rep;
  rep.predicted.reserve(model.scores.size());
  for (std::size_t i = 0; i < model.scores.size(); ++i) {
    // LD1 < 0 -> ADV; the boundary score 0 goes to SCV
    auto pred = model.scores[i] < 0.0 ? indices::AdminCategory::ADV
                                      : indices::AdminCategory::SCV;
    rep.predicted.push_back(pred);
    bool correct = pred == model.labels[i];
    if (model.labels[i] == indices::AdminCategory::ADV) {
      ++rep.adv_total;
      rep.adv_correct += correct;
    } else {
      ++rep.scv_total;
      rep.scv_correct += correct;
    }
  }
  rep.accuracy = static_cast<double>(rep.adv_correct + rep.scv_correct) /
                 static_cast<double>(model.scores.size());
  return rep;
}

LinkageTree hclust_average(const Eigen::MatrixXd& dist) {
  Eigen::Index n = dist.rows();
  if (n < 2 || dist.cols() != n)
    throw ValidationError("hclust: need a square matrix with n >= 2");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (dist(i, i) != 0.0)
      throw ValidationError("hclust: nonzero diagonal");
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if (dist(i, j) < 0.0 || dist(i, j) != dist(j, i))
        throw ValidationError("hclust: matrix must be symmetric and non-negative");
    }
  }

  std::map<int, int> size;  // active node -> member count
  for (int i = 0; i < n; ++i)
    size[i] = 1;
  std::map<std::pair<int, int>, double> d;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      d[{i, j}] = dist(i, j);

  LinkageTree tree;
  tree.leaf_count = static_cast<int>(n);
  int next_id = static_cast<int>(n);

  while (size.size() > 1) {
    // minimum distance; ties resolved toward the smallest (a, b) pair
    auto best = d.begin();
    for (auto it = std::next(d.begin()); it != d.end(); ++it) {
      if (it->second < best->second ||
          (it->second == best->second && it->first < best->first))
        best = it;
    }
    auto [a, b] = best->first;
    double h = best->second;
    int sa = size[a];
    int sb = size[b];

    for (const auto& [node, sz] : size) {
      if (node == a || node == b)
        continue;
      double da = d.at({std::min(a, node), std::max(a, node)});
      double db = d.at({std::min(b, node), std::max(b, node)});
      d[{std::min(node, next_id), std::max(node, next_id)}] =
          (sa * da + sb * db) / static_cast<double>(sa + sb);
    }
    for (auto it = d.begin(); it != d.end();) {
      if (it->first.first == a || it->first.second == a || it->first.first == b ||
          it->first.second == b)
        it = d.erase(it);
      else
        ++it;
    }
    size.erase(a);
    size.erase(b);
    size[next_id] = sa + sb;
    tree.merges.push_back({a, b, h, next_id});
    ++next_id;
  }
  return tree;
}

ClusterAssignment cut_tree(const LinkageTree& tree, int k) {
  int n = tree.leaf_count;
  if (k < 1 || k > n)
    throw ValidationError("cut_tree: k out of range");

  std::vector<int> parent(static_cast<std::size_t>(n) + tree.merges.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  };
  for (int i = 0; i < n - k; ++i) {
    const Merge& m = tree.merges[static_cast<std::size_t>(i)];
    parent[static_cast<std::size_t>(find(m.node_a))] = m.new_node;
    parent[static_cast<std::size_t>(find(m.node_b))] = m.new_node;
  }

  std::map<int, int> root_to_label;  // visiting leaves in order labels clusters
  ClusterAssignment out;             // by smallest member id
  out.k = k;
  out.labels.resize(static_cast<std::size_t>(n));
  int next_label = 1;
  for (int i = 0; i < n; ++i) {
    int root = find(i);
    auto [it, inserted] = root_to_label.emplace(root, next_label);
    if (inserted)
      ++next_label;
    out.labels[static_cast<std::size_t>(i)] = it->second;
  }
  return out;
}

SilhouetteResult silhouette(const Eigen::MatrixXd& dist, const ClusterAssignment& assignment) {
  int n = static_cast<int>(dist.rows());
  if (assignment.k < 2)
    throw ValidationError("silhouette: need k >= 2");
  if (static_cast<int>(assignment.labels.size()) != n)
    throw ValidationError("silhouette: assignment does not match matrix");

  std::map<int, int> cluster_size;
  for (int lab : assignment.labels)
    ++cluster_size[lab];

  SilhouetteResult res;
  res.scores.resize(static_cast<std::size_t>(n), 0.0);
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    int li = assignment.labels[static_cast<std::size_t>(i)];
    if (cluster_size[li] == 1) {
      res.scores[static_cast<std::size_t>(i)] = 0.0;  // singleton
      continue;
    }
    std::map<int, double> sum_to_cluster;
    for (int j = 0; j < n; ++j) {
      if (j == i)
        continue;
      sum_to_cluster[assignment.labels[static_cast<std::size_t>(j)]] += dist(i, j);
    }
    double a = sum_to_cluster[li] / (cluster_size[li] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (const auto& [lab, sum] : sum_to_cluster) {
      if (lab == li)
        continue;
      b = std::min(b, sum / cluster_size[lab]);
    }
    double s = (b - a) / std::max(a, b);
    res.scores[static_cast<std::size_t>(i)] = s;
    total += s;
  }
  res.mean = total / n;
  // singletons contribute 0 to the numerator but still count in the mean
  return res;
}

double calinski_harabasz(const Eigen::MatrixXd& coords, const ClusterAssignment& assignment) {
  int n = static_cast<int>(coords.rows());
  int k = assignment.k;
  if (k < 2 || k >= n)
    throw ValidationError("calinski_harabasz: need 2 <= k < n");
  if (static_cast<int>(assignment.labels.size()) != n)
    throw ValidationError("calinski_harabasz: assignment does not match matrix");

  Eigen::RowVectorXd grand = coords.colwise().mean();
  std::map<int, std::vector<int>> members;
  for (int i = 0; i < n; ++i)
    members[assignment.labels[static_cast<std::size_t>(i)]].push_back(i);

  double ssb = 0.0, ssw = 0.0;
  for (const auto& [lab, rows] : members) {
    Eigen::RowVectorXd centroid = Eigen::RowVectorXd::Zero(coords.cols());
    for (int r : rows)
      centroid += coords.row(r);
    centroid /= static_cast<double>(rows.size());
    ssb += static_cast<double>(rows.size()) * (centroid - grand).squaredNorm();
    for (int r : rows)
      ssw += (coords.row(r) - centroid).squaredNorm();
  }
  if (ssw == 0.0)
    throw NumericError("calinski_harabasz: zero within-cluster dispersion");
  return (ssb / (k - 1)) / (ssw / (n - k));
}

ClusterModel build_cluster_model(const StressMatrix& m) {
  ClusterModel model;
  std::vector<std::string> names(StressMatrix::kColumns.begin(), StressMatrix::kColumns.end());
  model.standardized = standardize(m.data, names);
  model.whitened = whiten(model.standardized);
  model.distances = mahalanobis_distances(model.standardized);
  model.tree = hclust_average(model.distances);
  return model;
}

ValidityReport scan_k(const ClusterModel& model, int kmin, int kmax) {
  int n = model.tree.leaf_count;
  if (kmin < 2)
    throw ValidationError("scan_k: kmin must be >= 2");
  if (kmax < kmin)
    throw ValidationError("scan_k: empty k range");
  if (kmax >= n)
    throw ValidationError("k_range exceeds n-1");

  ValidityReport rep;
  for (int k = kmin; k <= kmax; ++k) {
    ClusterAssignment cut = cut_tree(model.tree, k);
    ValidityRow row;
    row.k = k;
    row.mean_silhouette = silhouette(model.distances, cut).mean;
    row.calinski_harabasz = calinski_harabasz(model.whitened, cut);
    rep.rows.push_back(row);
  }
  rep.silhouette_argmax_k =
      std::max_element(rep.rows.begin(), rep.rows.end(),
                       [](const ValidityRow& a, const ValidityRow& b) {
                         return a.mean_silhouette < b.mean_silhouette;
                       })
          ->k;
  rep.ch_argmax_k = std::max_element(rep.rows.begin(), rep.rows.end(),
                                     [](const ValidityRow& a, const ValidityRow& b) {
                                       return a.calinski_harabasz < b.calinski_harabasz;
                                     })
                        ->k;
  return rep;
}

ValidityReport scan_k(const StressMatrix& m, int kmin, int kmax) {
  return scan_k(build_cluster_model(m), kmin, kmax);
}

CrossTab cross_tab(const std::vector<indices::AdminCategory>& admin,
                   const ClusterAssignment& assignment) {
  if (admin.size() != assignment.labels.size())
    throw ValidationError("cross_tab: length mismatch");
  CrossTab tab;
  tab.k = assignment.k;
  tab.counts[0].assign(static_cast<std::size_t>(assignment.k), 0);
  tab.counts[1].assign(static_cast<std::size_t>(assignment.k), 0);
  tab.col_totals.assign(static_cast<std::size_t>(assignment.k), 0);
  for (std::size_t i = 0; i < admin.size(); ++i) {
    int row = admin[i] == indices::AdminCategory::ADV ? 0 : 1;
    int col = assignment.labels[i] - 1;
    if (col < 0 || col >= assignment.k)
      throw ValidationError("cross_tab: label out of range");
    ++tab.counts[static_cast<std::size_t>(row)][static_cast<std::size_t>(col)];
    ++tab.row_totals[static_cast<std::size_t>(row)];
    ++tab.col_totals[static_cast<std::size_t>(col)];
  }
  return tab;
}

std::vector<int> align_labels(const std::vector<int>& reference, const std::vector<int>& labels) {
  if (reference.size() != labels.size())
    throw ValidationError("align_labels: length mismatch");
  std::set<int> ref_ids(reference.begin(), reference.end());
  std::set<int> lab_ids(labels.begin(), labels.end());
  if (ref_ids.size() != lab_ids.size())
    throw ValidationError("align_labels: different cluster counts");

  std::vector<int> ref_list(ref_ids.begin(), ref_ids.end());
  std::vector<int> lab_list(lab_ids.begin(), lab_ids.end());
  std::size_t k = ref_list.size();

  std::map<std::pair<int, int>, int> overlap;
  for (std::size_t i = 0; i < labels.size(); ++i)
    ++overlap[{labels[i], reference[i]}];

  // exact best-overlap assignment over permutations (k is small here)
  std::vector<std::size_t> perm(k);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<std::size_t> best_perm = perm;
  long best_score = -1;
  do {
    long score = 0;
    for (std::size_t i = 0; i < k; ++i) {
      auto it = overlap.find({lab_list[i], ref_list[perm[i]]});
      if (it != overlap.end())
        score += it->second;
    }
    if (score > best_score) {
      best_score = score;
      best_perm = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));

  std::map<int, int> remap;
  for (std::size_t i = 0; i < k; ++i)
    remap[lab_list[i]] = ref_list[best_perm[i]];
  std::vector<int> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i)
    out[i] = remap[labels[i]];
  return out;
}

double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size() || a.empty())
    throw ValidationError("adjusted_rand_index: length mismatch");
  auto comb2 = [](long v) { return v * (v - 1) / 2.0; };

  std::map<std::pair<int, int>, long> cells;
  std::map<int, long> rows, cols;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ++cells[{a[i], b[i]}];
    ++rows[a[i]];
    ++cols[b[i]];
  }
  double sum_cells = 0.0, sum_rows = 0.0, sum_cols = 0.0;
  for (const auto& [key, v] : cells)
    sum_cells += comb2(v);
  for (const auto& [key, v] : rows)
    sum_rows += comb2(v);
  for (const auto& [key, v] : cols)
    sum_cols += comb2(v);
  double total = comb2(static_cast<long>(a.size()));
  double expected = sum_rows * sum_cols / total;
  double max_index = 0.5 * (sum_rows + sum_cols);
  if (max_index == expected)
    return 1.0;  // both partitions are single clusters
  return (sum_cells - expected) / (max_index - expected);
}

}  // namespace vstress::classify
