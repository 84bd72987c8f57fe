#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>

#include "vstress/classify.hpp"
#include "vstress/error.hpp"
#include "vstress/pipeline.hpp"
#include "vstress/stats.hpp"

using namespace vstress;
using classify::ClusterAssignment;
using classify::LinkageTree;
using classify::StressMatrix;

namespace {

StressMatrix table_from(const Eigen::MatrixXd& data) {
  StressMatrix m;
  m.data = data;
  for (int i = 0; i < data.rows(); ++i) {
    m.ids.push_back("V" + std::to_string(i));
    m.names.push_back(m.ids.back());
    m.admin.push_back(i % 2 ? indices::AdminCategory::SCV : indices::AdminCategory::ADV);
  }
  return m;
}

StressMatrix fixture_table() {
  auto villages = cli::load_villages(std::string(FIXTURES_DIR) + "/villages.csv");
  return indices::assemble_stress_table(villages);
}

std::vector<int> fixture_truth() {
  auto assign = cli::load_assignment(std::string(FIXTURES_DIR) + "/assignment_spatial.csv");
  StressMatrix table = fixture_table();
  std::vector<int> out;
  for (const auto& id : table.ids)
    out.push_back(assign.at(id));
  return out;
}

// Brute-force UPGMA oracle: after every merge, recompute every inter-cluster
// distance as the plain mean of original pairwise distances.
LinkageTree upgma_oracle(const Eigen::MatrixXd& dist) {
  int n = static_cast<int>(dist.rows());
  std::map<int, std::vector<int>> members;
  for (int i = 0; i < n; ++i)
    members[i] = {i};
  LinkageTree tree;
  tree.leaf_count = n;
  int next_id = n;
  while (members.size() > 1) {
    double best = std::numeric_limits<double>::infinity();
    std::pair<int, int> best_pair{-1, -1};
    for (auto a = members.begin(); a != members.end(); ++a) {
      for (auto b = std::next(a); b != members.end(); ++b) {
        double sum = 0.0;
        for (int i : a->second)
          for (int j : b->second)
            sum += dist(i, j);
        double avg = sum / (static_cast<double>(a->second.size()) * b->second.size());
        std::pair<int, int> key{a->first, b->first};
        if (avg < best || (avg == best && key < best_pair)) {
          best = avg;
          best_pair = key;
        }
      }
    }
    auto [a, b] = best_pair;
    std::vector<int> merged = members[a];
    merged.insert(merged.end(), members[b].begin(), members[b].end());
    members.erase(a);
    members.erase(b);
    members[next_id] = merged;
    tree.merges.push_back({a, b, best, next_id});
    ++next_id;
  }
  return tree;
}

Eigen::MatrixXd random_distance_matrix(std::mt19937& rng, int n) {
  std::uniform_real_distribution<double> u(0.1, 10.0);
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      d(i, j) = d(j, i) = u(rng);
  return d;
}

// Per-point silhouette straight from the definition.
double silhouette_point_oracle(const Eigen::MatrixXd& dist, const std::vector<int>& labels,
                               int i) {
  int n = static_cast<int>(labels.size());
  int li = labels[static_cast<std::size_t>(i)];
  std::map<int, std::pair<double, int>> acc;  // label -> (sum, count)
  for (int j = 0; j < n; ++j) {
    if (j == i)
      continue;
    auto& [sum, count] = acc[labels[static_cast<std::size_t>(j)]];
    sum += dist(i, j);
    ++count;
  }
  if (!acc.count(li))
    return 0.0;  // singleton
  double a = acc[li].first / acc[li].second;
  double b = std::numeric_limits<double>::infinity();
  for (const auto& [lab, sc] : acc)
    if (lab != li)
      b = std::min(b, sc.first / sc.second);
  return (b - a) / std::max(a, b);
}

// Gaussian clusters in a latent space of dimension m, embedded into the four
// indicator columns by a fixed full-rank map. Keeping the within-cluster
// noise inside the between-cluster subspace matters: the Mahalanobis pipeline
// whitens by the total covariance, and noise orthogonal to every centroid
// difference would be inflated to unit variance, swamping the separation.
Eigen::MatrixXd gaussian_blobs(std::mt19937& rng, const Eigen::MatrixXd& centers,
                               const Eigen::MatrixXd& embed, const std::vector<int>& sizes,
                               double sd, std::vector<int>* truth = nullptr) {
  std::normal_distribution<double> d(0.0, sd);
  int m = static_cast<int>(centers.cols());
  int total = 0;
  for (int s : sizes)
    total += s;
  Eigen::MatrixXd X(total, 4);
  int row = 0;
  for (Eigen::Index c = 0; c < centers.rows(); ++c) {
    for (int i = 0; i < sizes[static_cast<std::size_t>(c)]; ++i, ++row) {
      Eigen::VectorXd latent = centers.row(c);
      for (int j = 0; j < m; ++j)
        latent[j] += d(rng);
      X.row(row) = (embed * latent).transpose();
      if (truth)
        truth->push_back(static_cast<int>(c) + 1);
    }
  }
  return X;
}

}  // namespace

TEST_CASE("standardize") {
  SUBCASE("symmetric z-scores") {
    Eigen::MatrixXd X(3, 1);
    X << 0, 1, 2;
    Eigen::MatrixXd Z = classify::standardize(X);
    CHECK(Z(0, 0) == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(Z(1, 0) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(Z(2, 0) == doctest::Approx(1.0).epsilon(1e-15));
  }
  SUBCASE("idempotent") {
    std::mt19937 rng(2);
    std::normal_distribution<double> d(3.0, 2.5);
    Eigen::MatrixXd X(10, 4);
    for (int i = 0; i < 10; ++i)
      for (int j = 0; j < 4; ++j)
        X(i, j) = d(rng);
    Eigen::MatrixXd Z = classify::standardize(X);
    Eigen::MatrixXd Z2 = classify::standardize(Z);
    CHECK((Z - Z2).cwiseAbs().maxCoeff() < 1e-9);
  }
  SUBCASE("constant column names the indicator") {
    StressMatrix m = table_from(Eigen::MatrixXd::Random(5, 4));
    m.data.col(3).setConstant(0.25);
    CHECK_THROWS_WITH_AS(classify::standardize(m), doctest::Contains("zero variance: AII"),
                         NumericError);
  }
}

TEST_CASE("mahalanobis distances") {
  SUBCASE("identity covariance reduces to euclidean") {
    // centered orthogonal columns scaled to unit sample variance
    Eigen::MatrixXd X(4, 2);
    X << 1, 1, 1, -1, -1, 1, -1, -1;
    X /= std::sqrt(4.0 / 3.0);  // sample variance 1
    Eigen::MatrixXd D = classify::mahalanobis_distances(X);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        CHECK(D(i, j) == doctest::Approx((X.row(i) - X.row(j)).norm()).epsilon(1e-8));
  }
  SUBCASE("metric axioms on a random fixture") {
    std::mt19937 rng(5);
    std::normal_distribution<double> d;
    Eigen::MatrixXd X(6, 4);
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 4; ++j)
        X(i, j) = d(rng);
    Eigen::MatrixXd D = classify::mahalanobis_distances(X);
    for (int i = 0; i < 6; ++i) {
      CHECK(D(i, i) == 0.0);
      for (int j = 0; j < 6; ++j)
        CHECK(D(i, j) == D(j, i));
    }
  }
  SUBCASE("two-column fixture against the closed-form 2x2 inverse") {
    std::mt19937 rng(7);
    std::normal_distribution<double> d;
    Eigen::MatrixXd X(12, 2);
    for (int i = 0; i < 12; ++i) {
      X(i, 0) = d(rng);
      X(i, 1) = 0.5 * X(i, 0) + std::sqrt(1 - 0.25) * d(rng);
    }
    Eigen::MatrixXd D = classify::mahalanobis_distances(X);
    // oracle: explicit 2x2 inversion of the sample covariance
    Eigen::MatrixXd C = X.rowwise() - X.colwise().mean();
    Eigen::Matrix2d S = C.transpose() * C / 11.0;
    double det = S(0, 0) * S(1, 1) - S(0, 1) * S(1, 0);
    Eigen::Matrix2d Sinv;
    Sinv << S(1, 1) / det, -S(0, 1) / det, -S(1, 0) / det, S(0, 0) / det;
    for (int i = 0; i < 12; ++i) {
      for (int j = i + 1; j < 12; ++j) {
        Eigen::Vector2d diff = X.row(i) - X.row(j);
        double expected = std::sqrt(diff.dot(Sinv * diff));
        CHECK(D(i, j) == doctest::Approx(expected).epsilon(1e-8));
      }
    }
  }
  SUBCASE("invariant under invertible affine column maps") {
    std::mt19937 rng(11);
    std::normal_distribution<double> d;
    Eigen::MatrixXd X(9, 4);
    for (int i = 0; i < 9; ++i)
      for (int j = 0; j < 4; ++j)
        X(i, j) = d(rng);
    Eigen::MatrixXd D = classify::mahalanobis_distances(X);
    for (int trial = 0; trial < 5; ++trial) {
      Eigen::Matrix4d A;
      do {
        for (int i = 0; i < 4; ++i)
          for (int j = 0; j < 4; ++j)
            A(i, j) = d(rng);
      } while (std::abs(A.determinant()) < 0.1);
      Eigen::RowVector4d b = Eigen::RowVector4d::Random();
      Eigen::MatrixXd Y = (X * A).rowwise() + b;
      Eigen::MatrixXd D2 = classify::mahalanobis_distances(Y);
      CHECK((D - D2).cwiseAbs().maxCoeff() < 1e-8);
    }
  }
}

TEST_CASE("linear discriminant analysis") {
  using indices::AdminCategory;
  SUBCASE("axis-aligned separation concentrates the coefficient") {
    std::mt19937 rng(13);
    std::normal_distribution<double> d(0.0, 0.2);
    const int per_class = 100;  // large enough for noise-axis mean gaps to vanish
    Eigen::MatrixXd X(2 * per_class, 4);
    StressMatrix m;
    for (int i = 0; i < 2 * per_class; ++i) {
      bool scv = i >= per_class;
      X(i, 0) = (scv ? 3.0 : 0.0) + d(rng);
      for (int j = 1; j < 4; ++j)
        X(i, j) = d(rng);
      m.ids.push_back("V" + std::to_string(i));
      m.names.push_back(m.ids.back());
      m.admin.push_back(scv ? AdminCategory::SCV : AdminCategory::ADV);
    }
    m.data = X;
    classify::DiscriminantModel model = classify::lda_fit(m);
    for (int j = 1; j < 4; ++j)
      CHECK(std::abs(model.coefficients[0]) > 5.0 * std::abs(model.coefficients[j]));
    classify::ClassificationReport rep = classify::lda_classify(model);
    CHECK(rep.accuracy == 1.0);
  }
  SUBCASE("direction matches the closed-form pooled-covariance solve") {
    std::mt19937 rng(17);
    std::normal_distribution<double> d;
    Eigen::MatrixXd X(30, 4);
    StressMatrix m;
    for (int i = 0; i < 30; ++i) {
      bool scv = i >= 14;
      for (int j = 0; j < 4; ++j)
        X(i, j) = d(rng) + (scv ? 0.8 * (j + 1) : 0.0);
      m.ids.push_back("V" + std::to_string(i));
      m.names.push_back(m.ids.back());
      m.admin.push_back(scv ? AdminCategory::SCV : AdminCategory::ADV);
    }
    m.data = X;
    classify::DiscriminantModel model = classify::lda_fit(m);

    // oracle: explicit inverse of the pooled covariance
    Eigen::MatrixXd Xa = X.topRows(14), Xs = X.bottomRows(16);
    Eigen::MatrixXd Ca = Xa.rowwise() - Xa.colwise().mean();
    Eigen::MatrixXd Cs = Xs.rowwise() - Xs.colwise().mean();
    Eigen::MatrixXd Sw = (Ca.transpose() * Ca + Cs.transpose() * Cs) / (30.0 - 2.0);
    Eigen::VectorXd delta = (Xs.colwise().mean() - Xa.colwise().mean()).transpose();
    Eigen::VectorXd w = Sw.inverse() * delta;
    w /= std::sqrt(w.dot(Sw * w));
    for (int j = 0; j < 4; ++j)
      CHECK(model.coefficients[j] == doctest::Approx(w[j]).epsilon(1e-8));
  }
  SUBCASE("score convention on the township fixture") {
    classify::DiscriminantModel model = classify::lda_fit(fixture_table());
    double adv_mean = 0.0, scv_mean = 0.0;
    int na = 0, ns = 0;
    double weighted = 0.0;
    for (std::size_t i = 0; i < model.scores.size(); ++i) {
      weighted += model.scores[i];
      if (model.labels[i] == AdminCategory::ADV) {
        adv_mean += model.scores[i];
        ++na;
      } else {
        scv_mean += model.scores[i];
        ++ns;
      }
    }
    CHECK(scv_mean / ns > 0.0);
    CHECK(adv_mean / na < 0.0);
    CHECK(weighted / model.scores.size() == doctest::Approx(0.0).epsilon(1e-9));
    // walkability carries the strongest positive loading, agricultural
    // intensity a strong negative one
    double max_positive = 0.0;
    for (int j = 0; j < 4; ++j)
      max_positive = std::max(max_positive, model.coefficients[j]);
    CHECK(model.coefficients[2] == max_positive);
    CHECK(model.coefficients[2] > 0.0);
    CHECK(model.coefficients[3] < 0.0);
  }
  SUBCASE("single class is rejected") {
    StressMatrix m = table_from(Eigen::MatrixXd::Random(6, 4));
    std::fill(m.admin.begin(), m.admin.end(), AdminCategory::ADV);
    CHECK_THROWS_AS(classify::lda_fit(m), ValidationError);
  }
}

TEST_CASE("classification rule") {
  using indices::AdminCategory;
  classify::DiscriminantModel model;
  model.coefficients = Eigen::VectorXd::Ones(4);
  SUBCASE("clean separation") {
    model.scores = {-1.0, 0.5};
    model.labels = {AdminCategory::ADV, AdminCategory::SCV};
    CHECK(classify::lda_classify(model).accuracy == 1.0);
  }
  SUBCASE("boundary score goes to SCV") {
    model.scores = {0.0};
    model.labels = {AdminCategory::ADV};
    classify::ClassificationReport rep = classify::lda_classify(model);
    CHECK(rep.adv_correct == 0);
    CHECK(rep.predicted[0] == AdminCategory::SCV);
  }
  SUBCASE("labels invariant under positive rescaling of scores") {
    std::mt19937 rng(23);
    std::normal_distribution<double> d;
    model.scores.clear();
    model.labels.clear();
    for (int i = 0; i < 20; ++i) {
      model.scores.push_back(d(rng));
      model.labels.push_back(i % 2 ? AdminCategory::SCV : AdminCategory::ADV);
    }
    auto base = classify::lda_classify(model).predicted;
    classify::DiscriminantModel scaled = model;
    for (double& s : scaled.scores)
      s *= 7.5;
    CHECK(classify::lda_classify(scaled).predicted == base);
  }
}

TEST_CASE("UPGMA linkage") {
  SUBCASE("hand-worked line fixture {0, 1, 10}") {
    Eigen::MatrixXd d(3, 3);
    d << 0, 1, 10, 1, 0, 9, 10, 9, 0;
    LinkageTree tree = classify::hclust_average(d);
    REQUIRE(tree.merges.size() == 2);
    CHECK(tree.merges[0].node_a == 0);
    CHECK(tree.merges[0].node_b == 1);
    CHECK(tree.merges[0].height == 1.0);
    CHECK(tree.merges[0].new_node == 3);
    CHECK(tree.merges[1].node_a == 2);
    CHECK(tree.merges[1].node_b == 3);
    CHECK(tree.merges[1].height == doctest::Approx(9.5).epsilon(1e-15));
  }
  SUBCASE("two leaves merge at their distance") {
    Eigen::MatrixXd d(2, 2);
    d << 0, 3.25, 3.25, 0;
    LinkageTree tree = classify::hclust_average(d);
    REQUIRE(tree.merges.size() == 1);
    CHECK(tree.merges[0].height == 3.25);
  }
  SUBCASE("random matrices match the recompute-all-averages oracle") {
    std::mt19937 rng(29);
    std::uniform_int_distribution<int> ns(3, 8);
    for (int trial = 0; trial < 40; ++trial) {
      Eigen::MatrixXd d = random_distance_matrix(rng, ns(rng));
      LinkageTree got = classify::hclust_average(d);
      LinkageTree expected = upgma_oracle(d);
      REQUIRE(got.merges.size() == expected.merges.size());
      double prev = 0.0;
      for (std::size_t i = 0; i < got.merges.size(); ++i) {
        CHECK(got.merges[i].node_a == expected.merges[i].node_a);
        CHECK(got.merges[i].node_b == expected.merges[i].node_b);
        CHECK(got.merges[i].height ==
              doctest::Approx(expected.merges[i].height).epsilon(1e-12));
        CHECK(got.merges[i].height >= prev - 1e-12);  // UPGMA monotonicity
        prev = got.merges[i].height;
      }
    }
  }
  SUBCASE("input validation") {
    Eigen::MatrixXd one(1, 1);
    one << 0;
    CHECK_THROWS_AS(classify::hclust_average(one), ValidationError);
    Eigen::MatrixXd bad(2, 2);
    bad << 0, 1, 2, 0;
    CHECK_THROWS_AS(classify::hclust_average(bad), ValidationError);
  }
}

TEST_CASE("cut_tree") {
  Eigen::MatrixXd d(3, 3);
  d << 0, 1, 10, 1, 0, 9, 10, 9, 0;
  LinkageTree tree = classify::hclust_average(d);

  SUBCASE("extremes") {
    ClusterAssignment all = classify::cut_tree(tree, 1);
    CHECK(all.labels == std::vector<int>{1, 1, 1});
    ClusterAssignment singletons = classify::cut_tree(tree, 3);
    CHECK(singletons.labels == std::vector<int>{1, 2, 3});
  }
  SUBCASE("line fixture splits the far point at k = 2") {
    ClusterAssignment cut = classify::cut_tree(tree, 2);
    CHECK(cut.labels == std::vector<int>{1, 1, 2});
  }
  SUBCASE("k out of range") {
    CHECK_THROWS_AS(classify::cut_tree(tree, 0), ValidationError);
    CHECK_THROWS_AS(classify::cut_tree(tree, 4), ValidationError);
  }
  SUBCASE("cuts are nested partitions") {
    std::mt19937 rng(31);
    Eigen::MatrixXd dm = random_distance_matrix(rng, 8);
    LinkageTree t = classify::hclust_average(dm);
    for (int k = 2; k <= 8; ++k) {
      ClusterAssignment fine = classify::cut_tree(t, k);
      ClusterAssignment coarse = classify::cut_tree(t, k - 1);
      // same fine cluster implies same coarse cluster
      for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j)
          if (fine.labels[i] == fine.labels[j])
            CHECK(coarse.labels[i] == coarse.labels[j]);
    }
  }
}

TEST_CASE("silhouette") {
  SUBCASE("two tight, well-separated pairs") {
    Eigen::MatrixXd d(4, 4);
    d << 0, 0.1, 10, 10, 0.1, 0, 10, 10, 10, 10, 0, 0.1, 10, 10, 0.1, 0;
    ClusterAssignment a{2, {1, 1, 2, 2}};
    classify::SilhouetteResult res = classify::silhouette(d, a);
    CHECK(res.mean >= 0.9);
    for (double s : res.scores) {
      CHECK(s >= -1.0);
      CHECK(s <= 1.0);
    }
  }
  SUBCASE("k = 1 is rejected") {
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(3, 3);
    ClusterAssignment a{1, {1, 1, 1}};
    CHECK_THROWS_AS(classify::silhouette(d, a), ValidationError);
  }
  SUBCASE("matches the per-point brute-force oracle") {
    std::mt19937 rng(37);
    std::uniform_int_distribution<int> ns(4, 8);
    std::uniform_int_distribution<int> ks(2, 3);
    for (int trial = 0; trial < 40; ++trial) {
      int n = ns(rng);
      Eigen::MatrixXd d = random_distance_matrix(rng, n);
      int k = std::min(ks(rng), n);
      LinkageTree t = classify::hclust_average(d);
      ClusterAssignment a = classify::cut_tree(t, k);
      classify::SilhouetteResult res = classify::silhouette(d, a);
      double mean = 0.0;
      for (int i = 0; i < n; ++i) {
        double s = silhouette_point_oracle(d, a.labels, i);
        CHECK(res.scores[static_cast<std::size_t>(i)] == doctest::Approx(s).epsilon(1e-12));
        mean += s;
      }
      CHECK(res.mean == doctest::Approx(mean / n).epsilon(1e-12));
    }
  }
}

TEST_CASE("calinski-harabasz") {
  SUBCASE("separation increases the score") {
    std::mt19937 rng(41);
    std::normal_distribution<double> d(0.0, 0.1);
    auto blob_score = [&](double sep) {
      Eigen::MatrixXd X(10, 4);
      for (int i = 0; i < 10; ++i)
        for (int j = 0; j < 4; ++j)
          X(i, j) = d(rng) + (i >= 5 && j == 0 ? sep : 0.0);
      ClusterAssignment a{2, {1, 1, 1, 1, 1, 2, 2, 2, 2, 2}};
      return classify::calinski_harabasz(X, a);
    };
    double near = blob_score(2.0);
    double far = blob_score(4.0);
    CHECK(near > 10.0);
    CHECK(far > near);
  }
  SUBCASE("small fixture against a direct sums-of-squares oracle") {
    Eigen::MatrixXd X(5, 2);
    X << 0, 0, 1, 0, 0, 1, 4, 4, 5, 4;
    ClusterAssignment a{2, {1, 1, 1, 2, 2}};
    // oracle arithmetic, written out
    Eigen::RowVector2d g = X.colwise().mean();
    Eigen::RowVector2d c1 = (X.row(0) + X.row(1) + X.row(2)) / 3.0;
    Eigen::RowVector2d c2 = (X.row(3) + X.row(4)) / 2.0;
    double ssb = 3.0 * (c1 - g).squaredNorm() + 2.0 * (c2 - g).squaredNorm();
    double ssw = (X.row(0) - c1).squaredNorm() + (X.row(1) - c1).squaredNorm() +
                 (X.row(2) - c1).squaredNorm() + (X.row(3) - c2).squaredNorm() +
                 (X.row(4) - c2).squaredNorm();
    double expected = (ssb / 1.0) / (ssw / 3.0);
    CHECK(classify::calinski_harabasz(X, a) == doctest::Approx(expected).epsilon(1e-9));
  }
  SUBCASE("k = n is rejected") {
    Eigen::MatrixXd X = Eigen::MatrixXd::Random(4, 2);
    ClusterAssignment a{4, {1, 2, 3, 4}};
    CHECK_THROWS_AS(classify::calinski_harabasz(X, a), ValidationError);
  }
}

TEST_CASE("scan_k") {
  std::mt19937 rng(43);
  SUBCASE("four well-separated blobs put the silhouette argmax at 4") {
    Eigen::MatrixXd centers(4, 3);
    centers << 0, 0, 0, 40, 0, 0, 0, 40, 0, 0, 0, 40;
    Eigen::MatrixXd embed(4, 3);
    embed << 1, 0, 0, 0, 1, 0, 0, 0, 1, 0.5, -0.7, 0.9;
    std::vector<int> truth;
    Eigen::MatrixXd X = gaussian_blobs(rng, centers, embed, {6, 7, 8, 9}, 1.0, &truth);
    StressMatrix m = table_from(X);
    classify::ClusterModel model = classify::build_cluster_model(m);
    classify::ValidityReport rep = classify::scan_k(model, 2, 8);
    CHECK(rep.silhouette_argmax_k == 4);
    ClusterAssignment cut = classify::cut_tree(model.tree, 4);
    CHECK(classify::adjusted_rand_index(cut.labels, truth) == 1.0);
  }
  SUBCASE("two blobs put the CH argmax at 2") {
    Eigen::MatrixXd centers(2, 1);
    centers << 0, 40;
    Eigen::MatrixXd embed(4, 1);
    embed << 1, 0.8, -0.6, 0.4;
    Eigen::MatrixXd X = gaussian_blobs(rng, centers, embed, {9, 10}, 1.0);
    StressMatrix m = table_from(X);
    classify::ValidityReport rep = classify::scan_k(m, 2, 8);
    CHECK(rep.ch_argmax_k == 2);
  }
  SUBCASE("range validation") {
    StressMatrix m = table_from(Eigen::MatrixXd::Random(6, 4));
    CHECK_THROWS_WITH_AS(classify::scan_k(m, 2, 6), doctest::Contains("k_range exceeds n-1"),
                         ValidationError);
    CHECK_THROWS_AS(classify::scan_k(m, 2, 1), ValidationError);
    CHECK_THROWS_AS(classify::scan_k(m, 1, 5), ValidationError);
  }
}

TEST_CASE("cross tabulation") {
  using indices::AdminCategory;
  SUBCASE("identical labelings produce a diagonal table") {
    std::vector<AdminCategory> admin = {AdminCategory::ADV, AdminCategory::ADV,
                                        AdminCategory::SCV, AdminCategory::SCV};
    ClusterAssignment a{2, {1, 1, 2, 2}};
    classify::CrossTab tab = classify::cross_tab(admin, a);
    CHECK(tab.counts[0] == std::vector<int>{2, 0});
    CHECK(tab.counts[1] == std::vector<int>{0, 2});
  }
  SUBCASE("marginals are conserved") {
    std::mt19937 rng(47);
    std::uniform_int_distribution<int> lab(1, 3);
    std::vector<AdminCategory> admin;
    ClusterAssignment a{3, {}};
    for (int i = 0; i < 20; ++i) {
      admin.push_back(i % 3 ? AdminCategory::SCV : AdminCategory::ADV);
      a.labels.push_back(lab(rng));
    }
    classify::CrossTab tab = classify::cross_tab(admin, a);
    int total = 0;
    for (int c : tab.col_totals)
      total += c;
    CHECK(total == 20);
    CHECK(tab.row_totals[0] + tab.row_totals[1] == 20);
  }
  SUBCASE("length mismatch") {
    std::vector<AdminCategory> admin = {AdminCategory::ADV};
    ClusterAssignment a{2, {1, 2}};
    CHECK_THROWS_AS(classify::cross_tab(admin, a), ValidationError);
  }
  SUBCASE("township fixture concentrates SCV villages in cluster 4") {
    StressMatrix table = fixture_table();
    std::vector<int> truth = fixture_truth();
    ClusterAssignment a{4, truth};
    classify::CrossTab tab = classify::cross_tab(table.admin, a);
    CHECK(tab.counts[1][3] == 7);   // SCV row, cluster 4
    CHECK(tab.counts[0][1] == 6);   // ADV concentrations in clusters 2 and 4
    CHECK(tab.counts[0][3] == 6);
    for (int c = 0; c < 4; ++c)
      CHECK(tab.counts[0][static_cast<std::size_t>(c)] > 0);  // ADV spread over all four
  }
}

TEST_CASE("label alignment and adjusted rand index") {
  std::vector<int> ref = {1, 1, 2, 2, 3, 3};
  std::vector<int> perm = {3, 3, 1, 1, 2, 2};
  CHECK(classify::align_labels(ref, perm) == ref);
  CHECK(classify::adjusted_rand_index(ref, perm) == 1.0);
  std::vector<int> noisy = {3, 3, 1, 2, 2, 2};
  CHECK(classify::adjusted_rand_index(ref, noisy) < 1.0);
}

TEST_CASE("township fixture clustering") {
  StressMatrix table = fixture_table();
  std::vector<int> truth = fixture_truth();
  classify::ClusterModel model = classify::build_cluster_model(table);

  SUBCASE("the k=4 cut recovers the reconstruction's typology") {
    ClusterAssignment cut = classify::cut_tree(model.tree, 4);
    CHECK(classify::adjusted_rand_index(cut.labels, truth) == 1.0);
    CHECK(classify::align_labels(truth, cut.labels) == truth);
  }
  SUBCASE("merge heights are non-decreasing") {
    double prev = 0.0;
    for (const auto& m : model.tree.merges) {
      CHECK(m.height >= prev - 1e-12);
      prev = m.height;
    }
  }
  SUBCASE("all four indicators separate the spatial clusters at p < 0.01") {
    for (int j = 0; j < 4; ++j) {
      std::vector<std::vector<double>> groups(4);
      for (int i = 0; i < table.n(); ++i)
        groups[static_cast<std::size_t>(truth[static_cast<std::size_t>(i)] - 1)].push_back(
            table.data(i, j));
      stats::AnovaResult res = stats::anova_oneway(groups);
      CHECK(res.p < 0.01);
    }
  }
}
