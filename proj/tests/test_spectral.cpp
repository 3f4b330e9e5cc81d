#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "hdm/spectral.hpp"

using namespace hdm;

namespace {

Eigen::VectorXd dense_eigenvalues(const ModelParams& p) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(build_hopping_matrix(p), Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

// Groups sorted eigenvalues whose neighbours differ by less than rel_tol * J.
std::vector<std::pair<double, std::int64_t>> cluster(const Eigen::VectorXd& sorted, double tol) {
  std::vector<std::pair<double, std::int64_t>> groups;
  for (Eigen::Index i = 0; i < sorted.size(); ++i) {
    if (!groups.empty() && std::abs(sorted(i) - sorted(i - 1)) < tol) {
      auto& g = groups.back();
      g.first = (g.first * static_cast<double>(g.second) + sorted(i)) / static_cast<double>(g.second + 1);
      ++g.second;
    } else {
      groups.emplace_back(sorted(i), 1);
    }
  }
  return groups;
}

}  // namespace

TEST(Spectral, EigenvaluesN2MatchDenseDiagonalization) {
  const ModelParams p(1.0, 1.0, 0.0, TreeGeometry(2));
  const Eigen::VectorXd dense = dense_eigenvalues(p);  // -1.5, -0.5, 1, 1
  const SpectrumData s = eigenvalues(p);
  ASSERT_EQ(s.eps.size(), 3);
  EXPECT_NEAR(s.eps(0), dense(0), 1e-14);
  EXPECT_NEAR(s.eps(1), dense(1), 1e-14);
  EXPECT_NEAR(s.eps(2), dense(2), 1e-14);
  EXPECT_NEAR(dense(2), dense(3), 1e-14);
  EXPECT_NEAR(s.eps(0), -1.5, 1e-15);
  EXPECT_NEAR(s.eps(1), -0.5, 1e-15);
  EXPECT_NEAR(s.eps(2), 1.0, 1e-15);
}

TEST(Spectral, Degeneracies) {
  const SpectrumData s = eigenvalues(ModelParams(1.0, 1.0, 0.0, TreeGeometry(3)));
  EXPECT_EQ(s.degeneracy, (std::vector<std::int64_t>{1, 1, 2, 4}));
}

TEST(Spectral, GroundEnergyIsInteractionWithFirstSite) {
  for (double sigma : {0.5, 1.0, 2.0}) {
    const ModelParams p(1.3, sigma, 0.0, TreeGeometry(8));
    double sum = 0.0;
    for (std::int64_t j = 2; j <= p.length(); ++j) {
      sum -= p.J / std::exp2((1.0 + sigma) * (hierarchical_distance(1, j, p.geom) - 1));
    }
    EXPECT_NEAR(eigenvalues(p).eps(0), sum, 1e-13);
  }
}

TEST(Spectral, SigmaZeroIsSingular) {
  const ModelParams p(1.0, 0.0, 0.0, TreeGeometry(3));
  EXPECT_THROW(eigenvalues(p), SingularLimitError);
  EXPECT_THROW(renormalized_coupling(0.0, 1.0), SingularLimitError);
  EXPECT_THROW(shifted_spectrum(0, 0.0, 1.0), SingularLimitError);
}

TEST(Spectral, ParamValidation) {
  EXPECT_THROW(ModelParams(0.0, 1.0, 0.0, TreeGeometry(2)), InputError);
  EXPECT_THROW(ModelParams(1.0, -1.0, 0.0, TreeGeometry(2)), InputError);
  EXPECT_THROW(ModelParams(1.0, 1.0, -2.0, TreeGeometry(2)), InputError);
}

TEST(Spectral, MultipletCensus) {
  for (double sigma : {0.5, 1.0, 2.0}) {
    for (int n = 1; n <= 10; ++n) {
      const ModelParams p(1.0, sigma, 0.0, TreeGeometry(n));
      const auto groups = cluster(dense_eigenvalues(p), 1e-9 * p.J);
      const SpectrumData s = eigenvalues(p);
      ASSERT_EQ(groups.size(), static_cast<std::size_t>(n + 1)) << "sigma " << sigma << " N " << n;
      for (int k = 0; k <= n; ++k) {
        EXPECT_EQ(groups[static_cast<std::size_t>(k)].second, s.degeneracy[static_cast<std::size_t>(k)]);
        EXPECT_NEAR(groups[static_cast<std::size_t>(k)].first, s.eps(k), 1e-9 * std::max(1.0, std::abs(s.eps(k))));
      }
      for (int k = 0; k < n; ++k) EXPECT_GT(s.eps(k + 1) - s.eps(k), 0.0);
    }
  }
}

TEST(Spectral, EigenvectorExamples) {
  const TreeGeometry g(2);
  EXPECT_TRUE(eigenvector(0, 1, g).isApprox(Eigen::Vector4d(0.5, 0.5, 0.5, 0.5)));
  EXPECT_TRUE(eigenvector(1, 1, g).isApprox(Eigen::Vector4d(0.5, 0.5, -0.5, -0.5)));
  const double s = 1.0 / std::sqrt(2.0);
  const Eigen::VectorXd v = eigenvector(2, 1, g);
  EXPECT_TRUE(v.isApprox(Eigen::Vector4d(s, -s, 0, 0)));
  const ModelParams p(1.0, 1.0, 0.0, g);
  EXPECT_LT((build_hopping_matrix(p) * v - eigenvalues(p).eps(2) * v).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_TRUE(eigenvector(2, 2, g).isApprox(Eigen::Vector4d(0, 0, s, -s)));

  EXPECT_THROW(eigenvector(3, 1, g), InputError);
  EXPECT_THROW(eigenvector(2, 3, g), InputError);
  EXPECT_THROW(eigenvector(1, 0, g), InputError);
}

TEST(Spectral, EigenvectorsDiagonalizeHoppingMatrix) {
  for (double sigma : {0.5, 1.0, 2.0}) {
    for (int n = 1; n <= 10; ++n) {
      const ModelParams p(0.7, sigma, 0.0, TreeGeometry(n));
      const Eigen::MatrixXd H = build_hopping_matrix(p);
      const SpectrumData s = eigenvalues(p);
      for (int k = 0; k <= n; ++k) {
        for (std::int64_t m = 1; m <= s.degeneracy[static_cast<std::size_t>(k)]; ++m) {
          const Eigen::VectorXd v = eigenvector(k, m, p.geom);
          ASSERT_LT((H * v - s.eps(k) * v).cwiseAbs().maxCoeff(), 1e-10);
        }
      }
    }
  }
}

TEST(Spectral, EigenvectorsFormOrthonormalBasis) {
  for (int n = 1; n <= 8; ++n) {
    const TreeGeometry g(n);
    Eigen::MatrixXd basis(g.length(), g.length());
    Eigen::Index col = 0;
    for (int k = 0; k <= n; ++k) {
      for (std::int64_t m = 1; m <= multiplet_degeneracy(k, g); ++m) {
        const EigvecDescriptor d = eigvec_descriptor(k, m, g);
        basis.col(col++) = d.expand(g);
        EXPECT_NEAR(d.expand(g).squaredNorm(), 1.0, 1e-14);
        if (k >= 2 && m > 1) {
          EXPECT_GT(d.plus_first, eigvec_descriptor(k, m - 1, g).minus_last);  // disjoint supports
        }
      }
    }
    ASSERT_EQ(col, g.length());
    EXPECT_LT((basis.transpose() * basis - Eigen::MatrixXd::Identity(g.length(), g.length()))
                  .cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Spectral, HoppingMatrixEntries) {
  const ModelParams p1(1.0, 1.0, 0.0, TreeGeometry(1));
  EXPECT_TRUE(build_hopping_matrix(p1).isApprox((Eigen::Matrix2d() << 0, -1, -1, 0).finished()));

  const ModelParams p2(1.0, 1.0, 0.0, TreeGeometry(2));
  const Eigen::MatrixXd H = build_hopping_matrix(p2);
  EXPECT_DOUBLE_EQ(H(0, 2), -p2.level_coupling(1));
  EXPECT_DOUBLE_EQ(H(0, 2), -0.25);
  EXPECT_TRUE(H.isApprox(H.transpose()));

  for (double sigma : {0.5, 1.0, 2.0}) {
    const ModelParams p(1.0, sigma, 0.0, TreeGeometry(7));
    const Eigen::VectorXd rows = build_hopping_matrix(p).rowwise().sum();
    EXPECT_LT((rows.array() - eigenvalues(p).eps(0)).abs().maxCoeff(), 1e-13);
  }

  EXPECT_THROW(build_hopping_matrix(ModelParams(1.0, 1.0, 0.0, TreeGeometry(13))), ResourceError);
  EXPECT_THROW(build_hopping_matrix(p2, 2), ResourceError);
}

TEST(Spectral, DeltaDecomposition) {
  for (int n : {1, 3, 6}) {
    const TreeGeometry g(n);
    const auto terms = delta_decomposition(g);
    ASSERT_EQ(terms.size(), static_cast<std::size_t>(n + 1));
    double norm = 0.0;
    for (const auto& t : terms) norm += t.coefficient * t.coefficient;
    EXPECT_NEAR(norm, 1.0, 1e-14);
  }
  EXPECT_EQ(delta_decomposition(TreeGeometry(6)).size(), 7u);

  const TreeGeometry g(3);
  Eigen::VectorXd rebuilt = Eigen::VectorXd::Zero(8);
  for (const auto& t : delta_decomposition(g)) rebuilt += t.coefficient * eigenvector(t.k, t.m, g);
  Eigen::VectorXd delta = Eigen::VectorXd::Zero(8);
  delta(0) = 1.0;
  EXPECT_LT((rebuilt - delta).cwiseAbs().maxCoeff(), 1e-15);
  // Each coefficient is the overlap with the member containing site 1.
  for (const auto& t : delta_decomposition(g)) {
    EXPECT_NEAR(t.coefficient, eigenvector(t.k, t.m, g)(0), 1e-15);
  }
}

TEST(Spectral, RenormalizedCouplingMatchesDenseGapFit) {
  // Least-squares fit of eps_N - eps_{N-k} = c (1 - 2^(-sigma k)), k = 1..N-1.
  for (double sigma : {1.0, 2.0}) {
    const int n = 10;
    const ModelParams p(1.0, sigma, 0.0, TreeGeometry(n));
    const auto groups = cluster(dense_eigenvalues(p), 1e-9);
    ASSERT_EQ(groups.size(), static_cast<std::size_t>(n + 1));
    double num = 0.0, den = 0.0;
    for (int k = 1; k < n; ++k) {
      const double gap = groups[static_cast<std::size_t>(n)].first - groups[static_cast<std::size_t>(n - k)].first;
      const double basis = 1.0 - std::exp2(-sigma * k);
      num += gap * basis;
      den += basis * basis;
    }
    EXPECT_NEAR(num / den, renormalized_coupling(sigma, 1.0), 1e-9);
  }
  EXPECT_NEAR(renormalized_coupling(1.0, 1.0), 3.0, 1e-15);
  EXPECT_NEAR(renormalized_coupling(2.0, 1.0), 7.0 / 3.0, 1e-15);
  EXPECT_NEAR(renormalized_coupling(30.0, 1.0), 2.0, 1e-8);
}

TEST(Spectral, ShiftedSpectrum) {
  EXPECT_NEAR(shifted_spectrum(0, 1.0, 1.0), 3.0, 1e-15);
  EXPECT_NEAR(shifted_spectrum(200, 1.0, 1.0), 0.0, 1e-50);
  EXPECT_THROW(shifted_spectrum(-1, 1.0, 1.0), InputError);
}

TEST(Spectral, ShiftedSpectrumMatchesDenseTopGapsN12) {
  // eps_{N-k} - eps_N = Jr (2^(-sigma k) - 1) exactly for 1 <= k <= N-1.
  const int n = 12;
  const ModelParams p(1.0, 1.0, 0.0, TreeGeometry(n));
  const auto groups = cluster(dense_eigenvalues(p), 1e-9);
  ASSERT_EQ(groups.size(), static_cast<std::size_t>(n + 1));
  const double top = groups[static_cast<std::size_t>(n)].first;
  for (int k = 1; k <= 4; ++k) {
    const double gap = groups[static_cast<std::size_t>(n - k)].first - top;
    EXPECT_NEAR(gap, shifted_spectrum(k, 1.0, 1.0) - shifted_spectrum(0, 1.0, 1.0), 1e-6);
  }
}

TEST(Spectral, CustomLevelProfile) {
  const TreeGeometry g(5);
  const std::vector<double> levels{1.0, 0.3, 0.2, 0.05, 0.07};
  const ModelParams p = ModelParams::with_level_couplings(levels, 0.0, g);
  const Eigen::MatrixXd H = build_hopping_matrix(p);
  const SpectrumData s = eigenvalues(p);
  for (int k = 0; k <= 5; ++k) {
    const Eigen::VectorXd v = eigenvector(k, 1, g);
    EXPECT_LT((H * v - s.eps(k) * v).cwiseAbs().maxCoeff(), 1e-13);
  }
  EXPECT_THROW(ModelParams::with_level_couplings({1.0, 2.0}, 0.0, g), InputError);

  // Geometric profile written out explicitly reproduces the closed form.
  const ModelParams geo(1.0, 1.5, 0.0, g);
  std::vector<double> explicit_levels;
  for (int q = 0; q < 5; ++q) explicit_levels.push_back(geo.level_coupling(q));
  const SpectrumData a = eigenvalues(geo);
  const SpectrumData b = eigenvalues(ModelParams::with_level_couplings(explicit_levels, 0.0, g));
  EXPECT_LT((a.eps - b.eps).cwiseAbs().maxCoeff(), 1e-14);
}
