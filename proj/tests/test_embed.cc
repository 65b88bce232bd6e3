#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "adspeech/embed.h"
#include "test_util.h"

namespace adspeech {
namespace {

TEST(Jacobi, MatchesEigenSolver) {
  std::mt19937_64 gen(2);
  for (int t = 0; t < 10; ++t) {
    const std::size_t n = 3 + gen() % 12;
    const Matrix a = testing::random_matrix(n, n, gen);
    Matrix s(n, n);
    Eigen::MatrixXd e(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) e(i, j) = s(i, j) = a(i, j) + a(j, i);
    }
    const EigenDecomposition d = jacobi_eigen(s);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ref(e);
    for (std::size_t i = 0; i < n; ++i) {
      EXPECT_NEAR(d.values[i], ref.eigenvalues()(static_cast<Eigen::Index>(i)), 1e-9);
      // A v = lambda v, unit norm
      double norm = 0;
      for (std::size_t r = 0; r < n; ++r) {
        double av = 0;
        for (std::size_t c = 0; c < n; ++c) av += s(r, c) * d.vectors(c, i);
        EXPECT_NEAR(av, d.values[i] * d.vectors(r, i), 1e-8);
        norm += d.vectors(r, i) * d.vectors(r, i);
      }
      EXPECT_NEAR(norm, 1.0, 1e-12);
    }
    for (std::size_t i = 1; i < n; ++i) EXPECT_LE(d.values[i - 1], d.values[i]);
  }
}

TEST(Lle, ReconstructionWeightsSumToOne) {
  std::mt19937_64 gen(3);
  for (int t = 0; t < 100; ++t) {
    const Matrix nb = testing::random_matrix(2 + gen() % 12, 1 + gen() % 20, gen);
    const Matrix p = testing::random_matrix(1, nb.cols(), gen);
    const auto w = reconstruction_weights(nb, p.row(0), 1e-3);
    double s = 0;
    for (double v : w) s += v;
    EXPECT_NEAR(s, 1.0, 1e-8);
  }
}

TEST(Lle, ExactReconstructionInsideHull) {
  // Point is the centroid of a regular triangle; with tiny regularization the
  // weights approach 1/3 each.
  Matrix nb(3, 2);
  nb(0, 0) = 1, nb(0, 1) = 0;
  nb(1, 0) = -0.5, nb(1, 1) = std::sqrt(3.0) / 2;
  nb(2, 0) = -0.5, nb(2, 1) = -std::sqrt(3.0) / 2;
  const double p[] = {0, 0};
  const auto w = reconstruction_weights(nb, p, 1e-9);
  for (double v : w) EXPECT_NEAR(v, 1.0 / 3.0, 1e-6);
  Matrix same(2, 2, 0.0);
  EXPECT_THROW(reconstruction_weights(same, p, 1e-3), InputError);
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) ma += a[i], mb += b[i];
  ma /= static_cast<double>(a.size());
  mb /= static_cast<double>(b.size());
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

struct Planted {
  Matrix latent;  // n x 2
  Matrix x;       // n x D
};

Planted planted_plane(std::size_t n, std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(-1, 1);
  std::normal_distribution<double> g;
  // Orthonormal basis of a random 2-plane via Gram-Schmidt, plus an offset.
  std::vector<double> e1(dim), e2(dim), off(dim);
  for (std::size_t j = 0; j < dim; ++j) e1[j] = g(gen), e2[j] = g(gen), off[j] = g(gen);
  auto dot = [&](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0;
    for (std::size_t j = 0; j < dim; ++j) s += a[j] * b[j];
    return s;
  };
  const double n1 = std::sqrt(dot(e1, e1));
  for (double& v : e1) v /= n1;
  const double proj = dot(e1, e2);
  for (std::size_t j = 0; j < dim; ++j) e2[j] -= proj * e1[j];
  const double n2 = std::sqrt(dot(e2, e2));
  for (double& v : e2) v /= n2;
  Planted p{Matrix(n, 2), Matrix(n, dim)};
  for (std::size_t i = 0; i < n; ++i) {
    p.latent(i, 0) = u(gen);
    p.latent(i, 1) = u(gen);
    for (std::size_t j = 0; j < dim; ++j) {
      p.x(i, j) = off[j] + p.latent(i, 0) * e1[j] + p.latent(i, 1) * e2[j];
    }
  }
  return p;
}

TEST(Lle, RecoversPlantedPlane) {
  const Planted p = planted_plane(300, 480, 11);
  const LleMap map = lle_fit(p.x, 10, 1e-3);
  for (std::size_t i = 0; i < map.weights.rows(); ++i) {
    double s = 0;
    for (double v : map.weights.row(i)) s += v;
    EXPECT_NEAR(s, 1.0, 1e-8);
  }
  std::vector<double> d_true, d_emb;
  for (std::size_t i = 0; i < 300; ++i) {
    for (std::size_t j = i + 1; j < 300; ++j) {
      d_true.push_back(std::hypot(p.latent(i, 0) - p.latent(j, 0), p.latent(i, 1) - p.latent(j, 1)));
      d_emb.push_back(std::hypot(map.embedding(i, 0) - map.embedding(j, 0),
                                 map.embedding(i, 1) - map.embedding(j, 1)));
    }
  }
  EXPECT_GE(pearson(d_true, d_emb), 0.99);
}

TEST(Lle, OutOfSampleSelfConsistency) {
  const Planted p = planted_plane(120, 30, 12);
  const LleMap map = lle_fit(p.x, 8, 1e-3);
  const Matrix back = lle_transform(map, p.x);
  for (std::size_t i = 0; i < back.rows(); ++i) {
    EXPECT_NEAR(back(i, 0), map.embedding(i, 0), 1e-6);
    EXPECT_NEAR(back(i, 1), map.embedding(i, 1), 1e-6);
  }
  EXPECT_THROW(lle_transform(map, Matrix(1, 29)), InputError);
  EXPECT_THROW(lle_fit(Matrix(5, 3), 10), InputError);
}

TEST(Raster, GeometryAndLabels) {
  Matrix pts(2, 2);
  pts(0, 0) = 0, pts(0, 1) = 0, pts(1, 0) = 10, pts(1, 1) = 5;
  const Predictor right_is_ad = [](const Matrix& z) {
    std::vector<Label> out;
    for (std::size_t r = 0; r < z.rows(); ++r) out.push_back(z(r, 0) > 5 ? Label::AD : Label::HC);
    return out;
  };
  const BoundaryRaster r = boundary_raster(right_is_ad, pts, 20, 0.1);
  EXPECT_DOUBLE_EQ(r.xmin, -1.0);
  EXPECT_DOUBLE_EQ(r.xmax, 11.0);
  EXPECT_DOUBLE_EQ(r.ymin, -0.5);
  EXPECT_DOUBLE_EQ(r.ymax, 5.5);
  EXPECT_EQ(r.cells.size(), 400u);
  for (std::size_t row = 0; row < 20; ++row) {
    for (std::size_t col = 0; col < 20; ++col) {
      EXPECT_EQ(r.at(row, col), r.cell_center_x(col) > 5 ? Label::AD : Label::HC);
      const auto [rr, cc] = r.cell_of(r.cell_center_x(col), r.cell_center_y(row));
      EXPECT_EQ(rr, row);
      EXPECT_EQ(cc, col);
    }
  }
  EXPECT_EQ(r.cell_of(-100, 100), (std::pair<std::size_t, std::size_t>{0, 0}));
  const std::string pgm = raster_to_pgm(r);
  EXPECT_EQ(pgm.rfind("P5", 0), 0u);
  EXPECT_EQ(pgm, raster_to_pgm(boundary_raster(right_is_ad, pts, 20, 0.1)));
}

DesignMatrix cluster_design(std::size_t n_per_class, std::size_t d, double sep, Task task,
                            std::uint64_t seed, std::string prefix) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> g(0, 0.5);
  DesignMatrix m;
  m.x = Matrix(2 * n_per_class, d);
  for (std::size_t i = 0; i < 2 * n_per_class; ++i) {
    const Label l = i < n_per_class ? Label::HC : Label::AD;
    m.sample_ids.push_back(prefix + std::to_string(i));
    m.subject_ids.push_back(prefix + std::to_string(i));
    m.tasks.push_back(task);
    m.ages.push_back(70);
    m.y.push_back(l);
    for (std::size_t c = 0; c < d; ++c) m.x(i, c) = g(gen) + (l == Label::AD ? sep : 0.0);
  }
  return m;
}

DesignMatrix only_rows(const DesignMatrix& m, Label cluster, Label relabel) {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m.y[i] == cluster) rows.push_back(i);
  }
  DesignMatrix out = m.select(rows);
  std::fill(out.y.begin(), out.y.end(), relabel);
  return out;
}

TEST(Fig2, OutOfTaskPointsFollowTheirRegion) {
  const DesignMatrix train = cluster_design(60, 12, 3.0, Task::PictureDescription, 1, "t");
  const DesignMatrix extra = cluster_design(30, 12, 3.0, Task::Fluency, 2, "o");
  ModelSpec spec;
  spec.kind = ModelKind::RF;
  spec.rf_trees = 30;
  Fig2Config cfg;
  cfg.grid = 40;

  const Fig2Result in_hc = fig2_pipeline(train, only_rows(extra, Label::HC, Label::HC), spec, cfg);
  EXPECT_LE(in_hc.out_of_task_error, 0.05);
  const Fig2Result in_ad = fig2_pipeline(train, only_rows(extra, Label::AD, Label::HC), spec, cfg);
  EXPECT_GE(in_ad.out_of_task_error, 0.95);

  // Raster covers every embedded point.
  for (const Matrix* m : {&in_ad.train2d, &in_ad.oot2d}) {
    for (std::size_t r = 0; r < m->rows(); ++r) {
      EXPECT_GE((*m)(r, 0), in_ad.raster.xmin);
      EXPECT_LE((*m)(r, 0), in_ad.raster.xmax);
      EXPECT_GE((*m)(r, 1), in_ad.raster.ymin);
      EXPECT_LE((*m)(r, 1), in_ad.raster.ymax);
    }
  }
  const Fig2Result again = fig2_pipeline(train, only_rows(extra, Label::AD, Label::HC), spec, cfg);
  EXPECT_EQ(raster_to_pgm(again.raster), raster_to_pgm(in_ad.raster));
  const std::string svg =
      raster_to_svg(in_ad.raster, in_ad.train2d, train.y, in_ad.oot2d, in_ad.oot_pred);
  EXPECT_NE(svg.find("<svg"), std::string::npos);
  EXPECT_EQ(svg, raster_to_svg(again.raster, again.train2d, train.y, again.oot2d, again.oot_pred));
}

}  // namespace
}  // namespace adspeech
