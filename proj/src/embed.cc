#include "adspeech/embed.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "adspeech/io.h"
#include "adspeech/kernels.h"

namespace adspeech {

EigenDecomposition jacobi_eigen(const Matrix& sym, double tol, int max_sweeps) {
  const std::size_t n = sym.rows();
  if (sym.cols() != n) throw InputError("eigensolver needs a square matrix");
  Matrix a = sym;
  Matrix v(n, n);
  for (std::size_t i = 0; i < n; ++i) v(i, i) = 1.0;

  double norm2 = 0;
  for (double x : a.data()) norm2 += x * x;
  const double threshold = tol * std::sqrt(norm2);
  const auto off_norm = [&] {
    double s = 0;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) s += 2.0 * a(p, q) * a(p, q);
    }
    return std::sqrt(s);
  };

  EigenDecomposition out;
  while (off_norm() > threshold) {
    if (out.sweeps >= max_sweeps) {
      throw RuntimeError(fmt::format("Jacobi eigensolver did not converge in {} sweeps", max_sweeps));
    }
    ++out.sweeps;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double tau = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (tau >= 0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a(i, i) < a(j, j); });
  out.values.resize(n);
  out.vectors = Matrix(n, n);
  for (std::size_t c = 0; c < n; ++c) {
    const std::size_t src = order[c];
    out.values[c] = a(src, src);
    std::size_t arg = 0;
    for (std::size_t r = 1; r < n; ++r) {
      if (std::abs(v(r, src)) > std::abs(v(arg, src))) arg = r;
    }
    const double sign = v(arg, src) < 0 ? -1.0 : 1.0;
    for (std::size_t r = 0; r < n; ++r) out.vectors(r, c) = sign * v(r, src);
  }
  return out;
}

std::vector<double> reconstruction_weights(const Matrix& neighbors, std::span<const double> point,
                                           double reg) {
  const std::size_t k = neighbors.rows();
  const std::size_t d = point.size();
  if (k == 0) throw InputError("reconstruction needs at least one neighbor");
  if (k == 1) return {1.0};
  Eigen::MatrixXd z(k, d);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < d; ++j) z(i, j) = neighbors(i, j) - point[j];
  }
  Eigen::MatrixXd c = z * z.transpose();
  const double trace = c.trace();
  if (!(trace > 0)) {
    throw InputError("LLE neighborhood is singular: all neighbors coincide with the point");
  }
  c.diagonal().array() += reg * trace;
  const Eigen::VectorXd w = c.ldlt().solve(Eigen::VectorXd::Ones(static_cast<Eigen::Index>(k)));
  const double sum = w.sum();
  std::vector<double> out(k);
  for (std::size_t i = 0; i < k; ++i) out[i] = w(static_cast<Eigen::Index>(i)) / sum;
  return out;
}

LleMap lle_fit(const Matrix& x, std::size_t k, double reg) {
  const std::size_t n = x.rows();
  if (k < 1) throw InputError("LLE needs k >= 1");
  if (n < k + 2) throw InputError(fmt::format("LLE needs at least k + 2 = {} points, got {}", k + 2, n));
  LleMap map;
  map.train = x;
  map.k = k;
  map.reg = reg;
  map.weights = Matrix(n, n);
  const auto nbrs = kernels::omp::k_nearest(x, x, k, true);
  for (std::size_t i = 0; i < n; ++i) {
    const auto w = reconstruction_weights(x.select_rows(nbrs[i]), x.row(i), reg);
    for (std::size_t j = 0; j < k; ++j) map.weights(i, nbrs[i][j]) = w[j];
  }

  // M = (I - W)^T (I - W)
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    m(i, i) += 1.0;
    for (std::size_t a = 0; a < k; ++a) {
      const std::size_t ja = nbrs[i][a];
      const double wa = map.weights(i, ja);
      m(i, ja) -= wa;
      m(ja, i) -= wa;
      for (std::size_t b = 0; b < k; ++b) m(ja, nbrs[i][b]) += wa * map.weights(i, nbrs[i][b]);
    }
  }
  const auto eig = jacobi_eigen(m);
  map.embedding = Matrix(n, 2);
  for (std::size_t c = 0; c < 2; ++c) {
    map.eigenvalues.push_back(eig.values[c + 1]);
    for (std::size_t r = 0; r < n; ++r) map.embedding(r, c) = eig.vectors(r, c + 1);
  }
  return map;
}

Matrix lle_transform(const LleMap& map, const Matrix& x) {
  if (x.cols() != map.train.cols()) {
    throw InputError(fmt::format("LLE map expects {} features, got {}", map.train.cols(), x.cols()));
  }
  const auto nbrs = kernels::omp::k_nearest(map.train, x, map.k, false);
  const Matrix d2 = kernels::omp::squared_distances(x, map.train);
  Matrix out(x.rows(), 2);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    if (d2(i, nbrs[i][0]) == 0.0) {
      out(i, 0) = map.embedding(nbrs[i][0], 0);
      out(i, 1) = map.embedding(nbrs[i][0], 1);
      continue;
    }
    const auto w = reconstruction_weights(map.train.select_rows(nbrs[i]), x.row(i), map.reg);
    for (std::size_t j = 0; j < w.size(); ++j) {
      out(i, 0) += w[j] * map.embedding(nbrs[i][j], 0);
      out(i, 1) += w[j] * map.embedding(nbrs[i][j], 1);
    }
  }
  return out;
}

// --- Raster -------------------------------------------------------------------

std::pair<std::size_t, std::size_t> BoundaryRaster::cell_of(double x, double y) const {
  const auto clamp_index = [&](double t) {
    const auto i = static_cast<long>(std::floor(t * static_cast<double>(grid)));
    return static_cast<std::size_t>(std::clamp<long>(i, 0, static_cast<long>(grid) - 1));
  };
  return {clamp_index((ymax - y) / (ymax - ymin)), clamp_index((x - xmin) / (xmax - xmin))};
}

double BoundaryRaster::cell_center_x(std::size_t col) const {
  return xmin + (static_cast<double>(col) + 0.5) * (xmax - xmin) / static_cast<double>(grid);
}

double BoundaryRaster::cell_center_y(std::size_t row) const {
  return ymax - (static_cast<double>(row) + 0.5) * (ymax - ymin) / static_cast<double>(grid);
}

BoundaryRaster boundary_raster(const Predictor& model2d, const Matrix& points, std::size_t grid,
                               double margin) {
  if (points.cols() != 2) throw InputError("boundary raster needs 2-D points");
  if (points.rows() == 0) throw InputError("boundary raster needs at least one point");
  if (grid < 1) throw InputError("raster grid must be >= 1");
  double x0 = points(0, 0), x1 = x0, y0 = points(0, 1), y1 = y0;
  for (std::size_t r = 0; r < points.rows(); ++r) {
    x0 = std::min(x0, points(r, 0));
    x1 = std::max(x1, points(r, 0));
    y0 = std::min(y0, points(r, 1));
    y1 = std::max(y1, points(r, 1));
  }
  double wx = x1 - x0;
  double wy = y1 - y0;
  if (wx <= 0 && wy <= 0) throw InputError("boundary raster: all points coincide");
  if (wx <= 0) wx = wy;
  if (wy <= 0) wy = wx;
  BoundaryRaster r;
  r.grid = grid;
  r.xmin = x0 - margin * wx;
  r.xmax = x1 + margin * wx;
  r.ymin = y0 - margin * wy;
  r.ymax = y1 + margin * wy;
  if (r.xmax == r.xmin) {
    r.xmin -= 0.5 * wx;
    r.xmax += 0.5 * wx;
  }
  if (r.ymax == r.ymin) {
    r.ymin -= 0.5 * wy;
    r.ymax += 0.5 * wy;
  }
  Matrix centers(grid * grid, 2);
  for (std::size_t row = 0; row < grid; ++row) {
    for (std::size_t col = 0; col < grid; ++col) {
      centers(row * grid + col, 0) = r.cell_center_x(col);
      centers(row * grid + col, 1) = r.cell_center_y(row);
    }
  }
  r.cells = model2d(centers);
  return r;
}

Fig2Result fig2_pipeline(const DesignMatrix& train, const DesignMatrix& oot, const ModelSpec& spec,
                         const Fig2Config& cfg) {
  if (oot.size() == 0) throw InputError("fig2: out-of-task set is empty");
  if (train.x.cols() != oot.x.cols()) throw InputError("fig2: datasets differ in feature count");
  Fig2Result res;
  res.imputer = Imputer::fit(train.x);
  const Matrix train_imp = res.imputer.apply(train.x);
  res.standardizer = Standardizer::fit(train_imp);
  res.map = lle_fit(res.standardizer.apply(train_imp), cfg.k, cfg.reg);
  res.train2d = res.map.embedding;
  res.oot2d = lle_transform(res.map, res.standardizer.apply(res.imputer.apply(oot.x)));
  res.model2d = adspeech::train(spec, res.train2d, train.y);
  const Predictor predictor = [&](const Matrix& m) { return predict(res.model2d, m); };

  Matrix all = res.train2d;
  for (std::size_t r = 0; r < res.oot2d.rows(); ++r) all.append_row(res.oot2d.row(r));
  res.raster = boundary_raster(predictor, all, cfg.grid, cfg.margin);
  res.oot_pred = predict(res.model2d, res.oot2d);
  res.out_of_task_error = out_of_task_error(res.oot_pred, oot.y, oot.tasks, {});
  return res;
}

// --- Exports ------------------------------------------------------------------

namespace {

constexpr const char* kCellColor[2] = {"#d6e6f5", "#f5d6d6"};
constexpr const char* kPointColor[2] = {"#1f5fa8", "#b22222"};

}  // namespace

std::string raster_to_pgm(const BoundaryRaster& r) {
  std::string out = fmt::format("P5\n{} {}\n255\n", r.grid, r.grid);
  for (Label l : r.cells) out.push_back(static_cast<char>(l == Label::AD ? 64 : 224));
  return out;
}

std::string raster_to_svg(const BoundaryRaster& r, const Matrix& train2d,
                          const std::vector<Label>& train_labels, const Matrix& oot2d,
                          const std::vector<Label>& oot_labels) {
  constexpr double kSize = 600.0;
  const double cell = kSize / static_cast<double>(r.grid);
  const auto px = [&](double x) { return (x - r.xmin) / (r.xmax - r.xmin) * kSize; };
  const auto py = [&](double y) { return (r.ymax - y) / (r.ymax - r.ymin) * kSize; };
  std::string out = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{0}\" "
      "viewBox=\"0 0 {0} {0}\">\n",
      kSize);
  for (std::size_t row = 0; row < r.grid; ++row) {
    std::size_t start = 0;
    for (std::size_t col = 1; col <= r.grid; ++col) {
      if (col < r.grid && r.at(row, col) == r.at(row, start)) continue;
      out += fmt::format(
          "<rect x=\"{:.3f}\" y=\"{:.3f}\" width=\"{:.3f}\" height=\"{:.3f}\" fill=\"{}\"/>\n",
          static_cast<double>(start) * cell, static_cast<double>(row) * cell,
          static_cast<double>(col - start) * cell, cell,
          kCellColor[static_cast<int>(r.at(row, start))]);
      start = col;
    }
  }
  for (std::size_t i = 0; i < train2d.rows(); ++i) {
    out += fmt::format("<circle cx=\"{:.3f}\" cy=\"{:.3f}\" r=\"3\" fill=\"{}\"/>\n",
                       px(train2d(i, 0)), py(train2d(i, 1)),
                       kPointColor[static_cast<int>(train_labels.at(i))]);
  }
  for (std::size_t i = 0; i < oot2d.rows(); ++i) {
    const double x = px(oot2d(i, 0));
    const double y = py(oot2d(i, 1));
    out += fmt::format(
        "<path d=\"M {:.3f} {:.3f} L {:.3f} {:.3f} L {:.3f} {:.3f} L {:.3f} {:.3f} Z\" fill=\"{}\" "
        "stroke=\"#000000\" stroke-width=\"1\"/>\n",
        x, y - 5, x + 5, y, x, y + 5, x - 5, y, kPointColor[static_cast<int>(oot_labels.at(i))]);
  }
  out += "</svg>\n";
  return out;
}

std::string embedding_csv(const DesignMatrix& train, const Matrix& train2d, const DesignMatrix& oot,
                          const Matrix& oot2d) {
  std::string out = "set,sample_id,task,label,x,y\n";
  const auto rows = [&](const char* set, const DesignMatrix& dm, const Matrix& pts) {
    for (std::size_t i = 0; i < dm.size(); ++i) {
      out += fmt::format("{},{},{},{},{},{}\n", set, csv_escape(dm.sample_ids[i]),
                         manifest_name(dm.tasks[i]), to_string(dm.y[i]), format_double(pts(i, 0)),
                         format_double(pts(i, 1)));
    }
  };
  rows("train", train, train2d);
  rows("out_of_task", oot, oot2d);
  return out;
}

}  // namespace adspeech
