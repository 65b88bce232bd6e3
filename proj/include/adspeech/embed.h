#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "adspeech/anchors.h"
#include "adspeech/learn.h"
#include "adspeech/matrix.h"

namespace adspeech {

struct EigenDecomposition {
  std::vector<double> values;  // ascending
  Matrix vectors;              // column i pairs with values[i]
  int sweeps = 0;
};

// Cyclic Jacobi rotations until the off-diagonal Frobenius norm falls below
// tol * ||A||_F. Eigenvector signs are fixed so the largest-magnitude entry is
// positive.
EigenDecomposition jacobi_eigen(const Matrix& symmetric, double tol = 1e-10,
                                int max_sweeps = 100);

// Sum-to-one weights reconstructing `point` from the rows of `neighbors`,
// local Gram matrix regularized by reg * trace.
std::vector<double> reconstruction_weights(const Matrix& neighbors, std::span<const double> point,
                                           double reg);

struct LleMap {
  Matrix train;
  std::size_t k = 10;
  double reg = 1e-3;
  Matrix weights;     // n x n, row i holds point i's reconstruction weights
  Matrix embedding;   // n x 2
  std::vector<double> eigenvalues;  // the two retained
};

LleMap lle_fit(const Matrix& x, std::size_t k = 10, double reg = 1e-3);

// A row equal to a training point maps to that point's embedding; any other
// row is reconstructed from its k nearest training points.
Matrix lle_transform(const LleMap& map, const Matrix& x);

struct BoundaryRaster {
  std::size_t grid = 0;
  double xmin = 0, xmax = 0, ymin = 0, ymax = 0;
  std::vector<Label> cells;  // row-major, row 0 at ymax

  Label at(std::size_t row, std::size_t col) const { return cells[row * grid + col]; }
  // Cell containing (x, y), clamped to the grid.
  std::pair<std::size_t, std::size_t> cell_of(double x, double y) const;
  double cell_center_x(std::size_t col) const;
  double cell_center_y(std::size_t row) const;
};

// Bounding box of `points` expanded by margin times its extent on every side,
// split into grid x grid cells, each labeled by the model at its center.
BoundaryRaster boundary_raster(const Predictor& model2d, const Matrix& points,
                               std::size_t grid = 200, double margin = 0.10);

struct Fig2Config {
  std::size_t k = 10;
  double reg = 1e-3;
  std::size_t grid = 200;
  double margin = 0.10;
};

struct Fig2Result {
  Imputer imputer;
  Standardizer standardizer;
  LleMap map;
  Matrix train2d;
  Matrix oot2d;
  Model model2d;
  std::vector<Label> oot_pred;
  BoundaryRaster raster;
  double out_of_task_error = 0;
};

// Impute + standardize + LLE fit on the training rows; embed the out-of-task
// rows; fit `spec` on the 2-D training points; every out-of-task row counts
// toward the error.
Fig2Result fig2_pipeline(const DesignMatrix& train, const DesignMatrix& out_of_task,
                         const ModelSpec& spec, const Fig2Config& cfg = {});

std::string raster_to_pgm(const BoundaryRaster& r);
std::string raster_to_svg(const BoundaryRaster& r, const Matrix& train2d,
                          const std::vector<Label>& train_labels, const Matrix& oot2d,
                          const std::vector<Label>& oot_labels);
std::string embedding_csv(const DesignMatrix& train, const Matrix& train2d,
                          const DesignMatrix& oot, const Matrix& oot2d);

}  // namespace adspeech
