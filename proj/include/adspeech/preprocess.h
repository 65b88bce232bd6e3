#pragma once

#include <cstdint>
#include <vector>

#include "adspeech/common.h"
#include "adspeech/matrix.h"

namespace adspeech {

// Column means over non-missing cells; a column with no observed value imputes 0.
struct Imputer {
  std::vector<double> means;

  static Imputer fit(const Matrix& x);
  Matrix apply(const Matrix& x) const;
  void apply_row(std::span<double> row) const;
};

// z-score per column; a zero-variance column keeps sd = 1.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> sd;

  static Standardizer fit(const Matrix& x);
  Matrix apply(const Matrix& x) const;
};

// n_new rows, each x + u (nn - x) for a random minority row x, one of its k
// nearest minority neighbours nn (k truncated to |x_min| - 1) and u ~ U[0,1].
Matrix smote(const Matrix& x_min, std::size_t n_new, std::size_t k, std::uint64_t seed);

struct Oversampled {
  Matrix x;
  std::vector<Label> y;
};

// Appends SMOTE rows for the smaller class until both classes are equal in size.
Oversampled oversample_to_parity(const Matrix& x, const std::vector<Label>& y, std::size_t k,
                                 std::uint64_t seed);

}  // namespace adspeech
