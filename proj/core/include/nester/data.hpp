// Copyright 2026 The Nester Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef NESTER_DATA_HPP_
#define NESTER_DATA_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nester/matrix.hpp"

namespace nester {

using Mask = std::vector<std::uint8_t>;

// n units of (covariates x, binary treatment t, observed outcome y), with
// both potential outcomes when the data is (semi-)synthetic.
struct ObservationalDataset {
  Matrix x;
  std::vector<double> t;
  std::vector<double> y;
  std::optional<std::vector<double>> y0;
  std::optional<std::vector<double>> y1;
  // Named unit subsets, e.g. "E" for the randomized-experiment units.
  std::map<std::string, Mask> masks;

  std::size_t size() const { return y.size(); }
  std::size_t dim() const { return x.cols; }
  bool has_potential_outcomes() const { return y0.has_value() && y1.has_value(); }

  // Program inputs v = [t; x], one row per unit.
  Matrix inputs() const;
  // Same as inputs() with the treatment column overwritten by `treatment`.
  Matrix inputs_with_treatment(double treatment) const;

  ObservationalDataset select(std::span<const std::size_t> indices) const;

  // Throws DataError unless shapes agree, values are finite, t is binary and
  // y = t*y1 + (1-t)*y0 holds within `tolerance`.
  void validate(double tolerance = 1e-9) const;
};

ObservationalDataset concat(const ObservationalDataset& a, const ObservationalDataset& b);

struct CsvSchema {
  std::string t_col = "t";
  std::string y_col = "y";
  std::optional<std::string> y0_col;
  std::optional<std::string> y1_col;
  // Empty means every column that is not t, y, y0, y1 or mask_*.
  std::vector<std::string> feature_cols;
};

// Comma-separated, header row required. Columns named mask_<NAME> become
// masks["NAME"]. When neither y0_col nor y1_col is given, columns literally
// named y0 and y1 are taken as potential outcomes if both exist.
ObservationalDataset load_csv(const std::filesystem::path& path, const CsvSchema& schema = {});
void write_csv(const ObservationalDataset& data, const std::filesystem::path& path);

struct SplitSpec {
  double train = 0.64;
  double valid = 0.16;
  double test = 0.20;
  std::uint64_t seed = 0;
};

struct Splits {
  ObservationalDataset train;
  ObservationalDataset valid;
  ObservationalDataset test;
  std::vector<std::size_t> train_index;
  std::vector<std::size_t> valid_index;
  std::vector<std::size_t> test_index;
};

// Seeded permutation, then contiguous cuts. Train and valid sizes are
// floor(fraction * n) but at least 1; the remainder goes to test.
Splits split(const ObservationalDataset& data, const SplitSpec& spec);

struct Standardization {
  std::vector<double> mu;
  std::vector<double> sigma;
};

// Per-column mean and population std of [t; x], sigma floored at 1e-6.
Standardization standardization_stats(const ObservationalDataset& train);
Standardization standardization_stats(const Matrix& columns);

struct OutcomeSpec {
  double tau = 2.0;
  bool heterogeneous = false;
  double outcome_noise = 0.1;
  // Std of the selection noise n in t|x ~ Bernoulli(sigmoid(w'x + n)).
  double selection_noise = 0.1;
  // w ~ U(-bound, bound)^d unless selection_weights is set.
  double selection_bound = 0.1;
  std::optional<std::vector<double>> selection_weights;
};

// x ~ N(0, I_d); y0 = a'x + e; y1 = y0 + tau (+ b'x when heterogeneous);
// t|x ~ Bernoulli(sigmoid(w'x + n)).
ObservationalDataset gen_twins_style(std::size_t n, std::size_t d, std::uint64_t seed,
                                     const OutcomeSpec& outcome = {});

// Randomized units E (fair-coin treatment) followed by untreated
// observational units; binary outcome. Masks E, T and U are attached.
ObservationalDataset gen_jobs_style(std::size_t n_rand, std::size_t n_obs, std::size_t d,
                                    std::uint64_t seed);

}  // namespace nester

#endif  // NESTER_DATA_HPP_
