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

#include "nester/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "nester/error.hpp"
#include "nester/interp.hpp"

namespace nester {
namespace {

constexpr char kMaskPrefix[] = "mask_";

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    cells.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_cell(const std::string& cell, std::size_t row, const std::string& column) {
  double value = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  if (!cell.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (cell.empty() || ec != std::errc() || ptr != last) {
    throw DataError("non-numeric cell '" + cell + "' at row " + std::to_string(row) +
                    ", column '" + column + "'");
  }
  return value;
}

template <typename T>
std::vector<T> pick(const std::vector<T>& v, std::span<const std::size_t> idx) {
  std::vector<T> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(v[i]);
  return out;
}

template <typename T>
std::vector<T> join(const std::vector<T>& a, const std::vector<T>& b) {
  std::vector<T> out(a);
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

}  // namespace

Matrix ObservationalDataset::inputs() const {
  Matrix v(size(), dim() + 1);
  for (std::size_t i = 0; i < size(); ++i) {
    v(i, 0) = t[i];
    for (std::size_t k = 0; k < dim(); ++k) v(i, k + 1) = x(i, k);
  }
  return v;
}

Matrix ObservationalDataset::inputs_with_treatment(double treatment) const {
  Matrix v = inputs();
  for (std::size_t i = 0; i < v.rows; ++i) v(i, 0) = treatment;
  return v;
}

ObservationalDataset ObservationalDataset::select(std::span<const std::size_t> indices) const {
  ObservationalDataset out;
  out.x = Matrix(indices.size(), dim());
  for (std::size_t r = 0; r < indices.size(); ++r) {
    if (indices[r] >= size()) throw DataError("selection index out of range");
    std::copy_n(x.row(indices[r]).begin(), dim(), out.x.row(r).begin());
  }
  out.t = pick(t, indices);
  out.y = pick(y, indices);
  if (y0) out.y0 = pick(*y0, indices);
  if (y1) out.y1 = pick(*y1, indices);
  for (const auto& [name, mask] : masks) out.masks[name] = pick(mask, indices);
  return out;
}

void ObservationalDataset::validate(double tolerance) const {
  const std::size_t n = size();
  if (n == 0) throw DataError("dataset has no units");
  if (dim() == 0) throw DataError("dataset has no covariates");
  if (x.rows != n || t.size() != n) throw DataError("covariate, treatment and outcome sizes differ");
  if (y0.has_value() != y1.has_value()) {
    throw DataError("potential outcomes must be given together (y0 and y1)");
  }
  if (y0 && (y0->size() != n || y1->size() != n)) throw DataError("potential outcome size mismatch");
  for (const auto& [name, mask] : masks) {
    if (mask.size() != n) throw DataError("mask '" + name + "' has the wrong length");
  }
  for (double v : x.data) {
    if (!std::isfinite(v)) throw DataError("covariates contain a non-finite value");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (t[i] != 0.0 && t[i] != 1.0) {
      throw DataError("treatment must be 0 or 1 (row " + std::to_string(i + 1) + ")");
    }
    if (!std::isfinite(y[i])) throw DataError("outcome is not finite (row " + std::to_string(i + 1) + ")");
    if (y0) {
      const double expected = t[i] * (*y1)[i] + (1.0 - t[i]) * (*y0)[i];
      if (!(std::abs(expected - y[i]) <= tolerance)) {
        throw DataError("row " + std::to_string(i + 1) +
                        ": observed y is inconsistent with t, y0 and y1");
      }
    }
  }
}

ObservationalDataset concat(const ObservationalDataset& a, const ObservationalDataset& b) {
  if (a.dim() != b.dim()) throw DataError("cannot concatenate datasets of different dimension");
  ObservationalDataset out;
  out.x = Matrix(a.size() + b.size(), a.dim());
  std::copy(a.x.data.begin(), a.x.data.end(), out.x.data.begin());
  std::copy(b.x.data.begin(), b.x.data.end(), out.x.data.begin() + static_cast<std::ptrdiff_t>(a.x.data.size()));
  out.t = join(a.t, b.t);
  out.y = join(a.y, b.y);
  if (a.y0 && b.y0) out.y0 = join(*a.y0, *b.y0);
  if (a.y1 && b.y1) out.y1 = join(*a.y1, *b.y1);
  for (const auto& [name, mask] : a.masks) {
    const auto it = b.masks.find(name);
    if (it != b.masks.end()) out.masks[name] = join(mask, it->second);
  }
  return out;
}

ObservationalDataset load_csv(const std::filesystem::path& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open CSV file '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw DataError("CSV file '" + path.string() + "' has no header");
  const auto header = split_line(line);
  auto column = [&](const std::string& name) -> std::size_t {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw DataError("missing column '" + name + "' in " + path.string());
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t t_col = column(schema.t_col);
  const std::size_t y_col = column(schema.y_col);
  std::optional<std::size_t> y0_col, y1_col;
  if (schema.y0_col) y0_col = column(*schema.y0_col);
  if (schema.y1_col) y1_col = column(*schema.y1_col);
  if (!schema.y0_col && !schema.y1_col) {
    // Files written by write_csv carry ground truth under these names.
    const bool has_y0 = std::find(header.begin(), header.end(), "y0") != header.end();
    const bool has_y1 = std::find(header.begin(), header.end(), "y1") != header.end();
    if (has_y0 && has_y1) {
      y0_col = column("y0");
      y1_col = column("y1");
    }
  }

  std::vector<std::size_t> features;
  std::vector<std::pair<std::string, std::size_t>> mask_cols;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c].rfind(kMaskPrefix, 0) == 0) {
      mask_cols.emplace_back(header[c].substr(sizeof(kMaskPrefix) - 1), c);
    }
  }
  if (schema.feature_cols.empty()) {
    for (std::size_t c = 0; c < header.size(); ++c) {
      const bool reserved = c == t_col || c == y_col || (y0_col && c == *y0_col) ||
                            (y1_col && c == *y1_col) || header[c].rfind(kMaskPrefix, 0) == 0;
      if (!reserved) features.push_back(c);
    }
  } else {
    for (const auto& name : schema.feature_cols) features.push_back(column(name));
  }
  if (features.empty()) throw DataError("CSV file '" + path.string() + "' has no feature columns");

  ObservationalDataset data;
  std::vector<double> xs;
  std::vector<double> y0s, y1s;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_line(line);
    if (cells.size() != header.size()) {
      throw DataError("row " + std::to_string(row) + " has " + std::to_string(cells.size()) +
                      " cells, header has " + std::to_string(header.size()));
    }
    auto get = [&](std::size_t c) { return parse_cell(cells[c], row, header[c]); };
    data.t.push_back(get(t_col));
    data.y.push_back(get(y_col));
    if (y0_col) y0s.push_back(get(*y0_col));
    if (y1_col) y1s.push_back(get(*y1_col));
    for (std::size_t c : features) xs.push_back(get(c));
    for (const auto& [name, c] : mask_cols) {
      const double m = get(c);
      if (m != 0.0 && m != 1.0) {
        throw DataError("mask column '" + header[c] + "' must be 0/1 (row " + std::to_string(row) + ")");
      }
      data.masks[name].push_back(static_cast<std::uint8_t>(m));
    }
  }
  data.x.rows = data.t.size();
  data.x.cols = features.size();
  data.x.data = std::move(xs);
  if (y0_col) data.y0 = std::move(y0s);
  if (y1_col) data.y1 = std::move(y1s);
  data.validate();
  return data;
}

void write_csv(const ObservationalDataset& data, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write CSV file '" + path.string() + "'");
  out << "t,y";
  if (data.has_potential_outcomes()) out << ",y0,y1";
  for (std::size_t k = 0; k < data.dim(); ++k) out << ",x" << k + 1;
  for (const auto& [name, mask] : data.masks) out << "," << kMaskPrefix << name;
  out << "\n";
  char buf[32];
  auto num = [&](double v) {
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
  };
  for (std::size_t i = 0; i < data.size(); ++i) {
    out << num(data.t[i]) << "," << num(data.y[i]);
    if (data.has_potential_outcomes()) out << "," << num((*data.y0)[i]) << "," << num((*data.y1)[i]);
    for (std::size_t k = 0; k < data.dim(); ++k) out << "," << num(data.x(i, k));
    for (const auto& [name, mask] : data.masks) out << "," << static_cast<int>(mask[i]);
    out << "\n";
  }
}

Splits split(const ObservationalDataset& data, const SplitSpec& spec) {
  const std::size_t n = data.size();
  if (n < 5) throw DataError("splitting needs at least 5 units, got " + std::to_string(n));
  if (spec.train <= 0 || spec.valid <= 0 || spec.test <= 0 ||
      std::abs(spec.train + spec.valid + spec.test - 1.0) > 1e-9) {
    throw DataError("split fractions must be positive and sum to 1");
  }
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(spec.seed);
  std::shuffle(perm.begin(), perm.end(), rng);

  const auto floor_at_least_one = [&](double frac) {
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(frac * static_cast<double>(n) + 1e-9)));
  };
  const std::size_t n_train = floor_at_least_one(spec.train);
  const std::size_t n_valid = floor_at_least_one(spec.valid);
  if (n_train + n_valid >= n) throw DataError("split leaves the test set empty");

  Splits out;
  out.train_index.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
  out.valid_index.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train),
                         perm.begin() + static_cast<std::ptrdiff_t>(n_train + n_valid));
  out.test_index.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train + n_valid), perm.end());
  out.train = data.select(out.train_index);
  out.valid = data.select(out.valid_index);
  out.test = data.select(out.test_index);
  return out;
}

Standardization standardization_stats(const Matrix& columns) {
  if (columns.rows == 0) throw DataError("standardization needs at least one row");
  Standardization s;
  s.mu.assign(columns.cols, 0.0);
  s.sigma.assign(columns.cols, 0.0);
  const auto n = static_cast<double>(columns.rows);
  for (std::size_t i = 0; i < columns.rows; ++i) {
    for (std::size_t k = 0; k < columns.cols; ++k) s.mu[k] += columns(i, k);
  }
  for (double& m : s.mu) m /= n;
  for (std::size_t i = 0; i < columns.rows; ++i) {
    for (std::size_t k = 0; k < columns.cols; ++k) {
      const double dev = columns(i, k) - s.mu[k];
      s.sigma[k] += dev * dev;
    }
  }
  for (double& sd : s.sigma) sd = std::max(std::sqrt(sd / n), kSigmaFloor);
  return s;
}

Standardization standardization_stats(const ObservationalDataset& train) {
  return standardization_stats(train.inputs());
}

ObservationalDataset gen_twins_style(std::size_t n, std::size_t d, std::uint64_t seed,
                                     const OutcomeSpec& outcome) {
  if (n < 1 || d < 1) throw DataError("generator needs n >= 1 and d >= 1");
  if (outcome.selection_weights && outcome.selection_weights->size() != d) {
    throw DataError("selection weights must have length d");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double bound) { return bound * (2.0 * unit(rng) - 1.0); };

  std::vector<double> a(d), b(d), w(d);
  for (auto& c : a) c = uniform(1.0);
  for (auto& c : b) c = uniform(0.5);
  for (std::size_t k = 0; k < d; ++k) {
    w[k] = outcome.selection_weights ? (*outcome.selection_weights)[k] : uniform(outcome.selection_bound);
  }

  ObservationalDataset data;
  data.x = Matrix(n, d);
  data.t.resize(n);
  data.y.resize(n);
  data.y0.emplace(n);
  data.y1.emplace(n);
  for (std::size_t i = 0; i < n; ++i) {
    double ax = 0.0, bx = 0.0, wx = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      const double xv = normal(rng);
      data.x(i, k) = xv;
      ax += a[k] * xv;
      bx += b[k] * xv;
      wx += w[k] * xv;
    }
    const double y0 = ax + outcome.outcome_noise * normal(rng);
    const double y1 = y0 + outcome.tau + (outcome.heterogeneous ? bx : 0.0);
    const double propensity = sigmoid(wx + outcome.selection_noise * normal(rng));
    const double t = unit(rng) < propensity ? 1.0 : 0.0;
    (*data.y0)[i] = y0;
    (*data.y1)[i] = y1;
    data.t[i] = t;
    data.y[i] = t == 1.0 ? y1 : y0;
  }
  return data;
}

ObservationalDataset gen_jobs_style(std::size_t n_rand, std::size_t n_obs, std::size_t d,
                                    std::uint64_t seed) {
  if (n_rand < 2 || d < 1) throw DataError("jobs-style generator needs n_rand >= 2 and d >= 1");
  constexpr double kTrainingEffect = 0.8;  // on the logit scale
  const std::size_t n = n_rand + n_obs;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> a(d);
  for (auto& c : a) c = unit(rng) - 0.5;

  ObservationalDataset data;
  data.x = Matrix(n, d);
  data.t.assign(n, 0.0);
  data.y.assign(n, 0.0);
  Mask e(n, 0), treated(n, 0), control(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < d; ++k) data.x(i, k) = normal(rng);
    if (i < n_rand) {
      e[i] = 1;
      data.t[i] = unit(rng) < 0.5 ? 1.0 : 0.0;
    }
  }
  // Both arms of the randomized subset must be non-empty.
  if (std::all_of(data.t.begin(), data.t.begin() + static_cast<std::ptrdiff_t>(n_rand),
                  [](double t) { return t == 1.0; })) {
    data.t[1] = 0.0;
  } else if (std::none_of(data.t.begin(), data.t.begin() + static_cast<std::ptrdiff_t>(n_rand),
                          [](double t) { return t == 1.0; })) {
    data.t[0] = 1.0;
  }
  for (std::size_t i = 0; i < n; ++i) {
    double logit = -0.5 + kTrainingEffect * data.t[i];
    for (std::size_t k = 0; k < d; ++k) logit += a[k] * data.x(i, k);
    data.y[i] = unit(rng) < sigmoid(logit) ? 1.0 : 0.0;
    treated[i] = data.t[i] == 1.0;
    control[i] = data.t[i] == 0.0;
  }
  data.masks["E"] = std::move(e);
  data.masks["T"] = std::move(treated);
  data.masks["U"] = std::move(control);
  return data;
}

}  // namespace nester
