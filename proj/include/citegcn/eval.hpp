#pragma once

// Regression metrics (MAE, RMSE, MAPE, R², adjusted R²) and the k-fold
// cross-validation splitter.  Metrics are always computed on raw citation
// counts, regardless of any target transform used during training.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "citegcn/errors.hpp"
#include "citegcn/rng.hpp"

namespace citegcn::eval {

struct MetricsReport {
  double mae = 0.0;
  double rmse = 0.0;
  double mape = 0.0;
  double r2 = 0.0;
  double adjusted_r2 = 0.0;
  std::size_t n = 0;             // sample count
  std::size_t p = 0;             // predictor count
  std::size_t mape_support = 0;  // samples with nonzero target

  bool operator==(const MetricsReport&) const = default;
};

double mae(const std::vector<double>& y, const std::vector<double>& y_hat);
double rmse(const std::vector<double>& y, const std::vector<double>& y_hat);

// Mean of |y - y_hat| / |y| over samples with y != 0; zero-target samples are
// excluded (the ratio is undefined there) and tracked via mape_support.
double mape(const std::vector<double>& y, const std::vector<double>& y_hat);

double r2(const std::vector<double>& y, const std::vector<double>& y_hat);
double adjusted_r2(double r2_value, std::size_t n, std::size_t p);

MetricsReport evaluate(const std::vector<double>& y,
                       const std::vector<double>& y_hat, std::size_t p);

std::string to_json(const MetricsReport& report);
MetricsReport metrics_from_json(const std::string& text);

void write_metrics_csv_header(std::ostream& out);
void write_metrics_csv_row(const std::string& model, const std::string& case_name,
                           const std::string& fold, const MetricsReport& report,
                           std::ostream& out);

// One cross-validation fold: a held-out validation slice plus the rest.
template <typename T>
struct Fold {
  std::vector<T> train;
  std::vector<T> validation;
};

// Shuffles once with the seed, then deals contiguous validation slices whose
// sizes differ by at most one; validation slices partition the input.
template <typename T>
std::vector<Fold<T>> kfold(const std::vector<T>& ids, std::size_t k,
                           std::uint64_t seed) {
  if (k < 2) throw ConfigError("kfold requires k >= 2");
  if (ids.size() < k)
    throw DataError("kfold requires at least k ids: " + std::to_string(ids.size()) +
                    " < " + std::to_string(k));
  std::vector<T> shuffled = ids;
  Rng rng(seed);
  rng.shuffle(shuffled);

  std::vector<Fold<T>> folds(k);
  const std::size_t base = shuffled.size() / k;
  const std::size_t extra = shuffled.size() % k;
  std::size_t start = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t size = base + (f < extra ? 1 : 0);
    folds[f].validation.assign(shuffled.begin() + start,
                               shuffled.begin() + start + size);
    folds[f].train.reserve(shuffled.size() - size);
    folds[f].train.insert(folds[f].train.end(), shuffled.begin(),
                          shuffled.begin() + start);
    folds[f].train.insert(folds[f].train.end(), shuffled.begin() + start + size,
                          shuffled.end());
    start += size;
  }
  return folds;
}

}  // namespace citegcn::eval
