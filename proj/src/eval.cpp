#include "citegcn/eval.hpp"

#include <cmath>
#include <ostream>

#include "citegcn/format.hpp"
#include "json.hpp"

namespace citegcn::eval {

namespace {

void check_pair(const std::vector<double>& y, const std::vector<double>& y_hat) {
  if (y.empty()) throw DataError("metrics need at least one sample");
  if (y.size() != y_hat.size())
    throw DataError("target and prediction lengths differ: " +
                    std::to_string(y.size()) + " vs " + std::to_string(y_hat.size()));
}

}  // namespace

double mae(const std::vector<double>& y, const std::vector<double>& y_hat) {
  check_pair(y, y_hat);
  double sum = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) sum += std::abs(y[i] - y_hat[i]);
  return sum / static_cast<double>(y.size());
}

double rmse(const std::vector<double>& y, const std::vector<double>& y_hat) {
  check_pair(y, y_hat);
  double sum = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i)
    sum += (y[i] - y_hat[i]) * (y[i] - y_hat[i]);
  return std::sqrt(sum / static_cast<double>(y.size()));
}

double mape(const std::vector<double>& y, const std::vector<double>& y_hat) {
  check_pair(y, y_hat);
  double sum = 0.0;
  std::size_t support = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] == 0.0) continue;
    sum += std::abs(y[i] - y_hat[i]) / std::abs(y[i]);
    ++support;
  }
  if (support == 0)
    throw NumericError("mape undefined: every target is zero");
  return sum / static_cast<double>(support);
}

double r2(const std::vector<double>& y, const std::vector<double>& y_hat) {
  check_pair(y, y_hat);
  if (y.size() < 2) throw DataError("r2 needs at least two samples");
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(y.size());
  double ss_res = 0.0;
  double ss_tot = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    ss_res += (y[i] - y_hat[i]) * (y[i] - y_hat[i]);
    ss_tot += (y[i] - mean) * (y[i] - mean);
  }
  if (ss_tot == 0.0)
    throw NumericError("r2 undefined: targets have zero variance");
  return 1.0 - ss_res / ss_tot;
}

double adjusted_r2(double r2_value, std::size_t n, std::size_t p) {
  if (n <= p + 1)
    throw DataError("adjusted r2 needs n > p + 1: n=" + std::to_string(n) +
                    ", p=" + std::to_string(p));
  const double nn = static_cast<double>(n);
  const double pp = static_cast<double>(p);
  return 1.0 - (1.0 - r2_value) * (nn - 1.0) / (nn - (pp + 1.0));
}

MetricsReport evaluate(const std::vector<double>& y,
                       const std::vector<double>& y_hat, std::size_t p) {
  MetricsReport report;
  report.mae = mae(y, y_hat);
  report.rmse = rmse(y, y_hat);
  report.mape = mape(y, y_hat);
  report.r2 = r2(y, y_hat);
  report.adjusted_r2 = adjusted_r2(report.r2, y.size(), p);
  report.n = y.size();
  report.p = p;
  report.mape_support = 0;
  for (double v : y)
    if (v != 0.0) ++report.mape_support;
  return report;
}

std::string to_json(const MetricsReport& report) {
  nlohmann::json j;
  j["mae"] = report.mae;
  j["rmse"] = report.rmse;
  j["mape"] = report.mape;
  j["r2"] = report.r2;
  j["adjusted_r2"] = report.adjusted_r2;
  j["n"] = report.n;
  j["p"] = report.p;
  j["mape_support"] = report.mape_support;
  return j.dump(2);
}

MetricsReport metrics_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object())
    throw DataError("metrics json is malformed");
  MetricsReport report;
  try {
    report.mae = j.at("mae").get<double>();
    report.rmse = j.at("rmse").get<double>();
    report.mape = j.at("mape").get<double>();
    report.r2 = j.at("r2").get<double>();
    report.adjusted_r2 = j.at("adjusted_r2").get<double>();
    report.n = j.at("n").get<std::size_t>();
    report.p = j.at("p").get<std::size_t>();
    report.mape_support = j.at("mape_support").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("metrics json missing fields: ") + e.what());
  }
  return report;
}

void write_metrics_csv_header(std::ostream& out) {
  out << "model,case,fold,mae,rmse,mape,r2,adjusted_r2,n,p,mape_support\n";
}

void write_metrics_csv_row(const std::string& model, const std::string& case_name,
                           const std::string& fold, const MetricsReport& report,
                           std::ostream& out) {
  out << model << ',' << case_name << ',' << fold << ','
      << format_double(report.mae) << ',' << format_double(report.rmse) << ','
      << format_double(report.mape) << ',' << format_double(report.r2) << ','
      << format_double(report.adjusted_r2) << ',' << report.n << ',' << report.p
      << ',' << report.mape_support << "\n";
}

}  // namespace citegcn::eval
