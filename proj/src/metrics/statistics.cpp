#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "mrk/core/error.hpp"
#include "mrk/metrics/metrics.hpp"

namespace mrk::metrics {
namespace {

// Continued fraction for the incomplete beta function (modified Lentz).
double beta_fraction(double a, double b, double x) {
  constexpr double tiny = 1e-300;
  constexpr double eps = 1e-16;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 10000; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < eps) return h;
  }
  fail(ErrorCode::DegenerateInput, "incomplete beta did not converge (a={}, b={}, x={})", a, b, x);
}

Stat describe(std::vector<double> values) {
  Stat s;
  s.n = values.size();
  if (values.empty()) return s;
  // Sorting first makes the sums independent of record order.
  std::sort(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  if (values.size() >= 2) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return s;
}

SummaryRow summarize(const std::string& group, const std::vector<const MetricsRecord*>& rows) {
  std::vector<double> d;
  std::vector<double> h;
  SummaryRow out;
  out.group = group;
  for (const auto* r : rows) {
    d.push_back(r->dsc);
    if (r->hd95) {
      h.push_back(*r->hd95);
    } else {
      ++out.excluded;
    }
  }
  out.dsc = describe(std::move(d));
  out.hd95 = describe(std::move(h));
  return out;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) fail(ErrorCode::InvalidArgument, "incomplete beta needs a, b > 0");
  if (!(x >= 0.0 && x <= 1.0)) fail(ErrorCode::InvalidArgument, "incomplete beta needs x in [0, 1]");
  if (x == 0.0 || x == 1.0) return x;
  const double front =
      std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
               b * std::log1p(-x));
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_fraction(a, b, x) / a;
  return 1.0 - front * beta_fraction(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double df) {
  if (!(df > 0.0)) fail(ErrorCode::InvalidArgument, "degrees of freedom must be > 0, got {}", df);
  if (std::isnan(t)) fail(ErrorCode::InvalidArgument, "t statistic is NaN");
  if (std::isinf(t)) return 0.0;
  const double p = incomplete_beta(df / 2.0, 0.5, df / (df + t * t));
  return std::clamp(p, 0.0, 1.0);
}

PairedTestResult paired_t_test(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) {
    fail(ErrorCode::InvalidArgument, "paired samples differ in length ({} vs {})", x.size(), y.size());
  }
  if (x.size() < 2) fail(ErrorCode::InvalidArgument, "paired t-test needs n >= 2, got {}", x.size());
  PairedTestResult r;
  r.n = x.size();
  const double n = static_cast<double>(r.n);
  std::vector<double> d(r.n);
  for (std::size_t i = 0; i < r.n; ++i) d[i] = x[i] - y[i];
  double sum = 0.0;
  for (double v : d) sum += v;
  r.mean_diff = sum / n;
  if (std::all_of(d.begin(), d.end(), [](double v) { return v == 0.0; })) {
    r.degenerate = true;
    r.p_value = 1.0;
    return r;
  }
  double ss = 0.0;
  for (double v : d) ss += (v - r.mean_diff) * (v - r.mean_diff);
  const double sd = std::sqrt(ss / (n - 1.0));
  if (sd == 0.0) {
    r.t_stat = std::copysign(std::numeric_limits<double>::infinity(), r.mean_diff);
    r.p_value = 0.0;
  } else {
    r.t_stat = r.mean_diff / (sd / std::sqrt(n));
    r.p_value = student_t_two_sided_p(r.t_stat, n - 1.0);
  }
  r.significant = r.p_value < 0.05;
  return r;
}

std::vector<SummaryRow> aggregate(const std::vector<MetricsRecord>& records, GroupBy group_by) {
  if (records.empty()) fail(ErrorCode::InvalidArgument, "cannot aggregate an empty record list");
  std::vector<SummaryRow> out;
  if (group_by != GroupBy::None) {
    std::map<std::string, std::vector<const MetricsRecord*>> groups;
    for (const auto& r : records) {
      groups[group_by == GroupBy::Structure ? r.structure : r.phase].push_back(&r);
    }
    for (const auto& [name, rows] : groups) out.push_back(summarize(name, rows));
  }
  std::vector<const MetricsRecord*> all;
  for (const auto& r : records) all.push_back(&r);
  out.push_back(summarize("all", all));
  return out;
}

std::string phase_from_case_id(const std::string& case_id) {
  std::size_t start = 0;
  while (start <= case_id.size()) {
    const std::size_t end = std::min(case_id.find('_', start), case_id.size());
    const std::string token = case_id.substr(start, end - start);
    if (token == "ED" || token == "ES") return token;
    start = end + 1;
  }
  return {};
}

}  // namespace mrk::metrics
