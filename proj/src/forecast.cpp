#include "scalesim/forecast.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "scalesim/errors.hpp"

namespace scalesim {

namespace {

double clamp0(double v) { return v < 0.0 ? 0.0 : v; }

// Solve A x = b in place by Gaussian elimination with partial pivoting.
// Near-zero pivots (rank-deficient designs, e.g. a constant series) zero the
// corresponding coefficient instead of failing, which yields the minimal
// usable predictor.
std::vector<double> solve_linear(std::vector<std::vector<double>> a, std::vector<double> b) {
  const std::size_t n = b.size();
  double scale = 0.0;
  for (const auto& row : a)
    for (double v : row) scale = std::max(scale, std::fabs(v));
  const double tiny = scale * 1e-12;

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;

  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::fabs(a[r][col]) > std::fabs(a[pivot][col])) pivot = r;
    }
    std::swap(a[col], a[pivot]);
    std::swap(b[col], b[pivot]);
    if (std::fabs(a[col][col]) <= tiny) continue;  // dependent column
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r][col] / a[col][col];
      if (f == 0.0) continue;
      for (std::size_t k = col; k < n; ++k) a[r][k] -= f * a[col][k];
      b[r] -= f * b[col];
    }
  }

  std::vector<double> x(n, 0.0);
  for (std::size_t i = n; i-- > 0;) {
    if (std::fabs(a[i][i]) <= tiny) {
      x[i] = 0.0;
      continue;
    }
    double sum = b[i];
    for (std::size_t k = i + 1; k < n; ++k) sum -= a[i][k] * x[k];
    x[i] = sum / a[i][i];
  }
  return x;
}

}  // namespace

std::string to_string(ForecastMethod method) {
  switch (method) {
    case ForecastMethod::persistence: return "persistence";
    case ForecastMethod::seasonal_naive: return "seasonal_naive";
    case ForecastMethod::des: return "des";
    case ForecastMethod::ar_ls: return "ar_ls";
  }
  throw ConfigError("forecast: unknown method value");
}

ForecastMethod forecast_method_from_string(const std::string& name) {
  if (name == "persistence") return ForecastMethod::persistence;
  if (name == "seasonal_naive") return ForecastMethod::seasonal_naive;
  if (name == "des") return ForecastMethod::des;
  if (name == "ar_ls") return ForecastMethod::ar_ls;
  throw ConfigError("forecast: unknown method '" + name + "'");
}

Forecaster::Forecaster(ForecastMethod method, ForecastParams params)
    : method_(method), params_(params) {
  if (params_.des_alpha <= 0.0 || params_.des_alpha >= 1.0 ||
      params_.des_beta <= 0.0 || params_.des_beta >= 1.0) {
    throw ConfigError("forecast: des smoothing factors must be in (0, 1)");
  }
  if (params_.ar_order < 1) throw ConfigError("forecast: ar_order must be >= 1");
  if (params_.seasonal_period < 1) throw ConfigError("forecast: seasonal_period must be >= 1");
}

std::size_t Forecaster::min_fit_length() const {
  switch (method_) {
    case ForecastMethod::persistence: return 1;
    case ForecastMethod::seasonal_naive: return params_.seasonal_period;
    case ForecastMethod::des: return 2;
    case ForecastMethod::ar_ls: return 2 * static_cast<std::size_t>(params_.ar_order) + 1;
  }
  return 1;
}

void Forecaster::fit(std::span<const double> train) {
  if (train.size() < min_fit_length()) {
    throw FitError("forecast: " + to_string(method_) + " needs at least " +
                   std::to_string(min_fit_length()) + " observations, got " +
                   std::to_string(train.size()));
  }
  switch (method_) {
    case ForecastMethod::persistence:
      last_ = train.back();
      break;
    case ForecastMethod::seasonal_naive:
      season_.assign(train.end() - static_cast<std::ptrdiff_t>(params_.seasonal_period),
                     train.end());
      break;
    case ForecastMethod::des:
      level_ = train[0];
      trend_ = train[1] - train[0];
      fitted_ = true;
      for (std::size_t i = 2; i < train.size(); ++i) update(train[i]);
      break;
    case ForecastMethod::ar_ls:
      fit_ar(train);
      break;
  }
  fitted_ = true;
}

void Forecaster::fit_ar(std::span<const double> train) {
  const auto p = static_cast<std::size_t>(params_.ar_order);
  // Normal equations for x(t) ~ sum_i coef[i] * x(t-1-i), no intercept.
  std::vector<std::vector<double>> gram(p, std::vector<double>(p, 0.0));
  std::vector<double> rhs(p, 0.0);
  for (std::size_t t = p; t < train.size(); ++t) {
    for (std::size_t i = 0; i < p; ++i) {
      rhs[i] += train[t - 1 - i] * train[t];
      for (std::size_t j = i; j < p; ++j) {
        gram[i][j] += train[t - 1 - i] * train[t - 1 - j];
      }
    }
  }
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j < i; ++j) gram[i][j] = gram[j][i];

  coef_ = solve_linear(std::move(gram), std::move(rhs));
  lags_.assign(train.rbegin(), train.rbegin() + static_cast<std::ptrdiff_t>(p));
}

void Forecaster::update(double observation) {
  if (!fitted_) throw ProtocolError("forecast: update() called before fit()");
  switch (method_) {
    case ForecastMethod::persistence:
      last_ = observation;
      break;
    case ForecastMethod::seasonal_naive:
      season_.push_back(observation);
      season_.pop_front();
      break;
    case ForecastMethod::des: {
      const double prev_level = level_;
      level_ = params_.des_alpha * observation +
               (1.0 - params_.des_alpha) * (prev_level + trend_);
      trend_ = params_.des_beta * (level_ - prev_level) +
               (1.0 - params_.des_beta) * trend_;
      break;
    }
    case ForecastMethod::ar_ls:
      lags_.push_front(observation);
      lags_.pop_back();
      break;
  }
}

std::vector<double> Forecaster::forecast_values(std::size_t horizon) const {
  if (!fitted_) throw ProtocolError("forecast: forecast() called before fit()");
  if (horizon < 1) throw std::invalid_argument("forecast: horizon must be >= 1");

  std::vector<double> out;
  out.reserve(horizon);
  switch (method_) {
    case ForecastMethod::persistence:
      out.assign(horizon, clamp0(last_));
      break;
    case ForecastMethod::seasonal_naive:
      for (std::size_t k = 0; k < horizon; ++k) {
        out.push_back(clamp0(season_[k % season_.size()]));
      }
      break;
    case ForecastMethod::des:
      for (std::size_t k = 1; k <= horizon; ++k) {
        out.push_back(clamp0(level_ + static_cast<double>(k) * trend_));
      }
      break;
    case ForecastMethod::ar_ls: {
      std::deque<double> window = lags_;
      for (std::size_t k = 0; k < horizon; ++k) {
        double pred = 0.0;
        for (std::size_t i = 0; i < coef_.size(); ++i) pred += coef_[i] * window[i];
        pred = clamp0(pred);
        out.push_back(pred);
        window.push_front(pred);
        window.pop_back();
      }
      break;
    }
  }
  return out;
}

Forecast Forecaster::forecast(std::size_t horizon, std::size_t issued_at) const {
  return Forecast{forecast_values(horizon), issued_at};
}

}  // namespace scalesim
