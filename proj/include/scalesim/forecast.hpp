#pragma once

#include <cstddef>
#include <deque>
#include <span>
#include <string>
#include <vector>

namespace scalesim {

enum class ForecastMethod {
  persistence,
  seasonal_naive,
  des,    // double exponential smoothing (Holt)
  ar_ls,  // autoregressive, least-squares fit
};

std::string to_string(ForecastMethod method);
ForecastMethod forecast_method_from_string(const std::string& name);

struct ForecastParams {
  double des_alpha = 0.5;  // level smoothing
  double des_beta = 0.2;   // trend smoothing
  int ar_order = 3;
  std::size_t seasonal_period = 50;
};

struct Forecast {
  std::vector<double> values;  // length = horizon, all >= 0
  std::size_t issued_at = 0;
};

// Pluggable demand forecaster: fit once on a training window, then advance
// one observation at a time with update(). forecast() is side-effect free.
class Forecaster {
 public:
  explicit Forecaster(ForecastMethod method, ForecastParams params = {});

  // FitError when the series is shorter than the method minimum
  // (persistence: 1, seasonal_naive: period, des: 2, ar_ls: 2p+1).
  void fit(std::span<const double> train);

  // O(1) or O(p) state advance; never refits over history.
  // ProtocolError when called before fit().
  void update(double observation);

  // Length-h vector of predicted demand, clamped at zero.
  // ProtocolError before fit(); std::invalid_argument for horizon < 1.
  std::vector<double> forecast_values(std::size_t horizon) const;
  Forecast forecast(std::size_t horizon, std::size_t issued_at) const;

  bool fitted() const { return fitted_; }
  ForecastMethod method() const { return method_; }
  std::size_t min_fit_length() const;

  // introspection used by tests and diagnostics
  double des_level() const { return level_; }
  double des_trend() const { return trend_; }
  const std::vector<double>& ar_coefficients() const { return coef_; }

 private:
  void fit_ar(std::span<const double> train);

  ForecastMethod method_;
  ForecastParams params_;
  bool fitted_ = false;

  double last_ = 0.0;                 // persistence
  std::deque<double> season_;         // seasonal_naive, newest at back
  double level_ = 0.0, trend_ = 0.0;  // des
  std::vector<double> coef_;          // ar_ls, coef_[i] multiplies lag i+1
  std::deque<double> lags_;           // ar_ls, newest at front
};

}  // namespace scalesim
