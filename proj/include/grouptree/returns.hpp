#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "grouptree/corrnet.hpp"
#include "grouptree/ingest.hpp"
#include "grouptree/return_panel.hpp"

namespace grouptree {

/// returns[i][t] = ln(prices[i][t+1]) - ln(prices[i][t])
ReturnPanel log_returns(const PricePanel& panel);

/// Same transform for an index level series; levels must be positive.
ExternalReturnSeries log_returns(const IndexSeries& series);

/// Stock returns and the lagged external return gathered onto the aligned
/// sample axis: column k holds the domestic return of pair k next to the
/// external return of the day paired strictly before it.
struct AlignedReturns {
    std::vector<std::string> tickers;
    std::vector<std::string> dates;  // domestic return date per pair
    Eigen::MatrixXd stock;           // N x K
    Eigen::VectorXd external_lagged;  // K

    std::size_t sample_count() const noexcept { return dates.size(); }
};

AlignedReturns gather_aligned(const ReturnPanel& panel, const ExternalReturnSeries& external,
                              const LaggedAlignment& alignment);

/// Per-window exposure of each stock to the lagged external index: the
/// correlation over the window's samples, i.e. the trailing window ending at
/// the window's reference (end) date. NaN marks an undefined value
/// (zero-variance sample).
struct BetaSeries {
    std::vector<std::string> tickers;
    std::vector<std::size_t> window_starts;  // aligned-sample indices
    std::size_t window_length = 0;
    Eigen::MatrixXd betas;  // N x W

    std::size_t window_count() const noexcept { return window_starts.size(); }
};

BetaSeries beta_series(const AlignedReturns& aligned, const std::vector<WindowSpec>& windows);
BetaSeries beta_series(const ReturnPanel& panel, const ExternalReturnSeries& external,
                       const LaggedAlignment& alignment, const std::vector<WindowSpec>& windows);

/// Stock returns with the lagged external component alpha * beta_i * U
/// removed. Columns are aligned samples covered by the window schedule;
/// trailing samples past the last window are excluded (with a warning).
/// Between window steps the beta in force is the one from the window
/// starting at the most recent step; an undefined beta falls back to the
/// unmodified return.
struct ModifiedReturnPanel {
    std::vector<std::string> tickers;
    TradingCalendar calendar;
    Eigen::MatrixXd returns;  // N x C, C = end of the last window
    double alpha = 0.0;

    std::size_t sample_count() const noexcept { return calendar.size(); }
};

ModifiedReturnPanel modified_returns(const AlignedReturns& aligned, const BetaSeries& betas,
                                     double alpha);
ModifiedReturnPanel modified_returns(const ReturnPanel& panel,
                                     const ExternalReturnSeries& external,
                                     const BetaSeries& betas, double alpha,
                                     const LaggedAlignment& alignment);

/// Per-window mean over stocks of the correlation with the lagged external
/// series. Undefined correlations are excluded from the mean; a window with
/// no defined correlation yields NaN. A stock whose windowed variance is
/// negligible against the external's (ratio below kResidualFloor) counts as
/// fully de-correlated and contributes 0 -- without this, a residual scaled
/// down to numerical dust would still report correlation +-1.
std::vector<double> mean_cross_correlation(const AlignedReturns& aligned,
                                           const std::vector<WindowSpec>& windows);
std::vector<double> mean_cross_correlation(const ReturnPanel& panel,
                                           const ExternalReturnSeries& external,
                                           const LaggedAlignment& alignment,
                                           const std::vector<WindowSpec>& windows);
std::vector<double> mean_cross_correlation(const ModifiedReturnPanel& modified,
                                           const ExternalReturnSeries& external,
                                           const LaggedAlignment& alignment,
                                           const std::vector<WindowSpec>& windows);

/// std(stock)/std(external) below this within a window means the stock's
/// residual is treated as fully explained by the external factor.
inline constexpr double kResidualFloor = 1e-7;

struct CalibrationResult {
    double alpha = 0.0;
    double objective = 0.0;  // |time-averaged mean cross-correlation| at alpha
    int evaluations = 0;
    bool tolerance_met = false;
};

/// Finds the rescaling coefficient that drives the time-averaged mean
/// cross-correlation of the modified returns to zero: coarse bracket scan,
/// bisection on the signed objective, golden-section fallback on |objective|
/// when no sign change exists. Ties resolve toward smaller alpha.
/// The betas overload calibrates against the given exposures so the search
/// optimizes exactly what modified_returns will apply.
CalibrationResult calibrate_alpha(const AlignedReturns& aligned, const BetaSeries& betas,
                                  const std::vector<WindowSpec>& windows, double tolerance,
                                  double alpha_max = 10.0);
CalibrationResult calibrate_alpha(const AlignedReturns& aligned,
                                  const std::vector<WindowSpec>& windows, double tolerance,
                                  double alpha_max = 10.0);
CalibrationResult calibrate_alpha(const ReturnPanel& panel, const ExternalReturnSeries& external,
                                  const LaggedAlignment& alignment,
                                  const std::vector<WindowSpec>& windows, double tolerance,
                                  double alpha_max = 10.0);

}  // namespace grouptree
