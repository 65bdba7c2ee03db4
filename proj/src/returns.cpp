#include "grouptree/returns.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "grouptree/errors.hpp"

namespace grouptree {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

void check_windows(const std::vector<WindowSpec>& windows, std::size_t total) {
    if (windows.empty()) throw DataError("window schedule is empty");
    for (std::size_t w = 0; w < windows.size(); ++w) {
        if (windows[w].length < 2 || windows[w].end() > total) {
            throw DataError("window " + std::to_string(w) + " does not fit the aligned span");
        }
        if (w > 0 && windows[w].start <= windows[w - 1].start) {
            throw DataError("window starts must be strictly increasing");
        }
    }
}

struct CenteredExternal {
    Eigen::VectorXd values;
    double sum_squares = 0.0;
    bool constant = false;
};

CenteredExternal center_external(const Eigen::VectorXd& u, const WindowSpec& w) {
    CenteredExternal out;
    const auto seg = u.segment(static_cast<Eigen::Index>(w.start),
                               static_cast<Eigen::Index>(w.length));
    if (seg.minCoeff() == seg.maxCoeff()) {
        out.constant = true;
        return out;
    }
    out.values = seg.array() - seg.mean();
    out.sum_squares = out.values.squaredNorm();
    out.constant = out.sum_squares == 0.0;
    return out;
}

/// Correlation of a contiguous stock segment against the pre-centered
/// external segment. NaN when either sample is exactly constant. With
/// `guard_residual`, a stock whose standard deviation has collapsed below
/// kResidualFloor times the external's counts as fully de-correlated (0).
double external_correlation(const double* x, std::size_t n, const CenteredExternal& u,
                            bool guard_residual) {
    if (u.constant) return kNan;
    Eigen::Map<const Eigen::VectorXd> xm(x, static_cast<Eigen::Index>(n));
    if (xm.minCoeff() == xm.maxCoeff()) return kNan;
    const auto dx = xm.array() - xm.mean();
    const double sxx = dx.square().sum();
    if (sxx == 0.0) return kNan;
    if (guard_residual && sxx <= kResidualFloor * kResidualFloor * u.sum_squares) return 0.0;
    const double sxy = (dx * u.values.array()).sum();
    return std::clamp(sxy / std::sqrt(sxx * u.sum_squares), -1.0, 1.0);
}

/// samples_major is K x N (one contiguous column per stock).
std::vector<double> windowed_mean_correlation(const Eigen::MatrixXd& samples_major,
                                              const Eigen::VectorXd& external,
                                              const std::vector<WindowSpec>& windows,
                                              bool guard_residual) {
    std::vector<double> out(windows.size(), kNan);
    for (std::size_t w = 0; w < windows.size(); ++w) {
        const CenteredExternal uc = center_external(external, windows[w]);
        double sum = 0.0;
        std::size_t defined = 0;
        for (Eigen::Index i = 0; i < samples_major.cols(); ++i) {
            const double* x = samples_major.col(i).data() + windows[w].start;
            const double r = external_correlation(x, windows[w].length, uc, guard_residual);
            if (!std::isnan(r)) {
                sum += r;
                ++defined;
            }
        }
        if (defined > 0) out[w] = sum / static_cast<double>(defined);
    }
    return out;
}

/// Per-window coverage [from, to) of the piecewise-constant beta rule:
/// window j is in force from its start until the next window's start
/// (the last window runs to the end of the covered span).
std::vector<std::pair<std::size_t, std::size_t>> governance_segments(
    const std::vector<std::size_t>& window_starts, std::size_t covered) {
    std::vector<std::pair<std::size_t, std::size_t>> segs(window_starts.size());
    for (std::size_t j = 0; j < window_starts.size(); ++j) {
        const std::size_t from = window_starts[j];
        const std::size_t to =
            j + 1 < window_starts.size() ? std::min(window_starts[j + 1], covered) : covered;
        segs[j] = {std::min(from, covered), to};
    }
    return segs;
}

std::pair<Eigen::MatrixXd, std::size_t> cleaned_loadings(const BetaSeries& betas) {
    Eigen::MatrixXd loading = betas.betas;
    std::size_t undefined = 0;
    for (Eigen::Index i = 0; i < loading.rows(); ++i) {
        for (Eigen::Index w = 0; w < loading.cols(); ++w) {
            if (std::isnan(loading(i, w))) {
                loading(i, w) = 0.0;
                ++undefined;
            }
        }
    }
    return {std::move(loading), undefined};
}

/// K x N modified return matrix over [0, covered); used by the calibration
/// loop where the stock-major public shape would cost a transpose per trial.
Eigen::MatrixXd modified_matrix_samples_major(const Eigen::MatrixXd& stock_samples_major,
                                              const Eigen::VectorXd& external,
                                              const Eigen::MatrixXd& loading,
                                              const std::vector<std::size_t>& window_starts,
                                              double alpha, std::size_t covered) {
    const Eigen::Index c = static_cast<Eigen::Index>(covered);
    const Eigen::Index n = stock_samples_major.cols();
    // Samples before the first window's start (possible only with a schedule
    // that skips the beginning) have no beta in force and stay unmodified.
    Eigen::MatrixXd out = stock_samples_major.topRows(c);
    if (alpha == 0.0) return out;
    const auto segs = governance_segments(window_starts, covered);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < segs.size(); ++j) {
            const auto [from, to] = segs[j];
            if (to <= from) continue;
            const Eigen::Index f = static_cast<Eigen::Index>(from);
            const Eigen::Index len = static_cast<Eigen::Index>(to - from);
            out.col(i).segment(f, len) =
                stock_samples_major.col(i).segment(f, len) -
                (alpha * loading(i, static_cast<Eigen::Index>(j))) * external.segment(f, len);
        }
    }
    return out;
}

std::size_t covered_span(const BetaSeries& betas, std::size_t sample_count) {
    if (betas.window_starts.empty()) throw DataError("beta series has no windows");
    const std::size_t covered = betas.window_starts.back() + betas.window_length;
    if (covered > sample_count) throw DataError("beta windows extend past the aligned span");
    return covered;
}

double time_average(const std::vector<double>& values) {
    double sum = 0.0;
    std::size_t defined = 0;
    for (double v : values) {
        if (!std::isnan(v)) {
            sum += v;
            ++defined;
        }
    }
    return defined ? sum / static_cast<double>(defined) : kNan;
}

}  // namespace

void ReturnPanel::validate() const {
    calendar.validate();
    if (tickers.empty()) throw DataError("return panel has no tickers");
    if (returns.rows() != static_cast<Eigen::Index>(tickers.size()) ||
        returns.cols() != static_cast<Eigen::Index>(calendar.size())) {
        throw DataError("return panel shape does not match tickers/calendar");
    }
    if (!returns.array().isFinite().all()) {
        throw DataError("return panel contains a non-finite value");
    }
}

void ExternalReturnSeries::validate() const {
    calendar.validate();
    if (returns.size() != static_cast<Eigen::Index>(calendar.size())) {
        throw DataError("external return series length does not match its calendar");
    }
    if (!returns.array().isFinite().all()) {
        throw DataError("external return series contains a non-finite value");
    }
}

ReturnPanel log_returns(const PricePanel& panel) {
    panel.validate();
    const Eigen::Index cols = panel.prices.cols();
    ReturnPanel out;
    out.tickers = panel.tickers;
    out.calendar.dates.assign(panel.calendar.dates.begin() + 1, panel.calendar.dates.end());
    const Eigen::MatrixXd logs = panel.prices.array().log();
    out.returns = logs.rightCols(cols - 1) - logs.leftCols(cols - 1);
    return out;
}

ExternalReturnSeries log_returns(const IndexSeries& series) {
    series.validate();
    if (series.values.size() < 2) throw DataError("index series needs at least 2 dates");
    ExternalReturnSeries out;
    out.calendar.dates.assign(series.calendar.dates.begin() + 1, series.calendar.dates.end());
    out.returns.resize(static_cast<Eigen::Index>(series.values.size() - 1));
    for (std::size_t t = 0; t + 1 < series.values.size(); ++t) {
        const double a = series.values[t], b = series.values[t + 1];
        if (!(a > 0.0 && b > 0.0)) {
            throw DataError("index levels must be positive to take log returns");
        }
        out.returns(static_cast<Eigen::Index>(t)) = std::log(b) - std::log(a);
    }
    return out;
}

AlignedReturns gather_aligned(const ReturnPanel& panel, const ExternalReturnSeries& external,
                              const LaggedAlignment& alignment) {
    if (alignment.pairs.empty()) throw DataError("alignment has no pairs");
    AlignedReturns out;
    out.tickers = panel.tickers;
    out.dates.reserve(alignment.size());
    out.stock.resize(panel.returns.rows(), static_cast<Eigen::Index>(alignment.size()));
    out.external_lagged.resize(static_cast<Eigen::Index>(alignment.size()));
    for (std::size_t k = 0; k < alignment.size(); ++k) {
        const AlignedPair& p = alignment.pairs[k];
        if (p.domestic_index >= panel.length() || p.external_index >= external.length()) {
            throw DataError("alignment pair indexes outside the return series");
        }
        if (panel.calendar.dates[p.domestic_index] != p.domestic_date ||
            external.calendar.dates[p.external_index] != p.external_date) {
            throw DataError("alignment was built on different calendars than these series");
        }
        out.dates.push_back(p.domestic_date);
        out.stock.col(static_cast<Eigen::Index>(k)) =
            panel.returns.col(static_cast<Eigen::Index>(p.domestic_index));
        out.external_lagged(static_cast<Eigen::Index>(k)) =
            external.returns(static_cast<Eigen::Index>(p.external_index));
    }
    return out;
}

BetaSeries beta_series(const AlignedReturns& aligned, const std::vector<WindowSpec>& windows) {
    check_windows(windows, aligned.sample_count());
    BetaSeries out;
    out.tickers = aligned.tickers;
    out.window_length = windows.front().length;
    out.window_starts.reserve(windows.size());
    for (const WindowSpec& w : windows) out.window_starts.push_back(w.start);

    const Eigen::MatrixXd samples = aligned.stock.transpose();
    out.betas.resize(aligned.stock.rows(), static_cast<Eigen::Index>(windows.size()));
    for (std::size_t w = 0; w < windows.size(); ++w) {
        const CenteredExternal uc = center_external(aligned.external_lagged, windows[w]);
        for (Eigen::Index i = 0; i < samples.cols(); ++i) {
            const double* x = samples.col(i).data() + windows[w].start;
            out.betas(i, static_cast<Eigen::Index>(w)) =
                external_correlation(x, windows[w].length, uc, false);
        }
    }
    return out;
}

BetaSeries beta_series(const ReturnPanel& panel, const ExternalReturnSeries& external,
                       const LaggedAlignment& alignment, const std::vector<WindowSpec>& windows) {
    return beta_series(gather_aligned(panel, external, alignment), windows);
}

ModifiedReturnPanel modified_returns(const AlignedReturns& aligned, const BetaSeries& betas,
                                     double alpha) {
    if (!(alpha >= 0.0)) throw ConfigError("alpha must be >= 0");
    if (betas.betas.rows() != aligned.stock.rows()) {
        throw DataError("beta series does not match the panel's stocks");
    }
    const std::size_t covered = covered_span(betas, aligned.sample_count());
    if (covered < aligned.sample_count()) {
        warn("modified returns: " + std::to_string(aligned.sample_count() - covered) +
             " trailing sample(s) beyond the window schedule excluded");
    }

    ModifiedReturnPanel out;
    out.tickers = aligned.tickers;
    out.alpha = alpha;
    out.calendar.dates.assign(aligned.dates.begin(),
                              aligned.dates.begin() + static_cast<std::ptrdiff_t>(covered));
    const Eigen::Index c = static_cast<Eigen::Index>(covered);
    out.returns = aligned.stock.leftCols(c);
    if (alpha == 0.0) return out;

    auto [loading, undefined] = cleaned_loadings(betas);
    if (undefined > 0) {
        warn("modified returns: " + std::to_string(undefined) +
             " undefined beta value(s); affected stocks keep their raw returns there");
    }
    const auto segs = governance_segments(betas.window_starts, covered);
    for (std::size_t j = 0; j < segs.size(); ++j) {
        for (std::size_t k = segs[j].first; k < segs[j].second; ++k) {
            const Eigen::Index kk = static_cast<Eigen::Index>(k);
            out.returns.col(kk) =
                aligned.stock.col(kk) -
                (alpha * aligned.external_lagged(kk)) * loading.col(static_cast<Eigen::Index>(j));
        }
    }
    return out;
}

ModifiedReturnPanel modified_returns(const ReturnPanel& panel,
                                     const ExternalReturnSeries& external,
                                     const BetaSeries& betas, double alpha,
                                     const LaggedAlignment& alignment) {
    return modified_returns(gather_aligned(panel, external, alignment), betas, alpha);
}

std::vector<double> mean_cross_correlation(const AlignedReturns& aligned,
                                           const std::vector<WindowSpec>& windows) {
    check_windows(windows, aligned.sample_count());
    const Eigen::MatrixXd samples = aligned.stock.transpose();
    return windowed_mean_correlation(samples, aligned.external_lagged, windows, true);
}

std::vector<double> mean_cross_correlation(const ReturnPanel& panel,
                                           const ExternalReturnSeries& external,
                                           const LaggedAlignment& alignment,
                                           const std::vector<WindowSpec>& windows) {
    return mean_cross_correlation(gather_aligned(panel, external, alignment), windows);
}

std::vector<double> mean_cross_correlation(const ModifiedReturnPanel& modified,
                                           const ExternalReturnSeries& external,
                                           const LaggedAlignment& alignment,
                                           const std::vector<WindowSpec>& windows) {
    check_windows(windows, modified.sample_count());
    if (modified.sample_count() > alignment.size()) {
        throw DataError("modified panel is longer than the alignment it came from");
    }
    Eigen::VectorXd lagged(static_cast<Eigen::Index>(modified.sample_count()));
    for (std::size_t k = 0; k < modified.sample_count(); ++k) {
        const AlignedPair& p = alignment.pairs[k];
        if (p.external_index >= external.length() ||
            p.domestic_date != modified.calendar.dates[k]) {
            throw DataError("alignment does not match the modified panel");
        }
        lagged(static_cast<Eigen::Index>(k)) =
            external.returns(static_cast<Eigen::Index>(p.external_index));
    }
    const Eigen::MatrixXd samples = modified.returns.transpose();
    return windowed_mean_correlation(samples, lagged, windows, true);
}

CalibrationResult calibrate_alpha(const AlignedReturns& aligned, const BetaSeries& betas,
                                  const std::vector<WindowSpec>& windows, double tolerance,
                                  double alpha_max) {
    if (!(tolerance > 0.0)) throw ConfigError("calibration tolerance must be > 0");
    if (!(alpha_max > 0.0)) throw ConfigError("alpha_max must be > 0");
    check_windows(windows, aligned.sample_count());
    if (betas.betas.rows() != aligned.stock.rows()) {
        throw DataError("beta series does not match the panel's stocks");
    }

    const auto [loading, undefined] = cleaned_loadings(betas);
    const std::size_t covered = covered_span(betas, aligned.sample_count());
    const Eigen::MatrixXd samples = aligned.stock.transpose();

    int evaluations = 0;
    const auto objective_raw = [&](double alpha) {
        ++evaluations;
        const Eigen::MatrixXd m = modified_matrix_samples_major(
            samples, aligned.external_lagged, loading, betas.window_starts, alpha, covered);
        return time_average(
            windowed_mean_correlation(m, aligned.external_lagged, windows, true));
    };
    // Past alpha = 0 an all-undefined average can only mean the modification
    // annihilated every stock series exactly; nothing correlated remains.
    const auto objective = [&](double alpha) {
        const double f = objective_raw(alpha);
        return std::isnan(f) ? 0.0 : f;
    };

    double best_alpha = 0.0;
    double best_abs = std::numeric_limits<double>::infinity();
    const auto consider = [&](double alpha, double f) {
        const double a = std::abs(f);
        if (a < best_abs || (a == best_abs && alpha < best_alpha)) {
            best_abs = a;
            best_alpha = alpha;
        }
    };

    const double f0 = objective_raw(0.0);
    if (std::isnan(f0)) {
        throw DataError("calibration objective undefined: no usable window correlations");
    }
    consider(0.0, f0);
    if (std::abs(f0) <= tolerance) return {0.0, std::abs(f0), evaluations, true};

    // Coarse scan for a sign change or a drop through the tolerance.
    constexpr int kGrid = 16;
    double lo = 0.0, flo = f0;
    double hi = 0.0, fhi = f0;
    bool bracketed = false;
    for (int k = 1; k <= kGrid; ++k) {
        const double x = alpha_max * static_cast<double>(k) / kGrid;
        const double fx = objective(x);
        consider(x, fx);
        if ((fx <= 0.0) != (flo <= 0.0) || std::abs(fx) <= tolerance) {
            hi = x;
            fhi = fx;
            bracketed = true;
            break;
        }
        lo = x;
        flo = fx;
    }

    if (bracketed) {
        if ((fhi <= 0.0) == (flo <= 0.0)) {
            // |f| dipped under the tolerance without changing sign: walk the
            // crossing down to the smallest alpha that satisfies it.
            double a = lo, b = hi;
            for (int it = 0; it < 80 && b - a > 1e-12 * alpha_max; ++it) {
                const double mid = 0.5 * (a + b);
                const double fm = objective(mid);
                consider(mid, fm);
                if (std::abs(fm) <= tolerance) {
                    b = mid;
                } else {
                    a = mid;
                }
            }
            const double fb = objective(b);
            consider(b, fb);
            return {b, std::abs(fb), evaluations, std::abs(fb) <= tolerance};
        }
        // Signed bisection toward the zero crossing.
        double a = lo, b = hi, fa = flo;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (a + b);
            const double fm = objective(mid);
            consider(mid, fm);
            if (std::abs(fm) <= tolerance) return {mid, std::abs(fm), evaluations, true};
            if ((fm <= 0.0) == (fa <= 0.0)) {
                a = mid;
                fa = fm;
            } else {
                b = mid;
            }
            if (b - a <= 1e-13 * alpha_max) break;
        }
        return {best_alpha, best_abs, evaluations, best_abs <= tolerance};
    }

    // No sign change anywhere: golden-section on |objective|.
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = 0.0, b = alpha_max;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = std::abs(objective(c));
    double fd = std::abs(objective(d));
    consider(c, fc);
    consider(d, fd);
    for (int it = 0; it < 80 && b - a > 1e-10 * alpha_max; ++it) {
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = std::abs(objective(c));
            consider(c, fc);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = std::abs(objective(d));
            consider(d, fd);
        }
    }
    return {best_alpha, best_abs, evaluations, best_abs <= tolerance};
}

CalibrationResult calibrate_alpha(const AlignedReturns& aligned,
                                  const std::vector<WindowSpec>& windows, double tolerance,
                                  double alpha_max) {
    check_windows(windows, aligned.sample_count());
    return calibrate_alpha(aligned, beta_series(aligned, windows), windows, tolerance,
                           alpha_max);
}

CalibrationResult calibrate_alpha(const ReturnPanel& panel, const ExternalReturnSeries& external,
                                  const LaggedAlignment& alignment,
                                  const std::vector<WindowSpec>& windows, double tolerance,
                                  double alpha_max) {
    return calibrate_alpha(gather_aligned(panel, external, alignment), windows, tolerance,
                           alpha_max);
}

}  // namespace grouptree
