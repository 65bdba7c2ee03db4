#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "grouptree/corrnet.hpp"
#include "grouptree/errors.hpp"
#include "grouptree/returns.hpp"
#include "test_support.hpp"

using namespace grouptree;
using test_support::make_calendar;

namespace {

AlignedReturns make_aligned(const std::vector<std::vector<double>>& stock_rows,
                            const std::vector<double>& external_lagged) {
    REQUIRE(stock_rows.front().size() == external_lagged.size());
    AlignedReturns out;
    const auto cal = make_calendar(external_lagged.size());
    out.dates = cal.dates;
    out.stock.resize(static_cast<Eigen::Index>(stock_rows.size()),
                     static_cast<Eigen::Index>(external_lagged.size()));
    for (std::size_t i = 0; i < stock_rows.size(); ++i) {
        out.tickers.push_back("T" + std::to_string(i));
        for (std::size_t k = 0; k < stock_rows[i].size(); ++k) {
            out.stock(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
                stock_rows[i][k];
        }
    }
    out.external_lagged =
        Eigen::Map<const Eigen::VectorXd>(external_lagged.data(),
                                          static_cast<Eigen::Index>(external_lagged.size()));
    return out;
}

AlignedReturns scaled_external_panel(std::size_t n_stocks, std::size_t samples, double scale,
                                     std::uint32_t seed, double sigma = 0.01) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> noise(0.0, sigma);
    std::vector<double> u(samples);
    for (auto& v : u) v = noise(rng);
    std::vector<std::vector<double>> rows(n_stocks, std::vector<double>(samples));
    for (auto& row : rows) {
        for (std::size_t k = 0; k < samples; ++k) row[k] = scale * u[k];
    }
    return make_aligned(rows, u);
}

/// The signed calibration objective evaluated through the public operations
/// only (modified returns -> per-window mean cross-correlation -> average).
/// An all-undefined average means the modification annihilated every series:
/// nothing correlated remains, so the objective reads 0.
double objective_via_public_ops(const AlignedReturns& aligned, const BetaSeries& betas,
                                const std::vector<WindowSpec>& windows, double alpha) {
    const ModifiedReturnPanel m = modified_returns(aligned, betas, alpha);
    AlignedReturns view;
    view.tickers = m.tickers;
    view.dates = m.calendar.dates;
    view.stock = m.returns;
    view.external_lagged =
        aligned.external_lagged.head(static_cast<Eigen::Index>(m.sample_count()));
    double sum = 0.0;
    std::size_t n = 0;
    for (double v : mean_cross_correlation(view, windows)) {
        if (!std::isnan(v)) {
            sum += v;
            ++n;
        }
    }
    return n ? sum / static_cast<double>(n) : 0.0;
}

}  // namespace

TEST_CASE("log_returns: panel examples") {
    PricePanel panel;
    panel.tickers = {"AAA", "BBB", "CCC"};
    panel.calendar = make_calendar(2);
    panel.prices.resize(3, 2);
    panel.prices << 100, 100, 100, 200, 100, 90;
    const ReturnPanel r = log_returns(panel);
    CHECK(r.calendar.dates == std::vector<std::string>{panel.calendar.dates[1]});
    CHECK(r.returns(0, 0) == 0.0);
    CHECK(r.returns(1, 0) == doctest::Approx(0.693147180559945).epsilon(1e-12));
    // Independent route: single log of the ratio.
    CHECK(r.returns(2, 0) == doctest::Approx(std::log(90.0 / 100.0)).epsilon(1e-12));
    CHECK(r.returns(2, 0) == doctest::Approx(-0.105360515657826).epsilon(1e-12));
}

TEST_CASE("log_returns: cumulative sum recovers log prices") {
    std::mt19937 rng(41);
    std::normal_distribution<double> step(0.0, 0.03);
    PricePanel panel;
    panel.tickers = {"AAA", "BBB"};
    panel.calendar = make_calendar(400);
    panel.prices.resize(2, 400);
    for (int i = 0; i < 2; ++i) {
        panel.prices(i, 0) = 50.0 + 100.0 * i;
        for (int t = 1; t < 400; ++t) {
            panel.prices(i, t) = panel.prices(i, t - 1) * std::exp(step(rng));
        }
    }
    const ReturnPanel r = log_returns(panel);
    for (int i = 0; i < 2; ++i) {
        double acc = std::log(panel.prices(i, 0));
        for (int t = 0; t < 399; ++t) {
            acc += r.returns(i, t);
            const double expected = std::log(panel.prices(i, t + 1));
            CHECK(std::abs(acc - expected) <= 1e-9 * std::abs(expected));
        }
    }
}

TEST_CASE("log_returns: index series needs positive levels") {
    IndexSeries series;
    series.calendar = make_calendar(3);
    series.values = {100.0, 101.0, 102.5};
    const ExternalReturnSeries r = log_returns(series);
    CHECK(r.length() == 2);
    CHECK(r.calendar.dates[0] == series.calendar.dates[1]);
    CHECK(r.returns(0) == doctest::Approx(std::log(101.0 / 100.0)).epsilon(1e-12));
}

TEST_CASE("gather_aligned wires the lag-1 pairing") {
    PricePanel panel;
    panel.tickers = {"AAA", "BBB"};
    panel.calendar = make_calendar(4, "2001-01-08");
    panel.prices.resize(2, 4);
    panel.prices << 100, 110, 121, 133.1, 50, 55, 60.5, 66.55;
    const ReturnPanel rets = log_returns(panel);

    IndexSeries idx;
    idx.calendar = make_calendar(4, "2001-01-05");  // one weekday earlier
    idx.values = {10.0, 20.0, 40.0, 80.0};
    const ExternalReturnSeries ext = log_returns(idx);

    const LaggedAlignment alignment = align_lagged(rets.calendar, ext.calendar);
    REQUIRE(alignment.size() == 3);
    const AlignedReturns aligned = gather_aligned(rets, ext, alignment);
    CHECK(aligned.sample_count() == 3);
    // Every aligned external return is ln 2; stock 0's returns are ln 1.1.
    for (int k = 0; k < 3; ++k) {
        CHECK(aligned.external_lagged(k) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
        CHECK(aligned.stock(0, k) == doctest::Approx(std::log(1.1)).epsilon(1e-12));
    }
    CHECK(aligned.dates == std::vector<std::string>(rets.calendar.dates.begin(),
                                                    rets.calendar.dates.end()));

    SUBCASE("an alignment from other calendars is rejected") {
        const LaggedAlignment other = align_lagged(panel.calendar, idx.calendar);
        CHECK_THROWS_AS(gather_aligned(rets, ext, other), DataError);
    }
}

TEST_CASE("beta_series: known values") {
    SUBCASE("stock equals the lagged external series") {
        const AlignedReturns aligned = scaled_external_panel(2, 60, 1.0, 101);
        const auto windows = rolling_windows(60, 20, 20);
        const BetaSeries betas = beta_series(aligned, windows);
        REQUIRE(betas.window_count() == 3);
        for (Eigen::Index i = 0; i < 2; ++i) {
            for (Eigen::Index w = 0; w < 3; ++w) {
                CHECK(betas.betas(i, w) == doctest::Approx(1.0).epsilon(1e-12));
                CHECK(std::abs(betas.betas(i, w)) <= 1.0);
            }
        }
    }
    SUBCASE("stock equals the negated series") {
        const AlignedReturns aligned = scaled_external_panel(1, 40, -1.0, 102);
        const auto windows = rolling_windows(40, 40, 40);
        const BetaSeries betas = beta_series(aligned, windows);
        CHECK(betas.betas(0, 0) == doctest::Approx(-1.0).epsilon(1e-12));
    }
    SUBCASE("three-sample window") {
        const AlignedReturns aligned =
            make_aligned({{0.01, 0.02, 0.03}}, {0.03, 0.01, 0.02});
        const BetaSeries betas = beta_series(aligned, {{0, 3, 1}});
        CHECK(betas.betas(0, 0) == -0.5);
    }
    SUBCASE("zero-variance stock yields an undefined beta") {
        const AlignedReturns aligned =
            make_aligned({{0.01, 0.01, 0.01}}, {0.03, 0.01, 0.02});
        const BetaSeries betas = beta_series(aligned, {{0, 3, 1}});
        CHECK(std::isnan(betas.betas(0, 0)));
    }
}

TEST_CASE("beta_series: betas stay within [-1, 1] on random data") {
    std::mt19937 rng(55);
    std::normal_distribution<double> noise(0.0, 0.015);
    std::vector<std::vector<double>> rows(6, std::vector<double>(120));
    std::vector<double> u(120);
    for (auto& v : u) v = noise(rng);
    for (auto& row : rows) {
        for (std::size_t k = 0; k < row.size(); ++k) row[k] = 0.4 * u[k] + noise(rng);
    }
    const AlignedReturns aligned = make_aligned(rows, u);
    const BetaSeries betas = beta_series(aligned, rolling_windows(120, 30, 10));
    for (Eigen::Index i = 0; i < betas.betas.rows(); ++i) {
        for (Eigen::Index w = 0; w < betas.betas.cols(); ++w) {
            CHECK(std::abs(betas.betas(i, w)) <= 1.0);
        }
    }
}

TEST_CASE("modified_returns") {
    SUBCASE("alpha 0 reproduces the stock returns bit for bit") {
        const AlignedReturns aligned = scaled_external_panel(3, 50, 1.7, 103);
        const auto windows = rolling_windows(50, 20, 10);
        const BetaSeries betas = beta_series(aligned, windows);
        const ModifiedReturnPanel m = modified_returns(aligned, betas, 0.0);
        CHECK(m.sample_count() == 50);  // last window [30, 50) covers the span
        CHECK(m.returns == aligned.stock.leftCols(50));
    }
    SUBCASE("single-value arithmetic") {
        // S = 0.01, beta = 0.5, U = 0.02, alpha = 2.25 -> M = -0.0125
        const AlignedReturns aligned = make_aligned({{0.01, 0.01}}, {0.02, 0.02});
        BetaSeries betas;
        betas.tickers = aligned.tickers;
        betas.window_starts = {0};
        betas.window_length = 2;
        betas.betas.resize(1, 1);
        betas.betas(0, 0) = 0.5;
        const ModifiedReturnPanel m = modified_returns(aligned, betas, 2.25);
        CHECK(m.alpha == 2.25);
        CHECK(m.returns(0, 0) == doctest::Approx(-0.0125).epsilon(1e-14));
    }
    SUBCASE("undefined beta falls back to the unmodified return") {
        const AlignedReturns aligned =
            make_aligned({{0.01, 0.01}, {0.01, 0.03}}, {0.02, 0.05});
        BetaSeries betas;
        betas.tickers = aligned.tickers;
        betas.window_starts = {0};
        betas.window_length = 2;
        betas.betas.resize(2, 1);
        betas.betas(0, 0) = std::numeric_limits<double>::quiet_NaN();
        betas.betas(1, 0) = 1.0;
        const ModifiedReturnPanel m = modified_returns(aligned, betas, 2.0);
        CHECK(m.returns(0, 0) == aligned.stock(0, 0));
        CHECK(m.returns(0, 1) == aligned.stock(0, 1));
        CHECK(m.returns(1, 0) != aligned.stock(1, 0));
    }
    SUBCASE("beta in force is piecewise-constant between window steps") {
        std::vector<double> u(18);
        std::vector<double> s(18);
        for (std::size_t k = 0; k < u.size(); ++k) {
            u[k] = 0.01 * static_cast<double>(k + 1);
            s[k] = 0.001 * static_cast<double>((k * 7) % 5);
        }
        const AlignedReturns aligned = make_aligned({s}, u);
        BetaSeries betas;
        betas.tickers = aligned.tickers;
        betas.window_starts = {0, 5};
        betas.window_length = 10;
        betas.betas.resize(1, 2);
        betas.betas(0, 0) = 0.5;
        betas.betas(0, 1) = -0.25;
        const double alpha = 1.0;
        const ModifiedReturnPanel m = modified_returns(aligned, betas, alpha);
        REQUIRE(m.sample_count() == 15);  // covered = 5 + 10; 3 samples dropped
        for (std::size_t k = 0; k < 15; ++k) {
            const double beta = k < 5 ? 0.5 : -0.25;
            CHECK(m.returns(0, static_cast<Eigen::Index>(k)) ==
                  s[k] - (alpha * u[k]) * beta);
        }
    }
    SUBCASE("samples before the first window stay unmodified") {
        const AlignedReturns aligned = scaled_external_panel(1, 12, 1.0, 109);
        const BetaSeries betas = beta_series(aligned, {{4, 8, 1}});
        const ModifiedReturnPanel m = modified_returns(aligned, betas, 2.0);
        REQUIRE(m.sample_count() == 12);
        for (int k = 0; k < 4; ++k) CHECK(m.returns(0, k) == aligned.stock(0, k));
        for (int k = 4; k < 12; ++k) CHECK(m.returns(0, k) != aligned.stock(0, k));
    }
    SUBCASE("negative alpha is rejected") {
        const AlignedReturns aligned = scaled_external_panel(1, 10, 1.0, 104);
        const BetaSeries betas = beta_series(aligned, {{0, 10, 1}});
        CHECK_THROWS_AS(modified_returns(aligned, betas, -0.5), ConfigError);
    }
}

TEST_CASE("mean_cross_correlation") {
    SUBCASE("stocks identical to the lagged external series") {
        const AlignedReturns aligned = scaled_external_panel(4, 60, 1.0, 105);
        const auto series = mean_cross_correlation(aligned, rolling_windows(60, 20, 20));
        REQUIRE(series.size() == 3);
        for (double v : series) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("opposite correlations cancel to exactly zero") {
        std::mt19937 rng(61);
        std::normal_distribution<double> noise(0.0, 0.01);
        std::vector<double> u(30), x(30), nx(30);
        for (std::size_t k = 0; k < 30; ++k) {
            u[k] = noise(rng);
            x[k] = 0.4 * u[k] + noise(rng);
            nx[k] = -x[k];
        }
        const AlignedReturns aligned = make_aligned({x, nx}, u);
        const auto series = mean_cross_correlation(aligned, {{0, 30, 1}});
        CHECK(series[0] == 0.0);
    }
    SUBCASE("a residual collapsed to numerical dust counts as zero") {
        std::mt19937 rng(62);
        std::normal_distribution<double> noise(0.0, 0.01);
        std::vector<double> u(40), tiny(40), small(40);
        for (std::size_t k = 0; k < 40; ++k) {
            u[k] = noise(rng);
            tiny[k] = 1e-9 * u[k];   // below the residual floor
            small[k] = 1e-3 * u[k];  // an ordinary rescaling
        }
        const AlignedReturns a = make_aligned({tiny}, u);
        CHECK(mean_cross_correlation(a, {{0, 40, 1}})[0] == 0.0);
        const AlignedReturns b = make_aligned({small}, u);
        CHECK(mean_cross_correlation(b, {{0, 40, 1}})[0] ==
              doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("windows with no defined correlation yield NaN") {
        const AlignedReturns aligned =
            make_aligned({{0.01, 0.01, 0.01}}, {0.03, 0.01, 0.02});
        CHECK(std::isnan(mean_cross_correlation(aligned, {{0, 3, 1}})[0]));
        const AlignedReturns flat_external =
            make_aligned({{0.03, 0.01, 0.02}}, {0.01, 0.01, 0.01});
        CHECK(std::isnan(mean_cross_correlation(flat_external, {{0, 3, 1}})[0]));
    }
    SUBCASE("values stay within [-1, 1] and undefined stocks are excluded") {
        std::mt19937 rng(63);
        std::normal_distribution<double> noise(0.0, 0.02);
        std::vector<double> u(50), x(50), flat(50, 0.0);
        for (std::size_t k = 0; k < 50; ++k) {
            u[k] = noise(rng);
            x[k] = 0.8 * u[k] + 0.1 * noise(rng);
        }
        const AlignedReturns aligned = make_aligned({x, flat}, u);
        const auto series = mean_cross_correlation(aligned, rolling_windows(50, 25, 25));
        for (double v : series) {
            CHECK(std::abs(v) <= 1.0);
            // The flat stock is excluded, so the mean is stock x's own value.
            CHECK(std::abs(v) > 0.9);
        }
    }
}

TEST_CASE("mean_cross_correlation agrees between raw and modified panel routes") {
    // The ModifiedReturnPanel overload must read the same lagged values.
    PricePanel panel;
    panel.tickers = {"AAA", "BBB"};
    panel.calendar = make_calendar(40, "2001-01-08");
    std::mt19937 rng(64);
    std::normal_distribution<double> step(0.0, 0.02);
    panel.prices.resize(2, 40);
    for (int i = 0; i < 2; ++i) {
        panel.prices(i, 0) = 100.0;
        for (int t = 1; t < 40; ++t) {
            panel.prices(i, t) = panel.prices(i, t - 1) * std::exp(step(rng));
        }
    }
    IndexSeries idx;
    idx.calendar = make_calendar(40, "2001-01-05");
    idx.values.resize(40);
    idx.values[0] = 100.0;
    for (int t = 1; t < 40; ++t) idx.values[static_cast<std::size_t>(t)] =
        idx.values[static_cast<std::size_t>(t - 1)] * std::exp(step(rng));

    const ReturnPanel rets = log_returns(panel);
    const ExternalReturnSeries ext = log_returns(idx);
    const LaggedAlignment alignment = align_lagged(rets.calendar, ext.calendar);
    const auto windows = rolling_windows(alignment.size(), 20, 10);

    const BetaSeries betas = beta_series(rets, ext, alignment, windows);
    const ModifiedReturnPanel m = modified_returns(rets, ext, betas, 0.0, alignment);
    const auto raw = mean_cross_correlation(rets, ext, alignment, windows);
    const auto via_modified = mean_cross_correlation(m, ext, alignment, windows);
    REQUIRE(raw.size() == via_modified.size());
    for (std::size_t w = 0; w < raw.size(); ++w) CHECK(raw[w] == via_modified[w]);
}

TEST_CASE("calibrate_alpha: noise-free panel has the analytic root") {
    // S_i(t) = 2 * U(t-1): removing the external component exactly needs
    // alpha = sigma_S / sigma_U = 2.
    const AlignedReturns aligned = scaled_external_panel(5, 300, 2.0, 106);
    const auto windows = rolling_windows(300, 250, 20);
    const CalibrationResult result = calibrate_alpha(aligned, windows, 1e-6);
    CHECK(result.tolerance_met);
    CHECK(result.alpha == doctest::Approx(2.0).epsilon(1e-3));
    CHECK(result.objective <= 1e-6);

    const BetaSeries betas = beta_series(aligned, windows);

    SUBCASE("a brute-force scan at 1e-4 steps finds the same root") {
        double best_alpha = -1.0;
        double best = std::numeric_limits<double>::infinity();
        for (int k = 19000; k <= 21000; ++k) {
            const double alpha = static_cast<double>(k) * 1e-4;
            const double f = std::abs(objective_via_public_ops(aligned, betas, windows, alpha));
            if (f < best) {
                best = f;
                best_alpha = alpha;
            }
        }
        CHECK(best_alpha == doctest::Approx(2.0).epsilon(1e-12));
        CHECK(best <= 1e-6);
        CHECK(std::abs(best_alpha - result.alpha) <= 1e-3);
    }
    SUBCASE("the signed objective decreases strictly through the root") {
        const double before = objective_via_public_ops(aligned, betas, windows, 1.5);
        const double at = objective_via_public_ops(aligned, betas, windows, 2.0);
        const double after = objective_via_public_ops(aligned, betas, windows, 2.5);
        CHECK(before > at);
        CHECK(at > after);
        CHECK(at == 0.0);
    }
    SUBCASE("coarse sweep shows the sign step around the root") {
        for (double alpha = 0.0; alpha < 1.95; alpha += 0.25) {
            CHECK(objective_via_public_ops(aligned, betas, windows, alpha) > 0.5);
        }
        for (double alpha = 2.05; alpha <= 10.0; alpha += 0.25) {
            CHECK(objective_via_public_ops(aligned, betas, windows, alpha) < -0.5);
        }
    }
}

TEST_CASE("calibrate_alpha: noisy panel with a real root meets the tolerance") {
    // S_i = c * U(t-1) + noise: the objective crosses zero smoothly and the
    // crossing sits near c / beta with beta = corr(S, U).
    std::mt19937 rng(73);
    std::normal_distribution<double> market(0.0, 0.01);
    std::normal_distribution<double> idio(0.0, 0.005);
    const std::size_t samples = 600;
    const double c = 1.5;
    std::vector<double> u(samples);
    for (auto& v : u) v = market(rng);
    std::vector<std::vector<double>> rows(6, std::vector<double>(samples));
    for (auto& row : rows) {
        for (std::size_t k = 0; k < samples; ++k) row[k] = c * u[k] + idio(rng);
    }
    const AlignedReturns aligned = make_aligned(rows, u);
    const auto windows = rolling_windows(samples, 200, 50);
    const CalibrationResult result = calibrate_alpha(aligned, windows, 1e-4);
    CHECK(result.tolerance_met);
    CHECK(result.objective <= 1e-4);
    // beta ~ c*sigma_u / sqrt(c^2 sigma_u^2 + sigma_eps^2) ~ 0.9487, so the
    // root sits near c / beta ~ 1.58; sampling noise moves it a little.
    CHECK(result.alpha > 1.3);
    CHECK(result.alpha < 1.9);

    // The objective recomputed through the public operations agrees.
    const BetaSeries betas = beta_series(aligned, windows);
    const double at_root = objective_via_public_ops(aligned, betas, windows, result.alpha);
    CHECK(std::abs(at_root) <= 1e-4);
}

TEST_CASE("calibrate_alpha: supplied betas are the ones optimized against") {
    // Exposure ramps up halfway, so per-window and full-sample betas differ;
    // the calibrated alpha must satisfy the tolerance for the exposures the
    // caller passes in, not for recomputed ones.
    std::mt19937 rng(79);
    std::normal_distribution<double> market(0.0, 0.01);
    std::normal_distribution<double> idio(0.0, 0.004);
    const std::size_t samples = 400;
    std::vector<double> u(samples);
    for (auto& v : u) v = market(rng);
    std::vector<std::vector<double>> rows(4, std::vector<double>(samples));
    for (auto& row : rows) {
        for (std::size_t k = 0; k < samples; ++k) {
            const double loading = k < 200 ? 0.5 : 2.0;
            row[k] = loading * u[k] + idio(rng);
        }
    }
    const AlignedReturns aligned = make_aligned(rows, u);
    const auto windows = rolling_windows(samples, 100, 100);

    BetaSeries full = beta_series(aligned, {{0, samples, 1}});
    BetaSeries replicated;
    replicated.tickers = full.tickers;
    replicated.window_length = 100;
    for (const WindowSpec& w : windows) replicated.window_starts.push_back(w.start);
    replicated.betas.resize(full.betas.rows(), static_cast<Eigen::Index>(windows.size()));
    for (Eigen::Index w = 0; w < replicated.betas.cols(); ++w) {
        replicated.betas.col(w) = full.betas.col(0);
    }

    const CalibrationResult via_full = calibrate_alpha(aligned, replicated, windows, 1e-4);
    CHECK(via_full.tolerance_met);
    CHECK(std::abs(objective_via_public_ops(aligned, replicated, windows, via_full.alpha)) <=
          1e-4);

    const CalibrationResult via_window = calibrate_alpha(aligned, windows, 1e-4);
    CHECK(via_window.tolerance_met);
    CHECK(via_full.alpha != via_window.alpha);
}

TEST_CASE("calibrate_alpha: uncorrelated panel returns alpha 0") {
    std::mt19937 rng(71);
    std::normal_distribution<double> noise(0.0, 0.01);
    std::vector<double> u(200);
    for (auto& v : u) v = noise(rng);
    std::vector<std::vector<double>> rows(4, std::vector<double>(200));
    for (auto& row : rows) {
        for (auto& v : row) v = noise(rng);
    }
    const AlignedReturns aligned = make_aligned(rows, u);
    const CalibrationResult result =
        calibrate_alpha(aligned, rolling_windows(200, 100, 50), 0.05);
    CHECK(result.tolerance_met);
    CHECK(result.alpha == 0.0);
    CHECK(result.objective <= 0.05);
}

TEST_CASE("calibrate_alpha: unreachable root is flagged, not fatal") {
    // The root sits at alpha = 2, far outside [0, 0.5].
    const AlignedReturns aligned = scaled_external_panel(3, 120, 2.0, 107);
    const auto windows = rolling_windows(120, 60, 30);
    const CalibrationResult result = calibrate_alpha(aligned, windows, 1e-6, 0.5);
    CHECK_FALSE(result.tolerance_met);
    CHECK(result.objective > 1e-6);
    CHECK(result.alpha <= 0.5);
}

TEST_CASE("calibrate_alpha: parameter validation") {
    const AlignedReturns aligned = scaled_external_panel(2, 40, 1.0, 108);
    const auto windows = rolling_windows(40, 20, 20);
    CHECK_THROWS_AS(calibrate_alpha(aligned, windows, 0.0), ConfigError);
    CHECK_THROWS_AS(calibrate_alpha(aligned, windows, 1e-3, 0.0), ConfigError);
    CHECK_THROWS_AS(calibrate_alpha(aligned, {}, 1e-3), DataError);
}

TEST_CASE("calibrate_alpha: undefined objective everywhere is fatal") {
    // Constant stocks: every correlation is undefined in every window.
    const AlignedReturns aligned =
        make_aligned({{0.01, 0.01, 0.01, 0.01}}, {0.02, 0.03, 0.01, 0.04});
    CHECK_THROWS_AS(calibrate_alpha(aligned, {{0, 4, 1}}, 1e-3), DataError);
}
