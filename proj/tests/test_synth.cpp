#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "grouptree/corrnet.hpp"
#include "grouptree/errors.hpp"
#include "grouptree/grouping.hpp"
#include "grouptree/returns.hpp"
#include "grouptree/synth.hpp"

using namespace grouptree;

namespace {

SynthConfig base_config() {
    SynthConfig cfg;
    cfg.n_sectors = 3;
    cfg.stocks_per_sector = 4;
    cfg.days = 300;
    cfg.sector_loading = 0.8;
    cfg.noise_sigma = 1.0;
    cfg.external_sigma = 1.0;
    cfg.seed = 7;
    return cfg;
}

/// Mean within-sector and cross-sector correlation over the full span.
std::pair<double, double> sector_correlation_means(const SynthMarket& market,
                                                   std::size_t stocks_per_sector) {
    const ReturnPanel returns = log_returns(market.panel);
    const CorrelationMatrix corr =
        correlation_matrix(returns, {0, returns.length(), 1});
    double within = 0.0, cross = 0.0;
    std::size_t n_within = 0, n_cross = 0;
    const std::size_t n = market.panel.stock_count();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double r = corr.rho(static_cast<Eigen::Index>(i),
                                      static_cast<Eigen::Index>(j));
            if (i / stocks_per_sector == j / stocks_per_sector) {
                within += r;
                ++n_within;
            } else {
                cross += r;
                ++n_cross;
            }
        }
    }
    return {within / static_cast<double>(n_within), cross / static_cast<double>(n_cross)};
}

}  // namespace

TEST_CASE("generate_market: a fixed seed is bit-reproducible") {
    const SynthConfig cfg = base_config();
    const SynthMarket a = generate_market(cfg);
    const SynthMarket b = generate_market(cfg);
    CHECK(a.panel.prices == b.panel.prices);
    CHECK(a.panel.tickers == b.panel.tickers);
    CHECK(a.panel.calendar.dates == b.panel.calendar.dates);
    CHECK(a.external.returns == b.external.returns);
    CHECK(a.external_index.values == b.external_index.values);

    SynthConfig other = cfg;
    other.seed = 8;
    CHECK(generate_market(other).panel.prices != a.panel.prices);
}

TEST_CASE("generate_market: shapes, positivity, categories") {
    const SynthConfig cfg = base_config();
    const SynthMarket market = generate_market(cfg);
    CHECK(market.panel.stock_count() == 12);
    CHECK(market.panel.length() == 300);
    CHECK((market.panel.prices.array() > 0.0).all());
    CHECK(market.panel.prices.col(0).minCoeff() == 100.0);
    CHECK(market.panel.prices.col(0).maxCoeff() == 100.0);
    for (const std::string& ticker : market.panel.tickers) {
        CHECK_NOTHROW(market.categories.category_of(ticker));
    }
    // 4 stocks per category label.
    const auto breakdownable = market.categories.assignments;
    std::map<std::string, int> counts;
    for (const auto& [ticker, cat] : breakdownable) ++counts[cat];
    REQUIRE(counts.size() == 3);
    for (const auto& [cat, n] : counts) CHECK(n == 4);
}

TEST_CASE("generate_market: external calendar sits one weekday early") {
    const SynthConfig cfg = base_config();
    const SynthMarket market = generate_market(cfg);
    CHECK(market.external.length() == cfg.days - 1);
    CHECK(market.external_index.values.size() == cfg.days);

    const ReturnPanel returns = log_returns(market.panel);
    const LaggedAlignment alignment =
        align_lagged(returns.calendar, market.external.calendar);
    // Every domestic return pairs with exactly one external return.
    CHECK(alignment.size() == cfg.days - 1);
    const AlignedReturns aligned = gather_aligned(returns, market.external, alignment);
    CHECK(aligned.external_lagged == market.external.returns);
}

TEST_CASE("generate_market: index levels reproduce the return series") {
    const SynthMarket market = generate_market(base_config());
    const ExternalReturnSeries rederived = log_returns(market.external_index);
    REQUIRE(rederived.length() == market.external.length());
    for (std::size_t t = 0; t < rederived.length(); ++t) {
        CHECK(rederived.returns(static_cast<Eigen::Index>(t)) ==
              doctest::Approx(market.external.returns(static_cast<Eigen::Index>(t)))
                  .epsilon(1e-9));
    }
}

TEST_CASE("generate_market: independent stocks show no mean correlation") {
    SynthConfig cfg = base_config();
    cfg.n_sectors = 4;
    cfg.stocks_per_sector = 5;
    cfg.days = 500;
    cfg.sector_loading = 0.0;
    cfg.global_loading = 0.0;
    cfg.external_loading_schedule.clear();
    const SynthMarket market = generate_market(cfg);
    const auto [within, cross] = sector_correlation_means(market, cfg.stocks_per_sector);
    const double bound = 3.0 / std::sqrt(static_cast<double>(cfg.days));
    CHECK(std::abs(within) < bound);
    CHECK(std::abs(cross) < bound);
}

TEST_CASE("generate_market: sector structure strengthens within-sector correlation") {
    SynthConfig cfg = base_config();
    cfg.days = 600;
    const SynthMarket market = generate_market(cfg);
    const auto [within, cross] = sector_correlation_means(market, cfg.stocks_per_sector);
    // Expected within-sector correlation: 0.64 / 1.64.
    const double expected = 0.64 / 1.64;
    CHECK(within > cross + 3.0 / std::sqrt(static_cast<double>(cfg.days)));
    CHECK(within == doctest::Approx(expected).epsilon(0.25));
    CHECK(std::abs(cross) < 3.0 / std::sqrt(static_cast<double>(cfg.days)));
}

TEST_CASE("generate_market: vanishing noise pins sector correlations") {
    SynthConfig cfg = base_config();
    cfg.noise_sigma = 1e-6;
    cfg.days = 200;
    const SynthMarket market = generate_market(cfg);
    const auto [within, cross] = sector_correlation_means(market, cfg.stocks_per_sector);
    CHECK(within > 0.999);
    CHECK(std::abs(cross) < 0.2);
}

TEST_CASE("generate_market: the lagged external factor is recoverable") {
    SynthConfig cfg = base_config();
    cfg.sector_loading = 0.0;
    cfg.noise_sigma = 0.05;
    cfg.external_loading_schedule = {{0, 2.0}};
    cfg.days = 400;
    const SynthMarket market = generate_market(cfg);
    const ReturnPanel returns = log_returns(market.panel);
    const LaggedAlignment alignment =
        align_lagged(returns.calendar, market.external.calendar);
    const AlignedReturns aligned = gather_aligned(returns, market.external, alignment);
    const BetaSeries betas =
        beta_series(aligned, rolling_windows(aligned.sample_count(), 200, 100));
    for (Eigen::Index i = 0; i < betas.betas.rows(); ++i) {
        for (Eigen::Index w = 0; w < betas.betas.cols(); ++w) {
            CHECK(betas.betas(i, w) > 0.99);
        }
    }
}

TEST_CASE("generate_market: loading schedule switches at the breakpoint") {
    SynthConfig cfg = base_config();
    cfg.external_loading_schedule = {{100, 0.5}, {200, 1.5}};
    CHECK(cfg.external_loading_at(0) == 0.0);
    CHECK(cfg.external_loading_at(99) == 0.0);
    CHECK(cfg.external_loading_at(100) == 0.5);
    CHECK(cfg.external_loading_at(199) == 0.5);
    CHECK(cfg.external_loading_at(200) == 1.5);
    CHECK(cfg.external_loading_at(5000) == 1.5);
}

TEST_CASE("generate_market: whole pipeline consumes the output unchanged") {
    SynthConfig cfg = base_config();
    cfg.days = 260;
    const SynthMarket market = generate_market(cfg);
    const ReturnPanel returns = log_returns(market.panel);
    const LaggedAlignment alignment =
        align_lagged(returns.calendar, market.external.calendar);
    const AlignedReturns aligned = gather_aligned(returns, market.external, alignment);
    const auto windows = rolling_windows(aligned.sample_count(), 250, 20);
    ReturnPanel aligned_panel;
    aligned_panel.tickers = aligned.tickers;
    aligned_panel.calendar.dates = aligned.dates;
    aligned_panel.returns = aligned.stock;
    const SpanningTree tree =
        asset_tree(correlation_matrix(aligned_panel, windows.front()));
    const double g = grouping_coefficient(tree, market.categories);
    CHECK(g >= 0.0);
    CHECK(g <= 1.0);
}

TEST_CASE("generate_market: config validation") {
    SynthConfig cfg = base_config();
    cfg.days = 1;
    CHECK_THROWS_AS(generate_market(cfg), ConfigError);
    cfg = base_config();
    cfg.noise_sigma = 0.0;
    CHECK_THROWS_AS(generate_market(cfg), ConfigError);
    cfg = base_config();
    cfg.external_loading_schedule = {{10, 0.5}, {10, 0.7}};
    CHECK_THROWS_AS(generate_market(cfg), ConfigError);
    cfg = base_config();
    cfg.external_loading_schedule = {{0, -0.5}};
    CHECK_THROWS_AS(generate_market(cfg), ConfigError);
    cfg = base_config();
    cfg.start_date = "19900108";
    CHECK_THROWS_AS(generate_market(cfg), ConfigError);
}
