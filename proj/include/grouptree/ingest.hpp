#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace grouptree {

/// Ordered list of trading days, ISO-8601, strictly increasing.
struct TradingCalendar {
    std::vector<std::string> dates;

    std::size_t size() const noexcept { return dates.size(); }
    std::optional<std::size_t> find(std::string_view date) const;

    /// Throws DataError unless dates are valid ISO, nonempty and strictly increasing.
    void validate() const;
};

/// Daily closing prices for N companies over a shared calendar.
/// prices is N x L (stock-major rows), all entries finite and > 0.
struct PricePanel {
    std::vector<std::string> tickers;
    TradingCalendar calendar;
    Eigen::MatrixXd prices;

    std::size_t stock_count() const noexcept { return tickers.size(); }
    std::size_t length() const noexcept { return calendar.size(); }
    void validate() const;
};

/// Company -> industry category labels.
struct CategoryMap {
    std::map<std::string, std::string> assignments;

    /// Throws DataError naming the ticker when no category is assigned.
    const std::string& category_of(const std::string& ticker) const;
};

/// A single level series on a trading calendar (market index, custom index).
struct IndexSeries {
    TradingCalendar calendar;
    std::vector<double> values;

    void validate() const;
};

/// One lag-1 pairing: the external market day strictly precedes the
/// domestic day it is matched with.
struct AlignedPair {
    std::string external_date;
    std::string domestic_date;
    std::size_t external_index = 0;
    std::size_t domestic_index = 0;
};

/// Result of align_lagged: pairs ordered by domestic date, strictly
/// increasing in both coordinates, no index reused on either side.
struct LaggedAlignment {
    std::vector<AlignedPair> pairs;

    std::size_t size() const noexcept { return pairs.size(); }
};

/// Column-name mapping for the long-form price CSV.
struct CsvSchema {
    std::string date_column = "date";
    std::string ticker_column = "ticker";
    std::string close_column = "close";
};

/// Missing-data policy: 0 keeps only tickers quoted on every date,
/// n > 0 forward-fills interior gaps of at most n trading days.
struct GapPolicy {
    std::size_t forward_fill_limit = 0;
};

/// Loads a `date,ticker,close` CSV into a complete panel. Tickers that
/// cannot be completed under the gap policy are excluded with a warning.
/// Ticker order is lexicographic; dates are sorted ascending.
PricePanel load_panel(const std::string& path, const CsvSchema& schema = {},
                      const GapPolicy& policy = {});

/// Loads a `ticker,category` CSV.
CategoryMap load_categories(const std::string& path);

/// Loads a `date,close` CSV (external market index).
IndexSeries load_index_series(const std::string& path);

enum class IndexMode {
    raw,         ///< equal-weight mean of raw closing prices
    normalized,  ///< each series rescaled to 1.0 on its first day before averaging
};

/// Equal-weight average index over all companies in the panel.
IndexSeries build_custom_index(const PricePanel& panel, IndexMode mode = IndexMode::raw);

/// Pairs each domestic day, left to right, with the latest external day
/// strictly before it. A domestic day whose only candidates would break the
/// strictly-increasing order of external dates is dropped, keeping the
/// pairing injective and order-preserving in both coordinates.
/// Throws DataError when no pair can be formed.
LaggedAlignment align_lagged(const TradingCalendar& domestic, const TradingCalendar& external);

}  // namespace grouptree
