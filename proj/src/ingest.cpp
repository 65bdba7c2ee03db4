#include "grouptree/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "grouptree/csv.hpp"
#include "grouptree/dates.hpp"
#include "grouptree/errors.hpp"

namespace grouptree {

namespace {

constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

std::size_t require_column(const std::vector<std::string_view>& header,
                           const std::string& name, const std::string& path) {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return i;
    }
    throw ParseError("missing column '" + name + "' in header of " + path, 1);
}

}  // namespace

std::optional<std::size_t> TradingCalendar::find(std::string_view date) const {
    const auto it = std::lower_bound(dates.begin(), dates.end(), date);
    if (it == dates.end() || *it != date) return std::nullopt;
    return static_cast<std::size_t>(it - dates.begin());
}

void TradingCalendar::validate() const {
    if (dates.empty()) throw DataError("calendar is empty");
    for (std::size_t i = 0; i < dates.size(); ++i) {
        if (!is_iso_date(dates[i])) {
            throw DataError("calendar date '" + dates[i] + "' is not a valid YYYY-MM-DD date");
        }
        if (i > 0 && dates[i] <= dates[i - 1]) {
            throw DataError("calendar dates not strictly increasing at '" + dates[i] + "'");
        }
    }
}

void PricePanel::validate() const {
    calendar.validate();
    if (tickers.empty()) throw DataError("panel has no tickers");
    if (calendar.size() < 2) throw DataError("panel needs at least 2 dates");
    if (prices.rows() != static_cast<Eigen::Index>(tickers.size()) ||
        prices.cols() != static_cast<Eigen::Index>(calendar.size())) {
        throw DataError("panel matrix shape does not match tickers/calendar");
    }
    for (std::size_t i = 1; i < tickers.size(); ++i) {
        if (tickers[i] == tickers[i - 1]) throw DataError("duplicate ticker '" + tickers[i] + "'");
    }
    if (!std::is_sorted(tickers.begin(), tickers.end())) {
        // Uniqueness is checked against the sorted order above; unsorted
        // panels would defeat that check, so verify explicitly.
        auto sorted = tickers;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
            throw DataError("duplicate ticker in panel");
        }
    }
    if (!(prices.array().isFinite() && prices.array() > 0.0).all()) {
        throw DataError("panel prices must be finite and strictly positive");
    }
}

const std::string& CategoryMap::category_of(const std::string& ticker) const {
    const auto it = assignments.find(ticker);
    if (it == assignments.end()) {
        throw DataError("ticker '" + ticker + "' has no category assignment");
    }
    return it->second;
}

void IndexSeries::validate() const {
    calendar.validate();
    if (values.size() != calendar.size()) {
        throw DataError("index series length does not match its calendar");
    }
    for (double v : values) {
        if (!std::isfinite(v)) throw DataError("index series contains a non-finite value");
    }
}

PricePanel load_panel(const std::string& path, const CsvSchema& schema, const GapPolicy& policy) {
    std::vector<std::string> dates;   // interned, in first-seen order
    std::vector<std::string> tickers;
    std::unordered_map<std::string, std::size_t> date_id, ticker_id;
    struct Row {
        std::size_t date, ticker, line;
        double close;
    };
    std::vector<Row> rows;

    std::size_t c_date = 0, c_ticker = 0, c_close = 0;
    bool have_header = false;
    for_each_csv_row(path, [&](std::size_t line, const std::vector<std::string_view>& f) {
        if (!have_header) {
            c_date = require_column(f, schema.date_column, path);
            c_ticker = require_column(f, schema.ticker_column, path);
            c_close = require_column(f, schema.close_column, path);
            have_header = true;
            return;
        }
        const std::size_t needed = std::max({c_date, c_ticker, c_close}) + 1;
        if (f.size() < needed) throw ParseError("row has too few fields", line);
        const std::string_view date = f[c_date];
        const std::string_view ticker = f[c_ticker];
        if (!is_iso_date(date)) {
            throw ParseError("invalid date '" + std::string(date) + "'", line);
        }
        if (ticker.empty()) throw ParseError("empty ticker", line);
        const double close = parse_double(f[c_close], line);
        if (!(std::isfinite(close) && close > 0.0)) {
            throw ParseError("close price must be finite and > 0, got '" +
                                 std::string(f[c_close]) + "' for " + std::string(ticker) +
                                 " on " + std::string(date),
                             line);
        }
        const auto did = date_id.try_emplace(std::string(date), dates.size());
        if (did.second) dates.emplace_back(date);
        const auto tid = ticker_id.try_emplace(std::string(ticker), tickers.size());
        if (tid.second) tickers.emplace_back(ticker);
        rows.push_back({did.first->second, tid.first->second, line, close});
    });
    if (!have_header) throw ParseError("file has no header row: " + path, 1);
    if (rows.empty()) throw DataError("no data rows in " + path);

    // Deterministic ordering: dates ascending, tickers lexicographic.
    std::vector<std::size_t> date_order(dates.size()), ticker_order(tickers.size());
    {
        std::vector<std::size_t> idx(dates.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        std::sort(idx.begin(), idx.end(),
                  [&](std::size_t a, std::size_t b) { return dates[a] < dates[b]; });
        for (std::size_t pos = 0; pos < idx.size(); ++pos) date_order[idx[pos]] = pos;
        std::sort(dates.begin(), dates.end());
    }
    {
        std::vector<std::size_t> idx(tickers.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        std::sort(idx.begin(), idx.end(),
                  [&](std::size_t a, std::size_t b) { return tickers[a] < tickers[b]; });
        for (std::size_t pos = 0; pos < idx.size(); ++pos) ticker_order[idx[pos]] = pos;
        std::sort(tickers.begin(), tickers.end());
    }

    Eigen::MatrixXd grid = Eigen::MatrixXd::Constant(
        static_cast<Eigen::Index>(tickers.size()), static_cast<Eigen::Index>(dates.size()),
        kMissing);
    for (const Row& r : rows) {
        const Eigen::Index i = static_cast<Eigen::Index>(ticker_order[r.ticker]);
        const Eigen::Index t = static_cast<Eigen::Index>(date_order[r.date]);
        if (!std::isnan(grid(i, t))) {
            throw ParseError("duplicate observation for ticker/date", r.line);
        }
        grid(i, t) = r.close;
    }

    // Completeness: forward-fill interior gaps up to the limit, then keep
    // only tickers quoted on every date.
    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < tickers.size(); ++i) {
        bool complete = true;
        double last = kMissing;
        std::size_t gap = 0;
        for (Eigen::Index t = 0; t < grid.cols(); ++t) {
            double& cell = grid(static_cast<Eigen::Index>(i), t);
            if (!std::isnan(cell)) {
                last = cell;
                gap = 0;
                continue;
            }
            ++gap;
            if (std::isnan(last) || gap > policy.forward_fill_limit) {
                complete = false;
                break;
            }
            cell = last;
        }
        if (complete) {
            kept.push_back(i);
        } else {
            warn("ticker '" + tickers[i] + "' excluded: missing dates exceed the gap policy");
        }
    }
    if (kept.empty()) throw DataError("no ticker is complete over the panel dates: " + path);
    if (kept.size() < 2) throw DataError("fewer than 2 complete tickers in " + path);

    PricePanel panel;
    panel.calendar.dates = std::move(dates);
    panel.prices.resize(static_cast<Eigen::Index>(kept.size()), grid.cols());
    panel.tickers.reserve(kept.size());
    for (std::size_t r = 0; r < kept.size(); ++r) {
        panel.tickers.push_back(tickers[kept[r]]);
        panel.prices.row(static_cast<Eigen::Index>(r)) =
            grid.row(static_cast<Eigen::Index>(kept[r]));
    }
    panel.validate();
    return panel;
}

CategoryMap load_categories(const std::string& path) {
    CategoryMap map;
    std::size_t c_ticker = 0, c_category = 0;
    bool have_header = false;
    for_each_csv_row(path, [&](std::size_t line, const std::vector<std::string_view>& f) {
        if (!have_header) {
            c_ticker = require_column(f, "ticker", path);
            c_category = require_column(f, "category", path);
            have_header = true;
            return;
        }
        if (f.size() < std::max(c_ticker, c_category) + 1) {
            throw ParseError("row has too few fields", line);
        }
        const std::string ticker(f[c_ticker]);
        if (ticker.empty()) throw ParseError("empty ticker", line);
        if (!map.assignments.emplace(ticker, std::string(f[c_category])).second) {
            throw ParseError("duplicate category row for ticker '" + ticker + "'", line);
        }
    });
    if (map.assignments.empty()) throw DataError("no category rows in " + path);
    return map;
}

IndexSeries load_index_series(const std::string& path) {
    IndexSeries series;
    std::size_t c_date = 0, c_close = 0;
    bool have_header = false;
    for_each_csv_row(path, [&](std::size_t line, const std::vector<std::string_view>& f) {
        if (!have_header) {
            c_date = require_column(f, "date", path);
            c_close = require_column(f, "close", path);
            have_header = true;
            return;
        }
        if (f.size() < std::max(c_date, c_close) + 1) {
            throw ParseError("row has too few fields", line);
        }
        if (!is_iso_date(f[c_date])) {
            throw ParseError("invalid date '" + std::string(f[c_date]) + "'", line);
        }
        const double close = parse_double(f[c_close], line);
        if (!(std::isfinite(close) && close > 0.0)) {
            throw ParseError("close must be finite and > 0", line);
        }
        series.calendar.dates.emplace_back(f[c_date]);
        series.values.push_back(close);
    });
    if (series.values.empty()) throw DataError("no data rows in " + path);
    // Accept unsorted files; sort jointly by date.
    std::vector<std::size_t> idx(series.values.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return series.calendar.dates[a] < series.calendar.dates[b];
    });
    IndexSeries sorted;
    sorted.calendar.dates.reserve(idx.size());
    sorted.values.reserve(idx.size());
    for (std::size_t i : idx) {
        sorted.calendar.dates.push_back(std::move(series.calendar.dates[i]));
        sorted.values.push_back(series.values[i]);
    }
    sorted.validate();
    return sorted;
}

IndexSeries build_custom_index(const PricePanel& panel, IndexMode mode) {
    panel.validate();
    IndexSeries out;
    out.calendar = panel.calendar;
    out.values.resize(panel.length());
    const double n = static_cast<double>(panel.stock_count());
    for (Eigen::Index t = 0; t < panel.prices.cols(); ++t) {
        double sum = 0.0;
        for (Eigen::Index i = 0; i < panel.prices.rows(); ++i) {
            const double p = panel.prices(i, t);
            sum += mode == IndexMode::raw ? p : p / panel.prices(i, 0);
        }
        out.values[static_cast<std::size_t>(t)] = sum / n;
    }
    return out;
}

LaggedAlignment align_lagged(const TradingCalendar& domestic, const TradingCalendar& external) {
    domestic.validate();
    external.validate();
    LaggedAlignment out;
    std::size_t scan = 0;  // externals [0, scan) are < the current domestic date
    std::size_t used = 0;  // externals [0, used) are consumed or skipped for good
    for (std::size_t d = 0; d < domestic.size(); ++d) {
        const std::string& date = domestic.dates[d];
        while (scan < external.size() && external.dates[scan] < date) ++scan;
        if (scan == 0 || scan < used + 1) continue;  // no usable candidate before this date
        const std::size_t e = scan - 1;
        out.pairs.push_back({external.dates[e], date, e, d});
        used = e + 1;
    }
    if (out.pairs.empty()) {
        throw DataError("lagged alignment produced zero pairs; calendars do not interleave");
    }
    return out;
}

}  // namespace grouptree
