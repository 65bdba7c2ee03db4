#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "grouptree/ingest.hpp"

namespace grouptree {

/// Log returns for N companies; column t is the price transition t -> t+1
/// of the source panel, dated by the transition's end date.
struct ReturnPanel {
    std::vector<std::string> tickers;
    TradingCalendar calendar;
    Eigen::MatrixXd returns;  // N x (L-1)

    std::size_t stock_count() const noexcept { return tickers.size(); }
    std::size_t length() const noexcept { return calendar.size(); }
    void validate() const;
};

/// Log returns of the external market index, dated like ReturnPanel columns.
struct ExternalReturnSeries {
    TradingCalendar calendar;
    Eigen::VectorXd returns;

    std::size_t length() const noexcept { return calendar.size(); }
    void validate() const;
};

}  // namespace grouptree
