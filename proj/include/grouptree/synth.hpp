#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "grouptree/ingest.hpp"
#include "grouptree/return_panel.hpp"

namespace grouptree {

/// Synthetic market with controllable sector structure and a lagged
/// external factor. Stock returns are built as
///     r_i(t) = global_loading * g(t) + sector_loading * f_{c(i)}(t)
///            + external_loading(t) * u(t-1) + noise_sigma * eps_i(t)
/// with g, f_c, eps independent unit-variance Gaussians and u the external
/// return series (standard deviation external_sigma). Prices follow as
/// exp(cumulative sum) from a base of 100.
struct SynthConfig {
    std::size_t n_sectors = 1;
    std::size_t stocks_per_sector = 1;
    std::size_t days = 2;
    double sector_loading = 0.0;
    double global_loading = 0.0;
    double noise_sigma = 1.0;
    double external_sigma = 1.0;
    /// Piecewise-constant loading on the lagged external return, keyed by
    /// domestic return index (0 before the first breakpoint). Empty = 0.
    std::vector<std::pair<std::size_t, double>> external_loading_schedule;
    std::uint64_t seed = 0;
    std::string start_date = "1990-01-08";

    void validate() const;
    double external_loading_at(std::size_t return_index) const;
};

struct SynthMarket {
    PricePanel panel;
    CategoryMap categories;
    ExternalReturnSeries external;  // return series, dated one weekday early
    IndexSeries external_index;     // level series matching `external`
};

/// Fully determined by (config, seed): same inputs, bit-identical output.
/// The external calendar runs one weekday ahead of the domestic one, so the
/// lag-1 alignment pairs every domestic return with the external return
/// that actually entered it.
SynthMarket generate_market(const SynthConfig& config);

}  // namespace grouptree
