#include "grouptree/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "grouptree/dates.hpp"
#include "grouptree/errors.hpp"

namespace grouptree {

namespace {

/// Box-Muller over mt19937_64 draws: bit-reproducible for a given seed,
/// independent of the standard library's normal_distribution internals.
class GaussianSampler {
public:
    explicit GaussianSampler(std::uint64_t seed) : engine_(seed) {}

    double operator()() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
        const double u2 = static_cast<double>(engine_() >> 11) * 0x1.0p-53;          // [0, 1)
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * M_PI * u2;
        spare_ = radius * std::sin(angle);
        have_spare_ = true;
        return radius * std::cos(angle);
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

std::string sector_ticker(std::size_t sector, std::size_t member) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "S%03zu_%04zu", sector, member);
    return std::string(buf);
}

std::string sector_label(std::size_t sector) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "C%03zu", sector);
    return std::string(buf);
}

}  // namespace

void SynthConfig::validate() const {
    if (n_sectors < 1 || stocks_per_sector < 1) {
        throw ConfigError("synth: sector and stock counts must be at least 1");
    }
    if (days < 2) throw ConfigError("synth: days must be at least 2");
    if (!(sector_loading >= 0.0) || !(global_loading >= 0.0)) {
        throw ConfigError("synth: factor loadings must be >= 0");
    }
    if (!(noise_sigma > 0.0)) throw ConfigError("synth: noise_sigma must be > 0");
    if (!(external_sigma > 0.0)) throw ConfigError("synth: external_sigma must be > 0");
    for (std::size_t i = 0; i < external_loading_schedule.size(); ++i) {
        if (!(external_loading_schedule[i].second >= 0.0)) {
            throw ConfigError("synth: external loadings must be >= 0");
        }
        if (i > 0 &&
            external_loading_schedule[i].first <= external_loading_schedule[i - 1].first) {
            throw ConfigError("synth: external loading breakpoints must be increasing");
        }
    }
    if (!is_iso_date(start_date)) throw ConfigError("synth: start_date must be YYYY-MM-DD");
}

double SynthConfig::external_loading_at(std::size_t return_index) const {
    double value = 0.0;
    for (const auto& [from, loading] : external_loading_schedule) {
        if (from > return_index) break;
        value = loading;
    }
    return value;
}

SynthMarket generate_market(const SynthConfig& config) {
    config.validate();
    const std::size_t n_stocks = config.n_sectors * config.stocks_per_sector;
    const std::size_t n_returns = config.days - 1;

    // One shared weekday grid: external days w_0..w_{D-1}, domestic days
    // w_1..w_D. The external return dated w_k drives the domestic return
    // dated w_{k+1}, which is exactly what align_lagged pairs up.
    const std::vector<std::string> grid = weekday_sequence(config.start_date, config.days + 1);

    GaussianSampler gauss(config.seed);

    Eigen::VectorXd external(static_cast<Eigen::Index>(n_returns));
    for (std::size_t t = 0; t < n_returns; ++t) {
        external(static_cast<Eigen::Index>(t)) = config.external_sigma * gauss();
    }

    Eigen::MatrixXd returns(static_cast<Eigen::Index>(n_stocks),
                            static_cast<Eigen::Index>(n_returns));
    for (std::size_t t = 0; t < n_returns; ++t) {
        const double global = config.global_loading * gauss();
        Eigen::VectorXd sector(static_cast<Eigen::Index>(config.n_sectors));
        for (std::size_t s = 0; s < config.n_sectors; ++s) {
            sector(static_cast<Eigen::Index>(s)) = config.sector_loading * gauss();
        }
        const double ext = config.external_loading_at(t) * external(static_cast<Eigen::Index>(t));
        for (std::size_t i = 0; i < n_stocks; ++i) {
            const std::size_t s = i / config.stocks_per_sector;
            returns(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t)) =
                global + sector(static_cast<Eigen::Index>(s)) + ext +
                config.noise_sigma * gauss();
        }
    }

    SynthMarket out;
    out.panel.calendar.dates.assign(grid.begin() + 1, grid.end());
    out.panel.tickers.reserve(n_stocks);
    for (std::size_t s = 0; s < config.n_sectors; ++s) {
        for (std::size_t j = 0; j < config.stocks_per_sector; ++j) {
            const std::string ticker = sector_ticker(s, j);
            out.panel.tickers.push_back(ticker);
            out.categories.assignments.emplace(ticker, sector_label(s));
        }
    }
    out.panel.prices.resize(static_cast<Eigen::Index>(n_stocks),
                            static_cast<Eigen::Index>(config.days));
    out.panel.prices.col(0).setConstant(100.0);
    for (std::size_t t = 0; t < n_returns; ++t) {
        out.panel.prices.col(static_cast<Eigen::Index>(t + 1)) =
            out.panel.prices.col(static_cast<Eigen::Index>(t)).array() *
            returns.col(static_cast<Eigen::Index>(t)).array().exp();
    }
    out.panel.validate();

    out.external.calendar.dates.assign(grid.begin() + 1, grid.begin() + 1 + n_returns);
    out.external.returns = external;
    out.external.validate();

    out.external_index.calendar.dates.assign(grid.begin(), grid.begin() + config.days);
    out.external_index.values.resize(config.days);
    out.external_index.values[0] = 100.0;
    for (std::size_t t = 0; t < n_returns; ++t) {
        out.external_index.values[t + 1] =
            out.external_index.values[t] * std::exp(external(static_cast<Eigen::Index>(t)));
    }
    out.external_index.validate();
    return out;
}

}  // namespace grouptree
