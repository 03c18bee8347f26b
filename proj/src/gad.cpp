#include "advdist/gad.hpp"

#include "advdist/error.hpp"
#include "advdist/textio.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

namespace advdist {

double mae(std::span<const double> a, std::span<const double> b) {
    require(a.size() == b.size(), ErrorCode::DimensionMismatch,
            "mae of vectors with lengths " + std::to_string(a.size()) + " and " + std::to_string(b.size()));
    require(!a.empty(), ErrorCode::EmptyVector, "mae of empty vectors");
    double total = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        total += std::abs(a[i] - b[i]);
    }
    return total / static_cast<double>(a.size());
}

ResponseScale parse_response_scale(const std::string& name) {
    if (name == "raw" || name == "mae") {
        return ResponseScale::Raw;
    }
    if (name == "log" || name == "log-mae" || name == "log_mae") {
        return ResponseScale::Log;
    }
    fail(ErrorCode::InvalidArgument, "unknown response scale '" + name + "' (expected raw|log)");
}

const char* response_scale_name(ResponseScale scale) {
    return scale == ResponseScale::Log ? "log" : "raw";
}

LoessModel::LoessModel(std::vector<double> x, std::vector<double> y, double span, ResponseScale scale)
    : span_(span), scale_(scale) {
    require(x.size() == y.size(), ErrorCode::DimensionMismatch, "loess x/y length mismatch");
    // Canonical (x, y) order makes every fitted value independent of input order.
    std::vector<std::size_t> order(x.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return x[a] != x[b] ? x[a] < x[b] : y[a] < y[b];
    });
    x_.reserve(x.size());
    y_.reserve(y.size());
    for (std::size_t i : order) {
        x_.push_back(x[i]);
        y_.push_back(y[i]);
    }
    require(span_ > 0.0 && span_ <= 1.0, ErrorCode::InvalidArgument, "span must lie in (0, 1]");
    const std::size_t n = x_.size();
    k_ = static_cast<std::size_t>(std::ceil(span_ * static_cast<double>(n)));
    if (n < std::max<std::size_t>(4, k_)) {
        fail(ErrorCode::TooFewPoints, "loess needs at least max(4, ceil(span*N)) points, got " + std::to_string(n));
    }
    if (k_ < 3) {
        fail(ErrorCode::TooFewPoints, "span * N leaves fewer than 3 neighbours");
    }
    const auto [lo, hi] = std::minmax_element(x_.begin(), x_.end());
    x_min_ = *lo;
    x_max_ = *hi;
    if (!(x_min_ < x_max_)) {
        fail(ErrorCode::TooFewPoints, "loess needs at least two distinct confidence values");
    }
}

double LoessModel::predict(double q) const {
    const double center = std::clamp(q, x_min_, x_max_);
    const std::size_t n = x_.size();
    std::vector<double> dist(n);
    for (std::size_t i = 0; i < n; ++i) {
        dist[i] = std::abs(x_[i] - center);
    }
    std::vector<double> sorted = dist;
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(k_ - 1), sorted.end());
    const double radius = sorted[k_ - 1];

    std::vector<double> w(n, 0.0);
    double sw = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (dist[i] > radius) {
            continue;
        }
        if (radius == 0.0) {
            w[i] = 1.0;
        } else {
            const double r = dist[i] / radius;
            const double t = 1.0 - r * r * r;
            w[i] = t * t * t;
        }
        sw += w[i];
    }
    if (sw == 0.0) {
        // every neighbour sits exactly on the cut-off
        for (std::size_t i = 0; i < n; ++i) {
            w[i] = dist[i] <= radius ? 1.0 : 0.0;
            sw += w[i];
        }
    }

    double xbar = 0.0;
    double ybar = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        xbar += w[i] * x_[i];
        ybar += w[i] * y_[i];
    }
    xbar /= sw;
    ybar /= sw;
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x_[i] - xbar;
        sxx += w[i] * dx * dx;
        sxy += w[i] * dx * (y_[i] - ybar);
    }
    const double scale = radius > 0.0 ? radius : (x_max_ - x_min_);
    if (sxx <= 1e-14 * sw * scale * scale) {
        return ybar;
    }
    return ybar + (sxy / sxx) * (q - xbar);
}

double scaled_response(double mae_value, ResponseScale scale) noexcept {
    if (scale == ResponseScale::Raw) {
        return mae_value;
    }
    return std::log(std::max(mae_value, std::numeric_limits<double>::min()));
}

LoessModel loess_fit(const std::vector<std::pair<double, double>>& points, double span, ResponseScale scale) {
    std::vector<double> x;
    std::vector<double> y;
    x.reserve(points.size());
    y.reserve(points.size());
    for (const auto& [c, r] : points) {
        require(std::isfinite(c) && std::isfinite(r), ErrorCode::InvalidArgument, "loess points must be finite");
        if (scale == ResponseScale::Log) {
            if (!(r > 0.0)) {
                fail(ErrorCode::NonPositiveResponseForLog, "log scale needs positive responses");
            }
            y.push_back(std::log(r));
        } else {
            y.push_back(r);
        }
        x.push_back(c);
    }
    return LoessModel(std::move(x), std::move(y), span, scale);
}

GadFit fit_gad(std::vector<GadRecord> records, const GadOptions& options) {
    std::vector<std::pair<double, double>> points;
    for (auto& r : records) {
        if (!r.flipped) {
            continue;
        }
        r.clamped = options.scale == ResponseScale::Log && !(r.mae > 0.0);
        const double response = options.scale == ResponseScale::Log
                                    ? std::max(r.mae, std::numeric_limits<double>::min())
                                    : r.mae;
        points.emplace_back(r.confidence, response);
    }
    if (points.size() < 4) {
        fail(ErrorCode::TooFewFlipped,
             "GAD needs at least 4 flipped attacks, got " + std::to_string(points.size()));
    }
    LoessModel curve = loess_fit(points, options.span, options.scale);
    for (auto& r : records) {
        if (!r.flipped) {
            r.expected = std::numeric_limits<double>::quiet_NaN();
            r.gad = std::numeric_limits<double>::infinity();
            continue;
        }
        r.expected = curve.predict(r.confidence);
        r.gad = scaled_response(r.mae, options.scale) - r.expected;
    }
    return GadFit{std::move(records), std::move(curve)};
}

std::vector<GadRecord> gad_scores(const Dataset& eval, const std::vector<Prediction>& predictions,
                                  const std::vector<AttackResult>& attacks, const GadOptions& options) {
    require(predictions.size() == eval.rows() && attacks.size() == eval.rows(), ErrorCode::DimensionMismatch,
            "eval, predictions and attacks must be row-aligned");
    std::vector<GadRecord> records(eval.rows());
    for (std::size_t i = 0; i < eval.rows(); ++i) {
        records[i].index = i;
        records[i].confidence = predictions[i].confidence;
        records[i].mae = mae(eval.row(i), attacks[i].x_adv);
        records[i].flipped = attacks[i].flipped;
    }
    return fit_gad(std::move(records), options).records;
}

std::vector<GadRecord> sorted_by_gad(std::vector<GadRecord> records) {
    std::sort(records.begin(), records.end(), [](const GadRecord& a, const GadRecord& b) {
        if (a.gad != b.gad) {
            return a.gad < b.gad;
        }
        return a.index < b.index;
    });
    return records;
}

std::string gad_records_to_csv(const std::vector<GadRecord>& records) {
    std::string out = "index,confidence,mae,expected,gad,flipped\n";
    for (const auto& r : records) {
        out += std::to_string(r.index) + ',' + textio::format_double(r.confidence) + ',' +
               textio::format_double(r.mae) + ',' + textio::format_double(r.expected) + ',' +
               textio::format_double(r.gad) + ',' + (r.flipped ? "1" : "0") + '\n';
    }
    return out;
}

std::vector<GadRecord> gad_records_from_csv(std::string_view text) {
    const auto rows = textio::lines(text);
    require(!rows.empty() && textio::trim(rows.front()) == "index,confidence,mae,expected,gad,flipped",
            ErrorCode::ParseError, "unexpected GAD header");
    static const char* columns[] = {"index", "confidence", "mae", "expected", "gad", "flipped"};
    std::vector<GadRecord> out;
    for (std::size_t li = 1; li < rows.size(); ++li) {
        if (textio::trim(rows[li]).empty()) {
            continue;
        }
        const auto cells = textio::split(rows[li], ',');
        if (cells.size() != 6) {
            fail(ErrorCode::RaggedRow, "GAD row " + std::to_string(li) + " does not have 6 cells");
        }
        GadRecord r;
        const auto index = textio::parse_int(cells[0]);
        if (!index || *index < 0) throw ParseError(li, columns[0], cells[0]);
        r.index = static_cast<std::size_t>(*index);
        double* fields[] = {&r.confidence, &r.mae, &r.expected, &r.gad};
        for (std::size_t c = 0; c < 4; ++c) {
            const auto v = textio::parse_double(cells[c + 1]);
            if (!v) throw ParseError(li, columns[c + 1], cells[c + 1]);
            *fields[c] = *v;
        }
        const auto flipped = textio::parse_int(cells[5]);
        if (!flipped) throw ParseError(li, columns[5], cells[5]);
        r.flipped = *flipped != 0;
        out.push_back(r);
    }
    return out;
}

}  // namespace advdist
