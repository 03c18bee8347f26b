#pragma once

#include "advdist/attack.hpp"
#include "advdist/classifier.hpp"
#include "advdist/dataset.hpp"

#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace advdist {

/// Mean absolute difference (1/M) sum |a_i - b_i|. Throws DimensionMismatch,
/// EmptyVector.
[[nodiscard]] double mae(std::span<const double> a, std::span<const double> b);

enum class ResponseScale { Raw, Log };

[[nodiscard]] ResponseScale parse_response_scale(const std::string& name);
[[nodiscard]] const char* response_scale_name(ResponseScale scale);

/// Local linear regression with tricube weights over the ceil(span * N)
/// nearest training points (distance ties at the cut-off are all included).
class LoessModel {
  public:
    LoessModel(std::vector<double> x, std::vector<double> y, double span, ResponseScale scale);

    /// Fitted value in the model's response scale. Queries outside the training
    /// range extend the local line fitted at the nearest boundary.
    [[nodiscard]] double predict(double x) const;

    [[nodiscard]] double span() const noexcept { return span_; }
    [[nodiscard]] ResponseScale scale() const noexcept { return scale_; }
    [[nodiscard]] std::size_t size() const noexcept { return x_.size(); }
    [[nodiscard]] std::size_t neighbors() const noexcept { return k_; }
    [[nodiscard]] const std::vector<double>& x() const noexcept { return x_; }
    /// Responses after scaling (ln for the log scale).
    [[nodiscard]] const std::vector<double>& y() const noexcept { return y_; }

  private:
    std::vector<double> x_;
    std::vector<double> y_;
    double span_;
    ResponseScale scale_;
    std::size_t k_;
    double x_min_;
    double x_max_;
};

/// Fits on (confidence, raw response) pairs; the log scale takes ln of each
/// response. Throws TooFewPoints (fewer than max(4, ceil(span N)) points, fewer
/// than 3 neighbours, or a single distinct confidence) and
/// NonPositiveResponseForLog.
[[nodiscard]] LoessModel loess_fit(const std::vector<std::pair<double, double>>& points, double span,
                                   ResponseScale scale);

[[nodiscard]] inline double loess_predict(const LoessModel& model, double confidence) {
    return model.predict(confidence);
}

struct GadOptions {
    double span = 0.75;
    ResponseScale scale = ResponseScale::Raw;
};

struct GadRecord {
    std::size_t index = 0;
    double confidence = 0.0;
    double mae = 0.0;
    double expected = 0.0;  ///< F(confidence) in the response scale; NaN when unflipped
    double gad = 0.0;       ///< scaled mae - expected; +inf when unflipped
    bool flipped = false;
    bool clamped = false;  ///< log scale with mae == 0: response clamped to ln(DBL_MIN)

    friend bool operator==(const GadRecord&, const GadRecord&) = default;
};

/// Response value used for fitting: mae, or ln(max(mae, DBL_MIN)).
[[nodiscard]] double scaled_response(double mae_value, ResponseScale scale) noexcept;

struct GadFit {
    std::vector<GadRecord> records;
    LoessModel curve;
};

/// Fills expected/gad for records whose index, confidence, mae and flipped
/// fields are set. The curve is fitted on flipped records only. Throws
/// TooFewFlipped when fewer than four records flipped.
[[nodiscard]] GadFit fit_gad(std::vector<GadRecord> records, const GadOptions& options);

/// Row-aligned scoring: mae is recomputed from each row and its adversary.
[[nodiscard]] std::vector<GadRecord> gad_scores(const Dataset& eval, const std::vector<Prediction>& predictions,
                                                const std::vector<AttackResult>& attacks, const GadOptions& options);

/// Records sorted by ascending gad, ties by ascending index.
[[nodiscard]] std::vector<GadRecord> sorted_by_gad(std::vector<GadRecord> records);

/// CSV with header `index,confidence,mae,expected,gad,flipped`.
[[nodiscard]] std::string gad_records_to_csv(const std::vector<GadRecord>& records);
[[nodiscard]] std::vector<GadRecord> gad_records_from_csv(std::string_view text);

}  // namespace advdist
