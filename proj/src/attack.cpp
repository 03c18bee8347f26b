#include "advdist/attack.hpp"

#include "advdist/error.hpp"
#include "advdist/gad.hpp"
#include "advdist/kernels.hpp"
#include "advdist/textio.hpp"

#include <algorithm>
#include <cmath>

namespace advdist {

AttackResult attack(const Classifier& m_o, const DenseNet& m_p, std::span<const double> x, const AttackConfig& cfg) {
    require(cfg.epsilon > 0.0 && std::isfinite(cfg.epsilon), ErrorCode::InvalidArgument, "epsilon must be > 0");
    require(cfg.max_iters >= 1, ErrorCode::InvalidArgument, "max_iters must be >= 1");
    require(x.size() == m_p.inputs(), ErrorCode::DimensionMismatch, "instance width does not match the pseudo model");
    if (auto m = m_o.num_features(); m && *m != x.size()) {
        fail(ErrorCode::DimensionMismatch, "instance width does not match the classifier");
    }
    if (cfg.clip_to_ranges) {
        require(cfg.clip_to_ranges->size() == x.size(), ErrorCode::DimensionMismatch, "clip ranges width mismatch");
    }

    const ClassId original = m_o.predict(x).label;
    const double start_conf = m_p.forward(x);
    double fixed_target = start_conf;
    if (cfg.target == AttackTarget::PredictedClass) {
        fixed_target = start_conf >= 0.5 ? 1.0 : 0.0;
    }

    AttackResult result;
    result.x_adv.assign(x.begin(), x.end());
    std::vector<double> grad(x.size());
    std::vector<double> previous(x.size());

    for (std::size_t it = 1; it <= cfg.max_iters; ++it) {
        const double target = cfg.target == AttackTarget::Tracking ? m_p.forward(result.x_adv) : fixed_target;
        m_p.input_gradient(result.x_adv, target, grad);
        previous = result.x_adv;
        for (std::size_t j = 0; j < grad.size(); ++j) {
            result.x_adv[j] += cfg.epsilon * sign(grad[j]);
        }
        if (cfg.clip_to_ranges) {
            for (std::size_t j = 0; j < grad.size(); ++j) {
                const auto& r = (*cfg.clip_to_ranges)[j];
                result.x_adv[j] = std::clamp(result.x_adv[j], r.min, r.max);
            }
        }
        result.iterations = it;
        if (m_o.predict(result.x_adv).label != original) {
            result.flipped = true;
            break;
        }
        // Deterministic loop: an unchanged point repeats the same step forever.
        if (result.x_adv == previous) {
            break;
        }
    }
    result.mae_to_original = mae(x, result.x_adv);
    return result;
}

std::vector<AttackResult> attack_all(const Classifier& m_o, const DenseNet& m_p, const Dataset& eval,
                                     const AttackConfig& cfg, int workers) {
    return kernels::attack_batch(m_o, m_p, eval, cfg, workers);
}

double default_epsilon(const FeatureRanges& ranges) {
    double total = 0.0;
    for (const auto& r : ranges) {
        total += r.width();
    }
    const double mean = ranges.empty() ? 0.0 : total / static_cast<double>(ranges.size());
    return mean > 0.0 ? 0.01 * mean : 1e-2;
}

AttackTarget parse_attack_target(const std::string& name) {
    if (name == "predicted_class") {
        return AttackTarget::PredictedClass;
    }
    if (name == "literal") {
        return AttackTarget::Literal;
    }
    if (name == "tracking") {
        return AttackTarget::Tracking;
    }
    fail(ErrorCode::InvalidArgument, "unknown attack target '" + name + "' (expected predicted_class|literal|tracking)");
}

const char* attack_target_name(AttackTarget target) {
    switch (target) {
        case AttackTarget::PredictedClass: return "predicted_class";
        case AttackTarget::Literal: return "literal";
        case AttackTarget::Tracking: return "tracking";
    }
    return "predicted_class";
}

std::string attacks_to_csv(const std::vector<AttackResult>& results, std::span<const std::size_t> indices,
                           const std::vector<std::string>& feature_names) {
    require(results.size() == indices.size(), ErrorCode::DimensionMismatch, "attack/index length mismatch");
    std::string out = "index,flipped,iterations,mae";
    for (const auto& name : feature_names) {
        out += ',' + name;
    }
    out += '\n';
    for (std::size_t k = 0; k < results.size(); ++k) {
        const auto& r = results[k];
        require(r.x_adv.size() == feature_names.size(), ErrorCode::DimensionMismatch, "feature name count mismatch");
        out += std::to_string(indices[k]) + ',' + (r.flipped ? "1" : "0") + ',' + std::to_string(r.iterations) + ',' +
               textio::format_double(r.mae_to_original);
        for (double v : r.x_adv) {
            out += ',' + textio::format_double(v);
        }
        out += '\n';
    }
    return out;
}

IndexedAttacks attacks_from_csv(std::string_view text) {
    const auto rows = textio::lines(text);
    require(!rows.empty(), ErrorCode::ParseError, "attacks file has no header");
    const auto header = textio::split(rows.front(), ',');
    require(header.size() >= 5 && textio::trim(header[0]) == "index" && textio::trim(header[1]) == "flipped",
            ErrorCode::ParseError, "unexpected attacks header");
    IndexedAttacks out;
    for (std::size_t li = 1; li < rows.size(); ++li) {
        if (textio::trim(rows[li]).empty()) {
            continue;
        }
        const auto cells = textio::split(rows[li], ',');
        if (cells.size() != header.size()) {
            fail(ErrorCode::RaggedRow, "attacks row " + std::to_string(li) + " has the wrong cell count");
        }
        const auto index = textio::parse_int(cells[0]);
        const auto flipped = textio::parse_int(cells[1]);
        const auto iterations = textio::parse_int(cells[2]);
        const auto mae_value = textio::parse_double(cells[3]);
        if (!index || *index < 0) throw ParseError(li, "index", cells[0]);
        if (!flipped) throw ParseError(li, "flipped", cells[1]);
        if (!iterations || *iterations < 0) throw ParseError(li, "iterations", cells[2]);
        if (!mae_value) throw ParseError(li, "mae", cells[3]);
        AttackResult r;
        r.flipped = *flipped != 0;
        r.iterations = static_cast<std::size_t>(*iterations);
        r.mae_to_original = *mae_value;
        for (std::size_t j = 4; j < cells.size(); ++j) {
            const auto v = textio::parse_double(cells[j]);
            if (!v) throw ParseError(li, std::string(textio::trim(header[j])), cells[j]);
            r.x_adv.push_back(*v);
        }
        out.indices.push_back(static_cast<std::size_t>(*index));
        out.results.push_back(std::move(r));
    }
    return out;
}

}  // namespace advdist
