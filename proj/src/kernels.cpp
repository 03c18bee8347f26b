#include "advdist/kernels.hpp"

#include <exception>
#include <omp.h>

namespace advdist::kernels {

namespace {

/// Runs body(i) for every row, in parallel. The first failure by row index is
/// rethrown after the region so error reporting matches the serial loop.
template <typename Body>
void parallel_rows(std::size_t rows, int workers, bool dynamic, Body&& body) {
    std::vector<std::exception_ptr> errors(rows);
    const auto n = static_cast<std::ptrdiff_t>(rows);
    const int threads = resolve_workers(workers);
    if (dynamic) {
#pragma omp parallel for num_threads(threads) schedule(dynamic, 1)
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            try {
                body(static_cast<std::size_t>(i));
            } catch (...) {
                errors[static_cast<std::size_t>(i)] = std::current_exception();
            }
        }
    } else {
#pragma omp parallel for num_threads(threads) schedule(static)
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            try {
                body(static_cast<std::size_t>(i));
            } catch (...) {
                errors[static_cast<std::size_t>(i)] = std::current_exception();
            }
        }
    }
    for (auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
}

}  // namespace

int resolve_workers(int workers) noexcept {
    return workers > 0 ? workers : omp_get_max_threads();
}

std::vector<Prediction> predict_batch_serial(const Classifier& m, const Dataset& d) {
    std::vector<Prediction> out(d.rows());
    for (std::size_t i = 0; i < d.rows(); ++i) {
        out[i] = m.predict(d.row(i));
    }
    return out;
}

std::vector<Prediction> predict_batch(const Classifier& m, const Dataset& d, int workers) {
    if (!m.thread_safe()) {
        return predict_batch_serial(m, d);
    }
    std::vector<Prediction> out(d.rows());
    parallel_rows(d.rows(), workers, false, [&](std::size_t i) { out[i] = m.predict(d.row(i)); });
    return out;
}

std::vector<double> class_probability_batch_serial(const Classifier& m, const Dataset& d, ClassId c) {
    std::vector<double> out(d.rows());
    for (std::size_t i = 0; i < d.rows(); ++i) {
        out[i] = m.class_probability(d.row(i), c);
    }
    return out;
}

std::vector<double> class_probability_batch(const Classifier& m, const Dataset& d, ClassId c, int workers) {
    if (!m.thread_safe()) {
        return class_probability_batch_serial(m, d, c);
    }
    std::vector<double> out(d.rows());
    parallel_rows(d.rows(), workers, false, [&](std::size_t i) { out[i] = m.class_probability(d.row(i), c); });
    return out;
}

std::vector<double> forward_batch_serial(const DenseNet& net, const Dataset& d) {
    std::vector<double> out(d.rows());
    for (std::size_t i = 0; i < d.rows(); ++i) {
        out[i] = net.forward(d.row(i));
    }
    return out;
}

std::vector<double> forward_batch(const DenseNet& net, const Dataset& d, int workers) {
    std::vector<double> out(d.rows());
    parallel_rows(d.rows(), workers, false, [&](std::size_t i) { out[i] = net.forward(d.row(i)); });
    return out;
}

std::vector<AttackResult> attack_batch_serial(const Classifier& m_o, const DenseNet& m_p, const Dataset& eval,
                                              const AttackConfig& cfg) {
    std::vector<AttackResult> out(eval.rows());
    for (std::size_t i = 0; i < eval.rows(); ++i) {
        out[i] = attack(m_o, m_p, eval.row(i), cfg);
    }
    return out;
}

std::vector<AttackResult> attack_batch(const Classifier& m_o, const DenseNet& m_p, const Dataset& eval,
                                       const AttackConfig& cfg, int workers) {
    if (!m_o.thread_safe()) {
        return attack_batch_serial(m_o, m_p, eval, cfg);
    }
    std::vector<AttackResult> out(eval.rows());
    // iteration counts vary a lot between rows
    parallel_rows(eval.rows(), workers, true, [&](std::size_t i) { out[i] = attack(m_o, m_p, eval.row(i), cfg); });
    return out;
}

}  // namespace advdist::kernels
