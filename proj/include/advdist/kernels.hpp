#pragma once

#include "advdist/attack.hpp"
#include "advdist/classifier.hpp"
#include "advdist/dataset.hpp"
#include "advdist/dense_net.hpp"

#include <vector>

// Row-parallel batch kernels. Each has a serial reference twin; both return
// identical results for any worker count. workers <= 0 means the OpenMP
// default. Classifiers that are not thread_safe always run serially.
namespace advdist::kernels {

[[nodiscard]] std::vector<Prediction> predict_batch_serial(const Classifier& m, const Dataset& d);
[[nodiscard]] std::vector<Prediction> predict_batch(const Classifier& m, const Dataset& d, int workers);

[[nodiscard]] std::vector<double> class_probability_batch_serial(const Classifier& m, const Dataset& d, ClassId c);
[[nodiscard]] std::vector<double> class_probability_batch(const Classifier& m, const Dataset& d, ClassId c,
                                                          int workers);

[[nodiscard]] std::vector<double> forward_batch_serial(const DenseNet& net, const Dataset& d);
[[nodiscard]] std::vector<double> forward_batch(const DenseNet& net, const Dataset& d, int workers);

[[nodiscard]] std::vector<AttackResult> attack_batch_serial(const Classifier& m_o, const DenseNet& m_p,
                                                            const Dataset& eval, const AttackConfig& cfg);
[[nodiscard]] std::vector<AttackResult> attack_batch(const Classifier& m_o, const DenseNet& m_p, const Dataset& eval,
                                                     const AttackConfig& cfg, int workers);

/// Threads an OpenMP region would use for the given request.
[[nodiscard]] int resolve_workers(int workers) noexcept;

}  // namespace advdist::kernels
