#pragma once

#include "advdist/classifier.hpp"

#include <chrono>
#include <mutex>
#include <optional>
#include <string>
#include <sys/types.h>
#include <vector>

namespace advdist {

/// Black box living in a child process. Speaks a line protocol over the
/// child's stdin/stdout: `predict v1,...,vM\n` answered by `<label> <conf>\n`,
/// and `quit\n` on shutdown. Requests are serialized.
class ExternalClassifier final : public Classifier {
  public:
    /// argv[0] is the executable (PATH is searched). Throws ProcessSpawnError.
    ExternalClassifier(std::vector<std::string> argv, std::size_t num_classes,
                       std::optional<std::size_t> num_features = std::nullopt,
                       std::chrono::milliseconds timeout = std::chrono::seconds(10));
    ~ExternalClassifier() override;

    ExternalClassifier(const ExternalClassifier&) = delete;
    ExternalClassifier& operator=(const ExternalClassifier&) = delete;

    /// Throws ProtocolError on a malformed reply, Timeout when the child is
    /// silent for longer than the timeout.
    [[nodiscard]] Prediction predict(std::span<const double> x) const override;
    [[nodiscard]] std::size_t num_classes() const override { return num_classes_; }
    [[nodiscard]] std::optional<std::size_t> num_features() const override { return num_features_; }
    [[nodiscard]] bool thread_safe() const override { return false; }

  private:
    void shutdown() noexcept;
    std::string read_line() const;

    std::size_t num_classes_;
    std::optional<std::size_t> num_features_;
    std::chrono::milliseconds timeout_;
    pid_t pid_ = -1;
    int to_child_ = -1;
    int from_child_ = -1;
    mutable std::string buffer_;
    mutable std::mutex mutex_;
};

/// Parses one reply line into a Prediction. Throws ProtocolError.
[[nodiscard]] Prediction parse_reply(const std::string& line, std::size_t num_classes);

}  // namespace advdist
