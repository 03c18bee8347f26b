#include "advdist/external_classifier.hpp"

#include "advdist/error.hpp"
#include "advdist/textio.hpp"

#include <cerrno>
#include <csignal>
#include <cstring>
#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

namespace advdist {

namespace {

void write_all(int fd, std::string_view data) {
    while (!data.empty()) {
        const ssize_t n = ::write(fd, data.data(), data.size());
        if (n < 0) {
            if (errno == EINTR) {
                continue;
            }
            fail(ErrorCode::ProtocolError, std::string("write to classifier failed: ") + std::strerror(errno));
        }
        data.remove_prefix(static_cast<std::size_t>(n));
    }
}

}  // namespace

ExternalClassifier::ExternalClassifier(std::vector<std::string> argv, std::size_t num_classes,
                                       std::optional<std::size_t> num_features, std::chrono::milliseconds timeout)
    : num_classes_(num_classes), num_features_(num_features), timeout_(timeout) {
    require(!argv.empty(), ErrorCode::InvalidArgument, "external classifier needs a command");
    require(num_classes >= 2, ErrorCode::InvalidArgument, "external classifier needs at least two classes");

    int in_pipe[2];
    int out_pipe[2];
    int err_pipe[2];  // close-on-exec; carries errno if exec fails
    if (::pipe(in_pipe) != 0 || ::pipe(out_pipe) != 0 || ::pipe2(err_pipe, O_CLOEXEC) != 0) {
        fail(ErrorCode::ProcessSpawnError, std::string("pipe: ") + std::strerror(errno));
    }
    std::vector<char*> args;
    for (auto& a : argv) {
        args.push_back(a.data());
    }
    args.push_back(nullptr);

    pid_ = ::fork();
    if (pid_ < 0) {
        fail(ErrorCode::ProcessSpawnError, std::string("fork: ") + std::strerror(errno));
    }
    if (pid_ == 0) {
        ::dup2(in_pipe[0], STDIN_FILENO);
        ::dup2(out_pipe[1], STDOUT_FILENO);
        ::close(in_pipe[0]);
        ::close(in_pipe[1]);
        ::close(out_pipe[0]);
        ::close(out_pipe[1]);
        ::close(err_pipe[0]);
        ::execvp(args[0], args.data());
        const int e = errno;
        [[maybe_unused]] auto n = ::write(err_pipe[1], &e, sizeof e);
        ::_exit(127);
    }
    ::close(in_pipe[0]);
    ::close(out_pipe[1]);
    ::close(err_pipe[1]);
    to_child_ = in_pipe[1];
    from_child_ = out_pipe[0];

    int exec_errno = 0;
    ssize_t n;
    do {
        n = ::read(err_pipe[0], &exec_errno, sizeof exec_errno);
    } while (n < 0 && errno == EINTR);
    ::close(err_pipe[0]);
    if (n > 0) {
        shutdown();
        fail(ErrorCode::ProcessSpawnError, "cannot start '" + argv[0] + "': " + std::strerror(exec_errno));
    }
    // A child that dies early must not kill us on the next write.
    std::signal(SIGPIPE, SIG_IGN);
}

ExternalClassifier::~ExternalClassifier() {
    shutdown();
}

void ExternalClassifier::shutdown() noexcept {
    if (to_child_ >= 0) {
        const char quit[] = "quit\n";
        [[maybe_unused]] auto n = ::write(to_child_, quit, sizeof quit - 1);
        ::close(to_child_);
        to_child_ = -1;
    }
    if (from_child_ >= 0) {
        ::close(from_child_);
        from_child_ = -1;
    }
    if (pid_ > 0) {
        int status = 0;
        // give the child a moment to exit on its own before killing it
        for (int i = 0; i < 50; ++i) {
            if (::waitpid(pid_, &status, WNOHANG) == pid_) {
                pid_ = -1;
                return;
            }
            ::usleep(2000);
        }
        ::kill(pid_, SIGKILL);
        ::waitpid(pid_, &status, 0);
        pid_ = -1;
    }
}

std::string ExternalClassifier::read_line() const {
    const auto deadline = std::chrono::steady_clock::now() + timeout_;
    for (;;) {
        if (auto nl = buffer_.find('\n'); nl != std::string::npos) {
            std::string line = buffer_.substr(0, nl);
            buffer_.erase(0, nl + 1);
            return line;
        }
        const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
        if (left.count() <= 0) {
            fail(ErrorCode::Timeout, "classifier did not answer within " + std::to_string(timeout_.count()) + " ms");
        }
        pollfd pfd{from_child_, POLLIN, 0};
        const int ready = ::poll(&pfd, 1, static_cast<int>(left.count()));
        if (ready < 0) {
            if (errno == EINTR) {
                continue;
            }
            fail(ErrorCode::ProtocolError, std::string("poll: ") + std::strerror(errno));
        }
        if (ready == 0) {
            continue;
        }
        char chunk[4096];
        const ssize_t n = ::read(from_child_, chunk, sizeof chunk);
        if (n < 0 && errno == EINTR) {
            continue;
        }
        if (n <= 0) {
            throw ProtocolError("", "classifier closed its output");
        }
        buffer_.append(chunk, static_cast<std::size_t>(n));
    }
}

Prediction parse_reply(const std::string& line, std::size_t num_classes) {
    const auto fields = textio::split(std::string(textio::trim(line)), ' ');
    if (fields.size() != 2) {
        throw ProtocolError(line, "expected '<label> <confidence>'");
    }
    const auto label = textio::parse_int(fields[0]);
    const auto confidence = textio::parse_double(fields[1]);
    if (!label || *label < 0 || static_cast<std::size_t>(*label) >= num_classes) {
        throw ProtocolError(line, "bad label '" + fields[0] + "'");
    }
    if (!confidence || !(*confidence >= 0.0 && *confidence <= 1.0)) {
        throw ProtocolError(line, "confidence out of range: '" + fields[1] + "'");
    }
    return Prediction{static_cast<ClassId>(*label), *confidence};
}

Prediction ExternalClassifier::predict(std::span<const double> x) const {
    if (num_features_ && *num_features_ != x.size()) {
        fail(ErrorCode::DimensionMismatch, "instance has " + std::to_string(x.size()) + " features, expected " +
                                               std::to_string(*num_features_));
    }
    std::lock_guard lock(mutex_);
    require(to_child_ >= 0, ErrorCode::ProcessSpawnError, "classifier process is not running");
    std::string request = "predict ";
    for (std::size_t j = 0; j < x.size(); ++j) {
        if (j > 0) {
            request += ',';
        }
        request += textio::format_double(x[j]);
    }
    request += '\n';
    write_all(to_child_, request);
    return parse_reply(read_line(), num_classes_);
}

}  // namespace advdist
