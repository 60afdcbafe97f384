#include "dv/subprocess.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "dv/error.hpp"

namespace dv {

namespace {

struct Pipe {
    int fds[2] = {-1, -1};
    bool open_pipe() { return ::pipe(fds) == 0; }
    void close_read() {
        if (fds[0] >= 0) ::close(fds[0]);
        fds[0] = -1;
    }
    void close_write() {
        if (fds[1] >= 0) ::close(fds[1]);
        fds[1] = -1;
    }
    ~Pipe() {
        close_read();
        close_write();
    }
};

// Writing to a child that exited early must not kill the parent.
void ignore_sigpipe_once() {
    static const bool done = [] {
        struct sigaction sa {};
        sa.sa_handler = SIG_IGN;
        ::sigaction(SIGPIPE, &sa, nullptr);
        return true;
    }();
    (void)done;
}

}  // namespace

CommandResult run_command(const std::string& command, const std::string& stdin_data,
                          std::chrono::milliseconds timeout) {
    ignore_sigpipe_once();

    Pipe in, out, err;
    if (!in.open_pipe() || !out.open_pipe() || !err.open_pipe())
        throw Error("subprocess: pipe() failed: " + std::string(std::strerror(errno)));

    pid_t pid = ::fork();
    if (pid < 0) throw Error("subprocess: fork() failed: " + std::string(std::strerror(errno)));

    if (pid == 0) {
        ::dup2(in.fds[0], STDIN_FILENO);
        ::dup2(out.fds[1], STDOUT_FILENO);
        ::dup2(err.fds[1], STDERR_FILENO);
        for (int* fd : {&in.fds[0], &in.fds[1], &out.fds[0], &out.fds[1], &err.fds[0],
                        &err.fds[1]}) {
            ::close(*fd);
        }
        ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
        ::_exit(127);
    }

    in.close_read();
    out.close_write();
    err.close_write();

    // Requests are small, well under PIPE_BUF-scale buffers; write everything
    // up front, then read until EOF or deadline.
    size_t written = 0;
    while (written < stdin_data.size()) {
        ssize_t n = ::write(in.fds[1], stdin_data.data() + written, stdin_data.size() - written);
        if (n < 0) {
            if (errno == EINTR) continue;
            break;  // EPIPE: the child closed stdin early
        }
        written += static_cast<size_t>(n);
    }
    in.close_write();

    CommandResult result;
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    bool out_open = true, err_open = true;
    char buf[4096];

    while (out_open || err_open) {
        auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(
            deadline - std::chrono::steady_clock::now());
        if (remaining.count() <= 0) {
            result.timed_out = true;
            break;
        }
        struct pollfd fds[2];
        nfds_t n = 0;
        if (out_open) fds[n++] = {out.fds[0], POLLIN, 0};
        if (err_open) fds[n++] = {err.fds[0], POLLIN, 0};
        int rc = ::poll(fds, n, static_cast<int>(remaining.count()));
        if (rc < 0) {
            if (errno == EINTR) continue;
            break;
        }
        if (rc == 0) {
            result.timed_out = true;
            break;
        }
        for (nfds_t i = 0; i < n; ++i) {
            if (!(fds[i].revents & (POLLIN | POLLHUP | POLLERR))) continue;
            bool is_out = fds[i].fd == out.fds[0];
            ssize_t got = ::read(fds[i].fd, buf, sizeof buf);
            if (got > 0) {
                (is_out ? result.out : result.err).append(buf, static_cast<size_t>(got));
            } else {
                if (is_out)
                    out_open = false;
                else
                    err_open = false;
            }
        }
    }

    if (result.timed_out) {
        ::kill(pid, SIGKILL);
    }
    int status = 0;
    while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
    }
    if (WIFEXITED(status))
        result.exit_code = WEXITSTATUS(status);
    else if (WIFSIGNALED(status))
        result.exit_code = 128 + WTERMSIG(status);
    return result;
}

}  // namespace dv
