#include "mergemine/proc.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>

#include "mergemine/errors.hpp"

extern char** environ;

namespace mergemine {
namespace {

using Clock = std::chrono::steady_clock;

std::int64_t ms_since(Clock::time_point start) {
    return std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() -
                                                                 start)
        .count();
}

[[noreturn]] void child_exec(const std::vector<std::string>& argv,
                             const ProcOptions& opts, int out_fd, int err_fd,
                             int status_fd) {
    setpgid(0, 0);
    if (opts.stdin_file) {
        int in = open(opts.stdin_file->c_str(), O_RDONLY);
        if (in < 0) {
            int e = errno;
            (void)!write(status_fd, &e, sizeof(e));
            _exit(127);
        }
        dup2(in, STDIN_FILENO);
        close(in);
    } else {
        int devnull = open("/dev/null", O_RDONLY);
        if (devnull >= 0) {
            dup2(devnull, STDIN_FILENO);
            close(devnull);
        }
    }
    dup2(out_fd, STDOUT_FILENO);
    dup2(err_fd, STDERR_FILENO);
    if (!opts.cwd.empty() && chdir(opts.cwd.c_str()) != 0) {
        int e = errno;
        (void)!write(status_fd, &e, sizeof(e));
        _exit(127);
    }
    std::vector<char*> cargv;
    cargv.reserve(argv.size() + 1);
    for (const auto& a : argv) cargv.push_back(const_cast<char*>(a.c_str()));
    cargv.push_back(nullptr);

    std::vector<char*> cenv;
    for (char** e = environ; *e; ++e) cenv.push_back(*e);
    for (const auto& kv : opts.extra_env)
        cenv.push_back(const_cast<char*>(kv.c_str()));
    cenv.push_back(nullptr);

    execvpe(cargv[0], cargv.data(), cenv.data());
    int e = errno;
    (void)!write(status_fd, &e, sizeof(e));
    _exit(127);
}

}  // namespace

ProcResult run_process(const std::vector<std::string>& argv,
                       const ProcOptions& opts) {
    if (argv.empty()) throw ContractError("run_process: empty argv");

    // O_CLOEXEC on every pipe end: a concurrently forked sibling must not
    // inherit this child's descriptors, or its stdout would never reach EOF
    // while the sibling lives. dup2 in the child clears the flag on the
    // stdio copies it actually needs.
    int out_pipe[2], err_pipe[2], status_pipe[2];
    if (pipe2(out_pipe, O_CLOEXEC) != 0 || pipe2(err_pipe, O_CLOEXEC) != 0 ||
        pipe2(status_pipe, O_CLOEXEC) != 0)
        throw Error("pipe2() failed: " + std::string(std::strerror(errno)));

    const auto start = Clock::now();
    pid_t pid = fork();
    if (pid < 0) throw Error("fork() failed: " + std::string(std::strerror(errno)));
    if (pid == 0) {
        close(out_pipe[0]);
        close(err_pipe[0]);
        close(status_pipe[0]);
        child_exec(argv, opts, out_pipe[1], err_pipe[1], status_pipe[1]);
    }
    close(out_pipe[1]);
    close(err_pipe[1]);
    close(status_pipe[1]);

    ProcResult res;
    struct pollfd fds[2] = {{out_pipe[0], POLLIN, 0}, {err_pipe[0], POLLIN, 0}};
    std::string* sinks[2] = {&res.out, &res.err};
    int open_fds = 2;
    bool killed = false;
    char buf[65536];

    while (open_fds > 0) {
        int wait_ms = -1;
        if (opts.timeout_ms >= 0 && !killed) {
            std::int64_t left = opts.timeout_ms - ms_since(start);
            wait_ms = left > 0 ? static_cast<int>(left) : 0;
        }
        int rc = poll(fds, 2, wait_ms);
        if (rc < 0) {
            if (errno == EINTR) continue;
            break;
        }
        if (rc == 0) {
            // Deadline hit: kill the whole process group and drain pipes.
            kill(-pid, SIGKILL);
            killed = true;
            res.timed_out = true;
            continue;
        }
        for (int i = 0; i < 2; ++i) {
            if (fds[i].fd < 0) continue;
            if (fds[i].revents & (POLLIN | POLLHUP)) {
                ssize_t n = read(fds[i].fd, buf, sizeof(buf));
                if (n > 0) {
                    sinks[i]->append(buf, static_cast<std::size_t>(n));
                } else if (n == 0 || (n < 0 && errno != EINTR)) {
                    close(fds[i].fd);
                    fds[i].fd = -1;
                    --open_fds;
                }
            } else if (fds[i].revents & (POLLERR | POLLNVAL)) {
                close(fds[i].fd);
                fds[i].fd = -1;
                --open_fds;
            }
        }
    }

    int status = 0;
    while (waitpid(pid, &status, 0) < 0 && errno == EINTR) {
    }
    res.elapsed_ms = ms_since(start);
    if (res.timed_out && opts.timeout_ms >= 0 && res.elapsed_ms < opts.timeout_ms)
        res.elapsed_ms = opts.timeout_ms;

    int spawn_errno = 0;
    ssize_t n = read(status_pipe[0], &spawn_errno, sizeof(spawn_errno));
    close(status_pipe[0]);
    if (n == static_cast<ssize_t>(sizeof(spawn_errno)))
        throw ConfigError("cannot execute '" + argv[0] +
                          "': " + std::strerror(spawn_errno));

    if (WIFEXITED(status)) {
        res.exit_code = WEXITSTATUS(status);
    } else if (WIFSIGNALED(status)) {
        res.signaled = true;
        res.exit_code = 128 + WTERMSIG(status);
    }
    return res;
}

}  // namespace mergemine
