#pragma once

#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <string>

#include "xlda/types.hpp"

namespace xlda {

// Line-oriented child process: one request line in, one response line out.
// Used by the translator and trainer plug-in protocols. The command is run
// through /bin/sh so pipelines and arguments work.
class LineSubprocess {
public:
    explicit LineSubprocess(const std::string& command) : command_(command) {
        int to_child[2];
        int from_child[2];
        if (pipe(to_child) != 0 || pipe(from_child) != 0)
            throw Error("pipe() failed: " + std::string(std::strerror(errno)));
        pid_ = fork();
        if (pid_ < 0) throw Error("fork() failed: " + std::string(std::strerror(errno)));
        if (pid_ == 0) {
            dup2(to_child[0], STDIN_FILENO);
            dup2(from_child[1], STDOUT_FILENO);
            close(to_child[0]);
            close(to_child[1]);
            close(from_child[0]);
            close(from_child[1]);
            execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
            _exit(127);
        }
        close(to_child[0]);
        close(from_child[1]);
        in_fd_ = to_child[1];
        out_fd_ = from_child[0];
    }

    LineSubprocess(const LineSubprocess&) = delete;
    LineSubprocess& operator=(const LineSubprocess&) = delete;

    ~LineSubprocess() { shutdown(); }

    std::string roundtrip(const std::string& line) {
        write_line(line);
        return read_line();
    }

    void write_line(const std::string& line) {
        std::string payload = line;
        payload.push_back('\n');
        size_t off = 0;
        while (off < payload.size()) {
            ssize_t n = ::write(in_fd_, payload.data() + off, payload.size() - off);
            if (n < 0) {
                if (errno == EINTR) continue;
                throw Error("subprocess '" + command_ + "': write failed: " + std::strerror(errno));
            }
            off += static_cast<size_t>(n);
        }
    }

    std::string read_line() {
        for (;;) {
            auto nl = buffer_.find('\n');
            if (nl != std::string::npos) {
                std::string line = buffer_.substr(0, nl);
                buffer_.erase(0, nl + 1);
                if (!line.empty() && line.back() == '\r') line.pop_back();
                return line;
            }
            char chunk[4096];
            ssize_t n = ::read(out_fd_, chunk, sizeof(chunk));
            if (n < 0) {
                if (errno == EINTR) continue;
                throw Error("subprocess '" + command_ + "': read failed: " + std::strerror(errno));
            }
            if (n == 0) throw Error("subprocess '" + command_ + "' closed its output before replying");
            buffer_.append(chunk, static_cast<size_t>(n));
        }
    }

    // Close stdin and reap. Returns the child's exit status.
    int shutdown() {
        if (pid_ < 0) return status_;
        close(in_fd_);
        close(out_fd_);
        int status = 0;
        waitpid(pid_, &status, 0);
        pid_ = -1;
        status_ = WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
        return status_;
    }

private:
    std::string command_;
    pid_t pid_ = -1;
    int in_fd_ = -1;
    int out_fd_ = -1;
    int status_ = 0;
    std::string buffer_;
};

}  // namespace xlda
