// Copyright 2026 The dialect-forge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dforge/backend.hpp"

#include <fcntl.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <map>
#include <mutex>
#include <thread>
#include <unordered_map>

#include "dforge/error.hpp"

extern char** environ;

namespace dforge {

namespace {

using Clock = std::chrono::steady_clock;

void ignore_sigpipe() {
  static std::once_flag once;
  std::call_once(once, [] { ::signal(SIGPIPE, SIG_IGN); });
}

class ChildProcess {
 public:
  explicit ChildProcess(const std::string& command) {
    ignore_sigpipe();
    int in_pipe[2], out_pipe[2];
    if (::pipe2(in_pipe, O_CLOEXEC) != 0) throw BackendError("pipe: " + std::string(std::strerror(errno)));
    if (::pipe2(out_pipe, O_CLOEXEC) != 0) {
      ::close(in_pipe[0]);
      ::close(in_pipe[1]);
      throw BackendError("pipe: " + std::string(std::strerror(errno)));
    }

    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_adddup2(&actions, in_pipe[0], STDIN_FILENO);
    posix_spawn_file_actions_adddup2(&actions, out_pipe[1], STDOUT_FILENO);
    posix_spawnattr_t attr;
    posix_spawnattr_init(&attr);
    posix_spawnattr_setflags(&attr, POSIX_SPAWN_SETPGROUP);
    posix_spawnattr_setpgroup(&attr, 0);

    std::string shell = "/bin/sh", dash_c = "-c", cmd = command;
    char* argv[] = {shell.data(), dash_c.data(), cmd.data(), nullptr};
    const int rc = ::posix_spawn(&pid_, "/bin/sh", &actions, &attr, argv, environ);
    posix_spawn_file_actions_destroy(&actions);
    posix_spawnattr_destroy(&attr);
    ::close(in_pipe[0]);
    ::close(out_pipe[1]);
    if (rc != 0) {
      ::close(in_pipe[1]);
      ::close(out_pipe[0]);
      throw BackendError("cannot start backend '" + command + "': " + std::strerror(rc));
    }
    stdin_fd_ = in_pipe[1];
    stdout_fd_ = out_pipe[0];
  }

  ChildProcess(const ChildProcess&) = delete;
  ChildProcess& operator=(const ChildProcess&) = delete;

  ~ChildProcess() {
    kill_and_reap();
    close_stdin();
    if (stdout_fd_ >= 0) ::close(stdout_fd_);
  }

  int stdout_fd() const noexcept { return stdout_fd_; }

  // False once the backend has closed its end.
  bool write_line(const std::string& line) {
    if (stdin_fd_ < 0) return false;
    std::string buf = line;
    buf.push_back('\n');
    const char* p = buf.data();
    std::size_t left = buf.size();
    while (left > 0) {
      const ssize_t n = ::write(stdin_fd_, p, left);
      if (n < 0) {
        if (errno == EINTR) continue;
        return false;
      }
      p += n;
      left -= static_cast<std::size_t>(n);
    }
    return true;
  }

  void close_stdin() {
    if (stdin_fd_ >= 0) ::close(stdin_fd_);
    stdin_fd_ = -1;
  }

  // Waits up to `grace` for a clean exit, then kills the process group.
  // Returns the wait status.
  int wait_for_exit(std::chrono::milliseconds grace) {
    if (reaped_) return status_;
    const auto deadline = Clock::now() + grace;
    while (Clock::now() < deadline) {
      const pid_t r = ::waitpid(pid_, &status_, WNOHANG);
      if (r == pid_) {
        reaped_ = true;
        return status_;
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
    kill_and_reap();
    return status_;
  }

  void kill_and_reap() {
    if (reaped_ || pid_ <= 0) return;
    ::kill(-pid_, SIGKILL);
    while (::waitpid(pid_, &status_, 0) < 0 && errno == EINTR) {
    }
    reaped_ = true;
  }

 private:
  pid_t pid_ = -1;
  int stdin_fd_ = -1;
  int stdout_fd_ = -1;
  int status_ = 0;
  bool reaped_ = false;
};

// Filled by the reader thread, drained by the driver loop.
struct LineQueue {
  std::mutex mu;
  std::condition_variable cv;
  std::deque<std::string> lines;
  bool eof = false;
};

void read_lines(int fd, LineQueue& queue) {
  std::string partial;
  char buf[65536];
  for (;;) {
    const ssize_t n = ::read(fd, buf, sizeof buf);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) break;
    std::vector<std::string> complete;
    for (ssize_t k = 0; k < n; ++k) {
      if (buf[k] == '\n') {
        complete.push_back(std::move(partial));
        partial.clear();
      } else {
        partial.push_back(buf[k]);
      }
    }
    if (!complete.empty()) {
      std::lock_guard lk(queue.mu);
      for (auto& l : complete) queue.lines.push_back(std::move(l));
      queue.cv.notify_all();
    }
  }
  std::lock_guard lk(queue.mu);
  if (!partial.empty()) queue.lines.push_back(std::move(partial));
  queue.eof = true;
  queue.cv.notify_all();
}

// Owns the child and its reader thread; tearing down kills the child first
// so the blocked read returns.
struct Session {
  explicit Session(const std::string& command)
      : child(command), reader([this] { read_lines(child.stdout_fd(), queue); }) {}
  ~Session() {
    child.kill_and_reap();
    if (reader.joinable()) reader.join();
  }

  ChildProcess child;
  LineQueue queue;
  std::thread reader;
};

std::string describe_status(int status) {
  if (WIFEXITED(status)) return "exit status " + std::to_string(WEXITSTATUS(status));
  if (WIFSIGNALED(status)) return "signal " + std::to_string(WTERMSIG(status));
  return "status " + std::to_string(status);
}

}  // namespace

namespace detail {

LineRun run_lines(const BackendOptions& options, const std::vector<std::string>& ids,
                  const std::vector<std::string>& request_lines) {
  const std::size_t total = ids.size();
  LineRun run;
  run.outcomes.resize(total);
  if (total == 0) return run;
  if (options.parallelism == 0) throw DataError("parallelism must be >= 1");

  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < total; ++i)
    if (!index.emplace(ids[i], i).second)
      throw DataError("duplicate request id '" + ids[i] + "'");

  Session session(options.command);
  std::vector<bool> done(total, false), timed_out(total, false);
  std::map<std::size_t, Clock::time_point> inflight;
  std::size_t next = 0, completed = 0;
  bool input_closed = false;
  bool eof = false;

  while (completed < total) {
    while (!input_closed && next < total && inflight.size() < options.parallelism) {
      if (!session.child.write_line(request_lines[next])) {
        input_closed = true;
        break;
      }
      inflight.emplace(next, Clock::now() + options.timeout);
      ++next;
    }

    std::deque<std::string> lines;
    {
      std::unique_lock lk(session.queue.mu);
      auto ready = [&] { return !session.queue.lines.empty() || session.queue.eof; };
      if (inflight.empty()) {
        session.queue.cv.wait(lk, ready);
      } else {
        Clock::time_point earliest = Clock::time_point::max();
        for (const auto& [i, deadline] : inflight) earliest = std::min(earliest, deadline);
        session.queue.cv.wait_until(lk, earliest, ready);
      }
      lines.swap(session.queue.lines);
      eof = session.queue.eof;
    }

    for (auto& line : lines) {
      if (protocol::is_end_record(line)) continue;
      std::string id;
      try {
        id = protocol::response_id(line);
      } catch (const ProtocolError& e) {
        throw ProtocolError(std::string(e.what()) + " in backend output: " + line);
      }
      auto it = index.find(id);
      if (it == index.end() || it->second >= next)
        throw ProtocolError("backend answered unknown id '" + id + "'");
      const std::size_t i = it->second;
      if (done[i]) {
        if (timed_out[i]) continue;
        throw ProtocolError("backend sent a duplicate response for id '" + id + "'");
      }
      run.outcomes[i].line = std::move(line);
      done[i] = true;
      inflight.erase(i);
      ++completed;
    }

    const auto now = Clock::now();
    for (auto it = inflight.begin(); it != inflight.end();) {
      if (it->second <= now) {
        run.outcomes[it->first].error =
            "timeout after " + std::to_string(options.timeout.count()) + " ms";
        done[it->first] = timed_out[it->first] = true;
        ++completed;
        it = inflight.erase(it);
      } else {
        ++it;
      }
    }

    if (eof && completed < total) {
      for (std::size_t i = 0; i < total; ++i) {
        if (done[i]) continue;
        run.outcomes[i].error = "backend exited before responding";
        done[i] = true;
        ++completed;
      }
      run.backend_failed = true;
    }
  }

  if (!eof) {
    session.child.write_line(std::string(protocol::kEndRecord));
    session.child.close_stdin();
  }
  const int status = session.child.wait_for_exit(std::chrono::seconds(5));
  const bool answered_any = std::any_of(run.outcomes.begin(), run.outcomes.end(),
                                        [](const LineOutcome& o) { return o.line.has_value(); });
  if (!answered_any && WIFEXITED(status) && WEXITSTATUS(status) == 127)
    throw BackendError("cannot start backend '" + options.command + "' (command not found)");
  if (!(WIFEXITED(status) && WEXITSTATUS(status) == 0)) {
    run.backend_failed = true;
    run.failure = "backend ended with " + describe_status(status);
  } else if (run.backend_failed) {
    run.failure = "backend closed its output before answering every request";
  }
  return run;
}

}  // namespace detail

BackendRun<AsrResponse> run_asr(const BackendOptions& options,
                                std::span<const AsrRequest> requests) {
  std::vector<std::string> ids, lines;
  for (const auto& r : requests) {
    ids.push_back(r.id);
    lines.push_back(protocol::serialize(r));
  }
  auto raw = detail::run_lines(options, ids, lines);
  BackendRun<AsrResponse> run{{}, raw.backend_failed, raw.failure};
  for (std::size_t i = 0; i < requests.size(); ++i) {
    auto& o = raw.outcomes[i];
    if (o.line) {
      run.responses.push_back(protocol::parse_asr_response(*o.line));
    } else {
      AsrResponse r;
      r.id = requests[i].id;
      r.error = o.error;
      run.responses.push_back(std::move(r));
    }
  }
  return run;
}

BackendRun<TtsResponse> run_tts(const BackendOptions& options,
                                std::span<const TtsRequest> requests) {
  std::vector<std::string> ids, lines;
  for (const auto& r : requests) {
    ids.push_back(r.id);
    lines.push_back(protocol::serialize(r));
  }
  auto raw = detail::run_lines(options, ids, lines);
  BackendRun<TtsResponse> run{{}, raw.backend_failed, raw.failure};
  for (std::size_t i = 0; i < requests.size(); ++i) {
    auto& o = raw.outcomes[i];
    if (o.line) {
      run.responses.push_back(protocol::parse_tts_response(*o.line));
    } else {
      TtsResponse r;
      r.id = requests[i].id;
      r.error = o.error;
      run.responses.push_back(std::move(r));
    }
  }
  return run;
}

}  // namespace dforge
