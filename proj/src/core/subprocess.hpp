#pragma once

#include <optional>
#include <string>

namespace dsk {

// Line-oriented child process over stdin/stdout pipes (POSIX).
class Subprocess {
 public:
  explicit Subprocess(const std::string& command);  // runs via /bin/sh -c
  ~Subprocess();
  Subprocess(const Subprocess&) = delete;
  Subprocess& operator=(const Subprocess&) = delete;

  bool write_line(const std::string& line);
  // One full line (without the newline); nullopt on timeout or closed pipe.
  std::optional<std::string> read_line(int timeout_ms);
  bool running();
  void terminate();

 private:
  int pid_ = -1;
  int in_fd_ = -1;   // child's stdin (we write)
  int out_fd_ = -1;  // child's stdout (we read)
  std::string buffer_;
};

}  // namespace dsk
