#pragma once

#include <string>
#include <sys/types.h>
#include <vector>

namespace autostgcn {

/// Child process with line-oriented pipes on its stdin/stdout.
/// stderr is inherited. The destructor kills and reaps the child.
class Subprocess {
 public:
  enum class ReadStatus { Line, Timeout, Eof };

  // argv[0] is resolved through PATH. Throws std::system_error on failure.
  explicit Subprocess(const std::vector<std::string>& argv);
  ~Subprocess();

  Subprocess(const Subprocess&) = delete;
  Subprocess& operator=(const Subprocess&) = delete;

  // Appends '\n'. Returns false if the pipe is closed.
  bool write_line(const std::string& line);

  // Reads up to the next '\n' (stripped) within timeout_ms.
  ReadStatus read_line(std::string& line, int timeout_ms);

  void close_stdin();
  // Waits up to grace_ms for exit, then SIGKILLs. Returns the wait status.
  int terminate(int grace_ms);
  bool running();
  pid_t pid() const { return pid_; }

 private:
  pid_t pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  bool reaped_ = false;
  int status_ = 0;
  std::string buffer_;
};

}  // namespace autostgcn
