#pragma once

#include <filesystem>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

namespace bolt {

// Append-only JSON Lines file. Each append is one write of line + '\n'
// followed by fsync, so a crash leaves at most one torn final line.
class JournalWriter {
 public:
  // Opens for append, dropping any torn tail. `truncate` starts a fresh file.
  explicit JournalWriter(std::filesystem::path path, bool truncate = false);
  ~JournalWriter();
  JournalWriter(const JournalWriter&) = delete;
  JournalWriter& operator=(const JournalWriter&) = delete;

  void append(std::string_view line);
  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
  int fd_ = -1;
  std::mutex mutex_;
};

// Complete lines of a journal; a final line without its newline is ignored.
std::vector<std::string> read_journal(const std::filesystem::path& path);

// Shortest decimal that parses back to the same double.
std::string format_double(double value);

}  // namespace bolt
