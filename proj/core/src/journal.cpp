#include "bolt/journal.hpp"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

#include "bolt/error.hpp"

namespace bolt {
namespace {

[[noreturn]] void io_failure(const std::string& what, const std::filesystem::path& path) {
  throw Error("io_error", what + " '" + path.string() + "': " + std::strerror(errno));
}

std::string read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return {};
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace

JournalWriter::JournalWriter(std::filesystem::path path, bool truncate) : path_(std::move(path)) {
  if (!truncate && std::filesystem::exists(path_)) {
    const std::string content = read_all(path_);
    const auto keep = content.empty() ? 0 : content.rfind('\n') == std::string::npos ? 0 : content.rfind('\n') + 1;
    if (keep != content.size()) std::filesystem::resize_file(path_, keep);
  }
  int flags = O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC;
  if (truncate) flags |= O_TRUNC;
  fd_ = ::open(path_.c_str(), flags, 0644);
  if (fd_ < 0) io_failure("cannot open journal", path_);
}

JournalWriter::~JournalWriter() {
  if (fd_ >= 0) ::close(fd_);
}

void JournalWriter::append(std::string_view line) {
  std::string buffer(line);
  buffer.push_back('\n');
  std::lock_guard lock(mutex_);
  std::size_t written = 0;
  while (written < buffer.size()) {
    const auto n = ::write(fd_, buffer.data() + written, buffer.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      io_failure("cannot write journal", path_);
    }
    written += static_cast<std::size_t>(n);
  }
  if (::fsync(fd_) != 0) io_failure("cannot sync journal", path_);
}

std::vector<std::string> read_journal(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw NotFoundError("journal '" + path.string() + "' does not exist");
  const std::string content = read_all(path);
  std::vector<std::string> lines;
  std::size_t start = 0;
  for (std::size_t nl = content.find('\n'); nl != std::string::npos; nl = content.find('\n', start)) {
    if (nl > start) lines.emplace_back(content.substr(start, nl - start));
    start = nl + 1;
  }
  return lines;
}

std::string format_double(double value) {
  char buffer[64];
  const auto r = std::to_chars(buffer, buffer + sizeof buffer, value);
  return std::string(buffer, r.ptr);
}

}  // namespace bolt
