#pragma once

#include <string>
#include <vector>

namespace draformer::log {

/// Emits a warning on stderr. While a WarningCapture is alive on the
/// calling thread the message is recorded there instead.
void warn(const std::string& message);

/// Collects warnings raised on the current thread for its lifetime.
class WarningCapture {
 public:
  WarningCapture();
  ~WarningCapture();
  WarningCapture(const WarningCapture&) = delete;
  WarningCapture& operator=(const WarningCapture&) = delete;

  const std::vector<std::string>& messages() const { return messages_; }
  bool contains(const std::string& needle) const;

 private:
  friend void warn(const std::string& message);
  std::vector<std::string> messages_;
  WarningCapture* previous_;
};

}  // namespace draformer::log
