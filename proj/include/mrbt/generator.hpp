#pragma once

#include <deque>
#include <string>
#include <vector>

namespace mrbt {

struct ChatMessage {
  std::string role;  // "system" | "user" | "assistant"
  std::string content;
};

// Text completion backend for the decomposition pipeline.
class Generator {
 public:
  virtual ~Generator() = default;
  virtual std::string complete(const std::vector<ChatMessage>& messages) = 0;
  virtual std::string id() const = 0;
};

// Replays a fixed list of canned responses; used for tests and offline
// reproduction of refinement sessions.
class ScriptedGenerator : public Generator {
 public:
  explicit ScriptedGenerator(std::vector<std::string> responses);

  // File format: responses separated by lines containing only "===".
  static ScriptedGenerator from_file(const std::string& path);

  std::string complete(const std::vector<ChatMessage>& messages) override;
  std::string id() const override { return "mock"; }
  int remaining() const { return static_cast<int>(responses_.size()); }

 private:
  std::deque<std::string> responses_;
};

// Chat-completions HTTP client. Configure explicitly or from the
// environment (MRBT_CHAT_URL, MRBT_CHAT_API_KEY, MRBT_CHAT_MODEL).
class HttpChatGenerator : public Generator {
 public:
  HttpChatGenerator(std::string url, std::string api_key, std::string model);
  static HttpChatGenerator from_env();

  std::string complete(const std::vector<ChatMessage>& messages) override;
  std::string id() const override { return "http:" + model_; }

 private:
  std::string url_;
  std::string api_key_;
  std::string model_;
};

}  // namespace mrbt
