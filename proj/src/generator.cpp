#include "mrbt/generator.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "mrbt/util.hpp"

namespace mrbt {

ScriptedGenerator::ScriptedGenerator(std::vector<std::string> responses)
    : responses_(responses.begin(), responses.end()) {}

ScriptedGenerator ScriptedGenerator::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read mock script: " + path);
  std::vector<std::string> responses;
  std::string line;
  std::string cur;
  while (std::getline(in, line)) {
    if (trim(line) == "===") {
      responses.push_back(cur);
      cur.clear();
    } else {
      cur += line;
      cur += '\n';
    }
  }
  if (!trim(cur).empty()) responses.push_back(cur);
  return ScriptedGenerator(std::move(responses));
}

std::string ScriptedGenerator::complete(const std::vector<ChatMessage>&) {
  if (responses_.empty())
    throw std::runtime_error("mock generator ran out of scripted responses");
  std::string r = std::move(responses_.front());
  responses_.pop_front();
  return r;
}

HttpChatGenerator::HttpChatGenerator(std::string url, std::string api_key, std::string model)
    : url_(std::move(url)), api_key_(std::move(api_key)), model_(std::move(model)) {
  if (url_.empty()) throw std::invalid_argument("chat generator needs a URL");
}

HttpChatGenerator HttpChatGenerator::from_env() {
  const char* url = std::getenv("MRBT_CHAT_URL");
  const char* key = std::getenv("MRBT_CHAT_API_KEY");
  const char* model = std::getenv("MRBT_CHAT_MODEL");
  if (!url)
    throw std::runtime_error(
        "MRBT_CHAT_URL is not set; configure the chat endpoint or use the mock generator");
  return HttpChatGenerator(url, key ? key : "", model ? model : "default");
}

std::string HttpChatGenerator::complete(const std::vector<ChatMessage>& messages) {
  auto scheme_end = url_.find("://");
  if (scheme_end == std::string::npos) throw std::runtime_error("bad chat URL: " + url_);
  auto path_start = url_.find('/', scheme_end + 3);
  std::string base = path_start == std::string::npos ? url_ : url_.substr(0, path_start);
  std::string path = path_start == std::string::npos ? "/v1/chat/completions"
                                                     : url_.substr(path_start);

  nlohmann::json body;
  body["model"] = model_;
  body["messages"] = nlohmann::json::array();
  for (const auto& m : messages) {
    body["messages"].push_back({{"role", m.role}, {"content", m.content}});
  }

  httplib::Client client(base);
  client.set_read_timeout(120, 0);
  httplib::Headers headers;
  if (!api_key_.empty()) headers.insert({"Authorization", "Bearer " + api_key_});
  auto res = client.Post(path, headers, body.dump(), "application/json");
  if (!res) throw std::runtime_error("chat request failed: no response from " + base);
  if (res->status != 200)
    throw std::runtime_error("chat request failed: HTTP " + std::to_string(res->status) + " " +
                             res->body);
  nlohmann::json reply = nlohmann::json::parse(res->body);
  if (!reply.contains("choices") || reply["choices"].empty())
    throw std::runtime_error("chat reply has no choices");
  return reply["choices"][0]["message"]["content"].get<std::string>();
}

}  // namespace mrbt
