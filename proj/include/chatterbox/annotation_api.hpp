#pragma once

#include <chatterbox/runtime.hpp>

#include <atomic>
#include <memory>
#include <optional>
#include <string>
#include <thread>

#include <json.hpp>

namespace chatterbox::api {

struct ApiResponse {
  int status = 200;
  nlohmann::json body;
};

/// Transport-free request handling. Every method returns the HTTP status and
/// document the server would send, so the workflows can be exercised without
/// sockets.
class AnnotationService {
 public:
  explicit AnnotationService(Honeypot& hp) : hp_(hp) {}

  ApiResponse health() const;
  ApiResponse list_triage() const;
  /// Body: {"annotator_id", "actions": [{"thread_id", "verb": "ignore"|"interact",
  /// "opener_index", "expected_version"}]}. Per-row failures do not fail the batch.
  ApiResponse triage_act(const nlohmann::json& body);
  ApiResponse list_conversations(const std::optional<std::string>& platform) const;
  ApiResponse conversation_view(const std::string& thread_id) const;
  /// Body is an annotator action; the thread id comes from the path.
  ApiResponse act(const std::string& thread_id, const nlohmann::json& body);
  ApiResponse candidates(const std::string& thread_id, std::optional<int> k,
                         const std::string& annotator_id);

  /// Runs `fn` and maps library errors onto status codes.
  template <typename F>
  static ApiResponse guarded(F&& fn);

 private:
  Honeypot& hp_;
};

/// Maps an exception currently being handled to a status and error document.
ApiResponse error_response();

struct ServerOptions {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::string token;
  std::string assets_dir;
};

/// HTTP front end over AnnotationService. Requests must carry
/// "Authorization: Bearer <token>" or "?token=<token>"; /api/health is open.
class ApiServer {
 public:
  ApiServer(AnnotationService& svc, ServerOptions opts);
  ~ApiServer();
  ApiServer(const ApiServer&) = delete;
  ApiServer& operator=(const ApiServer&) = delete;

  /// Binds and serves on a background thread; returns the bound port.
  int start();
  void stop();
  int port() const { return port_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  ServerOptions opts_;
  int port_ = 0;
  std::thread worker_;
};

template <typename F>
ApiResponse AnnotationService::guarded(F&& fn) {
  try {
    return fn();
  } catch (...) {
    return error_response();
  }
}

}  // namespace chatterbox::api
