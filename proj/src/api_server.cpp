#include <chatterbox/annotation_api.hpp>
#include <chatterbox/errors.hpp>

#include <httplib.h>

namespace chatterbox::api {

using nlohmann::json;

struct ApiServer::Impl {
  httplib::Server server;
};

namespace {

void send(httplib::Response& res, const ApiResponse& r) {
  res.status = r.status;
  res.set_content(r.body.dump(), "application/json");
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  return json::parse(req.body);
}

}  // namespace

ApiServer::ApiServer(AnnotationService& svc, ServerOptions opts)
    : impl_(std::make_unique<Impl>()), opts_(std::move(opts)) {
  if (opts_.token.empty()) throw ConfigError("api token must not be empty");
  auto& s = impl_->server;

  s.set_pre_routing_handler([this](const httplib::Request& req, httplib::Response& res) {
    if (req.path == "/api/health") return httplib::Server::HandlerResponse::Unhandled;
    const auto auth = req.get_header_value("Authorization");
    if (auth == "Bearer " + opts_.token || req.get_param_value("token") == opts_.token)
      return httplib::Server::HandlerResponse::Unhandled;
    res.status = 401;
    res.set_content(json{{"error", "unauthorized"}}.dump(), "application/json");
    return httplib::Server::HandlerResponse::Handled;
  });

  s.Get("/api/health", [&svc](const httplib::Request&, httplib::Response& res) { send(res, svc.health()); });
  s.Get("/api/triage", [&svc](const httplib::Request&, httplib::Response& res) { send(res, svc.list_triage()); });
  s.Post("/api/triage/act", [&svc](const httplib::Request& req, httplib::Response& res) {
    send(res, AnnotationService::guarded([&] { return svc.triage_act(parse_body(req)); }));
  });
  s.Get("/api/conversations", [&svc](const httplib::Request& req, httplib::Response& res) {
    std::optional<std::string> platform;
    if (req.has_param("platform")) platform = req.get_param_value("platform");
    send(res, svc.list_conversations(platform));
  });
  s.Get(R"(/api/conversations/([^/]+))", [&svc](const httplib::Request& req, httplib::Response& res) {
    send(res, svc.conversation_view(req.matches[1]));
  });
  s.Post(R"(/api/conversations/([^/]+)/act)", [&svc](const httplib::Request& req, httplib::Response& res) {
    send(res, AnnotationService::guarded([&] { return svc.act(req.matches[1], parse_body(req)); }));
  });
  s.Post(R"(/api/conversations/([^/]+)/candidates)", [&svc](const httplib::Request& req, httplib::Response& res) {
    send(res, AnnotationService::guarded([&] {
      std::optional<int> k;
      if (req.has_param("k")) k = std::stoi(req.get_param_value("k"));
      auto body = parse_body(req);
      return svc.candidates(req.matches[1], k, body.value("annotator_id", std::string{}));
    }));
  });

  if (!opts_.assets_dir.empty() && !s.set_mount_point("/assets", opts_.assets_dir))
    throw ConfigError("assets directory " + opts_.assets_dir + " does not exist");
}

ApiServer::~ApiServer() { stop(); }

int ApiServer::start() {
  auto& s = impl_->server;
  if (opts_.port == 0) port_ = s.bind_to_any_port(opts_.host);
  else port_ = s.bind_to_port(opts_.host, opts_.port) ? opts_.port : -1;
  if (port_ < 0) throw ConfigError("cannot bind " + opts_.host + ":" + std::to_string(opts_.port));
  worker_ = std::thread([&s] { s.listen_after_bind(); });
  s.wait_until_ready();
  return port_;
}

void ApiServer::stop() {
  if (worker_.joinable()) {
    impl_->server.stop();
    worker_.join();
  }
}

}  // namespace chatterbox::api
