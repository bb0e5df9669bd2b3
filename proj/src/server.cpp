#include <httplib.h>

#include "marvin/gateway.hpp"

namespace marvin {

struct Server::Impl {
  httplib::Server http;
};

Server::Server(ServerConfig config)
    : config_(std::move(config)),
      catalog_(std::make_unique<Catalog>(config_.store_root)),
      gateway_(std::make_unique<Gateway>(*catalog_, config_.containers)),
      impl_(std::make_unique<Impl>()) {
  auto dispatch = [this](const httplib::Request &req, httplib::Response &res) {
    ApiRequest api{req.method, req.path, {req.params.begin(), req.params.end()}, req.body};
    auto out = gateway_->handle(api);
    res.status = out.status;
    res.set_content(out.body, out.content_type);
  };
  // httplib's default also sets SO_REUSEPORT, which lets a second server
  // share the port silently instead of failing with PORT_IN_USE.
  impl_->http.set_socket_options([](socket_t sock) {
    int yes = 1;
    ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const char *>(&yes), sizeof(yes));
  });
  if (config_.ui_root && std::filesystem::is_directory(*config_.ui_root))
    impl_->http.set_mount_point("/ui", config_.ui_root->string());
  impl_->http.Get(R"(/.*)", dispatch);
  impl_->http.Post(R"(/.*)", dispatch);
}

Server::~Server() { stop(); }

int Server::bind() {
  if (config_.port == 0) {
    port_ = impl_->http.bind_to_any_port(config_.host);
    if (port_ < 0) throw Error("PORT_IN_USE", "cannot bind any port on " + config_.host);
  } else {
    if (!impl_->http.bind_to_port(config_.host, config_.port))
      throw Error("PORT_IN_USE", "cannot bind " + config_.host + ":" + std::to_string(config_.port));
    port_ = config_.port;
  }
  return port_;
}

void Server::run() { impl_->http.listen_after_bind(); }

void Server::wait_until_ready() const { impl_->http.wait_until_ready(); }

void Server::stop() {
  if (impl_ && impl_->http.is_running()) impl_->http.stop();
}

}  // namespace marvin
