#pragma once

// Request dispatch shared by the HTTP service and the command-line tool.
// Every endpoint is a pure function of (catalog snapshot, request), so the
// CLI's `--format json` output is the same body the service would return.

#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "marvin/catalog.hpp"
#include "marvin/containerizer.hpp"
#include "marvin/json_io.hpp"

namespace marvin {

struct ApiRequest {
  std::string method;
  std::string path;
  std::multimap<std::string, std::string> params;
  std::string body;
};

struct ApiResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

/// Maps an operation error code onto an HTTP status in {400, 404, 409, 500}.
int status_for(const std::string &code);

ApiResponse error_response(int status, const std::string &code, const std::string &detail,
                           const std::vector<Violation> &violations = {},
                           const FlagSet *unmet = nullptr);

/// Builds a SearchQuery from `q` / `filter.<field>` / `page` / `page_size`
/// parameters. Throws Error BAD_QUERY.
SearchQuery query_from_params(DocKind kind, const std::multimap<std::string, std::string> &params);

class Gateway {
 public:
  Gateway(Catalog &catalog, ContainerConfig containers = {});

  /// Endpoint dispatch; never throws.
  ApiResponse handle(const ApiRequest &req) const;

  ApiResponse health() const;
  ApiResponse vocabulary() const;
  ApiResponse search(const SearchQuery &q) const;
  ApiResponse ingest(DocKind kind, const std::string &body) const;
  ApiResponse fetch(DocKind kind, const std::string &id,
                    const std::optional<std::string> &version) const;
  /// Body: {dataset_id | dataset, problem_id | problem, k?, max_depth?}.
  ApiResponse plan(const std::string &body) const;
  /// Body: {pipeline, dataset_id | dataset?, problem_id | problem?}; missing
  /// references resolve from the pipeline's own ids.
  ApiResponse validate(const std::string &body) const;
  ApiResponse dockerfile(const std::string &pipeline_body) const;
  ApiResponse manifest(const std::string &pipeline_body, const std::string &image_ref) const;

  Catalog &catalog() const { return catalog_; }

 private:
  Catalog &catalog_;
  ContainerConfig containers_;
};

struct ServerConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::filesystem::path store_root = "marvin-store";
  ContainerConfig containers;
  std::optional<std::filesystem::path> ui_root;
};

/// Applies a JSON config file (keys: host, port, store_root, data_mount,
/// ui_root, base_image_tags{nlp,image,full}) then MARVIN_PORT / MARVIN_STORE.
/// Throws Error BAD_CONFIG.
ServerConfig load_server_config(const std::optional<std::filesystem::path> &config_file);

/// HTTP/1.1 front end over a Gateway.
class Server {
 public:
  /// Opens the store and rebuilds the index. Throws Error STORE_UNREADABLE.
  explicit Server(ServerConfig config);
  ~Server();

  Server(const Server &) = delete;
  Server &operator=(const Server &) = delete;

  /// Binds the listening socket; port 0 picks a free port. Returns the
  /// bound port. Throws Error PORT_IN_USE.
  int bind();
  /// Serves until stop(). bind() must have succeeded.
  void run();
  /// Stops accepting and lets in-flight requests finish.
  void stop();
  /// Blocks until run() is accepting connections.
  void wait_until_ready() const;

  int port() const { return port_; }
  Catalog &catalog() { return *catalog_; }

 private:
  struct Impl;
  ServerConfig config_;
  std::unique_ptr<Catalog> catalog_;
  std::unique_ptr<Gateway> gateway_;
  std::unique_ptr<Impl> impl_;
  int port_ = 0;
};

/// Command-line entry point; returns the process exit code
/// (0 success, 1 validation or operational failure, 2 usage error).
int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

}  // namespace marvin
