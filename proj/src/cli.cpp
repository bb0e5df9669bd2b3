#include <CLI11.hpp>

#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <pthread.h>

#include "marvin/gateway.hpp"
#include "marvin/planner.hpp"

namespace marvin {

namespace {

namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

std::string slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("BAD_REQUEST", "cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Document kind from the parent directory name, else from its keys.
DocKind sniff_kind(const fs::path &file, const std::string &text) {
  if (auto k = parse_doc_kind(file.parent_path().filename().string())) return *k;
  auto j = parse_json(text);
  if (j && j->is_object()) {
    if (j->contains("task_type")) return DocKind::Problem;
    if (j->contains("modality")) return DocKind::Dataset;
  }
  return DocKind::Primitive;
}

std::string join_flags(const Json &arr) {
  std::string out;
  for (const auto &f : arr) out += (out.empty() ? "" : ", ") + f.get<std::string>();
  return "{" + out + "}";
}

void print_error(const ApiResponse &res, std::ostream &err) {
  auto body = parse_json(res.body);
  if (!body || !body->is_object() || !body->contains("code")) {
    err << "error: HTTP " << res.status << "\n";
    return;
  }
  err << "error: " << (*body)["code"].get<std::string>() << ": "
      << (*body)["detail"].get<std::string>() << "\n";
  for (const auto &v : (*body)["violations"])
    err << "  " << v["code"].get<std::string>() << " " << v["path"].get<std::string>() << ": "
        << v["reason"].get<std::string>() << "\n";
  if (body->contains("unmet")) err << "  unmet: " << join_flags((*body)["unmet"]) << "\n";
}

bool success(const ApiResponse &res) { return res.status >= 200 && res.status < 300; }

int emit(const ApiResponse &res, bool json, std::ostream &out, std::ostream &err,
         const std::function<void(const Json &)> &render) {
  if (!success(res)) {
    if (json) out << res.body;
    else print_error(res, err);
    return kExitFailure;
  }
  if (json) out << res.body;
  else render(*parse_json(res.body));
  return kExitOk;
}

int write_or_print(const std::string &text, const std::string &path, std::ostream &out,
                   std::ostream &err) {
  if (path.empty()) {
    out << text;
    return kExitOk;
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  f << text;
  if (!f) {
    err << "error: cannot write " << path << "\n";
    return kExitFailure;
  }
  return kExitOk;
}

int serve_forever(Server &server, std::ostream &out) {
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);
  std::thread waiter([&server, signals] {
    int sig = 0;
    sigwait(&signals, &sig);
    server.stop();
  });
  waiter.detach();
  out << "listening on port " << server.port() << std::endl;
  server.run();
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
  CLI::App app{"marvin: ML primitive registry, pipeline planner and container spec generator"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string store;
  std::string format = "text";
  std::string config_file;
  app.add_option("--store", store, "Document store root (env MARVIN_STORE)");
  app.add_option("--format", format, "Output format")->check(CLI::IsMember({"text", "json"}));
  app.add_option("--config", config_file, "JSON config file")->check(CLI::ExistingFile);

  auto *ingest_cmd = app.add_subcommand("ingest", "Bulk-ingest every document under a directory");
  std::string ingest_dir;
  ingest_cmd->add_option("dir", ingest_dir)->required()->check(CLI::ExistingDirectory);

  auto *search_cmd = app.add_subcommand("search", "Faceted search");
  std::vector<std::string> terms, filters;
  std::string kind_name = "primitive";
  std::size_t page = 1, page_size = 20;
  search_cmd->add_option("terms", terms, "Free-text terms");
  search_cmd->add_option("--filter", filters, "Facet filter field=value (repeatable)");
  search_cmd->add_option("--kind", kind_name, "primitive | dataset | problem");
  search_cmd->add_option("--page", page);
  search_cmd->add_option("--page-size", page_size);

  auto *get_cmd = app.add_subcommand("get", "Print a stored document");
  std::string get_id, get_version;
  get_cmd->add_option("id", get_id)->required();
  get_cmd->add_option("--version", get_version);
  get_cmd->add_option("--kind", kind_name, "primitive | dataset | problem");

  auto *plan_cmd = app.add_subcommand("plan", "Compose pipelines for a dataset and problem");
  std::string dataset_file, problem_file;
  std::size_t k = 5, max_depth = 4;
  plan_cmd->add_option("--dataset", dataset_file)->required()->check(CLI::ExistingFile);
  plan_cmd->add_option("--problem", problem_file)->required()->check(CLI::ExistingFile);
  plan_cmd->add_option("--k", k);
  plan_cmd->add_option("--max-depth", max_depth);

  auto *validate_cmd = app.add_subcommand("validate", "Replay a pipeline against a dataset");
  std::string pipeline_file;
  validate_cmd->add_option("pipeline", pipeline_file)->required()->check(CLI::ExistingFile);
  validate_cmd->add_option("--dataset", dataset_file)->required()->check(CLI::ExistingFile);
  validate_cmd->add_option("--problem", problem_file)->check(CLI::ExistingFile);

  auto *docker_cmd = app.add_subcommand("dockerize", "Generate a Dockerfile for a pipeline");
  std::string output;
  docker_cmd->add_option("pipeline", pipeline_file)->required()->check(CLI::ExistingFile);
  docker_cmd->add_option("-o,--output", output);

  auto *manifest_cmd = app.add_subcommand("manifest", "Generate a pod manifest for a pipeline");
  std::string image_ref;
  manifest_cmd->add_option("pipeline", pipeline_file)->required()->check(CLI::ExistingFile);
  manifest_cmd->add_option("--image", image_ref)->required();
  manifest_cmd->add_option("-o,--output", output);

  auto *serve_cmd = app.add_subcommand("serve", "Run the HTTP service");
  std::optional<int> port;
  std::string host;
  serve_cmd->add_option("--port", port);
  serve_cmd->add_option("--host", host);

  std::vector<std::string> argv_storage{"marvin"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<const char *> argv;
  for (const auto &a : argv_storage) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError &e) {
    app.exit(e, out, err);
    if (e.get_exit_code() == 0) return kExitOk;
    if (e.get_name() != "CallForHelp") err << app.help();
    return kExitUsage;
  }

  const bool json = format == "json";
  try {
    ServerConfig config =
        load_server_config(config_file.empty() ? std::nullopt
                                                : std::optional<fs::path>(config_file));
    if (!store.empty()) config.store_root = store;

    if (*serve_cmd) {
      if (port) config.port = *port;
      if (!host.empty()) config.host = host;
      Server server(config);
      server.bind();
      return serve_forever(server, out);
    }

    Catalog catalog(config.store_root);
    Gateway gateway(catalog, config.containers);

    if (*ingest_cmd) {
      std::vector<fs::path> files;
      for (const auto &entry : fs::recursive_directory_iterator(ingest_dir)) {
        if (!entry.is_regular_file()) continue;
        if (entry.path().filename().string().front() == '.') continue;
        files.push_back(entry.path());
      }
      std::sort(files.begin(), files.end());
      OrderedJson report = OrderedJson::array();
      std::size_t failed = 0;
      for (const auto &file : files) {
        const std::string text = slurp(file);
        const DocKind kind = sniff_kind(file, text);
        auto res = gateway.ingest(kind, text);
        auto body = OrderedJson::parse(res.body);
        OrderedJson entry;
        entry["file"] = file.string();
        entry["ok"] = success(res);
        entry["result"] = body;
        report.push_back(entry);
        if (success(res)) {
          if (!json) {
            out << "ok   " << file.string() << " -> " << body["kind"].get<std::string>() << " "
                << body["id"].get<std::string>();
            if (body.contains("version")) out << " " << body["version"].get<std::string>();
            out << "\n";
          }
        } else {
          ++failed;
          if (!json) {
            out << "fail " << file.string() << "\n";
            for (const auto &v : body["violations"])
              out << "     " << v["code"].get<std::string>() << " " << v["path"].get<std::string>()
                  << ": " << v["reason"].get<std::string>() << "\n";
            if (body["violations"].empty()) out << "     " << body["detail"].get<std::string>() << "\n";
          }
        }
      }
      if (json) out << dump_canonical(report);
      else out << (files.size() - failed) << " ingested, " << failed << " failed\n";
      return failed == 0 ? kExitOk : kExitFailure;
    }

    auto kind = parse_doc_kind(kind_name);
    if (!kind) {
      err << "error: unknown kind '" << kind_name << "'\n" << app.help();
      return kExitUsage;
    }

    if (*search_cmd) {
      std::multimap<std::string, std::string> params;
      for (const auto &t : terms) params.emplace("q", t);
      for (const auto &f : filters) {
        auto eq = f.find('=');
        if (eq == std::string::npos || eq == 0) {
          err << "error: --filter expects field=value, got '" << f << "'\n";
          return kExitUsage;
        }
        params.emplace("filter." + f.substr(0, eq), f.substr(eq + 1));
      }
      params.emplace("page", std::to_string(page));
      params.emplace("page_size", std::to_string(page_size));
      ApiResponse res;
      try {
        res = gateway.search(query_from_params(*kind, params));
      } catch (const Error &e) {
        res = error_response(status_for(e.code()), e.code(), e.what(), e.violations());
      }
      return emit(res, json, out, err, [&](const Json &body) {
        out << body["total"].get<std::size_t>() << " result(s)\n";
        for (const auto &h : body["hits"]) {
          out << "  " << h["score"].get<int>() << "  " << h["id"].get<std::string>();
          if (h.contains("version")) out << " " << h["version"].get<std::string>();
          out << "\n";
        }
        for (const auto &[field, counts] : body["facets"].items()) {
          if (counts.empty()) continue;
          out << field << ":";
          for (const auto &[value, n] : counts.items()) out << " " << value << "(" << n << ")";
          out << "\n";
        }
      });
    }

    if (*get_cmd) {
      auto res = gateway.fetch(*kind, get_id,
                               get_version.empty() ? std::nullopt
                                                   : std::optional<std::string>(get_version));
      return emit(res, json, out, err, [&](const Json &) { out << res.body; });
    }

    if (*plan_cmd) {
      auto dataset = parse_json(slurp(dataset_file));
      auto problem = parse_json(slurp(problem_file));
      if (!dataset || !problem) {
        err << "error: dataset and problem files must be JSON documents\n";
        return kExitFailure;
      }
      Json body{{"dataset", *dataset}, {"problem", *problem}, {"k", k}, {"max_depth", max_depth}};
      auto res = gateway.plan(body.dump());
      return emit(res, json, out, err, [&](const Json &b) {
        for (const auto &pl : b["pipelines"]) {
          out << pl["id"].get<std::string>() << ":";
          bool first = true;
          for (const auto &s : pl["steps"]) {
            out << (first ? " " : " -> ") << s["primitive_id"].get<std::string>() << "@"
                << s["primitive_version"].get<std::string>();
            first = false;
          }
          out << "\n";
        }
      });
    }

    if (*validate_cmd) {
      auto pipeline = parse_json(slurp(pipeline_file));
      auto dataset = parse_json(slurp(dataset_file));
      if (!pipeline || !dataset) {
        err << "error: pipeline and dataset files must be JSON documents\n";
        return kExitFailure;
      }
      Json body{{"pipeline", *pipeline}, {"dataset", *dataset}};
      if (!problem_file.empty()) {
        auto problem = parse_json(slurp(problem_file));
        if (!problem) {
          err << "error: problem file must be a JSON document\n";
          return kExitFailure;
        }
        body["problem"] = *problem;
      }
      auto res = gateway.validate(body.dump());
      int code = emit(res, json, out, err, [&](const Json &b) {
        if (b["valid"].get<bool>()) {
          out << "valid\n";
          return;
        }
        out << "invalid at step " << b["step_index"].dump() << " ("
            << b["status"].get<std::string>() << "): " << b["detail"].get<std::string>() << "\n";
        if (!b["unmet"].empty()) out << "  unmet: " << join_flags(b["unmet"]) << "\n";
        for (const auto &v : b["violations"])
          out << "  " << v["code"].get<std::string>() << " " << v["path"].get<std::string>() << "\n";
      });
      if (code == kExitOk && !parse_json(res.body)->at("valid").get<bool>()) return kExitFailure;
      return code;
    }

    if (*docker_cmd || *manifest_cmd) {
      const std::string text = slurp(pipeline_file);
      auto res = *docker_cmd ? gateway.dockerfile(text) : gateway.manifest(text, image_ref);
      if (!success(res)) {
        if (json) out << res.body;
        else print_error(res, err);
        return kExitFailure;
      }
      if (json) {
        OrderedJson body;
        body[*docker_cmd ? "dockerfile" : "manifest"] = res.body;
        return write_or_print(dump_canonical(body), output, out, err);
      }
      return write_or_print(res.body, output, out, err);
    }
  } catch (const Error &e) {
    err << "error: " << e.code() << ": " << e.what() << "\n";
    for (const auto &v : e.violations()) err << "  " << to_string(v) << "\n";
    return kExitFailure;
  } catch (const std::exception &e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  err << app.help();
  return kExitUsage;
}

}  // namespace marvin
