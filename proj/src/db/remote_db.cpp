// Connection URL dispatch plus the two non-SQLite backends: a parse-only
// stand-in (schema and rows from a SQLite file, queries validated but not run)
// and a JSON-over-HTTP SQL gateway for engines without an embedded driver.

#include <algorithm>

#include "json.hpp"
#include "sqlgen/llm/client.hpp"
#include "sqlgen/util/strings.hpp"
#include "sqlite_db.hpp"

namespace sqlgen {

using nlohmann::json;

namespace {

class ParseOnlyDatabase : public Database {
 public:
  ParseOnlyDatabase(std::string url, Dialect dialect, const std::string& path)
      : url_(std::move(url)), dialect_(dialect), source_(url_, path) {}

  Dialect dialect() const override { return dialect_; }
  std::string db_id() const override { return source_.db_id(); }
  std::string url() const override { return url_; }
  bool parse_only() const override { return true; }

  DatabaseProfile introspect() override {
    DatabaseProfile p = source_.introspect();
    for (auto& t : p.tables) {
      for (auto& c : t.columns) c.type = map_column_type(c.type, dialect_);
    }
    p.dialect = dialect_;
    p.ddl = render_ddl(p.tables, dialect_);
    return p;
  }
  std::optional<Row> sample_row(const std::string& table, std::mt19937_64& rng) override {
    return source_.sample_row(table, rng);
  }
  ResultSet run_select(const std::string&, int, std::size_t) override {
    ResultSet rs;
    rs.parse_only = true;
    return rs;
  }

 private:
  std::string url_;
  Dialect dialect_;
  SqliteDatabase source_;
};

SqlValue value_from_json(const json& v) {
  if (v.is_null()) return SqlValue::null();
  if (v.is_boolean()) return SqlValue::integer(v.get<bool>() ? 1 : 0);
  if (v.is_number_integer()) return SqlValue::integer(v.get<std::int64_t>());
  if (v.is_number()) return SqlValue::real(v.dump());
  if (v.is_string()) return SqlValue::str(v.get<std::string>());
  return SqlValue::str(v.dump());
}

Row row_from_json(const json& r) {
  Row row;
  for (const auto& v : r) row.push_back(value_from_json(v));
  return row;
}

class GatewayDatabase : public Database {
 public:
  GatewayDatabase(std::string url, Dialect dialect, std::string base, std::string db_id,
                  std::shared_ptr<Transport> transport)
      : url_(std::move(url)),
        dialect_(dialect),
        base_(std::move(base)),
        db_id_(std::move(db_id)),
        transport_(std::move(transport)) {}

  Dialect dialect() const override { return dialect_; }
  std::string db_id() const override { return db_id_; }
  std::string url() const override { return url_; }

  DatabaseProfile introspect() override {
    json reply = call("/schema", {{"db_id", db_id_}}, 60000);
    if (reply.contains("error")) throw ConnError("gateway schema error: " + reply["error"].dump());
    DatabaseProfile p = profile_from_json(reply.dump());
    p.db_id = db_id_;
    p.dialect = dialect_;
    drop_dangling_fks(p.tables);
    p.ddl = render_ddl(p.tables, dialect_);
    return p;
  }

  std::optional<Row> sample_row(const std::string& table, std::mt19937_64& rng) override {
    json reply = call("/sample", {{"db_id", db_id_}, {"table", table}, {"seed", rng()}}, 60000);
    if (reply.contains("error")) throw ConnError("gateway sample error: " + reply["error"].dump());
    if (!reply.contains("row") || reply["row"].is_null()) return std::nullopt;
    return row_from_json(reply["row"]);
  }

  ResultSet run_select(const std::string& sql, int timeout_ms, std::size_t row_limit) override {
    json reply;
    try {
      reply = call("/query", {{"db_id", db_id_}, {"sql", sql}, {"timeout_ms", timeout_ms}, {"row_limit", row_limit}},
                   timeout_ms + 1000);
    } catch (const ExecError&) {
      throw;
    }
    if (reply.contains("error")) {
      const auto& err = reply["error"];
      std::string kind = err.is_object() ? err.value("kind", "runtime") : "runtime";
      std::string msg = err.is_object() ? err.value("message", "") : err.dump();
      if (kind == "syntax") throw ExecError(ExecError::Kind::kSyntax, msg);
      if (kind == "timeout") throw ExecError(ExecError::Kind::kTimeout, msg);
      if (kind == "non_select") throw ExecError(ExecError::Kind::kNonSelect, msg);
      throw ExecError(ExecError::Kind::kRuntime, msg);
    }
    ResultSet rs;
    for (const auto& c : reply.value("columns", json::array())) rs.columns.push_back(c.get<std::string>());
    for (const auto& r : reply.value("rows", json::array())) {
      if (rs.rows.size() >= row_limit) {
        rs.truncated = true;
        break;
      }
      rs.rows.push_back(row_from_json(r));
    }
    if (reply.value("truncated", false)) rs.truncated = true;
    return rs;
  }

 private:
  json call(const std::string& path, const json& body, int timeout_ms) {
    HttpRequest req;
    req.url = base_ + path;
    req.body = body.dump();
    req.timeout_ms = timeout_ms;
    req.headers["Content-Type"] = "application/json";
    if (const char* token = std::getenv("SQLGEN_GATEWAY_TOKEN"); token != nullptr && *token != '\0') {
      req.headers["Authorization"] = std::string("Bearer ") + token;
    }
    HttpResponse res = transport_->post(req);
    if (res.status == -1) throw ExecError(ExecError::Kind::kTimeout, "gateway timed out");
    if (res.status == 0) throw ConnError("gateway unreachable: " + res.error);
    json j = json::parse(res.body, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      throw ConnError("gateway returned HTTP " + std::to_string(res.status) + " with a non-JSON body");
    }
    if (res.status >= 400 && !j.contains("error")) {
      throw ConnError("gateway returned HTTP " + std::to_string(res.status));
    }
    return j;
  }

  std::string url_;
  Dialect dialect_;
  std::string base_;
  std::string db_id_;
  std::shared_ptr<Transport> transport_;
};

Dialect parse_dialect(const std::string& name, const std::string& url) {
  try {
    return dialect_from_string(name);
  } catch (const std::invalid_argument&) {
    throw ConnError("unsupported dialect '" + name + "' in connection URL " + url);
  }
}

}  // namespace

std::unique_ptr<Database> open_database(const std::string& url, std::shared_ptr<Transport> transport) {
  std::string u(util::trim(url));
  if (u.empty()) throw ConnError("empty connection URL");
  auto colon = u.find(':');
  std::string scheme = colon == std::string::npos ? "" : util::to_lower(u.substr(0, colon));

  auto strip_slashes = [](std::string rest) {
    // sqlite://relative and sqlite:///absolute
    if (rest.rfind("//", 0) == 0) rest = rest.substr(2);
    return rest;
  };

  if (scheme == "sqlite") {
    std::string path = strip_slashes(u.substr(colon + 1));
    if (path.empty()) throw ConnError("missing database path in " + url);
    return std::make_unique<SqliteDatabase>(u, path);
  }
  if (scheme.rfind("parseonly+", 0) == 0) {
    Dialect d = parse_dialect(scheme.substr(10), u);
    std::string path = strip_slashes(u.substr(colon + 1));
    return std::make_unique<ParseOnlyDatabase>(u, d, path);
  }
  if (scheme.rfind("gateway+", 0) == 0) {
    auto parts = util::split(scheme.substr(8), '+');
    Dialect d = parse_dialect(parts[0], u);
    std::string proto = parts.size() > 1 ? parts[1] : "http";
    if (proto != "http" && proto != "https") throw ConnError("unsupported gateway protocol in " + url);
    std::string rest = u.substr(colon + 1);
    if (rest.rfind("//", 0) != 0) throw ConnError("gateway URL needs //host: " + url);
    rest = rest.substr(2);
    auto slash = rest.find('/');
    std::string host = rest.substr(0, slash);
    std::string path = slash == std::string::npos ? "" : rest.substr(slash);
    while (!path.empty() && path.back() == '/') path.pop_back();
    std::string db_id = path.empty() ? "default" : path.substr(path.find_last_of('/') + 1);
    if (transport == nullptr) transport = make_http_transport();
    return std::make_unique<GatewayDatabase>(u, d, proto + "://" + host + path, db_id, std::move(transport));
  }
  if (scheme.empty() || scheme.size() == 1 /* windows drive */ || u.find("://") == std::string::npos) {
    auto ends_with = [&](std::string_view s) {
      return u.size() >= s.size() && util::iequals(std::string_view(u).substr(u.size() - s.size()), s);
    };
    if (ends_with(".sqlite") || ends_with(".db") || ends_with(".sqlite3")) {
      return std::make_unique<SqliteDatabase>("sqlite:" + u, u);
    }
  }
  throw ConnError("unsupported connection URL: " + url);
}

}  // namespace sqlgen
