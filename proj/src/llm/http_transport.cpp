#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"
#include "sqlgen/llm/client.hpp"

namespace sqlgen {

namespace {

class HttplibTransport : public Transport {
 public:
  HttpResponse post(const HttpRequest& request) override {
    HttpResponse out;
    // Split "scheme://host[:port]/path".
    auto scheme_end = request.url.find("://");
    if (scheme_end == std::string::npos) {
      out.error = "invalid URL " + request.url;
      return out;
    }
    auto path_start = request.url.find('/', scheme_end + 3);
    std::string origin = path_start == std::string::npos ? request.url : request.url.substr(0, path_start);
    std::string path = path_start == std::string::npos ? "/" : request.url.substr(path_start);

    httplib::Client client(origin);
    auto secs = request.timeout_ms / 1000;
    auto usecs = (request.timeout_ms % 1000) * 1000;
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);
    httplib::Headers headers;
    std::string content_type = "application/json";
    for (const auto& [k, v] : request.headers) {
      if (k == "Content-Type") {
        content_type = v;
      } else {
        headers.emplace(k, v);
      }
    }
    auto res = client.Post(path, headers, request.body, content_type);
    if (!res) {
      auto err = res.error();
      out.status = err == httplib::Error::Read || err == httplib::Error::ConnectionTimeout ? -1 : 0;
      out.error = httplib::to_string(err);
      return out;
    }
    out.status = res->status;
    out.body = res->body;
    return out;
  }
};

}  // namespace

std::shared_ptr<Transport> make_http_transport() { return std::make_shared<HttplibTransport>(); }

}  // namespace sqlgen
