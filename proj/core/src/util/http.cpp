#include "xgen/util/http.hpp"

#include <httplib.h>

#include <fmt/format.h>

namespace xgen::util {

nlohmann::json post_json(std::string_view base_url, std::string_view path, const nlohmann::json& body,
                         std::chrono::milliseconds timeout, const std::map<std::string, std::string>& headers) {
  std::string url(base_url);
  auto scheme = url.find("://");
  auto slash = url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
  std::string host = slash == std::string::npos ? url : url.substr(0, slash);
  std::string prefix = slash == std::string::npos ? "" : url.substr(slash);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();

  httplib::Client client(host);
  if (!client.is_valid()) throw HttpError(fmt::format("invalid backend url '{}'", url));
  auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
  auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());

  auto target = prefix + std::string(path);
  httplib::Headers extra(headers.begin(), headers.end());
  auto res = client.Post(target, extra, body.dump(), "application/json");
  if (!res) throw HttpError(fmt::format("POST {}{}: {}", host, target, httplib::to_string(res.error())));
  if (res->status < 200 || res->status >= 300)
    throw HttpError(fmt::format("POST {}{}: status {}", host, target, res->status));
  try {
    return nlohmann::json::parse(res->body);
  } catch (const nlohmann::json::exception& e) {
    throw HttpError(fmt::format("POST {}{}: unparsable reply: {}", host, target, e.what()));
  }
}

}  // namespace xgen::util
