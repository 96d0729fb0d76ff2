#pragma once

#include <chrono>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace xgen::util {

class HttpError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// POSTs `body` as JSON to `base_url` + `path` ("http://host:port[/prefix]")
/// and parses the JSON reply. Throws HttpError on transport failures,
/// non-2xx statuses and unparsable replies.
nlohmann::json post_json(std::string_view base_url, std::string_view path, const nlohmann::json& body,
                         std::chrono::milliseconds timeout = std::chrono::seconds(30),
                         const std::map<std::string, std::string>& headers = {});

}  // namespace xgen::util
