// Copyright 2026 The hazlens Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <httplib.h>

#include "hazlens/providers.hpp"

namespace hazlens {

namespace {

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;    // begins with '/'
};

SplitUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw TransportError("URL lacks a scheme: " + url);
  const auto path_begin = url.find('/', scheme_end + 3);
  if (path_begin == std::string::npos) return {url, "/"};
  return {url.substr(0, path_begin), url.substr(path_begin)};
}

class HttplibTransport final : public HttpTransport {
 public:
  HttpResponse post(const HttpRequest& request) override {
    const SplitUrl url = split_url(request.url);
    httplib::Client client(url.origin);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(request.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(request.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());

    httplib::Headers headers;
    for (const auto& [k, v] : request.headers) headers.emplace(k, v);
    auto res = client.Post(url.path, headers, request.body, "application/json");
    if (!res) {
      throw TransportError("HTTP request to " + url.origin + " failed: " +
                           httplib::to_string(res.error()));
    }
    HttpResponse out;
    out.status = res->status;
    out.body = res->body;
    if (res->has_header("Retry-After")) out.retry_after = res->get_header_value("Retry-After");
    return out;
  }
};

}  // namespace

std::shared_ptr<HttpTransport> make_default_transport() {
  return std::make_shared<HttplibTransport>();
}

}  // namespace hazlens
