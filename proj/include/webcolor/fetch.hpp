#pragma once

#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <httplib.h>

#include "webcolor/common.hpp"

namespace webcolor {

struct FetchOptions {
  // Plain-HTTP GET template with {url} and {i} placeholders, e.g.
  // "http://archive.example.org/snap?url={url}&i={i}". There is no usable
  // default; point this at a service that returns PNG bodies.
  std::string endpoint_template;
  int timeout_seconds = 15;
};

namespace detail {

inline std::string url_encode(const std::string& s) {
  std::string out;
  for (unsigned char c : s) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
      out += static_cast<char>(c);
    } else {
      char buf[4];
      std::snprintf(buf, sizeof(buf), "%%%02X", c);
      out += buf;
    }
  }
  return out;
}

inline std::string expand_template(const std::string& tmpl, const std::string& url, int index) {
  std::string out;
  for (std::size_t i = 0; i < tmpl.size();) {
    if (tmpl.compare(i, 5, "{url}") == 0) {
      out += url_encode(url);
      i += 5;
    } else if (tmpl.compare(i, 3, "{i}") == 0) {
      out += std::to_string(index);
      i += 3;
    } else {
      out += tmpl[i++];
    }
  }
  return out;
}

struct SplitUrl {
  std::string host;  // scheme://host:port
  std::string path;  // /path?query
};

inline SplitUrl split_url(const std::string& full) {
  auto scheme_end = full.find("://");
  if (scheme_end == std::string::npos)
    throw Error("BadEndpoint", "endpoint must start with http://");
  auto path_start = full.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {full, "/"};
  return {full.substr(0, path_start), full.substr(path_start)};
}

inline bool looks_like_png(const std::string& body) {
  static const unsigned char sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};
  if (body.size() < 8) return false;
  for (int i = 0; i < 8; ++i)
    if (static_cast<unsigned char>(body[i]) != sig[i]) return false;
  return true;
}

} // namespace detail

/// Fetches up to `count` temporal snapshots of `url` as PNGs into
/// `out_directory`, named `<index>_<tag>.png` so lexicographic order is
/// temporal order. Degrades to whatever the endpoint can serve; throws
/// NetworkError when the host is unreachable and NoSnapshotsFound when it
/// answered but produced no PNG at all.
inline std::vector<std::string> fetch_snapshots(const std::string& url, int count,
                                                const std::string& out_directory,
                                                const FetchOptions& options) {
  if (options.endpoint_template.empty())
    throw Error("BadEndpoint", "no archive endpoint template configured");
  if (count < 1) throw Error("BadCount", "snapshot count must be >= 1");
  std::filesystem::create_directories(out_directory);

  std::vector<std::string> written;
  bool any_response = false;
  for (int i = 0; i < count; ++i) {
    detail::SplitUrl split = detail::split_url(detail::expand_template(options.endpoint_template, url, i));
    httplib::Client client(split.host);
    client.set_connection_timeout(options.timeout_seconds);
    client.set_read_timeout(options.timeout_seconds);
    httplib::Result res = client.Get(split.path);
    if (!res) continue;  // connection-level failure for this index
    any_response = true;
    if (res->status != 200 || !detail::looks_like_png(res->body)) continue;

    std::string tag = "snapshot";
    if (res->has_header("Last-Modified")) {
      tag.clear();
      for (char c : res->get_header_value("Last-Modified"))
        if (std::isalnum(static_cast<unsigned char>(c))) tag += c;
      if (tag.empty()) tag = "snapshot";
    }
    char name[64];
    std::snprintf(name, sizeof(name), "%03d_%s.png", i, tag.c_str());
    std::string path = (std::filesystem::path(out_directory) / name).string();
    std::ofstream out(path, std::ios::binary);
    out.write(res->body.data(), static_cast<std::streamsize>(res->body.size()));
    if (!out) throw Error("FileWrite", "cannot write " + path);
    written.push_back(path);
  }

  if (written.empty()) {
    if (!any_response) throw Error("NetworkError", "archive endpoint unreachable");
    throw Error("NoSnapshotsFound", "endpoint returned no PNG snapshots for " + url);
  }
  return written;
}

} // namespace webcolor
