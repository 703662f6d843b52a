#pragma once

// Needs cpp-httplib (vendor/httplib.h) on the include path. Define
// CPPHTTPLIB_OPENSSL_SUPPORT and link OpenSSL::SSL for https URLs.

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

// Eigen must be seen before httplib: <resolv.h> defines a `_res` macro.
#include "corewave/csv.hpp"
#include "corewave/error.hpp"

#include "httplib.h"

namespace corewave::fetch {

struct Url {
    std::string scheme_host_port;  // e.g. https://fred.stlouisfed.org
    std::string path;              // path and query, starting with '/'
};

inline Url split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) fail(ErrorCode::ConfigError, "URL lacks a scheme: " + url);
    const std::string scheme = url.substr(0, scheme_end);
    if (scheme != "http" && scheme != "https") fail(ErrorCode::ConfigError, "unsupported URL scheme: " + scheme);
    const auto path_start = url.find('/', scheme_end + 3);
    Url u;
    u.scheme_host_port = url.substr(0, path_start);
    u.path = path_start == std::string::npos ? "/" : url.substr(path_start);
    if (u.scheme_host_port.size() <= scheme_end + 3) fail(ErrorCode::ConfigError, "URL lacks a host: " + url);
    return u;
}

/// Renames a two-column header (e.g. `observation_date,CPIAUCSL`) to `date,value`.
inline std::string normalize_series_csv(const std::string& body) {
    const auto eol = body.find('\n');
    const std::string header = body.substr(0, eol);
    if (pipeline::detail::split(header, ',').size() != 2) return body;
    return "date,value" + (eol == std::string::npos ? std::string("\n") : body.substr(eol));
}

/**
 * Downloads `url` to `dest`. Two-column files are normalised to the
 * `date,value` layout and validated as monthly series; four-column files are
 * validated as component panels. The destination is only replaced once the
 * download validates.
 */
inline std::size_t fetch_csv(const std::string& url, const std::filesystem::path& dest, bool validate = true, int timeout_seconds = 30) {
    const Url u = split_url(url);
    httplib::Client client(u.scheme_host_port);
    client.set_follow_location(true);
    client.set_connection_timeout(timeout_seconds, 0);
    client.set_read_timeout(timeout_seconds, 0);
    auto res = client.Get(u.path);
    if (!res) fail(ErrorCode::IoError, "fetch " + url + " failed: " + httplib::to_string(res.error()));
    if (res->status != 200) fail(ErrorCode::IoError, "fetch " + url + " returned HTTP " + std::to_string(res->status));
    const std::string body = validate ? normalize_series_csv(res->body) : res->body;

    std::error_code ec;
    if (dest.has_parent_path()) std::filesystem::create_directories(dest.parent_path(), ec);
    const auto tmp = std::filesystem::path(dest.string() + ".part");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) fail(ErrorCode::IoError, "cannot write " + tmp.string());
        out << body;
        if (!out) fail(ErrorCode::IoError, "write failed for " + tmp.string());
    }
    if (validate) {
        try {
            const auto header = body.substr(0, body.find('\n'));
            if (pipeline::detail::split(header, ',').size() == 4) (void)pipeline::load_panel_csv(tmp);
            else (void)pipeline::load_series_csv(tmp);
        } catch (...) {
            std::filesystem::remove(tmp, ec);
            throw;
        }
    }
    std::filesystem::rename(tmp, dest, ec);
    if (ec) fail(ErrorCode::IoError, "cannot move download into " + dest.string());
    return body.size();
}

}  // namespace corewave::fetch
