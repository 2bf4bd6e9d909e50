#pragma once

#include <string>

#include "procmatch/error.hpp"
#include "procmatch/store.hpp"

namespace httplib {
class Server;
}

namespace procmatch {

/// HTTP status used for each error code.
int http_status(ErrorCode code);

/// Registers the session and model endpoints on `server`. All request and
/// response bodies are JSON; errors are {code, message, details}.
void register_routes(httplib::Server& server, SessionStore& store);

/// Opens the store and serves until the process is stopped. Throws
/// Error{store_corrupt} before binding when the store cannot be loaded and
/// Error{io_error} when the port cannot be bound.
void serve(const std::string& host, int port, const std::string& store_path);

} // namespace procmatch
