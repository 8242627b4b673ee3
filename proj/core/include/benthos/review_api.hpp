#pragma once

#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>

#include "benthos/review.hpp"

namespace httplib {
class Server;
}

namespace benthos {

/// HTTP front of a session store. Reads run concurrently on a snapshot;
/// mutations are serialized and a write arriving while another is in flight
/// is refused with 409.
class ReviewApi {
 public:
  explicit ReviewApi(SessionStore store,
                     std::optional<std::filesystem::path> static_dir =
                         std::nullopt);
  ~ReviewApi();

  ReviewApi(const ReviewApi&) = delete;
  ReviewApi& operator=(const ReviewApi&) = delete;

  void register_routes(httplib::Server& server);

  /// Binds (port 0 picks a free port) and serves on a background thread.
  /// Returns the bound port.
  int start(const std::string& host, int port);
  /// Blocks serving on the calling thread.
  void listen(const std::string& host, int port);
  void stop();

  // Request handlers, transport independent. Each returns {status, body}.
  struct Response {
    int status = 200;
    std::string body;
    std::string content_type = "application/json";
  };
  Response get_session() const;
  Response get_field(const std::string& view) const;
  Response get_thumb(const std::string& id_text);
  Response get_export() const;
  Response post_mutation(const std::string& action, const std::string& body);

  /// Testing hook: holds the write slot as if a mutation were in flight.
  std::unique_lock<std::mutex> hold_write_slot();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace benthos
