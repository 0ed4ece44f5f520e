#pragma once

#include <memory>
#include <optional>
#include <string>

#include <json.hpp>

#include "shuttle/label_store.hpp"

namespace shuttle {

struct ServerOptions {
    std::string host = "127.0.0.1";
    int port = 8750;                   // 0 = any free port
    std::optional<std::string> token;  // required in X-Auth-Token when set
};

/// JSON-over-HTTP access to a label store for the review frontend.
///
///   GET /sequences
///   GET /sequences/{id}/frames?status=...
///   GET /frames/{id}/image            PNG bytes
///   GET /frames/{id}/label
///   PUT /frames/{id}/label            {action, bbox?, difficulty?, editor?, revision?}
///   GET /frames/{id}/context?n=...
///   GET /queue
///   GET /stats?background=...
///
/// Reads run concurrently; writes are serialized and always go through
/// LabelStore::record_review. A PUT carrying a stale `revision` gets 409.
class ReviewServer {
public:
    ReviewServer(LabelStore& store, ServerOptions options = {});
    ~ReviewServer();
    ReviewServer(const ReviewServer&) = delete;
    ReviewServer& operator=(const ReviewServer&) = delete;

    /// Binds the socket and returns the bound port. Throws Error on failure.
    int bind();
    /// Serves until stop(); call bind() first.
    void run();
    /// Blocks until run() is accepting connections.
    void wait_until_ready() const;
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Counts plus the auto/adjusted/manual split over labeled frames.
nlohmann::json stats_json(const StoreStats& stats);

}  // namespace shuttle
