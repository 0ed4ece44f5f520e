#include "shuttle/review_server.hpp"

#include <filesystem>
#include <shared_mutex>

#include <httplib.h>

#include "shuttle/errors.hpp"
#include "shuttle/frame_io.hpp"

using json = nlohmann::json;

namespace shuttle {

namespace {

void send_json(httplib::Response& res, const json& body, int status = 200) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
    send_json(res, {{"error", message}}, status);
}

json frame_summary(const LabelRecord& r) {
    return {{"frame_id", r.frame_id},
            {"frame_index", r.frame_index},
            {"status", to_string(r.status)},
            {"difficulty", r.difficulty ? json(to_string(*r.difficulty)) : json(nullptr)},
            {"pipeline_score", r.pipeline_score ? json(*r.pipeline_score) : json(nullptr)}};
}

ReviewEdit parse_edit(const json& body) {
    const std::string action = body.at("action").get<std::string>();
    if (action == "confirm")
        return ReviewEdit::confirm();
    if (action == "no_object")
        return ReviewEdit::mark_no_object();
    if (action == "set_difficulty")
        return ReviewEdit::set_difficulty(parse_difficulty(body.at("difficulty").get<std::string>()));
    if (action == "set_box") {
        const auto& b = body.at("bbox");
        return ReviewEdit::new_box(
            {b.at("x_c").get<double>(), b.at("y_c").get<double>(), b.at("w").get<double>(), b.at("h").get<double>()});
    }
    throw ValidationError("unknown action '" + action + "'");
}

}  // namespace

json stats_json(const StoreStats& s) {
    const auto count = [&](const char* key) {
        const auto it = s.by_status.find(key);
        return it == s.by_status.end() ? std::size_t{0} : it->second;
    };
    const std::size_t labeled = count("auto") + count("adjusted") + count("manual");
    const auto frac = [&](const char* key) { return labeled ? double(count(key)) / double(labeled) : 0.0; };
    return {{"total", s.total},
            {"by_status", s.by_status},
            {"by_difficulty", s.by_difficulty},
            {"by_background", s.by_background},
            {"queue_pending", s.queue_pending},
            {"labeled", labeled},
            {"fractions", {{"auto", frac("auto")}, {"adjusted", frac("adjusted")}, {"manual", frac("manual")}}}};
}

struct ReviewServer::Impl {
    LabelStore& store;
    ServerOptions options;
    httplib::Server server;
    std::shared_mutex mutex;
    int port = 0;

    Impl(LabelStore& s, ServerOptions o) : store(s), options(std::move(o)) { routes(); }

    // Runs a handler and maps library exceptions onto HTTP status codes.
    template <typename Fn>
    static void guarded(httplib::Response& res, Fn&& fn) {
        try {
            fn();
        } catch (const NotFoundError& e) {
            send_error(res, 404, e.what());
        } catch (const ConflictError& e) {
            send_error(res, 409, e.what());
        } catch (const TransitionError& e) {
            send_error(res, 422, e.what());
        } catch (const ValidationError& e) {
            send_error(res, 400, e.what());
        } catch (const json::exception& e) {
            send_error(res, 400, std::string("malformed request: ") + e.what());
        } catch (const std::exception& e) {
            send_error(res, 500, e.what());
        }
    }

    void routes() {
        server.set_pre_routing_handler([this](const httplib::Request& req, httplib::Response& res) {
            if (options.token && req.get_header_value("X-Auth-Token") != *options.token) {
                send_error(res, 401, "missing or wrong X-Auth-Token");
                return httplib::Server::HandlerResponse::Handled;
            }
            return httplib::Server::HandlerResponse::Unhandled;
        });

        server.Get("/sequences", [this](const httplib::Request&, httplib::Response& res) {
            guarded(res, [&] {
                std::shared_lock lock(mutex);
                json out = json::array();
                for (const auto& s : store.sequences())
                    out.push_back({{"sequence_id", s.sequence_id},
                                   {"location", s.location},
                                   {"background_id", s.background_id},
                                   {"frame_count", s.frame_count}});
                send_json(res, out);
            });
        });

        server.Get(R"(/sequences/([^/]+)/frames)", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] {
                const std::string seq = req.matches[1];
                std::optional<LabelStatus> status;
                if (req.has_param("status"))
                    status = parse_status(req.get_param_value("status"));
                std::shared_lock lock(mutex);
                json out = json::array();
                bool known = false;
                for (const auto& r : store.records()) {
                    if (r.sequence_id != seq)
                        continue;
                    known = true;
                    if (!status || r.status == *status)
                        out.push_back(frame_summary(r));
                }
                if (!known)
                    throw NotFoundError("unknown sequence " + seq);
                send_json(res, out);
            });
        });

        server.Get(R"(/frames/([^/]+)/image)", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] {
                std::string path;
                {
                    std::shared_lock lock(mutex);
                    path = store.get(req.matches[1]).image_path;
                }
                if (path.empty() || !std::filesystem::exists(path))
                    throw NotFoundError("no image file for " + std::string(req.matches[1]));
                const auto png = image_file_as_png(path);
                res.set_content(std::string(png.begin(), png.end()), "image/png");
            });
        });

        server.Get(R"(/frames/([^/]+)/label)", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] {
                std::shared_lock lock(mutex);
                send_json(res, to_json(store.get(req.matches[1])));
            });
        });

        server.Put(R"(/frames/([^/]+)/label)", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] {
                const json body = json::parse(req.body);
                const ReviewEdit edit = parse_edit(body);
                const std::string editor = body.value("editor", "anonymous");
                ReviewOptions opts;
                opts.on_conflict = ConflictPolicy::reject;
                if (body.contains("revision") && !body["revision"].is_null())
                    opts.expected_revision = body["revision"].get<std::int64_t>();
                std::unique_lock lock(mutex);
                send_json(res, to_json(store.record_review(req.matches[1], edit, editor, opts)));
            });
        });

        server.Get(R"(/frames/([^/]+)/context)", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] {
                int n = 2;
                if (req.has_param("n")) {
                    const std::string v = req.get_param_value("n");
                    std::size_t used = 0;
                    try {
                        n = std::stoi(v, &used);
                    } catch (const std::logic_error&) {
                        used = 0;
                    }
                    if (used == 0 || used != v.size())
                        throw ValidationError("n must be an integer");
                }
                if (n < 0 || n > 100)
                    throw ValidationError("n must be in [0, 100]");
                std::shared_lock lock(mutex);
                const LabelRecord& center = store.get(req.matches[1]);
                json frames = json::array();
                for (const auto& r : store.frame_range(center.sequence_id, center.frame_index - n,
                                                       center.frame_index + n))
                    frames.push_back(to_json(r));
                send_json(res, {{"frame_id", center.frame_id}, {"n", n}, {"frames", frames}});
            });
        });

        server.Get("/queue", [this](const httplib::Request&, httplib::Response& res) {
            guarded(res, [&] {
                std::shared_lock lock(mutex);
                json out = json::array();
                for (const auto& item : store.queue())
                    out.push_back({{"frame_id", item.frame_id}, {"reason", to_string(item.reason)}, {"state", "pending"}});
                send_json(res, out);
            });
        });

        server.Get("/stats", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] {
                std::optional<std::string> background;
                if (req.has_param("background"))
                    background = req.get_param_value("background");
                std::shared_lock lock(mutex);
                send_json(res, stats_json(store.stats(background)));
            });
        });
    }
};

ReviewServer::ReviewServer(LabelStore& store, ServerOptions options)
    : impl_(std::make_unique<Impl>(store, std::move(options))) {}

ReviewServer::~ReviewServer() { stop(); }

int ReviewServer::bind() {
    auto& s = impl_->server;
    if (impl_->options.port == 0)
        impl_->port = s.bind_to_any_port(impl_->options.host);
    else
        impl_->port = s.bind_to_port(impl_->options.host, impl_->options.port) ? impl_->options.port : -1;
    if (impl_->port < 0)
        throw Error("cannot bind " + impl_->options.host + ":" + std::to_string(impl_->options.port));
    return impl_->port;
}

void ReviewServer::run() { impl_->server.listen_after_bind(); }

void ReviewServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

void ReviewServer::stop() {
    if (impl_)
        impl_->server.stop();
}

}  // namespace shuttle
