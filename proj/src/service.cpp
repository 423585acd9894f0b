#include "fazseg/service.hpp"

#include <httplib.h>

#include <algorithm>
#include <cstdio>
#include <random>

#include "fazseg/image_io.hpp"
#include "fazseg/morphology.hpp"
#include "fazseg/report.hpp"

namespace fazseg {

namespace fs = std::filesystem;
using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

std::string_view dirty_name(DirtyFrom d)
{
    switch (d) {
    case DirtyFrom::crop: return "crop";
    case DirtyFrom::edges: return "edges";
    case DirtyFrom::close: return "close";
    case DirtyFrom::segment: return "segment";
    case DirtyFrom::done: return "done";
    }
    return "crop";
}

DirtyFrom earliest_affected(const PipelineParams& a, const PipelineParams& b)
{
    if (a.crop_x != b.crop_x || a.crop_y != b.crop_y || a.description_band != b.description_band)
        return DirtyFrom::crop;
    if (a.fudge != b.fudge)
        return DirtyFrom::edges;
    if (a.dilation_len != b.dilation_len || a.erosion_radius != b.erosion_radius)
        return DirtyFrom::close;
    if (a.min_component_px != b.min_component_px)
        return DirtyFrom::segment;
    return DirtyFrom::done;
}

struct SessionService::Session {
    std::mutex mutex;
    std::string id;
    std::string filename;
    GrayImage image;
    PipelineParams params;
    DirtyFrom dirty_from = DirtyFrom::crop;

    // Stage cache; `trace` fields are filled progressively.
    PipelineTrace trace;
    bool trace_complete = false;
    std::optional<FazMeasurements> auto_measurements;
    std::optional<BinaryMask> manual_mask;
    std::optional<FazMeasurements> manual_measurements;
    /// Measurements the export endpoint emits: whichever source was measured last.
    enum class Source { none, automatic, manual } export_source = Source::none;

    std::map<std::string, int> revisions;
    Clock::time_point last_access = Clock::now();
};

namespace {

ServiceResponse json_response(int status, const json& body)
{
    ServiceResponse r;
    r.status = status;
    r.body = body.dump();
    return r;
}

ServiceResponse error_response(int status, const std::string& message)
{
    return json_response(status, {{"error", message}});
}

std::string to_string(const std::vector<std::uint8_t>& bytes)
{
    return std::string(bytes.begin(), bytes.end());
}

std::string png_base64(const std::vector<std::uint8_t>& png)
{
    return httplib::detail::base64_encode(to_string(png));
}

json stage_error_body(const StageError& e)
{
    json body{{"stage", stage_name(e.stage())}, {"message", e.what()}};
    if (e.stage() == Stage::edges || e.stage() == Stage::segment)
        body["advice"] = "retune fudge, dilation_len or erosion_radius";
    return body;
}

std::optional<json> parse_body(const std::string& body, std::string& error)
{
    if (body.empty())
        return json::object();
    try {
        return json::parse(body);
    } catch (const json::exception& e) {
        error = std::string("malformed JSON: ") + e.what();
        return std::nullopt;
    }
}

GrayImage overlay(const GrayImage& image, const BinaryMask& mask, bool filled)
{
    GrayImage out = image;
    for (int y = 0; y < image.height(); ++y)
        for (int x = 0; x < image.width(); ++x)
            if (mask.test(x, y))
                out(x, y) = filled ? static_cast<std::uint8_t>(128 + image(x, y) / 2) : 255;
    return out;
}

std::size_t stage_rank(const std::string& stage)
{
    static const char* order[] = {"cropped", "edges", "closed", "filled"};
    for (std::size_t i = 0; i < 4; ++i)
        if (stage == order[i])
            return i;
    return 4;
}

} // namespace

SessionService::SessionService(ServiceOptions options)
    : options_(std::move(options)), id_state_(std::random_device{}() ^
                                              (std::uint64_t(std::random_device{}()) << 32))
{
}

SessionService::~SessionService() = default;

std::string SessionService::new_id()
{
    // splitmix64 over a randomly seeded counter; caller holds mutex_.
    auto next = [this]() {
        std::uint64_t z = (id_state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    };
    char buf[33];
    std::snprintf(buf, sizeof buf, "%016llx%016llx", static_cast<unsigned long long>(next()),
                  static_cast<unsigned long long>(next()));
    return buf;
}

void SessionService::purge_locked(Clock::time_point now)
{
    for (auto it = sessions_.begin(); it != sessions_.end();) {
        if (now - it->second->last_access > options_.idle_timeout)
            it = sessions_.erase(it);
        else
            ++it;
    }
}

std::shared_ptr<SessionService::Session> SessionService::find(const std::string& id)
{
    std::lock_guard lock(mutex_);
    const auto now = Clock::now();
    purge_locked(now);
    auto it = sessions_.find(id);
    if (it == sessions_.end())
        return nullptr;
    it->second->last_access = now;
    return it->second;
}

std::size_t SessionService::session_count()
{
    std::lock_guard lock(mutex_);
    purge_locked(Clock::now());
    return sessions_.size();
}

ServiceResponse SessionService::create(GrayImage image, std::string filename)
{
    auto s = std::make_shared<Session>();
    s->image = std::move(image);
    s->filename = std::move(filename);
    {
        std::lock_guard lock(mutex_);
        const auto now = Clock::now();
        purge_locked(now);
        while (sessions_.size() >= options_.max_sessions && !sessions_.empty()) {
            auto lru = std::min_element(sessions_.begin(), sessions_.end(),
                                        [](const auto& a, const auto& b) {
                                            return a.second->last_access < b.second->last_access;
                                        });
            sessions_.erase(lru);
        }
        do {
            s->id = new_id();
        } while (sessions_.count(s->id));
        s->last_access = now;
        sessions_[s->id] = s;
    }
    return json_response(201, {{"id", s->id},
                               {"filename", s->filename},
                               {"width", s->image.width()},
                               {"height", s->image.height()},
                               {"mm_per_px", s->image.scale().mm_per_px},
                               {"params", s->params}});
}

ServiceResponse SessionService::create_from_upload(const std::string& bytes,
                                                   const std::string& filename, double extent_mm)
{
    if (!(extent_mm > 0.0))
        return error_response(422, "extent_mm must be positive");
    try {
        const auto* data = reinterpret_cast<const std::uint8_t*>(bytes.data());
        GrayImage img = decode_scan(std::span<const std::uint8_t>(data, bytes.size()), extent_mm,
                                    filename);
        return create(std::move(img), filename);
    } catch (const Error& e) {
        return error_response(422, e.what());
    }
}

ServiceResponse SessionService::create_from_dataset(const std::string& relative_path,
                                                    double extent_mm)
{
    if (!options_.dataset_root)
        return error_response(422, "server has no dataset root configured");
    if (!(extent_mm > 0.0))
        return error_response(422, "extent_mm must be positive");
    std::error_code ec;
    const fs::path root = fs::weakly_canonical(*options_.dataset_root, ec);
    const fs::path target = fs::weakly_canonical(root / relative_path, ec);
    const auto rel = target.lexically_relative(root);
    if (ec || rel.empty() || *rel.begin() == "..")
        return error_response(403, "path escapes the dataset root");
    try {
        return create(load_scan(target, extent_mm), target.filename().string());
    } catch (const Error& e) {
        return error_response(422, e.what());
    }
}

ServiceResponse SessionService::create_from_json(const std::string& body)
{
    std::string err;
    const auto j = parse_body(body, err);
    if (!j)
        return error_response(400, err);
    if (!j->contains("path") || !(*j)["path"].is_string())
        return error_response(422, "body needs a string 'path'");
    double extent = 6.0;
    if (j->contains("extent_mm")) {
        if (!(*j)["extent_mm"].is_number())
            return error_response(422, "extent_mm must be a number");
        extent = (*j)["extent_mm"].get<double>();
    }
    return create_from_dataset((*j)["path"].get<std::string>(), extent);
}

namespace {

json session_state(const std::string& id, const std::string& filename, const GrayImage& image,
                   const PipelineParams& params, DirtyFrom dirty, bool has_trace, bool has_manual,
                   const std::optional<FazMeasurements>& measured,
                   const std::map<std::string, int>& revisions)
{
    json j{{"id", id},
           {"filename", filename},
           {"width", image.width()},
           {"height", image.height()},
           {"mm_per_px", image.scale().mm_per_px},
           {"params", params},
           {"dirty_from", dirty_name(dirty)},
           {"has_trace", has_trace},
           {"has_manual", has_manual},
           {"revisions", revisions}};
    if (measured)
        j["measurements"] = *measured;
    return j;
}

} // namespace

ServiceResponse SessionService::get(const std::string& id)
{
    auto s = find(id);
    if (!s)
        return error_response(404, "no such session");
    std::lock_guard lock(s->mutex);
    std::optional<FazMeasurements> measured;
    if (s->export_source == Session::Source::automatic)
        measured = s->auto_measurements;
    else if (s->export_source == Session::Source::manual)
        measured = s->manual_measurements;
    return json_response(200, session_state(s->id, s->filename, s->image, s->params,
                                            s->dirty_from, s->trace_complete,
                                            s->manual_mask.has_value(), measured, s->revisions));
}

namespace {

using StageTimer = std::map<std::string, double>;

template <typename F>
void timed(StageTimer& timings, const std::string& stage, F&& f)
{
    const auto t0 = Clock::now();
    f();
    timings[stage] = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

} // namespace

void SessionService::recompute_stages(Session& session, json& resp)
{
    Session* s = &session;
    StageTimer timings;
    json recomputed = json::array();
    json snapshots = json::object();
    try {
        if (s->dirty_from <= DirtyFrom::crop) {
            timed(timings, "cropped", [&] {
                GrayImage stripped;
                try {
                    stripped = strip_description(s->image, s->params);
                } catch (const PreconditionError& e) {
                    throw StageError(Stage::description, e.what());
                }
                try {
                    auto roi = crop_roi(stripped, s->params);
                    s->trace.cropped = std::move(roi.image);
                    s->trace.roi_offset = roi.offset;
                } catch (const PreconditionError& e) {
                    throw StageError(Stage::crop, e.what());
                }
            });
            ++s->revisions["cropped"];
            recomputed.push_back("cropped");
            snapshots["cropped"] = png_base64(encode_png(s->trace.cropped));
            s->dirty_from = DirtyFrom::edges;
        }
        if (s->dirty_from <= DirtyFrom::edges) {
            timed(timings, "edges", [&] {
                auto edges = prewitt_edges(s->trace.cropped, s->params.fudge);
                if (edges.no_gradient)
                    throw StageError(Stage::edges, "no gradient in the cropped region");
                s->trace.edges = std::move(edges.edges);
            });
            ++s->revisions["edges"];
            recomputed.push_back("edges");
            snapshots["edges"] = png_base64(encode_png(s->trace.edges));
            s->dirty_from = DirtyFrom::close;
        }
        if (s->dirty_from <= DirtyFrom::close) {
            timed(timings, "closed",
                  [&] { s->trace.closed = close_region(s->trace.edges, s->params); });
            ++s->revisions["closed"];
            recomputed.push_back("closed");
            snapshots["closed"] = png_base64(encode_png(s->trace.closed));
            s->dirty_from = DirtyFrom::segment;
        }
    } catch (const StageError& e) {
        resp["stage_error"] = stage_error_body(e);
    }
    resp["recomputed"] = recomputed;
    resp["timings_ms"] = timings;
    resp["snapshots"] = snapshots;
}

ServiceResponse SessionService::update_params(const std::string& id, const std::string& body)
{
    auto s = find(id);
    if (!s)
        return error_response(404, "no such session");
    std::string err;
    const auto j = parse_body(body, err);
    if (!j)
        return error_response(400, err);

    std::lock_guard lock(s->mutex);
    PipelineParams next = s->params;
    try {
        merge_params(next, *j);
    } catch (const PreconditionError& e) {
        return json_response(422, {{"error", "invalid parameters"}, {"violations", {e.what()}}});
    }
    if (auto v = next.violations(s->image.width(), s->image.height()); !v.empty())
        return json_response(422, {{"error", "invalid parameters"}, {"violations", v}});

    const DirtyFrom affected = earliest_affected(s->params, next);
    s->params = next;
    json resp{{"params", next}};
    if (affected >= DirtyFrom::segment && s->dirty_from >= DirtyFrom::segment) {
        if (affected == DirtyFrom::segment && s->dirty_from == DirtyFrom::done) {
            s->dirty_from = DirtyFrom::segment;
            s->trace_complete = false;
            s->auto_measurements.reset();
            if (s->export_source == Session::Source::automatic)
                s->export_source = Session::Source::none;
        }
        resp["cached"] = affected == DirtyFrom::done;
        resp["recomputed"] = json::array();
        resp["timings_ms"] = json::object();
        resp["snapshots"] = json::object();
        resp["dirty_from"] = dirty_name(s->dirty_from);
        resp["etags"] = s->revisions;
        return json_response(200, resp);
    }

    s->dirty_from = std::min(s->dirty_from, affected);
    s->trace_complete = false;
    s->auto_measurements.reset();
    if (s->export_source == Session::Source::automatic)
        s->export_source = Session::Source::none;

    recompute_stages(*s, resp);
    resp["cached"] = false;
    resp["dirty_from"] = dirty_name(s->dirty_from);
    resp["etags"] = s->revisions;
    return json_response(200, resp);
}

ServiceResponse SessionService::segment(const std::string& id, const std::string& body)
{
    auto s = find(id);
    if (!s)
        return error_response(404, "no such session");
    std::string err;
    const auto j = parse_body(body, err);
    if (!j)
        return error_response(400, err);
    const std::string source = j->value("source", std::string("auto"));
    if (source != "auto" && source != "manual")
        return error_response(422, "source must be 'auto' or 'manual'");

    std::lock_guard lock(s->mutex);
    if (source == "manual") {
        if (!s->manual_mask)
            return error_response(409, "no manual segmentation submitted");
        s->export_source = Session::Source::manual;
        return json_response(200, {{"source", "manual"},
                                   {"measurements", *s->manual_measurements},
                                   {"filled_png", png_base64(encode_png(*s->manual_mask))}});
    }
    if (s->dirty_from < DirtyFrom::segment) {
        json resp;
        recompute_stages(*s, resp);
        if (resp.contains("stage_error"))
            return json_response(200, {{"stage_error", resp["stage_error"]}});
    }
    StageTimer timings;
    try {
        if (!s->trace_complete) {
            timed(timings, "segment", [&] {
                finish_trace(s->trace, s->image.geometry(), s->params);
            });
            s->trace_complete = true;
            s->dirty_from = DirtyFrom::done;
            ++s->revisions["filled"];
            timed(timings, "measure", [&] {
                try {
                    s->auto_measurements = measure(s->trace.faz_filled, s->image);
                } catch (const Error& e) {
                    throw StageError(Stage::measure, e.what());
                }
            });
        }
    } catch (const StageError& e) {
        s->trace_complete = false;
        s->dirty_from = DirtyFrom::segment;
        return json_response(200, {{"stage_error", stage_error_body(e)}});
    }
    s->export_source = Session::Source::automatic;
    json resp{{"source", "auto"},
              {"measurements", *s->auto_measurements},
              {"chosen_component_area_px", s->trace.chosen_component_area_px},
              {"filled_png", png_base64(encode_png(s->trace.faz_filled))},
              {"outline_png", png_base64(encode_png(s->trace.faz_outline))},
              {"timings_ms", timings},
              {"etags", s->revisions}};
    if (s->manual_mask)
        resp["agreement"] = agreement(s->trace.faz_filled, *s->manual_mask);
    return json_response(200, resp);
}

ServiceResponse SessionService::submit_manual(const std::string& id, const std::string& body)
{
    auto s = find(id);
    if (!s)
        return error_response(404, "no such session");
    std::string err;
    const auto j = parse_body(body, err);
    if (!j)
        return error_response(400, err);
    if (!j->contains("polygon") || !(*j)["polygon"].is_array())
        return error_response(422, "body needs a 'polygon' array of [x, y] pairs");
    Polygon poly;
    for (const auto& v : (*j)["polygon"]) {
        if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
            return error_response(422, "each vertex must be an [x, y] number pair");
        poly.vertices.push_back({v[0].get<double>(), v[1].get<double>()});
    }
    if (poly.vertices.size() < 3)
        return error_response(422, "polygon needs at least 3 vertices");

    std::lock_guard lock(s->mutex);
    auto raster = rasterize_polygon(poly, s->image.geometry());
    if (raster.outside_frame)
        return error_response(422, "polygon covers no pixel of the image");
    FazMeasurements m;
    try {
        m = measure(raster.mask, s->image);
    } catch (const Error& e) {
        return error_response(422, e.what());
    }
    s->manual_mask = std::move(raster.mask);
    s->manual_measurements = m;
    ++s->revisions["manual"];
    s->export_source = Session::Source::manual;
    json resp{{"measurements", m}, {"mask_png", png_base64(encode_png(*s->manual_mask))}};
    if (s->trace_complete)
        resp["agreement"] = agreement(s->trace.faz_filled, *s->manual_mask);
    return json_response(200, resp);
}

ServiceResponse SessionService::export_csv(const std::string& id)
{
    auto s = find(id);
    if (!s)
        return error_response(404, "no such session");
    std::lock_guard lock(s->mutex);
    const FazMeasurements* m = nullptr;
    if (s->export_source == Session::Source::automatic && s->auto_measurements)
        m = &*s->auto_measurements;
    else if (s->export_source == Session::Source::manual && s->manual_measurements)
        m = &*s->manual_measurements;
    if (!m)
        return error_response(409, "nothing measured yet; run segment first");
    ServiceResponse r;
    r.content_type = "text/csv";
    r.body = report::measurement_header() + report::measurement_row(s->filename, *m);
    r.headers["Content-Disposition"] = "attachment; filename=\"measurements.csv\"";
    return r;
}

ServiceResponse SessionService::stage_png(const std::string& id, const std::string& stage,
                                          const std::string& if_none_match)
{
    auto s = find(id);
    if (!s)
        return error_response(404, "no such session");
    std::lock_guard lock(s->mutex);

    const std::size_t rank = stage_rank(stage);
    const std::size_t clean = static_cast<std::size_t>(s->dirty_from); // stages [0, clean) current
    auto available = [&](std::size_t r) { return r < clean || (r == 3 && s->trace_complete); };

    std::vector<std::uint8_t> png;
    std::string etag_key = stage;
    if (stage == "original") {
        png = encode_png(s->image);
    } else if (stage == "cropped" && available(rank)) {
        png = encode_png(s->trace.cropped);
    } else if (stage == "edges" && available(rank)) {
        png = encode_png(s->trace.edges);
    } else if (stage == "closed" && available(rank)) {
        png = encode_png(s->trace.closed);
    } else if ((stage == "filled" || stage == "outline" || stage == "filled_mask" ||
                stage == "outline_mask") && s->trace_complete) {
        etag_key = "filled";
        const bool outline = stage.rfind("outline", 0) == 0;
        const BinaryMask& mask = outline ? s->trace.faz_outline : s->trace.faz_filled;
        png = stage.ends_with("_mask") ? encode_png(mask) : encode_png(overlay(s->image, mask, !outline));
    } else if (stage == "manual_mask" && s->manual_mask) {
        etag_key = "manual";
        png = encode_png(*s->manual_mask);
    } else {
        return error_response(404, "stage '" + stage + "' is not available");
    }
    const auto rev = s->revisions.count(etag_key) ? s->revisions.at(etag_key) : 0;
    const std::string etag = "\"" + s->id.substr(0, 8) + "-" + stage + "-" + std::to_string(rev) + "\"";
    ServiceResponse r;
    r.headers["ETag"] = etag;
    if (!if_none_match.empty() && if_none_match == etag) {
        r.status = 304;
        r.content_type.clear();
        return r;
    }
    r.content_type = "image/png";
    r.body = to_string(png);
    return r;
}

ServiceResponse SessionService::list_datasets()
{
    if (!options_.dataset_root)
        return error_response(404, "server has no dataset root configured");
    json files = json::array();
    std::error_code ec;
    for (fs::recursive_directory_iterator it(*options_.dataset_root, ec), end; it != end && !ec;
         it.increment(ec)) {
        if (!it->is_regular_file())
            continue;
        auto ext = it->path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
        if (ext == ".png" || ext == ".pgm")
            files.push_back(fs::relative(it->path(), *options_.dataset_root).generic_string());
    }
    std::vector<std::string> sorted = files.get<std::vector<std::string>>();
    std::sort(sorted.begin(), sorted.end());
    return json_response(200, {{"root", options_.dataset_root->string()}, {"files", sorted}});
}

std::optional<SessionSnapshot> SessionService::snapshot(const std::string& id)
{
    auto s = find(id);
    if (!s)
        return std::nullopt;
    std::lock_guard lock(s->mutex);
    SessionSnapshot snap;
    snap.params = s->params;
    snap.dirty_from = s->dirty_from;
    if (s->trace_complete)
        snap.trace = s->trace;
    snap.manual_mask = s->manual_mask;
    if (s->export_source == Session::Source::automatic)
        snap.measurements = s->auto_measurements;
    else if (s->export_source == Session::Source::manual)
        snap.measurements = s->manual_measurements;
    return snap;
}

void SessionService::install(httplib::Server& server)
{
    auto send = [](httplib::Response& res, const ServiceResponse& r) {
        res.status = r.status;
        for (const auto& [k, v] : r.headers)
            res.set_header(k, v);
        res.set_header("Access-Control-Allow-Origin", "*");
        res.set_header("Access-Control-Expose-Headers", "ETag");
        if (!r.content_type.empty())
            res.set_content(r.body, r.content_type);
    };
    auto extent_of = [](const httplib::Request& req) {
        if (!req.has_param("extent_mm"))
            return 6.0;
        try {
            return std::stod(req.get_param_value("extent_mm"));
        } catch (const std::exception&) {
            return -1.0;
        }
    };

    server.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) {
        res.set_header("Access-Control-Allow-Origin", "*");
        res.set_header("Access-Control-Allow-Methods", "GET, POST, PATCH, OPTIONS");
        res.set_header("Access-Control-Allow-Headers", "Content-Type, If-None-Match");
        res.status = 204;
    });
    server.Post("/sessions", [this, send, extent_of](const httplib::Request& req,
                                                     httplib::Response& res) {
        const auto ct = req.get_header_value("Content-Type");
        if (ct.rfind("application/json", 0) == 0) {
            send(res, create_from_json(req.body));
            return;
        }
        const std::string name =
            req.has_param("name") ? req.get_param_value("name") : std::string("upload.png");
        send(res, create_from_upload(req.body, name, extent_of(req)));
    });
    server.Get(R"(/sessions/([0-9a-f]+))",
               [this, send](const httplib::Request& req, httplib::Response& res) {
                   send(res, get(req.matches[1]));
               });
    server.Patch(R"(/sessions/([0-9a-f]+)/params)",
                 [this, send](const httplib::Request& req, httplib::Response& res) {
                     send(res, update_params(req.matches[1], req.body));
                 });
    server.Post(R"(/sessions/([0-9a-f]+)/segment)",
                [this, send](const httplib::Request& req, httplib::Response& res) {
                    send(res, segment(req.matches[1], req.body));
                });
    server.Post(R"(/sessions/([0-9a-f]+)/manual)",
                [this, send](const httplib::Request& req, httplib::Response& res) {
                    send(res, submit_manual(req.matches[1], req.body));
                });
    server.Get(R"(/sessions/([0-9a-f]+)/export\.csv)",
               [this, send](const httplib::Request& req, httplib::Response& res) {
                   send(res, export_csv(req.matches[1]));
               });
    server.Get(R"(/sessions/([0-9a-f]+)/stage/([a-z_]+)\.png)",
               [this, send](const httplib::Request& req, httplib::Response& res) {
                   send(res, stage_png(req.matches[1], req.matches[2],
                                       req.get_header_value("If-None-Match")));
               });
    server.Get("/datasets", [this, send](const httplib::Request&, httplib::Response& res) {
        send(res, list_datasets());
    });
}

} // namespace fazseg
