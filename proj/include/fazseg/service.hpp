#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "fazseg/metrics.hpp"
#include "fazseg/pipeline.hpp"
#include "fazseg/validation.hpp"

namespace httplib {
class Server;
}

namespace fazseg {

/// Earliest stage whose cached result is stale. `segment` means crop, edges and close
/// are current; `done` means the FAZ trace is current too.
enum class DirtyFrom { crop = 0, edges = 1, close = 2, segment = 3, done = 4 };
std::string_view dirty_name(DirtyFrom d);

/// Earliest stage a parameter change invalidates.
DirtyFrom earliest_affected(const PipelineParams& before, const PipelineParams& after);

struct ServiceResponse {
    int status = 200;
    std::string content_type = "application/json";
    std::string body;
    std::map<std::string, std::string> headers;
};

struct ServiceOptions {
    std::optional<std::filesystem::path> dataset_root;
    std::size_t max_sessions = 64;
    std::chrono::seconds idle_timeout{30 * 60};
};

/// Read-only copy of a session's pipeline state, for inspection and tests.
struct SessionSnapshot {
    PipelineParams params;
    DirtyFrom dirty_from = DirtyFrom::crop;
    std::optional<PipelineTrace> trace;
    std::optional<BinaryMask> manual_mask;
    std::optional<FazMeasurements> measurements;
};

/// Interactive segmentation sessions. Every handler is safe to call concurrently; calls
/// against one session are serialized, distinct sessions proceed in parallel.
class SessionService {
public:
    explicit SessionService(ServiceOptions options = {});
    ~SessionService();

    SessionService(const SessionService&) = delete;
    SessionService& operator=(const SessionService&) = delete;

    ServiceResponse create_from_upload(const std::string& bytes, const std::string& filename,
                                       double extent_mm);
    /// `relative_path` is resolved inside the dataset root and may not leave it.
    ServiceResponse create_from_dataset(const std::string& relative_path, double extent_mm);
    /// JSON body {"path": "...", "extent_mm": 6.0}.
    ServiceResponse create_from_json(const std::string& body);

    ServiceResponse get(const std::string& id);
    ServiceResponse update_params(const std::string& id, const std::string& body);
    /// Body may be empty or {"source": "auto" | "manual"}.
    ServiceResponse segment(const std::string& id, const std::string& body);
    /// Body {"polygon": [[x, y], ...]} in full-frame pixel coordinates.
    ServiceResponse submit_manual(const std::string& id, const std::string& body);
    ServiceResponse export_csv(const std::string& id);
    ServiceResponse stage_png(const std::string& id, const std::string& stage,
                              const std::string& if_none_match = {});
    ServiceResponse list_datasets();

    std::optional<SessionSnapshot> snapshot(const std::string& id);
    std::size_t session_count();

    /// Registers the HTTP routes on `server`.
    void install(httplib::Server& server);

private:
    struct Session;
    std::shared_ptr<Session> find(const std::string& id);
    ServiceResponse create(GrayImage image, std::string filename);
    void purge_locked(std::chrono::steady_clock::time_point now);
    std::string new_id();
    static void recompute_stages(Session& session, nlohmann::json& resp);

    ServiceOptions options_;
    std::mutex mutex_;
    std::map<std::string, std::shared_ptr<Session>> sessions_;
    std::uint64_t id_state_;
};

} // namespace fazseg
