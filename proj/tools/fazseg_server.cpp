// HTTP service behind the interactive tuning UI.

#include <CLI11.hpp>
#include <httplib.h>

#include <cstdlib>
#include <iostream>

#include "fazseg/service.hpp"

int main(int argc, char** argv)
{
    CLI::App app{"Interactive FAZ segmentation service"};
    int port = 8080;
    std::string host = "127.0.0.1";
    std::string dataset_root;
    std::string ui_dir;
    std::size_t max_sessions = 64;
    int idle_minutes = 30;

    if (const char* env = std::getenv("FAZSEG_DATASET_ROOT"))
        dataset_root = env;
    app.add_option("--port", port, "Listen port")->check(CLI::Range(1, 65535));
    app.add_option("--host", host, "Listen address");
    app.add_option("--dataset-root", dataset_root,
                   "Server-side image directory (default: $FAZSEG_DATASET_ROOT)");
    app.add_option("--ui-dir", ui_dir, "Static files to serve at /")->check(CLI::ExistingDirectory);
    app.add_option("--max-sessions", max_sessions, "Sessions kept before LRU eviction");
    app.add_option("--idle-minutes", idle_minutes, "Idle session lifetime");
    CLI11_PARSE(app, argc, argv);

    fazseg::ServiceOptions options;
    if (!dataset_root.empty())
        options.dataset_root = dataset_root;
    options.max_sessions = max_sessions;
    options.idle_timeout = std::chrono::minutes(idle_minutes);

    fazseg::SessionService service(options);
    httplib::Server server;
    service.install(server);
    if (!ui_dir.empty())
        server.set_mount_point("/", ui_dir);

    std::cerr << "[INFO] listening on http://" << host << ":" << port << "\n";
    if (!server.listen(host, port)) {
        std::cerr << "[ERROR] cannot listen on " << host << ":" << port << "\n";
        return 1;
    }
    return 0;
}
