// repopulse: analyze a clone offline, or run and feed the service.

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <csignal>
#include <cstdlib>
#include <iostream>
#include <stop_token>
#include <thread>

#include "repopulse/api/service.hpp"
#include "repopulse/app/app.hpp"
#include "repopulse/ingest/errors.hpp"

namespace {

using namespace repopulse;

enum Exit { ok = 0, other = 1, config_error = 2, store_error = 3, network_error = 4 };

std::stop_source g_stop;

void on_signal(int) { g_stop.request_stop(); }

void install_signal_handlers() {
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
}

/// "owner/name#branch"
std::optional<std::array<std::string, 3>> parse_track_spec(const std::string& spec) {
    const auto slash = spec.find('/');
    const auto hash = spec.find('#', slash == std::string::npos ? 0 : slash);
    if (slash == std::string::npos || hash == std::string::npos) {
        return std::nullopt;
    }
    return std::array<std::string, 3>{spec.substr(0, slash), spec.substr(slash + 1, hash - slash - 1),
                                      spec.substr(hash + 1)};
}

int exit_for(const ingest::IngestError& e) {
    switch (e.code()) {
        case ingest::IngestErrc::network:
        case ingest::IngestErrc::rate_limited:
        case ingest::IngestErrc::clone_failed:
        case ingest::IngestErrc::authentication_failed:
        case ingest::IngestErrc::remote_repository_not_found:
            return network_error;
        default:
            return other;
    }
}

struct Context {
    config::Config config;
    std::unique_ptr<Clock> clock;
    std::unique_ptr<store::Store> store;
};

Context open(const std::optional<std::string>& config_path) {
    Context c;
    c.config = config::load(config_path ? std::optional<std::filesystem::path>(*config_path) : std::nullopt);
    c.clock = app::make_clock(c.config);
    c.store = std::make_unique<store::Store>(store::open_file_store(c.config.store_path), *c.clock);
    return c;
}

int run(int argc, char** argv) {
    CLI::App cli{"Repository health metrics: size, issue density and spoilage over time."};
    cli.require_subcommand(1);
    std::optional<std::string> config_path;
    cli.add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);

    // analyze
    auto* analyze = cli.add_subcommand("analyze", "Analyze a local clone and print its series");
    app::AnalyzeRequest request;
    std::string group_by;
    std::string metric = "all";
    std::string format = "json";
    analyze->add_option("--repo", request.repo, "Path to a git clone")->required();
    analyze->add_option("--issues", request.issues, "issues.json file")->required();
    analyze->add_option("--group-by", group_by, "week or month")->required()->check(CLI::IsMember({"week", "month"}));
    analyze->add_option("--metric", metric, "kloc, density, spoilage or all")
        ->check(CLI::IsMember({"kloc", "density", "spoilage", "all"}));
    analyze->add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));

    // serve
    auto* serve = cli.add_subcommand("serve", "Serve the HTTP API");

    // work
    auto* work = cli.add_subcommand("work", "Run the batch worker");
    bool once = false;
    work->add_flag("--once", once, "Process every queued job, then exit");

    // track
    auto* track = cli.add_subcommand("track", "Request tracking of owner/name#branch");
    std::string spec;
    track->add_option("spec", spec, "owner/name#branch")->required();

    // projects
    auto* projects = cli.add_subcommand("projects", "List projects, one JSON record per line");
    std::optional<std::string> state;
    projects->add_option("--state", state, "pending, tracked or failed")
        ->check(CLI::IsMember({"pending", "tracked", "failed"}));

    // veto
    auto* veto = cli.add_subcommand("veto", "Reject a pending project");
    std::string veto_id;
    std::string reason = "rejected by operator";
    veto->add_option("project_id", veto_id, "Project id")->required();
    veto->add_option("--reason", reason, "Reason recorded on the project");

    try {
        cli.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return cli.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return cli.exit(e);
    } catch (const CLI::ParseError& e) {
        cli.exit(e);
        return config_error;
    }

    auto logger = spdlog::stderr_color_mt("repopulse");
    spdlog::set_default_logger(logger);

    if (analyze->parsed()) {
        // Offline: no store; config only pins the clock.
        const auto cfg = config::load(config_path ? std::optional<std::filesystem::path>(*config_path) : std::nullopt);
        request.granularity = *metrics::parse_granularity(group_by);
        request.metric = *wire::parse_metric(metric, true);
        request.format = format == "csv" ? app::OutputFormat::csv : app::OutputFormat::json;
        const auto clock = app::make_clock(cfg);
        try {
            std::cout << app::analyze(request, clock->now());
        } catch (const std::exception& e) {
            std::cerr << "repopulse analyze: " << e.what() << "\n";
            return other;
        }
        return ok;
    }

    auto ctx = open(config_path);

    if (track->parsed()) {
        const auto parts = parse_track_spec(spec);
        if (!parts) {
            std::cerr << "repopulse track: expected owner/name#branch, got '" << spec << "'\n";
            return config_error;
        }
        const auto result = ctx.store->submit_request((*parts)[0], (*parts)[1], (*parts)[2]);
        std::cout << wire::render(store::project_to_json(result.record));
        return ok;
    }

    if (projects->parsed()) {
        const auto filter = state ? store::parse_state(*state) : std::nullopt;
        for (const auto& p : ctx.store->list_projects(filter)) {
            std::cout << store::project_to_json(p).dump() << "\n";
        }
        return ok;
    }

    if (veto->parsed()) {
        worker::Worker w(*ctx.store, app::worker_options(ctx.config), app::issue_sources(ctx.config, *ctx.clock));
        std::cout << wire::render(store::project_to_json(w.veto(veto_id, reason)));
        return ok;
    }

    if (work->parsed()) {
        auto options = app::worker_options(ctx.config);
        if (const auto crash = config::process_env("REPOPULSE_CRASH_AFTER_PUT"); crash && *crash == "1") {
            // Test hook: die between publishing series and marking the project tracked.
            options.after_series_put = [](const std::string&) { std::raise(SIGKILL); };
        }
        worker::Worker w(*ctx.store, options, app::issue_sources(ctx.config, *ctx.clock));
        if (once) {
            const auto n = w.drain();
            spdlog::info("processed {} job attempt(s)", n);
            return ok;
        }
        if (ctx.config.now) {
            // A pinned clock would make the polling loop spin through simulated time.
            throw config::ConfigError("a pinned clock (now) requires work --once");
        }
        install_signal_handlers();
        w.run(g_stop.get_token(), ctx.config.poll_interval);
        return ok;
    }

    if (serve->parsed()) {
        api::ApiService service(*ctx.store, {.track_rate_limit_per_minute = ctx.config.track_rate_limit_per_minute,
                                             .default_per_page = 20,
                                             .max_per_page = 100});
        api::HttpServer server(service);
        const int port = server.bind(ctx.config.listen_addr);
        const auto host = api::split_listen_addr(ctx.config.listen_addr).first;
        install_signal_handlers();
        std::jthread stopper([&](std::stop_token) {
            while (!g_stop.stop_requested()) {
                std::this_thread::sleep_for(std::chrono::milliseconds(100));
            }
            server.stop();
        });
        // Scripts wait for this line to learn the port.
        std::cout << "listening on " << host << ":" << port << std::endl;
        server.listen();
        g_stop.request_stop();
        return ok;
    }
    return other;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const config::ConfigError& e) {
        std::cerr << "repopulse: config: " << e.what() << "\n";
        return config_error;
    } catch (const store::StoreError& e) {
        std::cerr << "repopulse: store: " << e.what() << "\n";
        return store_error;
    } catch (const ingest::IngestError& e) {
        std::cerr << "repopulse: " << e.what() << "\n";
        return exit_for(e);
    } catch (const std::exception& e) {
        std::cerr << "repopulse: " << e.what() << "\n";
        return other;
    }
}
