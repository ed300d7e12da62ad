#include "cdgain/analysis.hpp"
#include "cdgain/batch.hpp"
#include "cdgain/config.hpp"
#include "cdgain/error.hpp"
#include "cdgain/log.hpp"
#include "cdgain/report.hpp"
#include "cdgain/server.hpp"
#include "cdgain/tracking.hpp"
#include "cdgain/wire.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include <chrono>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include <pthread.h>

using namespace cdgain;
using ordered_json = nlohmann::ordered_json;

namespace {

struct Common {
    std::string config;
    std::uint64_t seed = 0;
    CLI::Option* seed_opt = nullptr;
};

BatchConfig load(const Common& c) {
    BatchConfig b;
    if (!c.config.empty())
        b = load_batch_config(c.config);
    if (c.seed_opt && c.seed_opt->count() > 0)
        b.session.seed = c.seed;
    b.validate();
    return b;
}

// Writes to `path`, or stdout for "" and "-".
void emit(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        std::cout.flush();
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << text))
        throw Error(Errc::io, "cannot write " + path);
}

ordered_json target_json(const Target& t, bool with_center = true) {
    ordered_json j;
    j["dir"] = t.direction;
    if (with_center) {
        j["x"] = t.center.x;
        j["y"] = t.center.y;
    }
    j["D_m"] = t.distance;
    j["W_m"] = t.width;
    j["id"] = t.id_value;
    j["id_cat"] = id_category(t.id_value);
    return j;
}

int cmd_generate(const Common& c, int subject, const std::string& out) {
    const BatchConfig cfg = load(c);
    const DisplayConfig& d = cfg.session.display;
    if (subject < 0) {
        std::string text;
        for (const auto& t : generate_target_set(d, cfg.session.seed)) text += target_json(t).dump() + "\n";
        emit(out, text);
        return 0;
    }
    const SessionPlan plan = plan_session(subject, d, cfg.session.seed);
    ordered_json j;
    j["subject"] = plan.subject;
    j["seed"] = plan.seed;
    j["method_order"] = ordered_json::array();
    for (Method m : plan.method_order) j["method_order"].push_back(to_string(m));
    ordered_json methods;
    for (const auto& mp : plan.methods) {
        ordered_json m;
        for (const char* part : {"training", "main"}) {
            const auto& trials = std::string(part) == "main" ? mp.main : mp.training;
            ordered_json arr = ordered_json::array();
            for (const auto& t : trials) {
                ordered_json e;
                e["block"] = t.block;
                e["trial"] = t.trial;
                e.update(target_json(t.target));
                arr.push_back(e);
            }
            m[part] = arr;
        }
        methods[to_string(mp.method)] = m;
    }
    j["methods"] = methods;
    emit(out, j.dump(2) + "\n");
    return 0;
}

int cmd_simulate(const Common& c, int subjects, int jobs, const std::string& out,
                 const std::string& transcript, const std::string& method, int subject) {
    BatchConfig cfg = load(c);
    if (subjects > 0)
        cfg.subjects = subjects;
    if (jobs >= 0)
        cfg.jobs = jobs;
    if (!method.empty())
        cfg.session.method = parse_method(method);
    if (subject >= 0)
        cfg.session.subject = subject;
    cfg.validate();
    const auto start = std::chrono::steady_clock::now();
    std::vector<TrialRecord> records;
    if (!transcript.empty()) {
        // One session, as a client would drive it over the wire.
        const MethodRun run = simulate_single(cfg);
        std::string text;
        for (const auto& l : make_transcript(cfg.session, run.inputs)) text += l + "\n";
        emit(transcript, text);
        records = run.records;
    } else {
        records = simulate_batch(cfg);
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (out.empty() || out == "-")
        emit(out, write_log(records));
    else
        save_records(out, records);
    std::cerr << fmt::format("simulated {} trials in {:.2f} s\n", records.size(), secs);
    return 0;
}

int cmd_serve(const Common& c, const std::string& address, int port, int ws_port,
              const std::string& log_dir, const std::string& method, int subject) {
    BatchConfig cfg = load(c);
    if (!method.empty())
        cfg.session.method = parse_method(method);
    if (subject >= 0)
        cfg.session.subject = subject;
    cfg.session.validate();

    // Signals are taken synchronously by this thread only.
    sigset_t set;
    sigemptyset(&set);
    sigaddset(&set, SIGINT);
    sigaddset(&set, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &set, nullptr);

    ServerOptions o;
    o.address = address;
    o.port = static_cast<std::uint16_t>(port);
    o.websocket = ws_port >= 0;
    o.ws_port = static_cast<std::uint16_t>(std::max(ws_port, 0));
    o.defaults = cfg.session;
    o.sink = directory_sink(log_dir);
    Server server(o);
    server.start();
    std::cerr << fmt::format("serving on {}:{}", address, server.tcp_port());
    if (o.websocket)
        std::cerr << fmt::format(" (websocket {})", server.ws_port());
    std::cerr << fmt::format(", logs in {}\n", log_dir);
    int sig = 0;
    sigwait(&set, &sig);
    server.stop();
    return 0;
}

int cmd_analyze(const std::vector<std::string>& logs, double alpha, const std::string& json_out,
                const std::string& text_out, const std::string& prefs, const Common& c) {
    const BatchConfig cfg = load(c);
    std::vector<TrialRecord> records;
    for (const auto& path : logs) {
        auto r = load_records(path, cfg.session.display);
        records.insert(records.end(), r.begin(), r.end());
    }
    std::vector<PreferenceInput> pref;
    if (!prefs.empty())
        pref = parse_preferences(read_text_file(prefs));
    const AnalysisReport report = analyze(records, alpha, pref);
    const std::string json = report_to_json(report);
    if (!json_out.empty())
        emit(json_out, json + "\n");
    if (!text_out.empty() || json_out.empty())
        emit(text_out, render_report_json(json));
    return 0;
}

int cmd_report(const std::string& in, const std::string& out) {
    emit(out, render_report_json(read_text_file(in)));
    return 0;
}

int cmd_track(const Common& c, const std::string& in, const std::vector<double>& roi_min,
              const std::vector<double>& roi_max, double max_jump, const std::string& out) {
    const BatchConfig cfg = load(c);
    FingerFilterConfig f;
    if (!roi_min.empty())
        f.roi_min = {roi_min[0], roi_min[1], roi_min[2]};
    if (!roi_max.empty())
        f.roi_max = {roi_max[0], roi_max[1], roi_max[2]};
    f.max_jump = max_jump;
    f.validate();
    std::ifstream file(in, std::ios::binary);
    if (!file)
        throw Error(Errc::io, "cannot open " + in);
    const auto frames = read_marker_stream(file);
    std::string text;
    for (const auto& s : track_finger(frames, f, cfg.session.transform)) {
        ordered_json j;
        j["t"] = s.t;
        j["x"] = s.position.x;
        j["y"] = s.position.y;
        j["z"] = s.position.z;
        j["held"] = s.held;
        text += j.dump() + "\n";
    }
    emit(out, text);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Control-display gain study toolkit: targets, simulation, live sessions, analysis"};
    app.require_subcommand(1);
    Common common;
    const char* env = std::getenv("CDGAIN_CONFIG");
    if (env)
        common.config = env;
    app.add_option("-c,--config", common.config, "Config file (JSON); default $CDGAIN_CONFIG");

    auto* gen = app.add_subcommand("generate", "Print the target set, or a subject's plan");
    int gen_subject = -1;
    std::string gen_out;
    common.seed_opt = nullptr;
    std::uint64_t seed = 0;
    auto* gen_seed = gen->add_option("--seed", seed, "Seed for target generation and shuffles");
    gen->add_option("--subject", gen_subject, "Print the session plan of this subject instead");
    gen->add_option("-o,--out", gen_out, "Output file (default stdout)");

    auto* sim = app.add_subcommand("simulate", "Run synthetic subjects and write a trial log");
    int sim_subjects = 0, sim_jobs = -1, sim_subject = -1;
    std::string sim_out, sim_transcript, sim_method;
    auto* sim_seed = sim->add_option("--seed", seed, "Seed for plans and agents");
    sim->add_option("-n,--subjects", sim_subjects, "Number of subjects (default 20)");
    sim->add_option("-j,--jobs", sim_jobs, "Worker threads (0 = all cores)");
    sim->add_option("-o,--out", sim_out, "Trial log (.jsonl or .csv; default stdout)");
    sim->add_option("--transcript", sim_transcript,
                    "Simulate one session and write its wire transcript here");
    sim->add_option("--method", sim_method, "Method for --transcript (PT, ST, ZM)");
    sim->add_option("--subject", sim_subject, "Subject for --transcript");

    auto* srv = app.add_subcommand("serve", "Run live sessions over a socket");
    std::string srv_address = "127.0.0.1", srv_logs = "logs", srv_method;
    int srv_port = 7878, srv_ws = -1, srv_subject = -1;
    auto* srv_seed = srv->add_option("--seed", seed, "Seed for target plans");
    srv->add_option("--address", srv_address, "Listen address");
    srv->add_option("-p,--port", srv_port, "TCP port for newline-delimited JSON (0 = any)");
    srv->add_option("--ws-port", srv_ws, "Also accept WebSocket clients on this port (0 = any)");
    srv->add_option("--log-dir", srv_logs, "Directory for finished session logs");
    srv->add_option("--method", srv_method, "Default method (PT, ST, ZM, ZS)");
    srv->add_option("--subject", srv_subject, "Default subject index");

    auto* ana = app.add_subcommand("analyze", "Run the statistics pipeline over trial logs");
    std::vector<std::string> ana_logs;
    double alpha = 0.05;
    std::string ana_json, ana_text, ana_prefs;
    ana->add_option("logs", ana_logs, "Trial logs (.jsonl or .csv)")->required();
    ana->add_option("--alpha", alpha, "Significance level")->check(CLI::Range(0.0, 1.0));
    ana->add_option("--json", ana_json, "Write the structured report here");
    ana->add_option("--text", ana_text, "Write the rendered tables here (default stdout)");
    ana->add_option("--preferences", ana_prefs, "Preference ranks (JSON)");

    auto* rep = app.add_subcommand("report", "Render tables from an analyze --json report");
    std::string rep_in, rep_out;
    rep->add_option("report", rep_in, "Report JSON")->required();
    rep->add_option("-o,--out", rep_out, "Output file (default stdout)");

    auto* trk = app.add_subcommand("track", "Filter a recorded marker stream into finger positions");
    std::string trk_in, trk_out;
    std::vector<double> roi_min, roi_max;
    double max_jump = 0.05;
    trk->add_option("markers", trk_in, "Marker stream (JSON lines)")->required();
    trk->add_option("--roi-min", roi_min, "Working volume corner x y z")->expected(3);
    trk->add_option("--roi-max", roi_max, "Working volume corner x y z")->expected(3);
    trk->add_option("--max-jump", max_jump, "Largest accepted move per frame (m)");
    trk->add_option("-o,--out", trk_out, "Output file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    common.seed = seed;
    try {
        if (*gen) {
            common.seed_opt = gen_seed;
            return cmd_generate(common, gen_subject, gen_out);
        }
        if (*sim) {
            common.seed_opt = sim_seed;
            return cmd_simulate(common, sim_subjects, sim_jobs, sim_out, sim_transcript, sim_method, sim_subject);
        }
        if (*srv) {
            common.seed_opt = srv_seed;
            return cmd_serve(common, srv_address, srv_port, srv_ws, srv_logs, srv_method, srv_subject);
        }
        if (*ana)
            return cmd_analyze(ana_logs, alpha, ana_json, ana_text, ana_prefs, common);
        if (*rep)
            return cmd_report(rep_in, rep_out);
        if (*trk)
            return cmd_track(common, trk_in, roi_min, roi_max, max_jump, trk_out);
    } catch (const Error& e) {
        std::cerr << "error (" << to_string(e.code()) << "): " << e.what() << "\n";
        return e.is_validation() ? 1 : 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
