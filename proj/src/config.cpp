#include "cdgain/config.hpp"

#include "cdgain/error.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

namespace cdgain {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

[[noreturn]] void invalid(const std::string& field, const std::string& what) {
    throw Error(Errc::validation, field + " " + what);
}

// A JSON object being read, with its dotted path for messages.
class Reader {
public:
    Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object())
            invalid(where(), "must be an object");
    }

    void only(std::initializer_list<const char*> keys) const {
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            bool known = false;
            for (const char* k : keys) known = known || it.key() == k;
            if (!known)
                invalid(name(it.key()), "is not a known key");
        }
    }

    bool has(const char* key) const { return j_.contains(key); }

    Reader child(const char* key) const { return Reader(j_.at(key), name(key)); }

    void number(const char* key, double& out) const {
        if (!has(key)) return;
        const json& v = j_.at(key);
        if (!v.is_number())
            invalid(name(key), "must be a number");
        out = v.get<double>();
        if (!std::isfinite(out))
            invalid(name(key), "must be finite");
    }

    template <typename Int>
    void integer(const char* key, Int& out) const {
        if (!has(key)) return;
        const json& v = j_.at(key);
        if (!v.is_number_integer())
            invalid(name(key), "must be an integer");
        if constexpr (std::is_unsigned_v<Int>) {
            if (v.is_number_unsigned())
                out = v.get<Int>();
            else if (v.get<long long>() >= 0)
                out = static_cast<Int>(v.get<long long>());
            else
                invalid(name(key), "must be non-negative");
        } else {
            out = v.get<Int>();
        }
    }

    void boolean(const char* key, bool& out) const {
        if (!has(key)) return;
        const json& v = j_.at(key);
        if (!v.is_boolean())
            invalid(name(key), "must be true or false");
        out = v.get<bool>();
    }

    std::string string(const char* key) const {
        const json& v = j_.at(key);
        if (!v.is_string())
            invalid(name(key), "must be a string");
        return v.get<std::string>();
    }

    std::vector<double> array(const char* key, std::size_t n) const {
        const json& v = j_.at(key);
        if (!v.is_array() || v.size() != n)
            invalid(name(key), "must be an array of " + std::to_string(n) + " numbers");
        std::vector<double> out;
        for (const auto& e : v) {
            if (!e.is_number() || !std::isfinite(e.get<double>()))
                invalid(name(key), "must be an array of " + std::to_string(n) + " numbers");
            out.push_back(e.get<double>());
        }
        return out;
    }

    std::string name(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

private:
    std::string where() const { return path_.empty() ? "config" : path_; }

    const json& j_;
    std::string path_;
};

json parse_json(std::string_view text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(Errc::parse, std::string("config is not valid JSON: ") + e.what());
    }
}

const char* to_string(GainVariant v) {
    return v == GainVariant::endpoint_normalized ? "endpoint_normalized" : "paper_literal";
}

const char* to_string(TransformVariant v) {
    return v == TransformVariant::literal ? "literal" : "frame_change";
}

// Keys shared by session and batch configs.
void read_common(const Reader& r, SessionConfig& c) {
    r.integer("seed", c.seed);
    r.number("st_gain", c.st_gain);
    r.number("tap_slop", c.tap_slop);
    r.boolean("count_inactive_touch_as_miss", c.count_inactive_touch_as_miss);
    r.boolean("training", c.training);
    r.integer("trial_limit", c.trial_limit);
    if (r.has("display")) {
        const Reader d = r.child("display");
        d.only({"width", "height", "phone", "start_point", "min_target_width", "edge_margin", "red_width"});
        d.number("width", c.display.width);
        d.number("height", c.display.height);
        d.number("min_target_width", c.display.min_target_width);
        d.number("edge_margin", c.display.edge_margin);
        d.number("red_width", c.display.red_width);
        if (d.has("start_point")) {
            const auto v = d.array("start_point", 2);
            c.display.start_point = {v[0], v[1]};
        }
        if (d.has("phone")) {
            const Reader p = d.child("phone");
            p.only({"center", "width", "height"});
            Vec2 center = c.display.phone.center();
            double w = c.display.phone.width(), h = c.display.phone.height();
            if (p.has("center")) {
                const auto v = p.array("center", 2);
                center = {v[0], v[1]};
            }
            p.number("width", w);
            p.number("height", h);
            if (!(w > 0.0) || !(h > 0.0))
                invalid("display.phone", "width and height must be positive");
            c.display.phone = Rect::centered(center, w, h);
        }
    }
    if (r.has("zmap")) {
        const Reader z = r.child("zmap");
        z.only({"s_s", "s_l", "variant"});
        z.number("s_s", c.zmap.input_span);
        z.number("s_l", c.zmap.output_span);
        if (z.has("variant")) {
            const std::string v = z.string("variant");
            if (v == "endpoint_normalized")
                c.zmap.variant = GainVariant::endpoint_normalized;
            else if (v == "paper_literal")
                c.zmap.variant = GainVariant::paper_literal;
            else
                invalid("zmap.variant", "must be endpoint_normalized or paper_literal");
        }
    }
    if (r.has("zoom")) {
        const Reader z = r.child("zoom");
        z.only({"s_min", "s_max"});
        z.number("s_min", c.zoom.s_min);
        z.number("s_max", c.zoom.s_max);
    }
    if (r.has("calibration")) {
        const Reader z = r.child("calibration");
        z.only({"h_min", "h_max"});
        z.number("h_min", c.calibration.h_min);
        z.number("h_max", c.calibration.h_max);
    }
    if (r.has("transform")) {
        const Reader t = r.child("transform");
        t.only({"rotation", "translation", "variant"});
        RigidTransform tf;
        if (t.has("rotation")) {
            const auto q = t.array("rotation", 4);
            try {
                tf.rotation = UnitQuaternion::from_components(q[0], q[1], q[2], q[3]);
            } catch (const Error&) {
                invalid("transform.rotation", "must be a non-zero quaternion");
            }
        }
        if (t.has("translation")) {
            const auto v = t.array("translation", 3);
            tf.translation = {v[0], v[1], v[2]};
        }
        if (t.has("variant")) {
            const std::string v = t.string("variant");
            if (v == "literal")
                tf.variant = TransformVariant::literal;
            else if (v == "frame_change")
                tf.variant = TransformVariant::frame_change;
            else
                invalid("transform.variant", "must be literal or frame_change");
        }
        c.transform = tf;
    }
    c.zmap.h_min = c.calibration.h_min;
    c.zmap.h_max = c.calibration.h_max;
}

constexpr std::initializer_list<const char*> kCommonKeys{
    "seed", "st_gain", "tap_slop", "count_inactive_touch_as_miss", "training", "trial_limit",
    "display", "zmap", "zoom", "calibration", "transform"};

} // namespace

void SessionConfig::validate() const {
    display.validate();
    calibration.validate();
    ZMappingParams z = zmap;
    z.h_min = calibration.h_min;
    z.h_max = calibration.h_max;
    z.validate();
    zoom.validate();
    if (!(st_gain > 0.0))
        invalid("st_gain", "must be positive");
    if (!(tap_slop >= 0.0))
        invalid("tap_slop", "must be non-negative");
    if (subject < 0)
        invalid("subject", "must be non-negative");
    if (trial_limit < 0)
        invalid("trial_limit", "must be non-negative");
}

SessionConfig parse_config(std::string_view text, const SessionConfig& defaults) {
    const json j = parse_json(text);
    const Reader r(j, "");
    std::vector<const char*> keys(kCommonKeys);
    keys.insert(keys.end(), {"method", "subject"});
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* k : keys) known = known || it.key() == k;
        if (!known)
            invalid(it.key(), "is not a known key");
    }
    SessionConfig c = defaults;
    if (r.has("method")) {
        try {
            c.method = parse_method(r.string("method"));
        } catch (const Error&) {
            invalid("method", "must be one of PT, ST, ZM, ZS");
        }
    }
    r.integer("subject", c.subject);
    read_common(r, c);
    c.validate();
    return c;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(Errc::io, "cannot open " + path);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

SessionConfig load_config(const std::string& path, const SessionConfig& defaults) {
    return parse_config(read_text_file(path), defaults);
}

std::string config_to_json(const SessionConfig& c) {
    ordered_json j;
    j["method"] = to_string(c.method);
    j["subject"] = c.subject;
    j["seed"] = c.seed;
    j["display"] = {{"width", c.display.width},
                    {"height", c.display.height},
                    {"phone",
                     {{"center", {c.display.phone.center().x, c.display.phone.center().y}},
                      {"width", c.display.phone.width()},
                      {"height", c.display.phone.height()}}},
                    {"start_point", {c.display.start_point.x, c.display.start_point.y}},
                    {"min_target_width", c.display.min_target_width},
                    {"edge_margin", c.display.edge_margin},
                    {"red_width", c.display.red_width}};
    j["zmap"] = {{"s_s", c.zmap.input_span}, {"s_l", c.zmap.output_span}, {"variant", to_string(c.zmap.variant)}};
    j["zoom"] = {{"s_min", c.zoom.s_min}, {"s_max", c.zoom.s_max}};
    j["calibration"] = {{"h_min", c.calibration.h_min}, {"h_max", c.calibration.h_max}};
    j["st_gain"] = c.st_gain;
    j["tap_slop"] = c.tap_slop;
    j["count_inactive_touch_as_miss"] = c.count_inactive_touch_as_miss;
    j["training"] = c.training;
    j["trial_limit"] = c.trial_limit;
    if (c.transform) {
        const auto& t = *c.transform;
        j["transform"] = {{"rotation", {t.rotation.w(), t.rotation.x(), t.rotation.y(), t.rotation.z()}},
                          {"translation", {t.translation.x, t.translation.y, t.translation.z}},
                          {"variant", to_string(t.variant)}};
    }
    return j.dump();
}

SessionSettings make_session_settings(const SessionConfig& cfg) {
    cfg.validate();
    const auto canonical = generate_target_set(cfg.display, cfg.seed);
    const MethodPlan mp = plan_method(cfg.subject, canonical, cfg.seed, cfg.method);
    SessionSettings s;
    s.method = cfg.method;
    s.display = cfg.display;
    s.zmap = cfg.zmap;
    s.zmap.h_min = cfg.calibration.h_min;
    s.zmap.h_max = cfg.calibration.h_max;
    s.zoom = cfg.zoom;
    s.st_gain = cfg.st_gain;
    s.tap_slop = cfg.tap_slop;
    s.count_inactive_touch_as_miss = cfg.count_inactive_touch_as_miss;
    s.subject = cfg.subject;
    s.seed = cfg.seed;
    s.transform = cfg.transform;
    if (cfg.training)
        s.trials = mp.training;
    s.trials.insert(s.trials.end(), mp.main.begin(), mp.main.end());
    if (cfg.trial_limit > 0 && s.trials.size() > static_cast<std::size_t>(cfg.trial_limit))
        s.trials.resize(static_cast<std::size_t>(cfg.trial_limit));
    return s;
}

void BatchConfig::validate() const {
    if (subjects < 1)
        invalid("subjects", "must be at least 1");
    if (jobs < 0)
        invalid("jobs", "must be non-negative");
    session.validate();
    agent.validate();
}

SimulationSetup BatchConfig::setup() const {
    SimulationSetup s;
    s.display = session.display;
    s.zmap = session.zmap;
    s.zmap.h_min = session.calibration.h_min;
    s.zmap.h_max = session.calibration.h_max;
    s.st_gain = session.st_gain;
    s.tap_slop = session.tap_slop;
    s.training = session.training;
    s.trial_limit = session.trial_limit;
    return s;
}

BatchConfig parse_batch_config(std::string_view text, const BatchConfig& defaults) {
    const json j = parse_json(text);
    const Reader r(j, "");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = it.key() == "subjects" || it.key() == "jobs" || it.key() == "agent" ||
                     it.key() == "method" || it.key() == "subject";
        for (const char* k : kCommonKeys) known = known || it.key() == k;
        if (!known)
            invalid(it.key(), "is not a known key");
    }
    BatchConfig b = defaults;
    r.integer("subjects", b.subjects);
    r.integer("jobs", b.jobs);
    if (r.has("method")) {
        try {
            b.session.method = parse_method(r.string("method"));
        } catch (const Error&) {
            invalid("method", "must be one of PT, ST, ZM, ZS");
        }
    }
    r.integer("subject", b.session.subject);
    read_common(r, b.session);
    if (r.has("agent")) {
        const Reader a = r.child("agent");
        a.only({"fitts_a", "fitts_b", "endpoint_noise_sigma", "clutch_penalty", "mt_noise_sigma",
                "reaction_time", "arc_min", "arc_per_m", "zmap_noise_per_gain", "tap_duration",
                "min_movement_time", "hover_height", "phone_margin", "sample_rate", "max_retries"});
        AgentParams& p = b.agent;
        a.number("fitts_a", p.fitts_a);
        a.number("fitts_b", p.fitts_b);
        a.number("endpoint_noise_sigma", p.endpoint_noise_sigma);
        a.number("clutch_penalty", p.clutch_penalty);
        a.number("mt_noise_sigma", p.mt_noise_sigma);
        a.number("reaction_time", p.reaction_time);
        a.number("arc_min", p.arc_min);
        a.number("arc_per_m", p.arc_per_m);
        a.number("zmap_noise_per_gain", p.zmap_noise_per_gain);
        a.number("tap_duration", p.tap_duration);
        a.number("min_movement_time", p.min_movement_time);
        a.number("hover_height", p.hover_height);
        a.number("phone_margin", p.phone_margin);
        a.number("sample_rate", p.sample_rate);
        a.integer("max_retries", p.max_retries);
    }
    b.validate();
    return b;
}

BatchConfig load_batch_config(const std::string& path, const BatchConfig& defaults) {
    return parse_batch_config(read_text_file(path), defaults);
}

} // namespace cdgain
