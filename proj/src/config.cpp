// SPDX-License-Identifier: Apache-2.0
#include "cstdoa/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cstdoa/audio_io.hpp"
#include "cstdoa/error.hpp"

namespace cstdoa {

using nlohmann::json;

namespace {

// Walks a JSON object and reports problems with the full dotted path.
class Reader {
public:
    Reader(const json& node, std::string path) : node_(node), path_(std::move(path)) {}

    std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    bool has(const std::string& key) const { return node_.contains(key) && !node_.at(key).is_null(); }

    Reader child(const std::string& key) const {
        if (!node_.contains(key) || !node_.at(key).is_object()) {
            throw ConfigError(field(key), "expected an object");
        }
        return Reader(node_.at(key), field(key));
    }

    const json& raw(const std::string& key) const { return node_.at(key); }

    double number(const std::string& key, double fallback) const {
        if (!has(key)) return fallback;
        const auto& v = node_.at(key);
        if (!v.is_number()) throw ConfigError(field(key), "expected a number");
        return v.get<double>();
    }

    double number(const std::string& key) const {
        if (!has(key)) throw ConfigError(field(key), "required");
        return number(key, 0.0);
    }

    template <class Int>
    Int integer(const std::string& key, Int fallback) const {
        if (!has(key)) return fallback;
        const auto& v = node_.at(key);
        if (!v.is_number_integer()) throw ConfigError(field(key), "expected an integer");
        if constexpr (std::is_unsigned_v<Int>) {
            if (v.get<long long>() < 0 && !v.is_number_unsigned()) {
                throw ConfigError(field(key), "must be non-negative");
            }
        }
        return v.get<Int>();
    }

    bool boolean(const std::string& key, bool fallback) const {
        if (!has(key)) return fallback;
        const auto& v = node_.at(key);
        if (!v.is_boolean()) throw ConfigError(field(key), "expected true or false");
        return v.get<bool>();
    }

    std::string string(const std::string& key, const std::string& fallback) const {
        if (!has(key)) return fallback;
        const auto& v = node_.at(key);
        if (!v.is_string()) throw ConfigError(field(key), "expected a string");
        return v.get<std::string>();
    }

    Point2 point(const std::string& key, Point2 fallback) const {
        if (!has(key)) return fallback;
        return to_point(node_.at(key), field(key));
    }

    static Point2 to_point(const json& v, const std::string& where) {
        if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
            throw ConfigError(where, "expected [x, y]");
        }
        return {v[0].get<double>(), v[1].get<double>()};
    }

    std::vector<std::size_t> index_list(const std::string& key) const {
        std::vector<std::size_t> out;
        if (!has(key)) return out;
        const auto& v = node_.at(key);
        if (!v.is_array()) throw ConfigError(field(key), "expected an array");
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_number_unsigned()) {
                throw ConfigError(field(key) + "[" + std::to_string(i) + "]",
                                  "expected a non-negative integer");
            }
            out.push_back(v[i].get<std::size_t>());
        }
        return out;
    }

    void reject_unknown(std::initializer_list<const char*> allowed) const {
        for (const auto& item : node_.items()) {
            bool ok = false;
            for (const char* a : allowed) ok = ok || item.key() == a;
            if (!ok) throw ConfigError(field(item.key()), "unknown key");
        }
    }

private:
    const json& node_;
    std::string path_;
};

PcmAudio load_channel_audio(const AudioChannelConfig& ch) {
    if (ch.format == "wav") return read_wav16(ch.path);
    if (ch.format == "raw") return read_raw16(ch.path, ch.raw_rate, ch.raw_channels);
    throw FormatError("unsupported audio format '" + ch.format + "'");
}

AudioChannelConfig parse_channel(const Reader& r) {
    r.reject_unknown({"path", "channel", "format", "raw_rate", "raw_channels"});
    AudioChannelConfig ch;
    ch.path = r.string("path", "");
    if (ch.path.empty()) throw ConfigError(r.field("path"), "required");
    ch.channel = r.integer<std::size_t>("channel", 0);
    ch.format = r.string("format", "wav");
    if (ch.format != "wav" && ch.format != "raw") {
        throw ConfigError(r.field("format"), "expected \"wav\" or \"raw\"");
    }
    ch.raw_rate = r.number("raw_rate", 0.0);
    ch.raw_channels = r.integer<std::size_t>("raw_channels", 1);
    if (ch.format == "raw" && !(ch.raw_rate > 0.0)) {
        throw ConfigError(r.field("raw_rate"), "raw audio needs a positive rate");
    }
    return ch;
}

Trajectory parse_trajectory(const Reader& r) {
    const auto kind = r.string("kind", "circle");
    if (kind == "circle") {
        r.reject_unknown({"kind", "center_offset", "radius", "speed", "start_angle"});
        CircleTrajectory c;
        c.center_offset = r.number("center_offset", c.center_offset);
        c.radius = r.number("radius", c.radius);
        c.speed = r.number("speed", c.speed);
        c.start_angle = r.number("start_angle", c.start_angle);
        return c;
    }
    if (kind == "static") {
        r.reject_unknown({"kind", "position"});
        if (!r.has("position")) throw ConfigError(r.field("position"), "required");
        return StaticTrajectory{r.point("position", {})};
    }
    if (kind == "file") {
        r.reject_unknown({"kind", "path"});
        const auto path = r.string("path", "");
        if (path.empty()) throw ConfigError(r.field("path"), "required");
        try {
            return load_trajectory_csv(path);
        } catch (const FormatError& e) {
            throw ConfigError(r.field("path"), e.what());
        }
    }
    throw ConfigError(r.field("kind"), "expected circle, static or file");
}

SourceSignal parse_source(const Reader& r, double sample_rate) {
    r.reject_unknown({"kind", "envelope_width", "carrier_hz", "band_low_hz", "band_high_hz",
                      "burst_on", "burst_off", "path", "channel", "format", "raw_rate"});
    SourceSignal s;
    try {
        s.kind = source_kind_from_string(r.string("kind", "gaussian-sine"));
    } catch (const InvalidSpecError& e) {
        throw ConfigError(r.field("kind"), e.what());
    }
    s.envelope_width = r.number("envelope_width", s.envelope_width);
    s.carrier_hz = r.number("carrier_hz", s.carrier_hz);
    s.band_low_hz = r.number("band_low_hz", s.band_low_hz);
    s.band_high_hz = r.number("band_high_hz", s.band_high_hz);
    s.burst_on = r.number("burst_on", s.burst_on);
    s.burst_off = r.number("burst_off", s.burst_off);
    if (s.kind == SourceKind::pcm) {
        AudioChannelConfig ch;
        ch.path = r.string("path", "");
        if (ch.path.empty()) throw ConfigError(r.field("path"), "required for a pcm source");
        ch.channel = r.integer<std::size_t>("channel", 0);
        ch.format = r.string("format", "wav");
        ch.raw_rate = r.number("raw_rate", sample_rate);
        PcmAudio audio;
        try {
            audio = load_channel_audio(ch);
        } catch (const FormatError& e) {
            throw ConfigError(r.field("path"), e.what());
        }
        if (ch.channel >= audio.channel_count()) {
            throw ConfigError(r.field("channel"), "file has " + std::to_string(audio.channel_count()) + " channels");
        }
        s.pcm = std::move(audio.channels[ch.channel]);
        s.pcm_rate = audio.sample_rate;
        s.pcm_path = ch.path;
    }
    return s;
}

Scenario parse_scenario(const Reader& r, const Scenario& base) {
    r.reject_unknown({"sensors", "trajectory", "source", "sample_rate", "duration", "c_air",
                      "snr_db", "noise_floor", "echoes", "attenuation"});
    Scenario s = base;
    if (r.has("sensors")) {
        const auto& v = r.raw("sensors");
        if (!v.is_array()) throw ConfigError(r.field("sensors"), "expected an array of [x, y]");
        s.sensors.clear();
        for (std::size_t i = 0; i < v.size(); ++i) {
            s.sensors.push_back(Reader::to_point(v[i], r.field("sensors") + "[" + std::to_string(i) + "]"));
        }
    }
    s.sample_rate = r.number("sample_rate", s.sample_rate);
    s.duration = r.number("duration", s.duration);
    s.c_air = r.number("c_air", s.c_air);
    if (r.has("trajectory")) s.trajectory = parse_trajectory(r.child("trajectory"));
    if (r.has("source")) s.source = parse_source(r.child("source"), s.sample_rate);
    if (r.has("snr_db")) {
        const auto& v = r.raw("snr_db");
        if (!v.is_array()) throw ConfigError(r.field("snr_db"), "expected an array of numbers or null");
        s.snr_db.clear();
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (v[i].is_null()) {
                s.snr_db.emplace_back();
            } else if (v[i].is_number()) {
                s.snr_db.emplace_back(v[i].get<double>());
            } else {
                throw ConfigError(r.field("snr_db") + "[" + std::to_string(i) + "]", "expected a number or null");
            }
        }
    }
    if (r.has("noise_floor")) s.noise_floor = r.number("noise_floor");
    if (r.has("echoes")) {
        const auto& v = r.raw("echoes");
        if (!v.is_array()) throw ConfigError(r.field("echoes"), "expected an array");
        s.echoes.clear();
        for (std::size_t i = 0; i < v.size(); ++i) {
            const Reader e(v[i], r.field("echoes") + "[" + std::to_string(i) + "]");
            if (!v[i].is_object()) throw ConfigError(e.field(""), "expected an object");
            e.reject_unknown({"extra_delay", "gain"});
            s.echoes.push_back({e.number("extra_delay"), e.number("gain")});
        }
    }
    const auto att = r.string("attenuation", s.attenuation == Attenuation::none ? "none" : "inverse-distance");
    if (att == "none") {
        s.attenuation = Attenuation::none;
    } else if (att == "inverse-distance") {
        s.attenuation = Attenuation::inverse_distance;
    } else {
        throw ConfigError(r.field("attenuation"), "expected none or inverse-distance");
    }
    return s;
}

json trajectory_json(const Trajectory& t) {
    return std::visit(
        [](const auto& tr) -> json {
            using T = std::decay_t<decltype(tr)>;
            if constexpr (std::is_same_v<T, CircleTrajectory>) {
                return {{"kind", "circle"}, {"center_offset", tr.center_offset}, {"radius", tr.radius},
                        {"speed", tr.speed}, {"start_angle", tr.start_angle}};
            } else if constexpr (std::is_same_v<T, StaticTrajectory>) {
                return {{"kind", "static"}, {"position", {tr.position.x, tr.position.y}}};
            } else {
                return {{"kind", "file"}, {"path", tr.source_path}};
            }
        },
        t);
}

json source_json(const SourceSignal& s) {
    json j = {{"kind", to_string(s.kind)}};
    switch (s.kind) {
        case SourceKind::gaussian_sine:
            j["envelope_width"] = s.envelope_width;
            j["carrier_hz"] = s.carrier_hz;
            break;
        case SourceKind::bandnoise:
            j["band_low_hz"] = s.band_low_hz;
            j["band_high_hz"] = s.band_high_hz;
            j["burst_on"] = s.burst_on;
            j["burst_off"] = s.burst_off;
            break;
        case SourceKind::pcm: j["path"] = s.pcm_path; break;
        case SourceKind::silence: break;
    }
    return j;
}

json channel_json(const AudioChannelConfig& c) {
    return {{"path", c.path}, {"channel", c.channel}, {"format", c.format},
            {"raw_rate", c.raw_rate}, {"raw_channels", c.raw_channels}};
}

}  // namespace

std::size_t SensingConfig::default_base_shift(std::size_t sensor, std::size_t compressive_sensors) const {
    // interleave the sensors' rows inside one stride of the spread schedule
    const std::size_t n = block_length();
    const std::size_t stride = n / rows;
    if (sensor == 0 || compressive_sensors == 0) return 0;
    return ((sensor - 1) * (stride / compressive_sensors)) % n;
}

SensingMatrixSpec SensingConfig::matrix_for(std::size_t sensor, std::size_t compressive_sensors) const {
    const auto mseq = MSequenceSpec::primitive(degree);
    const std::size_t base =
        sensor < base_shifts.size() ? base_shifts[sensor] : default_base_shift(sensor, compressive_sensors);
    if (shifts.empty()) return SensingMatrixSpec::spread(mseq, rows, base);
    SensingMatrixSpec spec{mseq, rows, {}};
    for (auto s : shifts) spec.row_shifts.push_back((s + base) % mseq.period());
    return spec;
}

double RunConfig::compression_ratio() const {
    return static_cast<double>(block_length()) / static_cast<double>(sensing.rows);
}

void RunConfig::validate() const {
    if (sensing.degree < kMinDegree || sensing.degree > kMaxDegree) {
        throw ConfigError("sensing.k", "degree must be in [2, 16]");
    }
    const std::size_t n = block_length();
    if (sensing.rows == 0 || sensing.rows >= n) throw ConfigError("sensing.rows", "need 0 < M < N");
    if (!sensing.shifts.empty() && sensing.shifts.size() != sensing.rows) {
        throw ConfigError("sensing.shifts", "need exactly M shifts");
    }
    try {
        const std::size_t k = mode == RunMode::simulate ? scenario.sensors.size() - 1 : 1;
        for (std::size_t i = 1; i <= k; ++i) sensing.matrix_for(i, k).validate();
    } catch (const InvalidSpecError& e) {
        throw ConfigError("sensing", e.what());
    }
    try {
        solver.validate();
    } catch (const InvalidSpecError& e) {
        throw ConfigError("solver", e.what());
    }
    try {
        jackknife.validate(sensing.rows);
    } catch (const InvalidSpecError& e) {
        throw ConfigError("jackknife", e.what());
    }
    if (mode == RunMode::simulate) {
        try {
            scenario.validate();
        } catch (const InvalidSpecError& e) {
            throw ConfigError("scenario", e.what());
        }
    } else {
        for (const auto* ch : {&audio.reference, &audio.sensor}) {
            const std::string which = ch == &audio.reference ? "audio.reference" : "audio.sensor";
            if (!std::ifstream(ch->path)) throw ConfigError(which + ".path", "file not found: " + ch->path);
        }
        if (!(audio.spacing > 0.0)) throw ConfigError("audio.spacing", "must be positive");
        if (!(audio.c_air > 0.0)) throw ConfigError("audio.c_air", "must be positive");
    }
}

RunConfig parse_config(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError("", std::string("invalid JSON: ") + e.what());
    }
    if (!root.is_object()) throw ConfigError("", "top level must be an object");
    const Reader r(root, "");
    r.reject_unknown({"preset", "name", "mode", "seed", "scenario", "sensing", "solver", "jackknife",
                      "tdoa", "geometry", "audio", "output"});

    RunConfig cfg;
    if (r.has("preset")) {
        try {
            cfg = preset(r.string("preset", ""));
        } catch (const ConfigError& e) {
            throw ConfigError("preset", e.what());
        }
    }
    cfg.name = r.string("name", cfg.name);
    const auto mode = r.string("mode", cfg.mode == RunMode::simulate ? "simulate" : "audio-pair");
    if (mode == "simulate") {
        cfg.mode = RunMode::simulate;
    } else if (mode == "audio-pair") {
        cfg.mode = RunMode::audio_pair;
    } else {
        throw ConfigError("mode", "expected simulate or audio-pair");
    }
    cfg.seed = r.integer<std::uint64_t>("seed", cfg.seed);

    if (r.has("sensing")) {
        const auto s = r.child("sensing");
        s.reject_unknown({"k", "block_length", "rows", "shifts", "base_shifts"});
        cfg.sensing.degree = s.integer<int>("k", cfg.sensing.degree);
        if (cfg.sensing.degree < kMinDegree || cfg.sensing.degree > kMaxDegree) {
            throw ConfigError("sensing.k", "degree must be in [2, 16]");
        }
        if (s.has("block_length")) {
            // snap to the nearest 2^k - 1
            cfg.sensing.degree = degree_for_length(s.integer<std::size_t>("block_length", 0), true);
        }
        cfg.sensing.rows = s.integer<std::size_t>("rows", cfg.sensing.rows);
        if (s.has("shifts")) cfg.sensing.shifts = s.index_list("shifts");
        if (s.has("base_shifts")) cfg.sensing.base_shifts = s.index_list("base_shifts");
    }
    if (r.has("scenario")) cfg.scenario = parse_scenario(r.child("scenario"), cfg.scenario);
    cfg.scenario.block_length = cfg.block_length();
    cfg.scenario.seed = cfg.seed;

    if (r.has("solver")) {
        const auto s = r.child("solver");
        s.reject_unknown({"mu", "mu_scale", "max_iterations", "rel_tolerance", "backtracking"});
        if (s.has("mu")) {
            const auto& mu = s.raw("mu");
            if (mu.is_string() && mu.get<std::string>() == "auto") {
                cfg.solver.mu.reset();
            } else if (mu.is_number()) {
                cfg.solver.mu = mu.get<double>();
            } else {
                throw ConfigError(s.field("mu"), "expected a number or \"auto\"");
            }
        }
        cfg.solver.mu_scale = s.number("mu_scale", cfg.solver.mu_scale);
        cfg.solver.max_iterations = s.integer<int>("max_iterations", cfg.solver.max_iterations);
        cfg.solver.rel_tolerance = s.number("rel_tolerance", cfg.solver.rel_tolerance);
        cfg.solver.backtracking = s.boolean("backtracking", cfg.solver.backtracking);
    }
    if (r.has("jackknife")) {
        const auto s = r.child("jackknife");
        s.reject_unknown({"repetitions", "removed", "min_confidence"});
        cfg.jackknife.repetitions = s.integer<int>("repetitions", cfg.jackknife.repetitions);
        cfg.jackknife.removed = s.integer<int>("removed", cfg.jackknife.removed);
        if (s.has("min_confidence")) cfg.jackknife.min_confidence = s.number("min_confidence");
    }
    if (r.has("tdoa")) {
        const auto s = r.child("tdoa");
        s.reject_unknown({"refine", "warm_start", "bound_by_geometry"});
        cfg.refine = s.boolean("refine", cfg.refine);
        cfg.warm_start = s.boolean("warm_start", cfg.warm_start);
        cfg.bound_by_geometry = s.boolean("bound_by_geometry", cfg.bound_by_geometry);
    }
    if (r.has("geometry")) {
        const auto s = r.child("geometry");
        s.reject_unknown({"source_side"});
        cfg.source_side = s.point("source_side", cfg.source_side);
    }
    if (r.has("audio")) {
        const auto s = r.child("audio");
        s.reject_unknown({"reference", "sensor", "spacing", "c_air"});
        cfg.audio.reference = parse_channel(s.child("reference"));
        if (s.has("sensor")) {
            cfg.audio.sensor = parse_channel(s.child("sensor"));
        } else {
            cfg.audio.sensor = cfg.audio.reference;
            cfg.audio.sensor.channel = cfg.audio.reference.channel + 1;
        }
        cfg.audio.spacing = s.number("spacing", cfg.audio.spacing);
        cfg.audio.c_air = s.number("c_air", cfg.audio.c_air);
    }
    if (r.has("output")) {
        const auto s = r.child("output");
        s.reject_unknown({"dir", "objective_trace"});
        cfg.output_dir = s.string("dir", cfg.output_dir);
        cfg.objective_trace = s.boolean("objective_trace", cfg.objective_trace);
    }
    cfg.validate();
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("", "cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string config_to_json(const RunConfig& cfg, int indent) {
    json j;
    j["name"] = cfg.name;
    j["mode"] = cfg.mode == RunMode::simulate ? "simulate" : "audio-pair";
    j["seed"] = cfg.seed;
    json sensing = {{"k", cfg.sensing.degree},
                    {"block_length", cfg.block_length()},
                    {"rows", cfg.sensing.rows},
                    {"shifts", cfg.sensing.shifts},
                    {"base_shifts", cfg.sensing.base_shifts}};
    j["sensing"] = sensing;
    json solver = {{"mu_scale", cfg.solver.mu_scale},
                   {"max_iterations", cfg.solver.max_iterations},
                   {"rel_tolerance", cfg.solver.rel_tolerance},
                   {"backtracking", cfg.solver.backtracking}};
    if (cfg.solver.mu) {
        solver["mu"] = *cfg.solver.mu;
    } else {
        solver["mu"] = "auto";
    }
    j["solver"] = solver;
    json jk = {{"repetitions", cfg.jackknife.repetitions}, {"removed", cfg.jackknife.removed}};
    jk["min_confidence"] = cfg.jackknife.min_confidence ? json(*cfg.jackknife.min_confidence) : json(nullptr);
    j["jackknife"] = jk;
    j["tdoa"] = {{"refine", cfg.refine}, {"warm_start", cfg.warm_start},
                 {"bound_by_geometry", cfg.bound_by_geometry}};
    j["geometry"] = {{"source_side", {cfg.source_side.x, cfg.source_side.y}}};
    j["output"] = {{"dir", cfg.output_dir}, {"objective_trace", cfg.objective_trace}};
    if (cfg.mode == RunMode::simulate) {
        const auto& s = cfg.scenario;
        json sc;
        json sensors = json::array();
        for (const auto& p : s.sensors) sensors.push_back({p.x, p.y});
        sc["sensors"] = sensors;
        sc["trajectory"] = trajectory_json(s.trajectory);
        sc["source"] = source_json(s.source);
        sc["sample_rate"] = s.sample_rate;
        sc["duration"] = s.duration;
        sc["c_air"] = s.c_air;
        json snr = json::array();
        for (const auto& v : s.snr_db) snr.push_back(v ? json(*v) : json(nullptr));
        sc["snr_db"] = snr;
        sc["noise_floor"] = s.effective_noise_floor();
        json echoes = json::array();
        for (const auto& e : s.echoes) echoes.push_back({{"extra_delay", e.extra_delay}, {"gain", e.gain}});
        sc["echoes"] = echoes;
        sc["attenuation"] = s.attenuation == Attenuation::none ? "none" : "inverse-distance";
        j["scenario"] = sc;
    } else {
        j["audio"] = {{"reference", channel_json(cfg.audio.reference)},
                      {"sensor", channel_json(cfg.audio.sensor)},
                      {"spacing", cfg.audio.spacing},
                      {"c_air", cfg.audio.c_air}};
    }
    return j.dump(indent);
}

RunConfig preset(const std::string& name) {
    RunConfig cfg;
    cfg.name = name;
    cfg.mode = RunMode::simulate;
    cfg.seed = 1;
    cfg.scenario.sensors = {{0.0, 0.0}, {-1.0, 0.0}, {1.0, 0.0}};
    cfg.scenario.trajectory = CircleTrajectory{7.0, 5.0, 0.47, 0.0};
    cfg.scenario.sample_rate = 16000.0;
    cfg.scenario.c_air = kDefaultSpeedOfSound;
    if (name == "paper-fig5") {
        cfg.sensing.degree = 12;
        cfg.sensing.rows = 40;
        cfg.scenario.source = SourceSignal{};
        cfg.scenario.source.kind = SourceKind::gaussian_sine;
        cfg.scenario.source.envelope_width = 10.0;
        cfg.scenario.source.carrier_hz = 1000.0;
        // a little over one loop so the closure of the trace is observable
        cfg.scenario.duration = 72.0;
        cfg.output_dir = "paper-fig5-out";
    } else if (name == "desk-255") {
        cfg.sensing.degree = 8;
        cfg.sensing.rows = 16;
        cfg.scenario.source = SourceSignal{};
        cfg.scenario.source.kind = SourceKind::bandnoise;
        cfg.scenario.duration = 2.0;
        cfg.output_dir = "desk-255-out";
    } else {
        throw ConfigError("preset", "unknown preset '" + name + "'");
    }
    cfg.scenario.block_length = cfg.block_length();
    cfg.scenario.seed = cfg.seed;
    return cfg;
}

std::vector<std::string> preset_names() { return {"paper-fig5", "desk-255"}; }

}  // namespace cstdoa
