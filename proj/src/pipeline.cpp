// SPDX-License-Identifier: Apache-2.0
#include "cstdoa/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "cstdoa/audio_io.hpp"
#include "cstdoa/baseline.hpp"
#include "cstdoa/error.hpp"
#include "cstdoa/random.hpp"
#include "cstdoa/sparsity.hpp"
#include "cstdoa/version.hpp"

namespace cstdoa {

namespace fs = std::filesystem;

namespace {

constexpr const char* kSchemaTag = "v1";

std::string compiler_id() {
#if defined(__clang__)
    return "clang " __clang_version__;
#elif defined(__GNUC__)
    return "gcc " __VERSION__;
#else
    return "unknown";
#endif
}

struct Cell {
    SensorBlockResult result;
    bool done = false;
};

// Runs task(i) for i in [0, count) on up to `workers` threads. The first
// exception is rethrown after all threads join.
template <class Task>
void parallel_for(std::size_t count, std::size_t workers, Task&& task) {
    workers = std::max<std::size_t>(1, std::min(workers, count));
    if (workers == 1) {
        for (std::size_t i = 0; i < count; ++i) task(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    task(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                    next.store(count);
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

std::ofstream open_output(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    return out;
}

std::string bool_str(bool b) { return b ? "true" : "false"; }

struct BlockGrid {
    std::size_t blocks = 0;
    std::size_t sensors = 0;  // including the reference
    std::vector<Cell> cells;  // [block * sensors + sensor], sensor 0 unused

    Cell& at(std::size_t b, std::size_t s) { return cells[b * sensors + s]; }
    const Cell& at(std::size_t b, std::size_t s) const { return cells[b * sensors + s]; }
};

// Drives the cells of one run. `window(b)` returns the reference window of
// block b and `block(s, b)` the full-rate samples of sensor s.
template <class WindowFn, class BlockFn>
BlockGrid process_grid(std::size_t blocks, std::size_t sensors, const std::vector<SensingMatrix>& sensing,
                       const std::vector<ProcessingOptions>& opts, bool warm_start, std::uint64_t seed,
                       std::size_t workers, WindowFn&& window, BlockFn&& block) {
    BlockGrid grid;
    grid.blocks = blocks;
    grid.sensors = sensors;
    grid.cells.resize(blocks * sensors);
    const std::size_t compressive = sensors - 1;

    auto run_cell = [&](std::size_t b, std::size_t s, std::span<const double> warm) {
        auto o = opts[s];
        o.jackknife.seed = cell_seed(seed, b, s);
        const auto ref = window(b);
        const auto sig = block(s, b);
        auto& cell = grid.at(b, s);
        cell.result = process_sensor_block(ref, sig, sensing[s], o, b, s, warm);
        cell.done = true;
    };

    if (warm_start) {
        // each sensor is a chain over blocks; chains are independent
        parallel_for(compressive, workers, [&](std::size_t k) {
            const std::size_t s = k + 1;
            std::vector<double> warm;
            for (std::size_t b = 0; b < blocks; ++b) {
                run_cell(b, s, warm);
                const auto& ch = grid.at(b, s).result.channel;
                if (!ch.empty()) warm = ch;
            }
        });
    } else {
        parallel_for(blocks * compressive, workers, [&](std::size_t i) {
            run_cell(i / compressive, i % compressive + 1, {});
        });
    }
    return grid;
}

void write_tdoa_csv(const fs::path& path, const BlockGrid& grid, const std::vector<double>& times) {
    auto out = open_output(path);
    out << "# cstdoa tdoa " << kSchemaTag << "\n";
    out << "block_index,sensor_id,method,time_seconds,delta_t_seconds,confidence,accepted\n";
    for (std::size_t b = 0; b < grid.blocks; ++b) {
        for (std::size_t s = 1; s < grid.sensors; ++s) {
            const auto& r = grid.at(b, s).result;
            auto line = [&](const TdoaReport& rep) {
                out << b << ',' << s << ',' << to_string(rep.method) << ',' << format_number(times[b]) << ','
                    << format_number(rep.delta_t) << ',' << rep.confidence.to_string() << ','
                    << bool_str(rep.accepted) << '\n';
            };
            line(r.compressive);
            if (r.xcorr) line(*r.xcorr);
        }
    }
}

void write_solver_csv(const fs::path& path, const BlockGrid& grid) {
    auto out = open_output(path);
    out << "# cstdoa solver " << kSchemaTag << "\n";
    out << "block_index,sensor_id,repetition,failed,iterations,converged,objective,residual_norm,mu,"
           "peak_index\n";
    for (std::size_t b = 0; b < grid.blocks; ++b) {
        for (std::size_t s = 1; s < grid.sensors; ++s) {
            const auto& d = grid.at(b, s).result.diagnostics;
            for (std::size_t r = 0; r < d.solves.size(); ++r) {
                const auto& e = d.solves[r];
                out << b << ',' << s << ',' << r << ',' << bool_str(d.failed[r]) << ',' << e.iterations << ','
                    << bool_str(e.converged) << ',' << format_number(e.objective) << ','
                    << format_number(e.residual_norm) << ',' << format_number(e.mu) << ',' << e.peak_index
                    << '\n';
            }
        }
    }
}

void write_trace_csv(const fs::path& path, const BlockGrid& grid) {
    auto out = open_output(path);
    out << "# cstdoa objective_trace " << kSchemaTag << "\n";
    out << "block_index,sensor_id,repetition,iteration,objective\n";
    for (std::size_t b = 0; b < grid.blocks; ++b) {
        for (std::size_t s = 1; s < grid.sensors; ++s) {
            const auto& d = grid.at(b, s).result.diagnostics;
            for (std::size_t r = 0; r < d.solves.size(); ++r) {
                const auto& tr = d.solves[r].objective_trace;
                for (std::size_t it = 0; it < tr.size(); ++it) {
                    out << b << ',' << s << ',' << r << ',' << it << ',' << format_number(tr[it]) << '\n';
                }
            }
        }
    }
}

// analytic: per sensor (index 1..), per block; empty when unavailable
void write_figure_csv(const fs::path& path, const BlockGrid& grid, const std::vector<double>& times,
                      const std::vector<std::vector<double>>& analytic) {
    auto out = open_output(path);
    out << "# cstdoa figure " << kSchemaTag << "\n";
    out << "time_seconds";
    for (std::size_t s = 1; s < grid.sensors; ++s) {
        out << ",dt" << s << "_compressive,accepted" << s << ",dt" << s << "_xcorr";
        if (!analytic.empty()) out << ",dt" << s << "_analytic";
    }
    out << '\n';
    for (std::size_t b = 0; b < grid.blocks; ++b) {
        out << format_number(times[b]);
        for (std::size_t s = 1; s < grid.sensors; ++s) {
            const auto& r = grid.at(b, s).result;
            out << ',' << format_number(r.compressive.delta_t) << ',' << bool_str(r.compressive.accepted) << ','
                << format_number(r.xcorr ? r.xcorr->delta_t : std::numeric_limits<double>::quiet_NaN());
            if (!analytic.empty()) out << ',' << format_number(analytic[s][b]);
        }
        out << '\n';
    }
}

void write_track_csv(const fs::path& path, const BlockGrid& grid, const std::vector<double>& times,
                     const ArrayGeometry& geom, Point2 side) {
    auto out = open_output(path);
    out << "# cstdoa track " << kSchemaTag << "\n";
    out << "time_seconds,x,y,residual,n_pairs_used\n";
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t b = 0; b < grid.blocks; ++b) {
        std::vector<PairObservation> pairs;
        for (std::size_t s = 1; s < grid.sensors; ++s) {
            const auto& rep = grid.at(b, s).result.compressive;
            if (!rep.accepted || !std::isfinite(rep.delta_t)) continue;
            try {
                const double theta = doa_from_tdoa(rep.delta_t, geom.spacing(0, s), geom.c_air());
                pairs.push_back({geom.sensor(0), geom.sensor(s), theta});
            } catch (const InadmissibleDelayError&) {
            }
        }
        const auto tri = triangulate(pairs, side);
        const Point2 p = tri.position.value_or(Point2{nan, nan});
        out << format_number(times[b]) << ',' << format_number(p.x) << ',' << format_number(p.y) << ','
            << format_number(tri.position ? tri.residual : nan) << ',' << (tri.position ? tri.pairs_used : 0)
            << '\n';
    }
}

void write_manifest(const fs::path& path, const RunConfig& cfg, const RunSummary& summary, bool dry_run) {
    nlohmann::ordered_json m;
    m["tool"] = "cstdoa";
    m["version"] = kVersion;
    m["schema"] = kSchemaTag;
    m["compiler"] = compiler_id();
    m["seed"] = cfg.seed;
    m["dry_run"] = dry_run;
    m["block_length"] = cfg.block_length();
    m["measurements"] = cfg.sensing.rows;
    m["compression_ratio"] = summary.compression_ratio;
    m["blocks"] = summary.blocks;
    m["dropped_samples"] = summary.dropped_samples;
    m["accepted"] = summary.accepted;
    m["rejected"] = summary.rejected;
    m["files"] = summary.files;
    m["config"] = nlohmann::ordered_json::parse(config_to_json(cfg, -1));
    auto out = open_output(path);
    out << m.dump(2) << '\n';
}

void count_acceptance(const BlockGrid& grid, RunSummary& summary) {
    for (std::size_t b = 0; b < grid.blocks; ++b) {
        for (std::size_t s = 1; s < grid.sensors; ++s) {
            if (grid.at(b, s).result.compressive.accepted) {
                ++summary.accepted;
            } else {
                ++summary.rejected;
            }
        }
    }
}

ProcessingOptions base_options(const RunConfig& cfg, double sample_period) {
    ProcessingOptions o;
    o.sample_period = sample_period;
    o.solver = cfg.solver;
    o.solver.record_trace = cfg.objective_trace;
    o.jackknife = cfg.jackknife;
    o.refine = cfg.refine;
    o.keep_diagnostics = true;
    return o;
}

}  // namespace

std::uint64_t cell_seed(std::uint64_t run_seed, std::size_t block_index, std::size_t sensor_id) {
    return mix64(mix64(run_seed ^ 0x6a09e667f3bcc909ULL) + (static_cast<std::uint64_t>(block_index) << 8) +
                 static_cast<std::uint64_t>(sensor_id));
}

SensorBlockResult process_sensor_block(std::span<const double> reference_window,
                                       std::span<const double> sensor_block, const SensingMatrix& sensing,
                                       const ProcessingOptions& opts, std::size_t block_index,
                                       std::size_t sensor_id, std::span<const double> warm_start) {
    const std::size_t n = sensing.cols();
    if (sensor_block.size() != n) throw DimensionError("sensor block length differs from N");
    if (reference_window.size() != SparsityBasis::window_length(n)) {
        throw DimensionError("reference window length differs from N + 2 ceil(N/2)");
    }
    SensorBlockResult out;
    out.measurements = sensing.apply(sensor_block);

    SparsityBasis basis({reference_window.begin(), reference_window.end()}, n);
    const ComposedOperator composed(sensing, basis);
    const DenseOperator a = composed.materialize();
    const SubsetOperatorBuilder build = [&a](std::span<const std::size_t> kept) {
        return std::make_unique<DenseOperator>(a.select_rows(kept));
    };

    DelayOptions dopts{opts.refine, opts.max_abs_delay};
    JackknifeDiagnostics diag;
    out.compressive = jackknife_estimate(out.measurements, build, opts.jackknife, opts.solver, opts.sample_period,
                                         dopts, warm_start, &diag);
    out.compressive.sensor_id = sensor_id;
    out.compressive.block_index = block_index;
    for (std::size_t r = 0; r < diag.solves.size(); ++r) {
        if (!diag.failed[r]) {
            out.channel = diag.solves[r].h;
            break;
        }
    }
    if (opts.keep_diagnostics) {
        for (auto& s : diag.solves) s.h.clear();
        out.diagnostics = std::move(diag);
    }

    if (opts.run_xcorr) {
        const std::size_t origin = SparsityBasis::window_origin(n);
        const auto ref_block = reference_window.subspan(origin, n);
        const double bound = opts.max_abs_delay.value_or(static_cast<double>(n - 1) * opts.sample_period);
        try {
            auto x = tdoa_xcorr(ref_block, sensor_block, bound, opts.sample_period, opts.refine);
            x.sensor_id = sensor_id;
            x.block_index = block_index;
            out.xcorr = std::move(x);
        } catch (const NoPeakError&) {
            TdoaReport x;
            x.method = Method::xcorr;
            x.sensor_id = sensor_id;
            x.block_index = block_index;
            x.confidence = Confidence::not_applicable();
            x.accepted = false;
            out.xcorr = std::move(x);
        }
    }
    return out;
}

RunSummary run_scenario(const RunConfig& cfg, const RunOptions& ropts) {
    cfg.validate();
    if (cfg.mode != RunMode::simulate) throw ConfigError("mode", "run_scenario needs simulate mode");
    RunSummary summary;
    summary.output_dir = cfg.output_dir;
    summary.compression_ratio = cfg.compression_ratio();
    const fs::path dir(cfg.output_dir);
    fs::create_directories(dir);

    const auto& scn = cfg.scenario;
    const std::size_t n = cfg.block_length();
    const auto total = static_cast<std::size_t>(std::floor(scn.duration * scn.sample_rate + 1e-9));
    summary.blocks = total / n;
    summary.dropped_samples = total % n;
    if (ropts.dry_run) {
        summary.files = {"manifest.json"};
        write_manifest(dir / "manifest.json", cfg, summary, true);
        return summary;
    }

    const Simulator sim(scn);
    const auto geom = scn.geometry();
    const std::size_t sensors = scn.sensors.size();
    const double period = scn.sample_period();
    const std::size_t compressive = sensors - 1;

    std::vector<SensingMatrix> sensing;
    std::vector<ProcessingOptions> opts;
    for (std::size_t s = 0; s < sensors; ++s) {
        const std::size_t id = std::max<std::size_t>(s, 1);
        sensing.emplace_back(cfg.sensing.matrix_for(id, compressive));
        auto o = base_options(cfg, period);
        if (cfg.bound_by_geometry) o.max_abs_delay = geom.max_delay(id);
        opts.push_back(std::move(o));
    }

    // reference windows are shared by all sensors of a block
    std::vector<std::vector<double>> windows(summary.blocks);
    parallel_for(summary.blocks, ropts.workers,
                 [&](std::size_t b) { windows[b] = sim.block(0, b).extended; });

    const auto grid = process_grid(
        summary.blocks, sensors, sensing, opts, cfg.warm_start, cfg.seed, ropts.workers,
        [&](std::size_t b) { return std::span<const double>(windows[b]); },
        [&](std::size_t s, std::size_t b) { return sim.block(s, b).samples; });

    std::vector<double> times(summary.blocks);
    for (std::size_t b = 0; b < summary.blocks; ++b) {
        times[b] = (static_cast<double>(b * n) + 0.5 * static_cast<double>(n)) * period;
    }
    std::vector<std::vector<double>> analytic;
    if (has_closed_form(scn.trajectory)) {
        analytic.assign(sensors, std::vector<double>(summary.blocks));
        for (std::size_t s = 1; s < sensors; ++s) {
            for (std::size_t b = 0; b < summary.blocks; ++b) {
                analytic[s][b] = analytic_tdoa(scn.trajectory, scn.sensors, s, times[b], scn.c_air);
            }
        }
    }

    count_acceptance(grid, summary);
    write_tdoa_csv(dir / "tdoa.csv", grid, times);
    write_figure_csv(dir / "figure.csv", grid, times, analytic);
    write_solver_csv(dir / "solver.csv", grid);
    summary.files = {"tdoa.csv", "figure.csv", "solver.csv"};
    if (sensors >= 3) {
        write_track_csv(dir / "track.csv", grid, times, geom, cfg.source_side);
        summary.files.push_back("track.csv");
    }
    if (cfg.objective_trace) {
        write_trace_csv(dir / "objective_trace.csv", grid);
        summary.files.push_back("objective_trace.csv");
    }
    summary.files.push_back("manifest.json");
    write_manifest(dir / "manifest.json", cfg, summary, false);
    return summary;
}

namespace {

std::vector<double> load_channel(const AudioChannelConfig& ch, double& rate) {
    PcmAudio audio = ch.format == "raw" ? read_raw16(ch.path, ch.raw_rate, ch.raw_channels) : read_wav16(ch.path);
    if (ch.channel >= audio.channel_count()) {
        throw ConfigError("audio", "'" + ch.path + "' has no channel " + std::to_string(ch.channel));
    }
    rate = audio.sample_rate;
    return std::move(audio.channels[ch.channel]);
}

}  // namespace

RunSummary run_audio_pair(const RunConfig& cfg, const RunOptions& ropts) {
    cfg.validate();
    if (cfg.mode != RunMode::audio_pair) throw ConfigError("mode", "run_audio_pair needs audio-pair mode");
    double rate_ref = 0.0;
    double rate_sig = 0.0;
    const auto ref = load_channel(cfg.audio.reference, rate_ref);
    const auto sig = load_channel(cfg.audio.sensor, rate_sig);
    if (rate_ref != rate_sig) {
        throw ConfigError("audio.sensor", "sample rate " + format_number(rate_sig) + " differs from reference " +
                                              format_number(rate_ref));
    }
    const std::size_t n = cfg.block_length();
    const std::size_t frames = std::min(ref.size(), sig.size());

    RunSummary summary;
    summary.output_dir = cfg.output_dir;
    summary.compression_ratio = cfg.compression_ratio();
    summary.blocks = frames / n;
    summary.dropped_samples = frames % n;
    const fs::path dir(cfg.output_dir);
    fs::create_directories(dir);
    if (ropts.dry_run) {
        summary.files = {"manifest.json"};
        write_manifest(dir / "manifest.json", cfg, summary, true);
        return summary;
    }

    const double period = 1.0 / rate_ref;
    std::vector<SensingMatrix> sensing;
    sensing.emplace_back(cfg.sensing.matrix_for(1, 1));
    sensing.emplace_back(cfg.sensing.matrix_for(1, 1));
    auto o = base_options(cfg, period);
    if (cfg.bound_by_geometry) o.max_abs_delay = cfg.audio.spacing / cfg.audio.c_air;
    const std::vector<ProcessingOptions> opts{o, o};

    const std::size_t origin = SparsityBasis::window_origin(n);
    const std::size_t wlen = SparsityBasis::window_length(n);
    auto window = [&](std::size_t b) {
        std::vector<double> w(wlen, 0.0);
        const auto first = static_cast<std::ptrdiff_t>(b * n) - static_cast<std::ptrdiff_t>(origin);
        for (std::size_t i = 0; i < wlen; ++i) {
            const std::ptrdiff_t idx = first + static_cast<std::ptrdiff_t>(i);
            if (idx >= 0 && static_cast<std::size_t>(idx) < ref.size()) w[i] = ref[static_cast<std::size_t>(idx)];
        }
        return w;
    };
    auto block = [&](std::size_t, std::size_t b) {
        return std::vector<double>(sig.begin() + static_cast<std::ptrdiff_t>(b * n),
                                   sig.begin() + static_cast<std::ptrdiff_t>((b + 1) * n));
    };
    const auto grid = process_grid(summary.blocks, 2, sensing, opts, cfg.warm_start, cfg.seed, ropts.workers,
                                   window, block);

    std::vector<double> times(summary.blocks);
    for (std::size_t b = 0; b < summary.blocks; ++b) {
        times[b] = (static_cast<double>(b * n) + 0.5 * static_cast<double>(n)) * period;
    }
    count_acceptance(grid, summary);
    write_tdoa_csv(dir / "tdoa.csv", grid, times);
    write_figure_csv(dir / "figure.csv", grid, times, {});
    write_solver_csv(dir / "solver.csv", grid);
    summary.files = {"tdoa.csv", "figure.csv", "solver.csv"};
    if (cfg.objective_trace) {
        write_trace_csv(dir / "objective_trace.csv", grid);
        summary.files.push_back("objective_trace.csv");
    }
    summary.files.push_back("manifest.json");
    write_manifest(dir / "manifest.json", cfg, summary, false);
    return summary;
}

RunSummary run(const RunConfig& cfg, const RunOptions& opts) {
    return cfg.mode == RunMode::simulate ? run_scenario(cfg, opts) : run_audio_pair(cfg, opts);
}

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double loop_period(std::span<const double> times, std::span<const double> dt1, std::span<const double> dt2,
                   double min_fraction) {
    if (times.size() != dt1.size() || times.size() != dt2.size()) {
        throw DimensionError("loop_period inputs differ in length");
    }
    std::size_t first = 0;
    while (first < times.size() && !(std::isfinite(dt1[first]) && std::isfinite(dt2[first]))) ++first;
    if (first + 2 >= times.size()) throw NumericError("trace too short for a loop");
    const double x0 = dt1[first];
    const double y0 = dt2[first];
    const double t0 = times[first];
    const double earliest = t0 + min_fraction * (times.back() - t0);

    double best = std::numeric_limits<double>::infinity();
    double best_t = std::numeric_limits<double>::quiet_NaN();
    // closest approach of each trace segment to the starting point
    for (std::size_t i = first + 1; i + 1 < times.size(); ++i) {
        if (times[i + 1] < earliest) continue;
        const std::size_t j = i + 1;
        if (!(std::isfinite(dt1[i]) && std::isfinite(dt2[i]) && std::isfinite(dt1[j]) && std::isfinite(dt2[j]))) {
            continue;
        }
        const double ex = dt1[j] - dt1[i];
        const double ey = dt2[j] - dt2[i];
        const double len2 = ex * ex + ey * ey;
        double u = len2 > 0.0 ? ((x0 - dt1[i]) * ex + (y0 - dt2[i]) * ey) / len2 : 0.0;
        u = std::clamp(u, 0.0, 1.0);
        const double t = times[i] + u * (times[j] - times[i]);
        if (t < earliest) continue;
        const double dx = dt1[i] + u * ex - x0;
        const double dy = dt2[i] + u * ey - y0;
        const double d = dx * dx + dy * dy;
        if (d < best) {
            best = d;
            best_t = t;
        }
    }
    if (!std::isfinite(best)) throw NumericError("no admissible loop closure");
    return best_t - t0;
}

}  // namespace cstdoa
