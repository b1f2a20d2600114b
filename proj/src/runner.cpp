#include "gfmsim/runner.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace gfmsim {

namespace {

void append_field(std::string& out, double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.16e", v);
    out += buf;
}

constexpr const char* kCsvHeader = "t,i_c_mag,v_o_mag,dv_mag,z_applied,sigma,p,q,overcurrent";

} // namespace

SimResult run_simulation(const ScenarioConfig& cfg) {
    cfg.validate();

    const double dt = cfg.sim.dt;
    const long warm_steps = std::lround(cfg.sim.warmup / dt);
    const long run_steps = std::lround(cfg.sim.duration / dt);
    const long total_steps = warm_steps + run_steps;
    const int decim = cfg.sim.decimation;

    // Events fire on step boundaries; index k advances time from
    // (k - warm_steps)*dt to (k + 1 - warm_steps)*dt.
    std::vector<std::pair<long, const GridEvent*>> schedule;
    schedule.reserve(cfg.events.size());
    for (const auto& ev : cfg.events) {
        schedule.emplace_back(warm_steps + std::lround(ev.time / dt), &ev);
    }

    GridEventState ev_state;
    ev_state.v_grid_mag = cfg.v_grid_mag;

    PlantState plant;
    plant.v_o = {cfg.v_grid_mag, 0.0};
    plant.v_bus = {cfg.v_grid_mag, 0.0};
    plant.t = -cfg.sim.warmup;

    const double omega_base = cfg.base.omega_base();
    DroopControl droop(cfg.control.droop, omega_base, dt);
    CurrentController current_ctrl(cfg.control, dt);
    CurrentLimiter limiter(cfg.limiter, cfg.strategy, omega_base, dt);

    SpaceVector v_t_cmd{cfg.v_grid_mag, 0.0};

    SimResult result;
    auto& s = result.series;
    const std::size_t expected = static_cast<std::size_t>(total_steps / decim + 1);
    s.t.reserve(expected);

    std::size_t next_event = 0;
    try {
        for (long k = 0; k < total_steps; ++k) {
            while (next_event < schedule.size() && schedule[next_event].first <= k) {
                const GridEvent& ev = *schedule[next_event].second;
                ev_state = apply_event(ev_state, ev);
                if (ev.kind == EventKind::FaultOff) {
                    reconcile_fault_clearance(plant, cfg.plant, ev_state);
                }
                ++next_event;
            }

            plant = plant_step(plant, cfg.plant, ev_state, v_t_cmd, dt);
            plant.t = static_cast<double>(k + 1 - warm_steps) * dt;

            const auto [p_raw, q_raw] = power_calc(plant.v_o, plant.i_o);
            const DroopOutput d = droop.step(p_raw, q_raw, dt);
            const SpaceVector v_gfm = synthesize_vgfm(d.v_gfm, d.theta_gfm);
            const auto [i_ref, lim] = limiter.step(v_gfm, v_t_cmd, plant.v_o, plant.i_c);
            v_t_cmd = current_ctrl.step(i_ref, plant.i_c, plant.v_o, d.theta_gfm, d.omega_gfm);

            if (k + 1 == warm_steps && !cfg.events.empty()) {
                const double band = 0.02 * std::abs(cfg.control.droop.p_set);
                if (std::abs(droop.p_filtered() - cfg.control.droop.p_set) > band) {
                    throw SimulationError("warm-up did not reach steady state: P = " +
                                              std::to_string(droop.p_filtered()) + " pu",
                                          plant.t);
                }
            }

            if ((k + 1) % decim == 0) {
                s.t.push_back(plant.t);
                s.i_c_mag.push_back(plant.i_c.magnitude());
                s.v_o_mag.push_back(plant.v_o.magnitude());
                s.dv_mag.push_back((v_gfm - plant.v_o).magnitude());
                s.z_applied.push_back(std::sqrt(lim.r * lim.r + lim.l * lim.l));
                s.sigma.push_back(lim.sigma_now);
                s.p.push_back(droop.p_filtered());
                s.q.push_back(droop.q_filtered());
                s.overcurrent.push_back(lim.overcurrent ? 1 : 0);
                s.z_tva.push_back(lim.z_tva);
                s.z_vav.push_back(lim.z_vav);
            }
        }
    } catch (const SimulationError& e) {
        result.error = e.what();
        result.metrics.blow_up = true;
    }

    if (!s.t.empty()) {
        Metrics m = compute_metrics(s, cfg);
        m.blow_up = result.metrics.blow_up;
        result.metrics = m;
    }
    return result;
}

Metrics compute_metrics(const SampleSeries& series, const ScenarioConfig& cfg) {
    if (series.size() == 0) {
        throw std::invalid_argument("compute_metrics: empty series");
    }
    Metrics m;
    const double sample_dt = cfg.sim.dt * cfg.sim.decimation;
    double last_event = 0.0;
    for (const auto& ev : cfg.events) {
        last_event = std::max(last_event, ev.time);
    }

    for (std::size_t i = 0; i < series.size(); ++i) {
        if (series.t[i] <= 0.0) {
            continue;
        }
        m.peak_i = std::max(m.peak_i, series.i_c_mag[i]);
        if (series.i_c_mag[i] > cfg.limiter.i_max) {
            m.time_above_imax += sample_dt;
        }
    }

    const double band = 0.02 * std::abs(cfg.control.droop.p_set);
    std::size_t settle_idx = series.size();
    for (std::size_t i = series.size(); i-- > 0;) {
        if (series.t[i] <= last_event) {
            break;
        }
        if (std::abs(series.p[i] - cfg.control.droop.p_set) > band) {
            break;
        }
        settle_idx = i;
    }
    if (settle_idx < series.size() && settle_idx > 0) {
        m.settled = true;
        m.settle_time = series.t[settle_idx] - last_event;
    } else if (settle_idx == 0) {
        // In band for the entire post-event window.
        m.settled = true;
        m.settle_time = std::max(0.0, series.t[0] - last_event);
    }

    m.final_p = series.p.back();
    m.final_q = series.q.back();
    return m;
}

std::string csv_to_string(const SampleSeries& series) {
    std::string out = kCsvHeader;
    out += '\n';
    for (std::size_t i = 0; i < series.size(); ++i) {
        append_field(out, series.t[i]);
        out += ',';
        append_field(out, series.i_c_mag[i]);
        out += ',';
        append_field(out, series.v_o_mag[i]);
        out += ',';
        append_field(out, series.dv_mag[i]);
        out += ',';
        append_field(out, series.z_applied[i]);
        out += ',';
        append_field(out, series.sigma[i]);
        out += ',';
        append_field(out, series.p[i]);
        out += ',';
        append_field(out, series.q[i]);
        out += ',';
        out += series.overcurrent[i] ? '1' : '0';
        out += '\n';
    }
    return out;
}

void write_csv(const SimResult& result, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("write_csv: cannot open '" + path + "' for writing");
    }
    out << csv_to_string(result.series);
    if (!out) {
        throw std::runtime_error("write_csv: write failed for '" + path + "'");
    }
}

SampleSeries read_csv_string(const std::string& text) {
    SampleSeries s;
    std::istringstream iss(text);
    std::string line;
    if (!std::getline(iss, line) || line != kCsvHeader) {
        throw std::runtime_error("read_csv: missing or unexpected header");
    }
    int lineno = 1;
    while (std::getline(iss, line)) {
        ++lineno;
        if (line.empty()) {
            continue;
        }
        std::vector<double> fields;
        const char* ptr = line.c_str();
        while (true) {
            char* end = nullptr;
            fields.push_back(std::strtod(ptr, &end));
            if (end == ptr) {
                throw std::runtime_error("read_csv: bad number on line " + std::to_string(lineno));
            }
            ptr = end;
            if (*ptr == ',') {
                ++ptr;
            } else {
                break;
            }
        }
        if (fields.size() != 9) {
            throw std::runtime_error("read_csv: expected 9 fields on line " +
                                     std::to_string(lineno));
        }
        s.t.push_back(fields[0]);
        s.i_c_mag.push_back(fields[1]);
        s.v_o_mag.push_back(fields[2]);
        s.dv_mag.push_back(fields[3]);
        s.z_applied.push_back(fields[4]);
        s.sigma.push_back(fields[5]);
        s.p.push_back(fields[6]);
        s.q.push_back(fields[7]);
        s.overcurrent.push_back(fields[8] != 0.0 ? 1 : 0);
    }
    return s;
}

SampleSeries read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("read_csv: cannot open '" + path + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return read_csv_string(ss.str());
}

std::string metrics_to_string(const Metrics& m) {
    const auto num = [](double v) {
        char buf[40];
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return std::string(buf);
    };
    std::string out = "{\n";
    out += "  \"peak_i\": " + num(m.peak_i) + ",\n";
    out += "  \"time_above_imax\": " + num(m.time_above_imax) + ",\n";
    out += "  \"settle_time\": " + num(m.settle_time) + ",\n";
    out += std::string("  \"settled\": ") + (m.settled ? "true" : "false") + ",\n";
    out += "  \"final_p\": " + num(m.final_p) + ",\n";
    out += "  \"final_q\": " + num(m.final_q) + ",\n";
    out += std::string("  \"blow_up\": ") + (m.blow_up ? "true" : "false") + "\n";
    out += "}\n";
    return out;
}

void write_metrics(const Metrics& m, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("write_metrics: cannot open '" + path + "' for writing");
    }
    out << metrics_to_string(m);
}

} // namespace gfmsim
