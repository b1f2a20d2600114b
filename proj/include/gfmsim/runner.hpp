#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gfmsim/config.hpp"

namespace gfmsim {

/// Decimated time series of one run. z_tva / z_vav are diagnostics logged
/// alongside the CSV columns so the hybrid selection can be audited.
struct SampleSeries {
    std::vector<double> t;
    std::vector<double> i_c_mag;
    std::vector<double> v_o_mag;
    std::vector<double> dv_mag; // |v_gfm - v_o|
    std::vector<double> z_applied;
    std::vector<double> sigma;
    std::vector<double> p;
    std::vector<double> q;
    std::vector<std::uint8_t> overcurrent;
    std::vector<double> z_tva;
    std::vector<double> z_vav;

    std::size_t size() const { return t.size(); }
};

struct Metrics {
    double peak_i = 0.0;          // max |i_c| after the first event, pu
    double time_above_imax = 0.0; // cumulative seconds with |i_c| > i_max after t = 0
    double settle_time = -1.0;    // s from the last event to sustained band entry; -1 = not settled
    bool settled = false;
    double final_p = 0.0;
    double final_q = 0.0;
    bool blow_up = false;
};

struct SimResult {
    SampleSeries series;
    Metrics metrics;
    std::string error; // non-empty when the run aborted (blow-up)
};

/// Run one scenario: warm-up with events disabled, then the event schedule.
/// Deterministic: identical configs produce bit-identical series. A numerical
/// blow-up is reported in the result (partial series retained), not thrown.
SimResult run_simulation(const ScenarioConfig& cfg);

Metrics compute_metrics(const SampleSeries& series, const ScenarioConfig& cfg);

std::string csv_to_string(const SampleSeries& series);
void write_csv(const SimResult& result, const std::string& path);
SampleSeries read_csv_string(const std::string& text);
SampleSeries read_csv(const std::string& path);

std::string metrics_to_string(const Metrics& m);
void write_metrics(const Metrics& m, const std::string& path);

} // namespace gfmsim
