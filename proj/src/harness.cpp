#include "takres/harness.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace takres {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// ---------------------------------------------------------------- formatting

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string iso_now() {
    const std::time_t t =
        std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// ------------------------------------------------------------------- JSON IO

template <class T>
void opt(const json& j, const char* key, T& value) {
    if (j.contains(key)) j.at(key).get_to(value);
}

std::string kind_name(PredictorKind k) {
    switch (k) {
        case PredictorKind::Oracle: return "oracle";
        case PredictorKind::Classic: return "classic";
        case PredictorKind::Hybrid: return "hybrid";
    }
    return "oracle";
}

PredictorKind kind_from(const std::string& s) {
    if (s == "oracle") return PredictorKind::Oracle;
    if (s == "classic") return PredictorKind::Classic;
    if (s == "hybrid") return PredictorKind::Hybrid;
    throw ParameterError("unknown predictor kind: " + s);
}

json to_json(const EnsembleConfig& c) {
    return {{"m", c.m},
            {"mu", c.mu},
            {"alpha", c.alpha},
            {"b", c.b},
            {"train_len", c.train_len},
            {"washout", c.washout},
            {"horizon", c.horizon},
            {"train_noise", c.train_noise},
            {"entry_noise", c.entry_noise},
            {"loop_noise", c.loop_noise},
            {"svd_cutoff", c.svd_cutoff},
            {"n_networks", c.n_networks},
            {"n_sequences", c.n_sequences},
            {"base_seed", c.base_seed}};
}

void from_json_into(const json& j, EnsembleConfig& c) {
    opt(j, "m", c.m);
    opt(j, "mu", c.mu);
    opt(j, "alpha", c.alpha);
    opt(j, "b", c.b);
    opt(j, "train_len", c.train_len);
    opt(j, "washout", c.washout);
    opt(j, "horizon", c.horizon);
    opt(j, "train_noise", c.train_noise);
    opt(j, "entry_noise", c.entry_noise);
    opt(j, "loop_noise", c.loop_noise);
    opt(j, "svd_cutoff", c.svd_cutoff);
    opt(j, "n_networks", c.n_networks);
    opt(j, "n_sequences", c.n_sequences);
    opt(j, "base_seed", c.base_seed);
}

json to_json(const FHNParams& p) {
    return {{"epsilon", p.epsilon},
            {"g", p.g},
            {"D", p.D},
            {"H", p.H},
            {"I", p.I},
            {"noise_sigma", p.noise_sigma},
            {"dt", p.dt},
            {"noise_scaled_by_eps", p.noise_scaled_by_eps},
            {"divergence_bound", p.divergence_bound}};
}

void from_json_into(const json& j, FHNParams& p) {
    opt(j, "epsilon", p.epsilon);
    opt(j, "g", p.g);
    opt(j, "D", p.D);
    opt(j, "H", p.H);
    opt(j, "I", p.I);
    opt(j, "noise_sigma", p.noise_sigma);
    opt(j, "dt", p.dt);
    opt(j, "noise_scaled_by_eps", p.noise_scaled_by_eps);
    opt(j, "divergence_bound", p.divergence_bound);
}

json to_json(const PredictorSpec& p) {
    return {{"kind", kind_name(p.kind)},
            {"m", p.m},
            {"mu", p.mu},
            {"alpha", p.alpha},
            {"b", p.b},
            {"tau_T", p.tau_T},
            {"washout", p.washout},
            {"drive_noise", p.drive_noise},
            {"entry_noise", p.entry_noise},
            {"svd_cutoff", p.svd_cutoff},
            {"seed", p.seed}};
}

void from_json_into(const json& j, PredictorSpec& p) {
    if (j.contains("kind")) p.kind = kind_from(j.at("kind").get<std::string>());
    opt(j, "m", p.m);
    opt(j, "mu", p.mu);
    opt(j, "alpha", p.alpha);
    opt(j, "b", p.b);
    opt(j, "tau_T", p.tau_T);
    opt(j, "washout", p.washout);
    opt(j, "drive_noise", p.drive_noise);
    opt(j, "entry_noise", p.entry_noise);
    opt(j, "svd_cutoff", p.svd_cutoff);
    opt(j, "seed", p.seed);
}

json to_json(const ControllerSpec& c) {
    return {{"v_threshold", c.v_threshold},
            {"refractory", c.refractory},
            {"target_isi", c.target_isi},
            {"pulse_amplitude", c.pulse_amplitude},
            {"pulse_width", c.pulse_width},
            {"fit_window", c.fit_window},
            {"resync_interval", c.resync_interval},
            {"sync_len", c.sync_len},
            {"gate_threshold", c.gate_threshold},
            {"validation_segments", c.validation_segments},
            {"validation_anchor", c.validation_anchor},
            {"validation_horizon", c.validation_horizon},
            {"blanking", c.blanking},
            {"free_run", c.free_run}};
}

void from_json_into(const json& j, ControllerSpec& c) {
    opt(j, "v_threshold", c.v_threshold);
    opt(j, "refractory", c.refractory);
    opt(j, "target_isi", c.target_isi);
    opt(j, "pulse_amplitude", c.pulse_amplitude);
    opt(j, "pulse_width", c.pulse_width);
    opt(j, "fit_window", c.fit_window);
    opt(j, "resync_interval", c.resync_interval);
    opt(j, "sync_len", c.sync_len);
    opt(j, "gate_threshold", c.gate_threshold);
    opt(j, "validation_segments", c.validation_segments);
    opt(j, "validation_anchor", c.validation_anchor);
    opt(j, "validation_horizon", c.validation_horizon);
    opt(j, "blanking", c.blanking);
    opt(j, "free_run", c.free_run);
}

json to_json(const ControlSettings& c) {
    return {{"fhn", to_json(c.fhn)},
            {"predictor", to_json(c.predictor)},
            {"controller", to_json(c.controller)},
            {"hybrid_base", to_json(c.hybrid_base)},
            {"classic_base", to_json(c.classic_base)},
            {"hybrid_nodes", c.hybrid_nodes},
            {"classic_nodes", c.classic_nodes},
            {"train_len", c.train_len},
            {"run_len", c.run_len}};
}

void from_json_into(const json& j, ControlSettings& c) {
    if (j.contains("fhn")) from_json_into(j.at("fhn"), c.fhn);
    if (j.contains("predictor")) from_json_into(j.at("predictor"), c.predictor);
    if (j.contains("controller")) from_json_into(j.at("controller"), c.controller);
    if (j.contains("hybrid_base")) from_json_into(j.at("hybrid_base"), c.hybrid_base);
    if (j.contains("classic_base"))
        from_json_into(j.at("classic_base"), c.classic_base);
    opt(j, "hybrid_nodes", c.hybrid_nodes);
    opt(j, "classic_nodes", c.classic_nodes);
    opt(j, "train_len", c.train_len);
    opt(j, "run_len", c.run_len);
}

json to_json(const ExperimentConfig& c) {
    return {{"schema_version", kConfigSchemaVersion},
            {"experiment", c.experiment},
            {"ensemble", to_json(c.ensemble)},
            {"takens", {{"tau0", c.takens.tau0}, {"M", c.takens.M}}},
            {"lag_lo", c.lag_lo},
            {"lag_hi", c.lag_hi},
            {"delta", c.delta},
            {"tau_values", c.tau_values},
            {"mu_values", c.mu_values},
            {"delay_values", c.delay_values},
            {"trrnn",
             {{"tau_T", c.trrnn.tau_T}, {"m", c.trrnn.m}, {"mu", c.trrnn.mu}}},
            {"control", to_json(c.control)},
            {"workers", c.workers},
            {"out_dir", c.out_dir}};
}

const std::vector<std::string> kExperiments = {
    "predict", "scan-tau", "scan-mu",    "trrnn",
    "scan-delay", "fhn-control", "node-sweep"};

void validate(const ExperimentConfig& c) {
    bool known = false;
    for (const auto& e : kExperiments) known = known || e == c.experiment;
    if (!known) throw ParameterError("unknown experiment: " + c.experiment);
    if (c.ensemble.m < 1 || c.ensemble.n_networks < 1 || c.ensemble.n_sequences < 1)
        throw ParameterError("ensemble: m and ensemble counts must be >= 1");
    if (c.ensemble.train_len <= c.ensemble.washout)
        throw ParameterError("ensemble: train_len must exceed washout");
    if (c.ensemble.horizon < 1) throw ParameterError("ensemble: horizon must be >= 1");
    if (c.lag_lo > c.lag_hi) throw ParameterError("lag_lo must be <= lag_hi");
    if (c.takens.M < 1 || c.delta < 0)
        throw ParameterError("takens.M must be >= 1 and delta >= 0");
    if (c.trrnn.m < 1) throw ParameterError("trrnn.m must be >= 1");
    if (c.control.train_len < 1 || c.control.run_len < 1)
        throw ParameterError("control: train_len and run_len must be >= 1");
    if (c.workers < 0) throw ParameterError("workers must be >= 0");
}

// ------------------------------------------------------------------ CSV rows

std::string summary_csv_fields(const EnsembleSummary& s) {
    return fmt(s.mean_nmse) + "," + fmt(s.mean_nmse_all) + "," +
           fmt(s.stdev_nmse) + "," + fmt(s.divergence_pct);
}

json summary_to_json(const EnsembleSummary& s) {
    return {{"mean_nmse", s.mean_nmse},
            {"mean_nmse_all", s.mean_nmse_all},
            {"stdev_nmse", s.stdev_nmse},
            {"divergence_pct", s.divergence_pct}};
}

struct Emitter {
    fs::path dir;
    std::vector<std::string> files;

    void emit(const std::string& name, const std::string& content) {
        const fs::path p = dir / name;
        write_file_atomic(p.string(), content);
        files.push_back(fs::absolute(p).string());
    }
};

} // namespace

// ----------------------------------------------------------------- config IO

ExperimentConfig default_config(const std::string& experiment) {
    ExperimentConfig c;
    c.experiment = experiment;
    if (experiment == "trrnn" || experiment == "scan-delay") {
        // the hybrid runs rely on closed-loop divergence as the signal that
        // separates delays; the global noise defaults would blur it
        const EnsembleConfig zero = delay_scan_ensemble_defaults();
        c.ensemble.train_noise = zero.train_noise;
        c.ensemble.entry_noise = zero.entry_noise;
        c.ensemble.loop_noise = zero.loop_noise;
        c.ensemble.m = 350;
        c.ensemble.mu = 0.1;
    }
    validate(c);
    return c;
}

void apply_scale(ExperimentConfig& config, Scale scale) {
    if (scale == Scale::Desk) {
        config.ensemble.n_networks = 5;
        config.ensemble.n_sequences = 5;
        config.control.run_len = 1000000;
    } else {
        config.ensemble.n_networks = 20;
        config.ensemble.n_sequences = 20;
        config.control.run_len = 4000000;
    }
}

ExperimentConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ParameterError(std::string("config parse error: ") + e.what());
    }
    if (j.contains("schema_version") &&
        j.at("schema_version").get<int>() != kConfigSchemaVersion)
        throw ParameterError("unsupported config schema version");
    ExperimentConfig c;
    try {
        opt(j, "experiment", c.experiment);
        if (j.contains("ensemble")) from_json_into(j.at("ensemble"), c.ensemble);
        if (j.contains("takens")) {
            opt(j.at("takens"), "tau0", c.takens.tau0);
            opt(j.at("takens"), "M", c.takens.M);
        }
        opt(j, "lag_lo", c.lag_lo);
        opt(j, "lag_hi", c.lag_hi);
        opt(j, "delta", c.delta);
        opt(j, "tau_values", c.tau_values);
        opt(j, "mu_values", c.mu_values);
        opt(j, "delay_values", c.delay_values);
        if (j.contains("trrnn")) {
            opt(j.at("trrnn"), "tau_T", c.trrnn.tau_T);
            opt(j.at("trrnn"), "m", c.trrnn.m);
            opt(j.at("trrnn"), "mu", c.trrnn.mu);
        }
        if (j.contains("control")) from_json_into(j.at("control"), c.control);
        opt(j, "workers", c.workers);
        opt(j, "out_dir", c.out_dir);
    } catch (const json::exception& e) {
        throw ParameterError(std::string("config field error: ") + e.what());
    }
    validate(c);
    return c;
}

std::string config_to_json(const ExperimentConfig& config) {
    return to_json(config).dump(2) + "\n";
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParameterError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

void save_config(const ExperimentConfig& config, const std::string& path) {
    write_file_atomic(path, config_to_json(config));
}

std::string config_hash(const ExperimentConfig& config) {
    // nlohmann objects iterate in key order, so dump() is canonical and the
    // hash does not depend on field order in the source file
    const std::string canon = to_json(config).dump();
    std::uint64_t h = 1469598103934665603ULL;  // FNV-1a 64
    for (unsigned char ch : canon) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// ------------------------------------------------------------------ file IO

void write_file_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw GenerationError("cannot write " + tmp);
        out << content;
        out.flush();
        if (!out) throw GenerationError("write failed for " + tmp);
    }
    fs::rename(tmp, path);
}

void write_time_series(const TimeSeries& series, const std::string& csv_path,
                       const std::string& extra_metadata_json) {
    std::ostringstream csv;
    csv << "value\n";
    for (long i = 0; i < series.size(); ++i) csv << fmt(series[i]) << "\n";
    write_file_atomic(csv_path, csv.str());

    json meta;
    try {
        meta = json::parse(extra_metadata_json);
    } catch (const json::exception& e) {
        throw ParameterError(std::string("sidecar metadata parse error: ") +
                             e.what());
    }
    meta["dt"] = series.dt;
    meta["origin_index"] = series.origin_index;
    write_file_atomic(csv_path + ".json", meta.dump(2) + "\n");
}

TimeSeries read_time_series(const std::string& csv_path) {
    std::ifstream in(csv_path);
    if (!in) throw ParameterError("cannot open " + csv_path);
    std::string line;
    if (!std::getline(in, line) || line != "value")
        throw ParameterError(csv_path + ": expected header 'value'");
    std::vector<double> vals;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        vals.push_back(std::stod(line));
    }
    TimeSeries ts;
    ts.values = Eigen::Map<const Eigen::VectorXd>(
        vals.data(), static_cast<long>(vals.size()));

    std::ifstream meta_in(csv_path + ".json");
    if (meta_in) {
        json meta = json::parse(meta_in, nullptr, false);
        if (!meta.is_discarded()) {
            if (meta.contains("dt")) ts.dt = meta["dt"].get<double>();
            if (meta.contains("origin_index"))
                ts.origin_index = meta["origin_index"].get<long>();
        }
    }
    return ts;
}

// -------------------------------------------------------------- experiments

namespace {

json run_predict(const ExperimentConfig& c, Emitter& em, bool& dominated) {
    const EnsembleSummary s = ensemble_benchmark(c.ensemble, c.workers);
    std::ostringstream csv;
    csv << "network_id,sequence_id,nmse,divergent\n";
    for (const RunResult& r : s.runs)
        csv << r.network_id << "," << r.sequence_id << "," << fmt(r.nmse) << ","
            << (r.divergent ? 1 : 0) << "\n";
    em.emit("predict_runs.csv", csv.str());
    dominated = s.divergence_pct > 90.0;
    return summary_to_json(s);
}

json run_scan_tau(const ExperimentConfig& c, Emitter& em, bool& dominated) {
    ScanConfig sc{c.ensemble, c.takens, c.lag_lo, c.lag_hi, c.delta,
                  c.takens.M, c.workers};
    std::vector<long> grid = c.tau_values;
    if (grid.empty())
        for (long t = -14; t <= -1; ++t) grid.push_back(t);
    const TauScanResult res = tau_scan(sc, grid);
    std::ostringstream csv;
    csv << "tau0_net,mean_nmse,mean_nmse_all,stdev_nmse,divergence_pct,"
           "mean_nodes\n";
    for (const TauScanRow& row : res.rows)
        csv << row.tau0_net << "," << summary_csv_fields(row.summary) << ","
            << fmt(row.mean_nodes) << "\n";
    em.emit("tau_scan.csv", csv.str());
    em.emit("tau_scan_baseline.csv",
            "mean_nmse,mean_nmse_all,stdev_nmse,divergence_pct\n" +
                summary_csv_fields(res.baseline) + "\n");
    double min_div = 100.0;
    for (const TauScanRow& row : res.rows)
        min_div = std::min(min_div, row.summary.divergence_pct);
    dominated = min_div > 90.0;
    return {{"baseline", summary_to_json(res.baseline)},
            {"rows", res.rows.size()}};
}

json run_scan_mu(const ExperimentConfig& c, Emitter& em, bool& dominated) {
    ScanConfig sc{c.ensemble, c.takens, c.lag_lo, c.lag_hi, c.delta,
                  c.takens.M, c.workers};
    std::vector<double> grid = c.mu_values;
    if (grid.empty()) grid = {0.1, 0.45, 0.5, 0.55, 0.6, 0.9, 1.1, 1.5};
    const std::vector<MuScanRow> rows = mu_scan(sc, grid);
    std::ostringstream csv;
    csv << "mu,mean_nmse,mean_nmse_all,stdev_nmse,divergence_pct,eps1,eps2\n";
    double min_div = 100.0;
    double best = -1.0, best_nmse = 0.0;
    for (const MuScanRow& row : rows) {
        csv << fmt(row.mu) << "," << summary_csv_fields(row.summary) << ","
            << fmt(row.eps1) << "," << fmt(row.eps2) << "\n";
        min_div = std::min(min_div, row.summary.divergence_pct);
        if (row.summary.divergence_pct < 100.0 &&
            (best < 0.0 || row.summary.mean_nmse < best_nmse)) {
            best = row.mu;
            best_nmse = row.summary.mean_nmse;
        }
    }
    em.emit("mu_scan.csv", csv.str());
    dominated = min_div > 90.0;
    return {{"best_mu", best}, {"best_mean_nmse", best_nmse}};
}

json run_scan_delay(const ExperimentConfig& c, Emitter& em, bool& dominated,
                    bool single) {
    DelayScanConfig dc;
    dc.base = c.ensemble;
    dc.m = c.trrnn.m;
    dc.mu = c.trrnn.mu;
    dc.takens = c.takens;
    dc.lag_lo = c.lag_lo;
    dc.lag_hi = c.lag_hi;
    dc.workers = c.workers;
    std::vector<long> grid;
    if (single) {
        grid = {c.trrnn.tau_T};
    } else {
        grid = c.delay_values;
        if (grid.empty())
            for (long t = -20; t <= 0; ++t) grid.push_back(t);
    }
    const std::vector<DelayScanRow> rows = delay_scan(dc, grid);
    std::ostringstream csv;
    csv << "tau_T,mean_nmse,mean_nmse_all,stdev_nmse,divergence_pct,eps1,"
           "eps2\n";
    double min_div = 100.0;
    long best_tau = grid.front();
    double best_nmse = -1.0;
    for (const DelayScanRow& row : rows) {
        csv << row.tau_T << "," << summary_csv_fields(row.summary) << ","
            << fmt(row.eps1) << "," << fmt(row.eps2) << "\n";
        min_div = std::min(min_div, row.summary.divergence_pct);
        if (best_nmse < 0.0 || row.summary.mean_nmse_all < best_nmse) {
            best_nmse = row.summary.mean_nmse_all;
            best_tau = row.tau_T;
        }
    }
    em.emit(single ? "trrnn.csv" : "delay_scan.csv", csv.str());
    dominated = min_div > 90.0;
    return {{"best_tau_T", best_tau}, {"best_mean_nmse_all", best_nmse}};
}

json report_to_json(const ControlRunReport& rep) {
    return {{"uncontrolled_mean_isi", rep.uncontrolled_mean_isi},
            {"controlled_mean_isi", rep.controlled_mean_isi},
            {"normalized_mean_isi", rep.normalized_mean_isi},
            {"isi_cv", rep.isi_cv},
            {"nodes", rep.nodes},
            {"stabilized", rep.stabilized},
            {"predictor_divergent", rep.predictor_divergent},
            {"fitted_fixed_point", rep.fitted_fixed_point},
            {"fitted_slope", rep.fitted_slope},
            {"target_isi", rep.target_isi},
            {"validation_error", rep.validation_error},
            {"gate_passed", rep.gate_passed},
            {"mean_gate_error", rep.mean_gate_error},
            {"n_pulses", rep.n_pulses}};
}

json run_fhn_control(const ExperimentConfig& c, Emitter& em, bool& dominated) {
    const ControlSettings& cs = c.control;
    const ControlRunReport rep =
        run_controlled(cs.fhn, cs.predictor, cs.controller, cs.train_len,
                       cs.run_len, c.ensemble.base_seed);
    std::ostringstream csv;
    csv << "spike_index,isi\n";
    const SpikeTrain& tr = rep.controlled;
    for (std::size_t k = 0; k < tr.isi.size(); ++k)
        csv << tr.spike_indices[k + 1] << "," << tr.isi[k] << "\n";
    em.emit("control_isi.csv", csv.str());
    const json rj = report_to_json(rep);
    em.emit("control_report.json", rj.dump(2) + "\n");
    dominated = rep.predictor_divergent;
    return rj;
}

json run_node_sweep(const ExperimentConfig& c, Emitter& em, bool& dominated) {
    NodeSweepConfig nc;
    nc.fhn = c.control.fhn;
    nc.ctrl = c.control.controller;
    nc.hybrid_base = c.control.hybrid_base;
    nc.classic_base = c.control.classic_base;
    nc.hybrid_nodes = c.control.hybrid_nodes;
    nc.classic_nodes = c.control.classic_nodes;
    nc.train_len = c.control.train_len;
    nc.run_len = c.control.run_len;
    nc.seed = c.ensemble.base_seed;
    nc.workers = c.workers;
    const std::vector<NodeSweepRow> rows = node_sweep(nc);
    std::ostringstream csv;
    csv << "nodes,architecture,normalized_mean_isi,isi_cv,stabilized,"
           "validation_error,gate_passed\n";
    long hybrid_min = -1, classic_min = -1;
    for (const NodeSweepRow& row : rows) {
        csv << row.nodes << "," << kind_name(row.kind) << ","
            << fmt(row.normalized_mean_isi) << "," << fmt(row.isi_cv) << ","
            << (row.stabilized ? 1 : 0) << "," << fmt(row.validation_error)
            << "," << (row.gate_passed ? 1 : 0) << "\n";
        if (row.stabilized) {
            long& slot =
                row.kind == PredictorKind::Hybrid ? hybrid_min : classic_min;
            if (slot < 0 || row.nodes < slot) slot = row.nodes;
        }
    }
    em.emit("node_sweep.csv", csv.str());
    dominated = false;
    return {{"smallest_stabilizing_hybrid", hybrid_min},
            {"smallest_stabilizing_classic", classic_min}};
}

} // namespace

RunRecord run_experiment(const ExperimentConfig& config) {
    validate(config);
    RunRecord rec;
    rec.experiment = config.experiment;
    rec.hash = config_hash(config);
    rec.started = iso_now();

    Emitter em{fs::path(config.out_dir), {}};
    std::error_code ec;
    fs::create_directories(em.dir, ec);
    if (ec) throw GenerationError("cannot create output dir " + config.out_dir);

    json summary;
    bool dominated = false;
    if (config.experiment == "predict")
        summary = run_predict(config, em, dominated);
    else if (config.experiment == "scan-tau")
        summary = run_scan_tau(config, em, dominated);
    else if (config.experiment == "scan-mu")
        summary = run_scan_mu(config, em, dominated);
    else if (config.experiment == "trrnn")
        summary = run_scan_delay(config, em, dominated, /*single=*/true);
    else if (config.experiment == "scan-delay")
        summary = run_scan_delay(config, em, dominated, /*single=*/false);
    else if (config.experiment == "fhn-control")
        summary = run_fhn_control(config, em, dominated);
    else  // node-sweep (validate() already rejected anything else)
        summary = run_node_sweep(config, em, dominated);

    rec.divergence_dominated = dominated;
    rec.summary_json = summary.dump();
    rec.finished = iso_now();
    rec.files = em.files;

    const json record_json = {{"experiment", rec.experiment},
                              {"config_hash", rec.hash},
                              {"started", rec.started},
                              {"finished", rec.finished},
                              {"version", rec.version},
                              {"divergence_dominated", rec.divergence_dominated},
                              {"files", rec.files},
                              {"summary", summary},
                              {"config", to_json(config)}};
    write_file_atomic((em.dir / "record.json").string(),
                      record_json.dump(2) + "\n");
    rec.files.push_back(fs::absolute(em.dir / "record.json").string());
    return rec;
}

} // namespace takres
