#include "noonsim/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <thread>
#include <utility>
#include <variant>

#include "json.hpp"

#include "noonsim/atomcavity.hpp"
#include "noonsim/errors.hpp"
#include "noonsim/feasibility.hpp"
#include "noonsim/fredkin.hpp"
#include "noonsim/ramsey.hpp"

namespace noonsim::scenario {

namespace {

constexpr double kPi = std::numbers::pi;

// --------------------------------------------------------------------------
// Deterministic JSON emission: insertion-ordered objects, doubles printed
// with %.17g so every run of the same config+seed is byte-identical.
// --------------------------------------------------------------------------

struct JsonValue;
using JsonArray = std::vector<JsonValue>;
using JsonObject = std::vector<std::pair<std::string, JsonValue>>;

struct JsonValue {
    std::variant<std::nullptr_t, bool, std::int64_t, std::uint64_t, double, std::string,
                 JsonArray, JsonObject>
        v;
    JsonValue() : v(nullptr) {}
    JsonValue(bool b) : v(b) {}
    JsonValue(int i) : v(static_cast<std::int64_t>(i)) {}
    JsonValue(long long i) : v(static_cast<std::int64_t>(i)) {}
    JsonValue(std::uint64_t u) : v(u) {}
    JsonValue(double d) : v(d) {}
    JsonValue(const char* s) : v(std::string(s)) {}
    JsonValue(std::string s) : v(std::move(s)) {}
    JsonValue(JsonArray a) : v(std::move(a)) {}
    JsonValue(JsonObject o) : v(std::move(o)) {}
};

std::string format_double(double x) {
    if (!std::isfinite(x))
        throw NumericalError("result serialization: non-finite value encountered");
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

void escape_to(std::string& out, const std::string& s) {
    out += '"';
    for (const unsigned char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default:
                if (c < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof(buf), "\\u%04x", c);
                    out += buf;
                } else {
                    out += static_cast<char>(c);
                }
        }
    }
    out += '"';
}

void dump(const JsonValue& val, std::string& out, int depth) {
    const std::string pad(2 * static_cast<std::size_t>(depth), ' ');
    if (std::holds_alternative<std::nullptr_t>(val.v)) {
        out += "null";
    } else if (const auto* b = std::get_if<bool>(&val.v)) {
        out += *b ? "true" : "false";
    } else if (const auto* i = std::get_if<std::int64_t>(&val.v)) {
        out += std::to_string(*i);
    } else if (const auto* u = std::get_if<std::uint64_t>(&val.v)) {
        out += std::to_string(*u);
    } else if (const auto* d = std::get_if<double>(&val.v)) {
        out += format_double(*d);
    } else if (const auto* s = std::get_if<std::string>(&val.v)) {
        escape_to(out, *s);
    } else if (const auto* a = std::get_if<JsonArray>(&val.v)) {
        if (a->empty()) {
            out += "[]";
            return;
        }
        out += "[\n";
        for (std::size_t idx = 0; idx < a->size(); ++idx) {
            out += pad;
            out += "  ";
            dump((*a)[idx], out, depth + 1);
            if (idx + 1 < a->size()) out += ',';
            out += '\n';
        }
        out += pad;
        out += ']';
    } else if (const auto* o = std::get_if<JsonObject>(&val.v)) {
        if (o->empty()) {
            out += "{}";
            return;
        }
        out += "{\n";
        for (std::size_t idx = 0; idx < o->size(); ++idx) {
            out += pad;
            out += "  ";
            escape_to(out, (*o)[idx].first);
            out += ": ";
            dump((*o)[idx].second, out, depth + 1);
            if (idx + 1 < o->size()) out += ',';
            out += '\n';
        }
        out += pad;
        out += '}';
    }
}

std::string dump_document(const JsonObject& doc) {
    std::string out;
    dump(JsonValue(doc), out, 0);
    out += '\n';
    return out;
}

// --------------------------------------------------------------------------
// CSV emission (RFC-4180-style: header row, LF endings, quoting on demand).
// --------------------------------------------------------------------------

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (const char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

class CsvBuilder {
public:
    explicit CsvBuilder(const std::vector<std::string>& header) { append_row(header); }

    void append_row(const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) text_ += ',';
            text_ += csv_field(fields[i]);
        }
        text_ += '\n';
    }

    std::string take() { return std::move(text_); }

private:
    std::string text_;
};

// --------------------------------------------------------------------------
// Config parsing and validation.
// --------------------------------------------------------------------------

using njson = nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& constraint) {
    throw ConfigError("config." + path + ": " + constraint);
}

const std::vector<std::string> kSchemes = {"qfg",      "bootstrap", "noon-gun",
                                           "ghz-scan", "ramsey",    "feasibility"};

std::string join(const std::vector<std::string>& parts) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += ", ";
        out += parts[i];
    }
    return out;
}

class ConfigReader {
public:
    ConfigReader(const njson& root, std::string scheme)
        : root_(root), scheme_(std::move(scheme)) {}

    void restrict_keys(std::vector<std::string> scheme_keys) const {
        std::vector<std::string> allowed = {"scheme", "out", "seed", "mode"};
        allowed.insert(allowed.end(), scheme_keys.begin(), scheme_keys.end());
        for (auto it = root_.begin(); it != root_.end(); ++it) {
            if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
                fail(it.key(), "unknown field for scheme '" + scheme_ + "' (allowed: " +
                                   join(allowed) + ")");
        }
    }

    bool has(const char* key) const { return root_.contains(key); }

    double number(const char* key) const {
        const njson& j = root_.at(key);
        if (!j.is_number()) fail(path(key), "must be a number");
        const double v = j.get<double>();
        if (!std::isfinite(v)) fail(path(key), "must be finite");
        return v;
    }

    double req_double(const char* key, double lo, const char* constraint) const {
        if (!has(key)) fail(path(key), "required field is missing");
        const double v = number(key);
        if (!(v >= lo)) fail(path(key), constraint);
        return v;
    }

    double req_positive(const char* key) const {
        if (!has(key)) fail(path(key), "required field is missing");
        const double v = number(key);
        if (!(v > 0.0)) fail(path(key), "must be a positive number");
        return v;
    }

    double opt_positive(const char* key, double dflt) const {
        if (!has(key)) return dflt;
        const double v = number(key);
        if (!(v > 0.0)) fail(path(key), "must be a positive number");
        return v;
    }

    long long integer(const char* key) const {
        const njson& j = root_.at(key);
        if (!j.is_number_integer() && !j.is_number_unsigned())
            fail(path(key), "must be an integer");
        return j.get<long long>();
    }

    int req_int(const char* key, long long lo, long long hi) const {
        if (!has(key)) fail(path(key), "required field is missing");
        const long long v = integer(key);
        if (v < lo || v > hi)
            fail(path(key), "must be an integer in [" + std::to_string(lo) + ", " +
                                std::to_string(hi) + "]");
        return static_cast<int>(v);
    }

    int opt_int(const char* key, long long lo, long long hi, int dflt) const {
        if (!has(key)) return dflt;
        return req_int(key, lo, hi);
    }

    std::string opt_enum(const char* key, const std::vector<std::string>& allowed,
                         const std::string& dflt) const {
        if (!has(key)) return dflt;
        const njson& j = root_.at(key);
        if (!j.is_string()) fail(path(key), "must be a string");
        const std::string v = j.get<std::string>();
        if (std::find(allowed.begin(), allowed.end(), v) == allowed.end())
            fail(path(key), "must be one of: " + join(allowed));
        return v;
    }

    // Detector efficiency with the documented "efficiency" alias; diagnostics
    // always name detector_efficiency.
    double detector_efficiency(double dflt) const {
        const bool has_alias = has("efficiency");
        const bool has_full = has("detector_efficiency");
        if (has_alias && has_full)
            fail(scheme_ + ".detector_efficiency",
                 "give either 'detector_efficiency' or its alias 'efficiency', not both");
        if (!has_alias && !has_full) return dflt;
        const char* key = has_full ? "detector_efficiency" : "efficiency";
        const double v = number(key);
        if (!(v >= 0.0 && v <= 1.0))
            fail(scheme_ + ".detector_efficiency", "must lie in [0, 1]");
        return v;
    }

    std::string path(const char* key) const { return scheme_ + "." + std::string(key); }

private:
    const njson& root_;
    std::string scheme_;
};

// --------------------------------------------------------------------------
// Sweep-point parallelism.
// --------------------------------------------------------------------------

template <typename Fn>
void parallel_for_indexed(std::size_t count, int threads, Fn&& fn) {
    if (threads <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(count);
    auto worker = [&] {
        for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    const std::size_t nthreads =
        std::min(static_cast<std::size_t>(threads), count);
    pool.reserve(nthreads);
    for (std::size_t t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
}

// --------------------------------------------------------------------------
// Shared pieces of the per-scheme assembly.
// --------------------------------------------------------------------------

complexd minus_i_pow(int n) {
    switch (((n % 4) + 4) % 4) {
        case 0: return {1.0, 0.0};
        case 1: return {0.0, -1.0};
        case 2: return {-1.0, 0.0};
        default: return {0.0, 1.0};
    }
}

std::string mode_name(MeasureMode mode) {
    return mode == MeasureMode::exact ? "exact" : "sampled";
}

struct FredkinRow {
    int n_d1 = 0;
    int n_d2 = 0;
    bool heralded = false;
    double probability = 0.0;
    double phase_free = 0.0;
    std::optional<double> corrected;
};

std::vector<FredkinRow> fredkin_rows(const std::vector<fredkin::DetectionOutcome>& outs,
                                     int n) {
    auto signal = fredkin::signal_system(n);
    const StateVector target = fredkin::noon_state(signal, "a", "b", n);
    BasisState comp_a = {n, 0};
    BasisState comp_b = {0, n};
    std::vector<FredkinRow> rows;
    rows.reserve(outs.size());
    for (const auto& out : outs) {
        FredkinRow row{out.n_d1, out.n_d2, out.heralded, out.probability,
                       phase_free_two_component_fidelity(out.conditional_state, comp_a,
                                                         comp_b),
                       std::nullopt};
        if (out.heralded) row.corrected = fidelity(out.conditional_state, target);
        rows.push_back(row);
    }
    return rows;
}

JsonObject fredkin_summary(const std::vector<FredkinRow>& rows) {
    double herald_probability = 0.0;
    double best = 0.0;
    for (const auto& row : rows) {
        if (!row.heralded) continue;
        herald_probability += row.probability;
        if (row.corrected && *row.corrected > best) best = *row.corrected;
    }
    return {{"herald_probability", herald_probability}, {"best_fidelity", best}};
}

JsonArray fredkin_outcome_records(const std::vector<FredkinRow>& rows) {
    JsonArray arr;
    arr.reserve(rows.size());
    for (const auto& row : rows) {
        JsonObject rec = {{"n_d1", row.n_d1},
                          {"n_d2", row.n_d2},
                          {"heralded", row.heralded},
                          {"probability", row.probability},
                          {"phase_free_noon_fidelity", row.phase_free}};
        if (row.corrected) rec.emplace_back("corrected_noon_fidelity", *row.corrected);
        arr.emplace_back(std::move(rec));
    }
    return arr;
}

std::string fredkin_csv(const std::vector<FredkinRow>& rows) {
    CsvBuilder csv({"n_d1", "n_d2", "heralded", "probability", "phase_free_noon_fidelity",
                    "corrected_noon_fidelity"});
    for (const auto& row : rows)
        csv.append_row({std::to_string(row.n_d1), std::to_string(row.n_d2),
                        row.heralded ? "true" : "false", format_double(row.probability),
                        format_double(row.phase_free),
                        row.corrected ? format_double(*row.corrected) : ""});
    return csv.take();
}

atomcavity::RampShape ramp_shape(const std::string& name) {
    if (name == "linear") return atomcavity::RampShape::linear;
    if (name == "constant") return atomcavity::RampShape::constant;
    return atomcavity::RampShape::tanh_ramp;
}

// --------------------------------------------------------------------------
// Per-scheme runners.
// --------------------------------------------------------------------------

ScenarioResult run_qfg(const ScenarioConfig& cfg, JsonObject config_echo) {
    const auto rows = fredkin_rows(fredkin::run_single_control(cfg.n, cfg.chi), cfg.n);
    JsonObject doc = {{"schema_version", kSchemaVersion},
                      {"tool", JsonObject{{"name", "noonsim"}, {"version", NOONSIM_VERSION}}},
                      {"config", std::move(config_echo)},
                      {"summary", fredkin_summary(rows)},
                      {"outcomes", fredkin_outcome_records(rows)},
                      {"notes", JsonArray{}}};
    return {dump_document(doc), fredkin_csv(rows)};
}

ScenarioResult run_bootstrap_scheme(const ScenarioConfig& cfg, JsonObject config_echo) {
    fredkin::BootstrapConfig bs{cfg.n, cfg.k, cfg.phi0, cfg.detector_efficiency, cfg.mode,
                                cfg.seed};
    const auto rows = fredkin_rows(fredkin::run_bootstrap(bs), cfg.n);
    JsonObject doc = {{"schema_version", kSchemaVersion},
                      {"tool", JsonObject{{"name", "noonsim"}, {"version", NOONSIM_VERSION}}},
                      {"config", std::move(config_echo)},
                      {"summary", fredkin_summary(rows)},
                      {"outcomes", fredkin_outcome_records(rows)},
                      {"notes", JsonArray{}}};
    return {dump_document(doc), fredkin_csv(rows)};
}

ScenarioResult run_ghz_scan(const ScenarioConfig& cfg, JsonObject config_echo) {
    struct Entry {
        atomcavity::GhzScanResult scan;
        double at_pi = 0.0;
    };
    std::vector<Entry> entries(cfg.scan_atoms.size());
    parallel_for_indexed(cfg.scan_atoms.size(), sweep_thread_count(), [&](std::size_t i) {
        entries[i].scan = atomcavity::ghz_scan(cfg.scan_atoms[i], cfg.scan_step, true);
        entries[i].at_pi =
            atomcavity::ghz_fidelity(atomcavity::evolve_ghz(cfg.scan_atoms[i], 1.0, kPi));
    });

    JsonArray summary_entries;
    CsvBuilder csv({"n_atoms", "eta_t", "fidelity"});
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const auto& entry = entries[i];
        summary_entries.emplace_back(
            JsonObject{{"n_atoms", cfg.scan_atoms[i]},
                       {"best_eta_t", entry.scan.best_angle},
                       {"best_fidelity", entry.scan.best_fidelity},
                       {"fidelity_at_pi", entry.at_pi}});
        for (const auto& [angle, fid] : entry.scan.samples)
            csv.append_row({std::to_string(cfg.scan_atoms[i]), format_double(angle),
                            format_double(fid)});
    }

    JsonObject doc = {{"schema_version", kSchemaVersion},
                      {"tool", JsonObject{{"name", "noonsim"}, {"version", NOONSIM_VERSION}}},
                      {"config", std::move(config_echo)},
                      {"summary", JsonObject{{"entries", std::move(summary_entries)}}},
                      {"outcomes", JsonArray{}},
                      {"notes", JsonArray{}}};
    return {dump_document(doc), csv.take()};
}

ScenarioResult run_noon_gun(const ScenarioConfig& cfg, JsonObject config_echo) {
    atomcavity::NoonGunParams params{
        cfg.n_atoms, cfg.g_l, cfg.g_r,
        atomcavity::RampSpec{ramp_shape(cfg.ramp), cfg.omega_peak, cfg.duration,
                             cfg.samples}};
    const auto choice = cfg.ghz_time == "reference-pi"
                            ? atomcavity::GhzTimeChoice::reference_angle
                            : atomcavity::GhzTimeChoice::scan_optimum;
    const auto report = atomcavity::ghz_to_noon_pipeline(cfg.n_atoms, params, choice);

    JsonObject summary = {{"ghz_angle_used", report.ghz_angle_used},
                          {"ghz_fidelity_at_angle", report.ghz_fidelity_at_angle},
                          {"scan_eta_t", report.scan_angle},
                          {"scan_fidelity", report.scan_fidelity},
                          {"reference_fidelity_at_pi", report.reference_fidelity},
                          {"stirap_target_fidelity", report.stirap_target_fidelity},
                          {"max_excited_population", report.max_excited_population},
                          {"leakage", report.leakage},
                          {"end_to_end_noon_fidelity", report.end_to_end_noon_fidelity}};

    const auto& photons = report.photonic_state;
    const auto& sys = photons.system();
    const std::size_t ia = sys->mode_index("a_path");
    const std::size_t ib = sys->mode_index("b_path");
    CsvBuilder csv({"n_a_path", "n_b_path", "amplitude_re", "amplitude_im"});
    for (std::size_t i = 0; i < photons.dim(); ++i) {
        const BasisState& occ = sys->basis_state(i);
        csv.append_row({std::to_string(occ[ia]), std::to_string(occ[ib]),
                        format_double(photons[i].real()), format_double(photons[i].imag())});
    }

    JsonObject doc = {{"schema_version", kSchemaVersion},
                      {"tool", JsonObject{{"name", "noonsim"}, {"version", NOONSIM_VERSION}}},
                      {"config", std::move(config_echo)},
                      {"summary", std::move(summary)},
                      {"outcomes", JsonArray{}},
                      {"notes", JsonArray{}}};
    return {dump_document(doc), csv.take()};
}

ScenarioResult run_ramsey_scheme(const ScenarioConfig& cfg, JsonObject config_echo) {
    ramsey::RamseyParams params{cfg.n, cfg.g, cfg.tau_c, cfg.delta};
    const double phi = params.phi();
    const auto outcomes = ramsey::run_ramsey_qfg(params);

    auto signal = fredkin::signal_system(cfg.n);
    const double r = 1.0 / std::sqrt(2.0);
    auto make_target = [&](int sign) {
        std::vector<complexd> amps(signal->dim(), complexd(0.0, 0.0));
        amps[*signal->find({cfg.n, 0})] = complexd(r, 0.0);
        amps[*signal->find({0, cfg.n})] =
            minus_i_pow(cfg.n) * complexd(sign > 0 ? r : -r, 0.0);
        return StateVector(signal, std::move(amps));
    };
    const StateVector psi_1 = make_target(+1);
    const StateVector psi_2 = make_target(-1);
    const BasisState comp_a = {cfg.n, 0};
    const BasisState comp_b = {0, cfg.n};

    JsonArray records;
    CsvBuilder csv(
        {"detected_level", "probability", "phase_free_noon_fidelity", "target_fidelity"});
    double herald_probability = 0.0;
    double best = 0.0;
    for (const auto& out : outcomes) {
        // Level g1 heralds the minus combination Psi_2, level g2 the plus one.
        const StateVector& target = out.detected_level == 1 ? psi_2 : psi_1;
        const double target_fid = fidelity(out.conditional_photons, target);
        const double phase_free =
            phase_free_two_component_fidelity(out.conditional_photons, comp_a, comp_b);
        herald_probability += out.probability;
        best = std::max(best, target_fid);
        records.emplace_back(
            JsonObject{{"detected_level", out.detected_level},
                       {"probability", out.probability},
                       {"phase_free_noon_fidelity", phase_free},
                       {"psi_target", out.detected_level == 1 ? "psi_2" : "psi_1"},
                       {"target_fidelity", target_fid}});
        csv.append_row({std::to_string(out.detected_level), format_double(out.probability),
                        format_double(phase_free), format_double(target_fid)});
    }

    JsonObject summary = {{"phi", phi},
                          {"herald_probability", herald_probability},
                          {"best_fidelity", best}};
    JsonObject doc = {{"schema_version", kSchemaVersion},
                      {"tool", JsonObject{{"name", "noonsim"}, {"version", NOONSIM_VERSION}}},
                      {"config", std::move(config_echo)},
                      {"summary", std::move(summary)},
                      {"outcomes", std::move(records)},
                      {"notes", JsonArray{}}};
    return {dump_document(doc), csv.take()};
}

ScenarioResult run_feasibility(const ScenarioConfig& cfg, JsonObject config_echo) {
    feasibility::FeasibilityInput input{cfg.omega_c, cfg.g,    cfg.kappa, cfg.delta,
                                        cfg.n_atoms, cfg.detector_efficiency, cfg.phi0};
    const auto report = feasibility::feasibility_report(input, cfg.transfer_duration);

    JsonObject summary = {{"eta", report.eta},
                          {"k_required", report.k_required},
                          {"tau_c", report.tau_c},
                          {"tau_c_us", report.tau_c * 1e6},
                          {"atom_limit_estimate", report.atom_limit_estimate}};
    JsonArray notes;
    for (const auto& note : report.notes) notes.emplace_back(note);

    CsvBuilder csv({"quantity", "value"});
    csv.append_row({"eta", format_double(report.eta)});
    csv.append_row({"k_required", std::to_string(report.k_required)});
    csv.append_row({"tau_c_s", format_double(report.tau_c)});
    csv.append_row({"tau_c_us", format_double(report.tau_c * 1e6)});
    csv.append_row({"atom_limit_estimate", std::to_string(report.atom_limit_estimate)});

    JsonObject doc = {{"schema_version", kSchemaVersion},
                      {"tool", JsonObject{{"name", "noonsim"}, {"version", NOONSIM_VERSION}}},
                      {"config", std::move(config_echo)},
                      {"summary", std::move(summary)},
                      {"outcomes", JsonArray{}},
                      {"notes", std::move(notes)}};
    return {dump_document(doc), csv.take()};
}

JsonObject echo_config(const ScenarioConfig& cfg) {
    JsonObject echo = {{"scheme", cfg.scheme}};
    if (cfg.scheme == "qfg") {
        echo.emplace_back("n", cfg.n);
        echo.emplace_back("chi", cfg.chi);
    } else if (cfg.scheme == "bootstrap") {
        echo.emplace_back("n", cfg.n);
        echo.emplace_back("k", cfg.k);
        echo.emplace_back("phi0", cfg.phi0);
        echo.emplace_back("detector_efficiency", cfg.detector_efficiency);
    } else if (cfg.scheme == "noon-gun") {
        echo.emplace_back("n_atoms", cfg.n_atoms);
        echo.emplace_back("g_l", cfg.g_l);
        echo.emplace_back("g_r", cfg.g_r);
        echo.emplace_back("omega_peak", cfg.omega_peak);
        echo.emplace_back("duration", cfg.duration);
        echo.emplace_back("samples", cfg.samples);
        echo.emplace_back("ramp", cfg.ramp);
        echo.emplace_back("ghz_time", cfg.ghz_time);
    } else if (cfg.scheme == "ghz-scan") {
        JsonArray atoms;
        for (const int n : cfg.scan_atoms) atoms.emplace_back(n);
        echo.emplace_back("n_atoms", std::move(atoms));
        echo.emplace_back("step", cfg.scan_step);
    } else if (cfg.scheme == "ramsey") {
        echo.emplace_back("n", cfg.n);
        echo.emplace_back("g", cfg.g);
        echo.emplace_back("tau_c", cfg.tau_c);
        echo.emplace_back("delta", cfg.delta);
    } else if (cfg.scheme == "feasibility") {
        echo.emplace_back("omega_c", cfg.omega_c);
        echo.emplace_back("g", cfg.g);
        echo.emplace_back("kappa", cfg.kappa);
        echo.emplace_back("delta", cfg.delta);
        echo.emplace_back("n_atoms", cfg.n_atoms);
        echo.emplace_back("detector_efficiency", cfg.detector_efficiency);
        echo.emplace_back("phi0", cfg.phi0);
        echo.emplace_back("transfer_duration", cfg.transfer_duration);
    }
    echo.emplace_back("mode", mode_name(cfg.mode));
    echo.emplace_back("seed", cfg.seed);
    return echo;
}

} // namespace

ScenarioConfig parse_config(const std::string& text) {
    njson root;
    try {
        root = njson::parse(text);
    } catch (const njson::parse_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    if (!root.is_object()) throw ConfigError("config: top level must be a JSON object");
    if (!root.contains("scheme")) throw ConfigError("config.scheme: required field is missing");
    if (!root.at("scheme").is_string())
        throw ConfigError("config.scheme: must be a string");
    const std::string scheme = root.at("scheme").get<std::string>();
    if (std::find(kSchemes.begin(), kSchemes.end(), scheme) == kSchemes.end())
        throw ConfigError("config.scheme: unknown scheme '" + scheme +
                          "'; allowed: " + join(kSchemes));

    ScenarioConfig cfg;
    cfg.scheme = scheme;
    const ConfigReader reader(root, scheme);

    // Common fields.
    if (reader.has("out")) {
        if (!root.at("out").is_string()) fail(scheme + ".out", "must be a string");
        cfg.out_path = root.at("out").get<std::string>();
    }
    if (reader.has("seed")) {
        const njson& j = root.at("seed");
        const bool ok = j.is_number_unsigned() ||
                        (j.is_number_integer() && j.get<long long>() >= 0);
        if (!ok) fail(scheme + ".seed", "must be a nonnegative integer");
        cfg.seed = j.get<std::uint64_t>();
    }
    const std::string mode =
        reader.opt_enum("mode", {"exact", "sampled"}, "exact");
    if (mode == "sampled" && scheme != "bootstrap")
        fail(scheme + ".mode", "sampled detection applies only to the bootstrap scheme");
    cfg.mode = mode == "sampled" ? MeasureMode::sampled : MeasureMode::exact;

    if (scheme == "qfg") {
        reader.restrict_keys({"n", "chi"});
        cfg.n = reader.req_int("n", 1, 4000);
        if (!reader.has("chi")) fail("qfg.chi", "required field is missing");
        cfg.chi = reader.number("chi");
    } else if (scheme == "bootstrap") {
        reader.restrict_keys({"n", "k", "phi0", "detector_efficiency", "efficiency"});
        cfg.n = reader.req_int("n", 1, 4000);
        cfg.k = reader.req_int("k", 1, 4000);
        cfg.phi0 = reader.req_positive("phi0");
        cfg.detector_efficiency = reader.detector_efficiency(1.0);
    } else if (scheme == "noon-gun") {
        reader.restrict_keys(
            {"n_atoms", "g_l", "g_r", "omega_peak", "duration", "samples", "ramp",
             "ghz_time"});
        cfg.n_atoms = reader.req_int("n_atoms", 1, 24);
        cfg.g_l = reader.opt_positive("g_l", 1.0);
        cfg.g_r = reader.opt_positive("g_r", 1.0);
        cfg.omega_peak = reader.req_positive("omega_peak");
        cfg.duration = reader.req_positive("duration");
        cfg.samples = reader.opt_int("samples", 1, 1000000, 1000);
        cfg.ramp = reader.opt_enum("ramp", {"linear", "tanh", "constant"}, "tanh");
        cfg.ghz_time =
            reader.opt_enum("ghz_time", {"scan-optimum", "reference-pi"}, "scan-optimum");
    } else if (scheme == "ghz-scan") {
        reader.restrict_keys({"n_atoms", "step"});
        if (!reader.has("n_atoms")) fail("ghz-scan.n_atoms", "required field is missing");
        const njson& atoms = root.at("n_atoms");
        auto check_atom = [&](const njson& j) -> int {
            if (!j.is_number_integer() && !j.is_number_unsigned())
                fail("ghz-scan.n_atoms", "entries must be integers in [1, 100]");
            const long long v = j.get<long long>();
            if (v < 1 || v > 100)
                fail("ghz-scan.n_atoms", "entries must be integers in [1, 100]");
            return static_cast<int>(v);
        };
        if (atoms.is_array()) {
            if (atoms.empty()) fail("ghz-scan.n_atoms", "array must not be empty");
            for (const auto& j : atoms) cfg.scan_atoms.push_back(check_atom(j));
        } else {
            cfg.scan_atoms.push_back(check_atom(atoms));
        }
        if (reader.has("step")) {
            const double step = reader.number("step");
            if (!(step >= 1e-6 && step <= 0.5))
                fail("ghz-scan.step", "must lie in [1e-6, 0.5]");
            cfg.scan_step = step;
        }
    } else if (scheme == "ramsey") {
        reader.restrict_keys({"n", "g", "tau_c", "delta"});
        cfg.n = reader.req_int("n", 1, 1024);
        cfg.g = reader.req_positive("g");
        cfg.tau_c = reader.req_positive("tau_c");
        cfg.delta = reader.req_positive("delta");
    } else { // feasibility
        reader.restrict_keys({"omega_c", "g", "kappa", "delta", "n_atoms",
                              "detector_efficiency", "efficiency", "phi0",
                              "transfer_duration"});
        cfg.omega_c = reader.req_double("omega_c", 0.0, "must be a nonnegative number");
        cfg.g = reader.req_positive("g");
        cfg.kappa = reader.req_double("kappa", 0.0, "must be a nonnegative number");
        cfg.delta = reader.req_positive("delta");
        cfg.n_atoms = reader.opt_int("n_atoms", 0, 1000000000, 0);
        cfg.detector_efficiency = reader.detector_efficiency(1.0);
        cfg.phi0 = reader.req_positive("phi0");
        cfg.transfer_duration = reader.req_positive("transfer_duration");
    }
    return cfg;
}

ScenarioResult run_scenario(const ScenarioConfig& cfg) {
    JsonObject echo = echo_config(cfg);
    if (cfg.scheme == "qfg") return run_qfg(cfg, std::move(echo));
    if (cfg.scheme == "bootstrap") return run_bootstrap_scheme(cfg, std::move(echo));
    if (cfg.scheme == "noon-gun") return run_noon_gun(cfg, std::move(echo));
    if (cfg.scheme == "ghz-scan") return run_ghz_scan(cfg, std::move(echo));
    if (cfg.scheme == "ramsey") return run_ramsey_scheme(cfg, std::move(echo));
    if (cfg.scheme == "feasibility") return run_feasibility(cfg, std::move(echo));
    throw ConfigError("run_scenario: unknown scheme '" + cfg.scheme + "'");
}

void write_result(const ScenarioResult& result, const std::string& out_path) {
    if (out_path.empty()) throw ConfigError("write_result: output path is empty");
    namespace fs = std::filesystem;
    const fs::path json_path(out_path);
    fs::path csv_path = json_path;
    csv_path.replace_extension(".csv");

    if (!json_path.parent_path().empty()) {
        std::error_code ec;
        fs::create_directories(json_path.parent_path(), ec);
        if (ec)
            throw ResourceError("write_result: cannot create directory " +
                                json_path.parent_path().string() + ": " + ec.message());
    }

    auto write_atomic = [](const fs::path& target, const std::string& content) {
        fs::path tmp = target;
        tmp += ".tmp";
        {
            std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
            if (!f)
                throw ResourceError("write_result: cannot open " + tmp.string() +
                                    " for writing");
            f.write(content.data(), static_cast<std::streamsize>(content.size()));
            f.flush();
            if (!f.good())
                throw ResourceError("write_result: failed writing " + tmp.string());
        }
        std::error_code ec;
        fs::rename(tmp, target, ec);
        if (ec) {
            std::error_code ignore;
            fs::remove(tmp, ignore);
            throw ResourceError("write_result: failed renaming " + tmp.string() + ": " +
                                ec.message());
        }
    };
    // CSV first so the JSON document's existence signals a complete run.
    write_atomic(csv_path, result.csv);
    write_atomic(json_path, result.json);
}

int sweep_thread_count() {
    const char* env = std::getenv("NOONSIM_THREADS");
    if (env == nullptr || *env == '\0') return 1;
    char* end = nullptr;
    const long value = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || value < 1 || value > 256)
        throw ConfigError("NOONSIM_THREADS must be an integer in [1, 256]");
    return static_cast<int>(value);
}

} // namespace noonsim::scenario
