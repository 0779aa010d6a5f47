#pragma once

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "lmpot/errors.hpp"
#include "lmpot/inference.hpp"
#include "lmpot/lmoments.hpp"
#include "lmpot/sample.hpp"
#include "lmpot/selectors.hpp"

namespace lmpot {

// ---------------------------------------------------------------- input ----

struct InputSpec {
    std::string path;
    std::string column;   // 0-based index, or a header name; empty = column 0
    char delimiter = ',';
    bool has_header = false;
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b])))
        ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1])))
        --e;
    return s.substr(b, e - b);
}

inline std::vector<std::string> split_fields(const std::string& line, char delim) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == delim) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

inline bool parse_double(const std::string& token, double& out) {
    const std::string t = trim(token);
    if (t.empty())
        return false;
    char* end = nullptr;
    out = std::strtod(t.c_str(), &end);
    return end == t.c_str() + t.size() && std::isfinite(out);
}

inline bool looks_like_index(const std::string& s) {
    if (s.empty())
        return false;
    for (char c : s)
        if (!std::isdigit(static_cast<unsigned char>(c)))
            return false;
    return true;
}

} // namespace detail

// Reads one observation per row. Non-numeric rows fail loudly with their line
// number; the only exception is a single header row, recognized when the
// column selector is a name or when the first row's cell does not parse.
inline ObservationSample read_observations(const InputSpec& spec) {
    std::ifstream in(spec.path);
    if (!in)
        throw io_error("cannot open input: " + spec.path);

    const bool by_name = !spec.column.empty() && !detail::looks_like_index(spec.column);
    std::size_t col = 0;
    if (!by_name && !spec.column.empty())
        col = static_cast<std::size_t>(std::strtoull(spec.column.c_str(), nullptr, 10));

    std::vector<double> values;
    std::string line;
    std::size_t line_no = 0;
    bool first_row = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (detail::trim(line).empty())
            continue;
        const std::vector<std::string> fields = detail::split_fields(line, spec.delimiter);
        if (first_row && (by_name || spec.has_header)) {
            first_row = false;
            if (by_name) {
                bool found = false;
                for (std::size_t j = 0; j < fields.size(); ++j) {
                    if (detail::trim(fields[j]) == spec.column) {
                        col = j;
                        found = true;
                        break;
                    }
                }
                if (!found)
                    throw io_error(spec.path + ":" + std::to_string(line_no) +
                                   ": no column named '" + spec.column + "'");
            }
            continue;
        }
        if (col >= fields.size())
            throw io_error(spec.path + ":" + std::to_string(line_no) + ": row has " +
                           std::to_string(fields.size()) + " columns, need " +
                           std::to_string(col + 1));
        double v;
        if (!detail::parse_double(fields[col], v)) {
            if (first_row) {
                first_row = false; // unlabeled header row
                continue;
            }
            throw io_error(spec.path + ":" + std::to_string(line_no) +
                           ": not a finite number: '" + detail::trim(fields[col]) + "'");
        }
        first_row = false;
        values.push_back(v);
    }
    if (values.size() < 20)
        throw insufficient_sample_error(spec.path + ": need at least 20 observations, got " +
                                        std::to_string(values.size()));
    return ObservationSample::from_unsorted(std::move(values));
}

// ----------------------------------------------------------- formatting ----

namespace detail {

inline std::string fmt6(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string fmt6_opt(const std::optional<double>& v) {
    return v ? fmt6(*v) : std::string("N/A");
}

} // namespace detail

inline std::string method_name(SelectionMethod m) {
    return m == SelectionMethod::alcbsm ? "alcbsm" : "algfsm";
}

inline std::string status_name(CandidateStatus s) {
    switch (s) {
    case CandidateStatus::accepted:
        return "accepted";
    case CandidateStatus::rejected:
        return "rejected";
    default:
        return "indeterminate";
    }
}

// ------------------------------------------------------------------ TSV ----

inline constexpr const char* diagnostics_tsv_header =
    "i\tu\tn_u\tt3\tt4\ttau4_lo\ttau4_hi\ttau3_lo\ttau3_hi\tz\tp\tfs\tstatus\tmethod\n";

inline void append_diagnostics_rows(std::string& out, const SelectionOutcome& outcome) {
    using detail::fmt6;
    using detail::fmt6_opt;
    for (const CandidateDiagnostic& d : outcome.diagnostics) {
        out += std::to_string(d.index + 1);
        out += '\t';
        out += fmt6(d.u);
        out += '\t';
        out += std::to_string(d.n_u);
        out += '\t';
        out += fmt6_opt(d.t3);
        out += '\t';
        out += fmt6_opt(d.t4);
        out += '\t';
        if (d.band_tau4) {
            out += fmt6(d.band_tau4->lower);
            out += '\t';
            out += fmt6(d.band_tau4->upper);
        } else {
            out += "N/A\tN/A";
        }
        out += '\t';
        if (d.band_tau3) {
            out += fmt6(d.band_tau3->lower);
            out += '\t';
            out += fmt6(d.band_tau3->upper);
        } else {
            out += "N/A\tN/A";
        }
        out += '\t';
        out += fmt6_opt(d.z);
        out += '\t';
        out += fmt6_opt(d.p);
        out += '\t';
        out += fmt6_opt(d.fs);
        out += '\t';
        out += status_name(d.status);
        out += '\t';
        out += method_name(outcome.method);
        out += '\n';
    }
}

inline std::string diagnostics_tsv(const SelectionOutcome& outcome) {
    std::string out = diagnostics_tsv_header;
    append_diagnostics_rows(out, outcome);
    return out;
}

inline std::string diagnostics_tsv(const PotReport& report) {
    std::string out = diagnostics_tsv_header;
    if (report.alcbsm)
        append_diagnostics_rows(out, report.alcbsm->selection);
    if (report.algfsm)
        append_diagnostics_rows(out, report.algfsm->selection);
    return out;
}

// ----------------------------------------------------------------- JSON ----

inline std::string method_choice_name(MethodChoice m) {
    switch (m) {
    case MethodChoice::alcbsm:
        return "alcbsm";
    case MethodChoice::algfsm:
        return "algfsm";
    default:
        return "both";
    }
}

inline MethodChoice method_choice_from(const std::string& s) {
    if (s == "alcbsm")
        return MethodChoice::alcbsm;
    if (s == "algfsm")
        return MethodChoice::algfsm;
    if (s == "both")
        return MethodChoice::both;
    throw io_error("unknown method: " + s);
}

namespace detail {

inline void put_finite(nlohmann::json& j, const char* key, const std::optional<double>& v) {
    if (v && std::isfinite(*v))
        j[key] = *v;
}

inline nlohmann::json band_to_json(const ConfidenceBand& b) {
    return {{"center", b.center}, {"lower", b.lower}, {"upper", b.upper}, {"level", b.level}};
}

inline ConfidenceBand band_from_json(const nlohmann::json& j) {
    return {j.at("center"), j.at("lower"), j.at("upper"), j.at("level")};
}

inline nlohmann::json method_to_json(const MethodResult& mr) {
    nlohmann::json j;
    if (mr.selection.selected_index) {
        j["selected_index"] = *mr.selection.selected_index;
        j["u_star"] = *mr.selection.u_star;
        j["n_star"] = *mr.selection.n_star;
        j["fit"] = {{"sigma", mr.fit->params.sigma},
                    {"xi", mr.fit->params.xi},
                    {"asymptotics_valid", mr.fit->asymptotics_valid}};
        j["zeta"] = *mr.zeta;
        nlohmann::json rl = nlohmann::json::object();
        for (const auto& [t, level] : mr.return_levels)
            rl[fmt17(t)] = level;
        j["return_levels"] = rl;
    }
    j["warnings"] = mr.warnings;
    nlohmann::json cands = nlohmann::json::array();
    for (const CandidateDiagnostic& d : mr.selection.diagnostics) {
        nlohmann::json c;
        c["u"] = d.u;
        c["n_u"] = d.n_u;
        put_finite(c, "t3", d.t3);
        put_finite(c, "t4", d.t4);
        if (d.band_tau4)
            c["band_tau4"] = band_to_json(*d.band_tau4);
        if (d.band_tau3)
            c["band_tau3"] = band_to_json(*d.band_tau3);
        put_finite(c, "z", d.z);
        put_finite(c, "p", d.p);
        put_finite(c, "fs", d.fs);
        c["status"] = status_name(d.status);
        c["warnings"] = d.warnings;
        cands.push_back(std::move(c));
    }
    j["candidates"] = std::move(cands);
    return j;
}

inline std::optional<double> get_finite(const nlohmann::json& j, const char* key) {
    if (j.contains(key) && j.at(key).is_number())
        return j.at(key).get<double>();
    return std::nullopt;
}

inline MethodResult method_from_json(const nlohmann::json& j, SelectionMethod method) {
    MethodResult mr;
    mr.selection.method = method;
    mr.warnings = j.at("warnings").get<std::vector<std::string>>();
    for (const nlohmann::json& c : j.at("candidates")) {
        CandidateDiagnostic d;
        d.index = mr.selection.diagnostics.size();
        d.u = c.at("u");
        d.n_u = c.at("n_u");
        d.t3 = get_finite(c, "t3");
        d.t4 = get_finite(c, "t4");
        if (c.contains("band_tau4"))
            d.band_tau4 = band_from_json(c.at("band_tau4"));
        if (c.contains("band_tau3"))
            d.band_tau3 = band_from_json(c.at("band_tau3"));
        d.z = get_finite(c, "z");
        d.p = get_finite(c, "p");
        d.fs = get_finite(c, "fs");
        const std::string st = c.at("status");
        d.status = st == "accepted"  ? CandidateStatus::accepted
                   : st == "rejected" ? CandidateStatus::rejected
                                      : CandidateStatus::indeterminate;
        d.warnings = c.at("warnings").get<std::vector<std::string>>();
        mr.selection.diagnostics.push_back(std::move(d));
    }
    if (j.contains("selected_index")) {
        mr.selection.selected_index = j.at("selected_index").get<std::size_t>();
        mr.selection.u_star = j.at("u_star").get<double>();
        mr.selection.n_star = j.at("n_star").get<std::size_t>();
        const nlohmann::json& f = j.at("fit");
        mr.fit = GpdFit{{f.at("sigma"), f.at("xi")}, f.at("asymptotics_valid")};
        mr.zeta = j.at("zeta").get<double>();
        for (const auto& [key, value] : j.at("return_levels").items())
            mr.return_levels[std::strtod(key.c_str(), nullptr)] = value.get<double>();
    }
    return mr;
}

} // namespace detail

inline nlohmann::json report_to_json(const PotReport& report) {
    const PotConfig& c = report.config;
    nlohmann::json j;
    j["schema_version"] = 1;
    j["n"] = report.n;
    j["config"] = {{"method", method_choice_name(c.method)},
                   {"candidates", c.n_candidates},
                   {"p_start", c.p_start ? *c.p_start : 0.0},
                   {"p_end", c.p_end ? *c.p_end : 0.0},
                   {"alpha_cb", c.alpha_cb},
                   {"alpha", c.alpha_gof},
                   {"nsim", c.n_sims},
                   {"seed", c.seed},
                   {"return_periods_years", c.return_periods_years},
                   {"obs_per_year", c.obs_per_year}};
    nlohmann::json methods = nlohmann::json::object();
    if (report.alcbsm)
        methods["alcbsm"] = detail::method_to_json(*report.alcbsm);
    if (report.algfsm)
        methods["algfsm"] = detail::method_to_json(*report.algfsm);
    j["methods"] = std::move(methods);
    return j;
}

inline PotReport report_from_json(const nlohmann::json& j) {
    if (!j.contains("schema_version") || j.at("schema_version").get<int>() != 1)
        throw io_error("unsupported report schema version");
    PotReport report;
    report.n = j.at("n").get<std::size_t>();
    const nlohmann::json& c = j.at("config");
    report.config.method = method_choice_from(c.at("method"));
    report.config.n_candidates = c.at("candidates").get<std::size_t>();
    report.config.p_start = c.at("p_start").get<double>();
    report.config.p_end = c.at("p_end").get<double>();
    report.config.alpha_cb = c.at("alpha_cb").get<double>();
    report.config.alpha_gof = c.at("alpha").get<double>();
    report.config.n_sims = c.at("nsim").get<std::size_t>();
    report.config.seed = c.at("seed").get<std::uint64_t>();
    report.config.return_periods_years = c.at("return_periods_years").get<std::vector<double>>();
    report.config.obs_per_year = c.at("obs_per_year").get<double>();
    const nlohmann::json& methods = j.at("methods");
    if (methods.contains("alcbsm"))
        report.alcbsm = detail::method_from_json(methods.at("alcbsm"), SelectionMethod::alcbsm);
    if (methods.contains("algfsm"))
        report.algfsm = detail::method_from_json(methods.at("algfsm"), SelectionMethod::algfsm);
    return report;
}

// ----------------------------------------------------------------- LMRD ----

// Plot-ready export of the L-moment ratio diagram: observed per-candidate
// (t3, t4) points, the GPd curve, the attainability bound, and the two
// conditional band segments per candidate.
struct LmrdExport {
    struct Point {
        std::size_t index;
        double t3, t4;
    };
    struct Band {
        std::size_t index;
        double at;     // fixed coordinate: t3 for tau4 bands, t4 for tau3 bands
        double center; // on the varying axis
        double lower, upper;
    };
    std::vector<std::pair<double, double>> curve; // (t3, g(t3))
    std::vector<std::pair<double, double>> bound; // (t3, lowest attainable t4)
    std::vector<Point> points;
    std::vector<Band> tau4_bands, tau3_bands;
};

inline LmrdExport build_lmrd_export(const SelectionOutcome& outcome) {
    LmrdExport ex;
    constexpr int curve_points = 381;
    constexpr double t3_lo = -0.95, t3_hi = 0.95;
    for (int k = 0; k < curve_points; ++k) {
        const double t3 =
            t3_lo + (t3_hi - t3_lo) * static_cast<double>(k) / (curve_points - 1);
        ex.curve.emplace_back(t3, gpd_g(t3));
        ex.bound.emplace_back(t3, lmrd_lower_bound(t3));
    }
    for (const CandidateDiagnostic& d : outcome.diagnostics) {
        if (d.t3 && d.t4)
            ex.points.push_back({d.index, *d.t3, *d.t4});
        if (d.band_tau4 && d.t3)
            ex.tau4_bands.push_back({d.index, *d.t3, d.band_tau4->center,
                                     d.band_tau4->lower, d.band_tau4->upper});
        if (d.band_tau3 && d.t4)
            ex.tau3_bands.push_back({d.index, *d.t4, d.band_tau3->center,
                                     d.band_tau3->lower, d.band_tau3->upper});
    }
    return ex;
}

inline std::string lmrd_csv(const LmrdExport& ex) {
    using detail::fmt17;
    std::string out = "kind,i,t3,t4,lo,hi\n";
    for (const auto& [t3, t4] : ex.curve)
        out += "curve,," + fmt17(t3) + ',' + fmt17(t4) + ",,\n";
    for (const auto& [t3, t4] : ex.bound)
        out += "bound,," + fmt17(t3) + ',' + fmt17(t4) + ",,\n";
    for (const LmrdExport::Point& p : ex.points)
        out += "point," + std::to_string(p.index + 1) + ',' + fmt17(p.t3) + ',' +
               fmt17(p.t4) + ",,\n";
    for (const LmrdExport::Band& b : ex.tau4_bands)
        out += "band_tau4," + std::to_string(b.index + 1) + ',' + fmt17(b.at) + ',' +
               fmt17(b.center) + ',' + fmt17(b.lower) + ',' + fmt17(b.upper) + '\n';
    for (const LmrdExport::Band& b : ex.tau3_bands)
        out += "band_tau3," + std::to_string(b.index + 1) + ',' + fmt17(b.center) + ',' +
               fmt17(b.at) + ',' + fmt17(b.lower) + ',' + fmt17(b.upper) + '\n';
    return out;
}

// ---------------------------------------------------------------- files ----

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw io_error("cannot open for writing: " + path);
    out << content;
    out.flush();
    if (!out)
        throw io_error("write failed: " + path);
}

inline void write_diagnostics(const PotReport& report, const std::string& path) {
    write_text_file(path, diagnostics_tsv(report));
}

inline void write_report(const PotReport& report, const std::string& path) {
    write_text_file(path, report_to_json(report).dump(2) + "\n");
}

inline void write_lmrd(const LmrdExport& ex, const std::string& path) {
    write_text_file(path, lmrd_csv(ex));
}

} // namespace lmpot
