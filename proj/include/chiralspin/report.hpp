#pragma once
// Report emission: report.json, one CSV per trajectory, and a SHA-256 MANIFEST.
// Output is byte-identical across reruns of the same config (no timestamps,
// sorted keys, shortest round-trip number formatting).
//
// Needs OpenSSL::Crypto at link time.

#include "chiralspin/experiments.hpp"

#include <openssl/evp.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace chiralspin {

namespace detail {

/// JSON has no inf/nan; they are written as the strings "inf", "-inf", "nan".
inline json finite_json(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    return x;
}

inline json sanitize(const json& j) {
    if (j.is_number_float()) return finite_json(j.get<double>());
    if (j.is_object()) {
        json out = json::object();
        for (const auto& [k, v] : j.items()) out[k] = sanitize(v);
        return out;
    }
    if (j.is_array()) {
        json out = json::array();
        for (const auto& v : j) out.push_back(sanitize(v));
        return out;
    }
    return j;
}

inline std::string format_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << content;
    out.close();
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void check_label(const std::string& label) {
    if (label.empty() || label == "report" ||
        !std::all_of(label.begin(), label.end(), [](char c) {
            return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
        }) ||
        label.front() == '.')
        throw DomainError("trajectory label '" + label + "' is not a safe file name");
}

} // namespace detail

inline std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 ||
        EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1)
        throw IoError("sha256 computation failed");
    std::ostringstream hex;
    for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
    return hex.str();
}

/// Columns t (seconds), then Re/Im of every observable, at full precision.
inline std::string trajectory_csv(const Trajectory& t) {
    std::string out = "t";
    for (const auto& s : t.series) out += ",Re" + s.label + ",Im" + s.label;
    out += '\n';
    for (std::size_t i = 0; i < t.times.size(); ++i) {
        out += detail::format_double(t.times[i] / t.rate_scale);
        for (const auto& s : t.series) {
            out += ',' + detail::format_double(s.values[i].real());
            out += ',' + detail::format_double(s.values[i].imag());
        }
        out += '\n';
    }
    return out;
}

inline json trajectory_metadata(const NamedTrajectory& nt, bool csv_written) {
    const auto& t = nt.trajectory;
    const auto& d = t.diagnostics;
    json obs = json::array();
    for (const auto& s : t.series) obs.push_back(s.label);
    return {{"label", nt.label},
            {"file", csv_written ? json(nt.label + ".csv") : json(nullptr)},
            {"time_unit", "s"},
            {"rate_scale_rad_s", t.rate_scale},
            {"samples", t.times.size()},
            {"observables", obs},
            {"diagnostics",
             {{"steps", d.steps},
              {"dt", d.dt},
              {"max_trace_drift", d.max_trace_drift},
              {"max_trace_error", d.max_trace_error},
              {"max_hermiticity_error", d.max_hermiticity_error},
              {"min_eigenvalue", d.min_eigenvalue},
              {"max_local_error", d.max_local_error},
              {"flat", d.flat}}}};
}

inline json report_json(const ExperimentReport& r, bool csv_written = true) {
    json metrics = json::object(), flags = json::object(), notes = json::object(), trajs = json::array();
    for (const auto& [k, v] : r.metrics) metrics[k] = v;
    for (const auto& [k, v] : r.pass_flags) flags[k] = v;
    for (const auto& [k, v] : r.notes) notes[k] = v;
    for (const auto& nt : r.trajectories) trajs.push_back(trajectory_metadata(nt, csv_written));
    json refs = json::array();
    if (csv_written)
        for (const auto& nt : r.trajectories) refs.push_back(nt.label + ".csv");
    return detail::sanitize({{"name", r.name},
                             {"parameters", r.parameters.is_null() ? json::object() : r.parameters},
                             {"metrics", metrics},
                             {"pass_flags", flags},
                             {"all_pass", r.all_pass()},
                             {"notes", notes},
                             {"trajectory_refs", refs},
                             {"trajectories", trajs}});
}

/**
 * Writes the report into `dir` and returns the written file names (MANIFEST last).
 * The MANIFEST lists "sha256  name" for every other file, sorted by name.
 */
inline std::vector<std::string> emit_report(ExperimentReport& r, const std::filesystem::path& dir, bool write_json = true,
                                            bool write_csv = true) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir))
        throw IoError("cannot create output directory '" + dir.string() + "'");

    std::map<std::string, std::string> files;
    r.trajectory_refs.clear();
    if (write_csv) {
        for (const auto& nt : r.trajectories) {
            detail::check_label(nt.label);
            const auto name = nt.label + ".csv";
            if (files.count(name)) throw DomainError("duplicate trajectory label '" + nt.label + "'");
            files[name] = trajectory_csv(nt.trajectory);
            r.trajectory_refs.push_back(name);
        }
    }
    if (write_json) files["report.json"] = report_json(r, write_csv).dump(2) + "\n";

    std::string manifest;
    std::vector<std::string> written;
    for (const auto& [name, content] : files) {
        detail::write_file(dir / name, content);
        manifest += sha256_hex(content) + "  " + name + "\n";
        written.push_back(name);
    }
    detail::write_file(dir / "MANIFEST", manifest);
    written.push_back("MANIFEST");
    return written;
}

} // namespace chiralspin
