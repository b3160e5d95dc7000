#include "qstab/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "qstab/error.hpp"
#include "qstab/expr.hpp"

namespace qstab::io {

namespace {

using nlohmann::json;

json matrix_json(const Operator& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back({m(r, c).real(), m(r, c).imag()});
        rows.push_back(std::move(row));
    }
    return rows;
}

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json falsifiers_json(const std::vector<Falsifier>& list) {
    json arr = json::array();
    for (const auto& f : list) {
        arr.push_back({{"condition", f.condition}, {"sample", f.sample}, {"value", f.value}, {"bound", f.bound}});
    }
    return arr;
}

std::string fixed2(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", x);
    return buf;
}

std::string tick_label(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", std::abs(x) < 1e-14 ? 0.0 : x);
    return buf;
}

std::string escape_xml(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

}  // namespace

std::vector<std::string> csv_header(const Trajectory& traj) {
    std::vector<std::string> h{"t"};
    for (const auto& label : traj.labels) {
        h.push_back("re(" + label + ")");
        h.push_back("im(" + label + ")");
    }
    h.push_back("trace");
    h.push_back("min_eig");
    return h;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
    const auto header = csv_header(traj);
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << '\n';
    std::vector<const std::vector<cplx>*> series;
    for (const auto& label : traj.labels) series.push_back(&traj.observable(label));
    for (std::size_t r = 0; r < traj.times.size(); ++r) {
        out << format_double(traj.times[r]);
        for (const auto* s : series) out << ',' << format_double((*s)[r].real()) << ',' << format_double((*s)[r].imag());
        out << ',' << format_double(traj.trace[r]) << ',' << format_double(traj.min_eig[r]) << '\n';
    }
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    write_trajectory_csv(out, traj);
}

const std::vector<double>& CsvTable::column(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw InvalidArgument("no CSV column '" + name + "'");
    return columns[static_cast<std::size_t>(it - header.begin())];
}

CsvTable read_csv(std::istream& in) {
    CsvTable t;
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("empty CSV");
    std::stringstream hs(line);
    for (std::string cell; std::getline(hs, cell, ',');) t.header.push_back(cell);
    t.columns.resize(t.header.size());
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        std::size_t col = 0;
        std::size_t start = 0;
        for (;;) {
            const std::size_t end = std::min(line.find(',', start), line.size());
            if (col >= t.columns.size()) throw ConfigError("CSV row " + std::to_string(row) + " has too many cells");
            double x = 0.0;
            const auto res = std::from_chars(line.data() + start, line.data() + end, x);
            if (res.ec != std::errc() || res.ptr != line.data() + end) {
                throw ConfigError("CSV row " + std::to_string(row) + " has a malformed number");
            }
            t.columns[col++].push_back(x);
            if (end == line.size()) break;
            start = end + 1;
        }
        if (col != t.columns.size()) throw ConfigError("CSV row " + std::to_string(row) + " has too few cells");
    }
    return t;
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    return read_csv(in);
}

std::string states_json(const Trajectory& traj) {
    json j;
    j["times"] = traj.stored_times;
    json states = json::array();
    for (const auto& s : traj.states) states.push_back(matrix_json(s.op()));
    j["states"] = std::move(states);
    return j.dump();
}

std::string steady_json(const InvariantSet& set) {
    json j;
    j["dim"] = set.fixed_points.dim;
    j["kernel_dimension"] = set.fixed_points.dimension();
    j["dark_dimension"] = set.k;
    j["dark_structure"] = set.has_dark_structure();
    j["candidate_dark_dimension"] = set.candidate_k;
    j["svd_threshold"] = set.fixed_points.svd_threshold;
    j["relative_threshold"] = set.fixed_points.relative_threshold;
    j["largest_singular_value"] = set.fixed_points.largest_singular_value;
    j["gap_estimate"] = set.fixed_points.gap_estimate;
    json basis = json::array();
    for (const auto& b : set.fixed_points.basis) basis.push_back(matrix_json(b));
    j["basis"] = std::move(basis);
    if (set.has_dark_structure()) j["dark_isometry"] = matrix_json(set.isometry());
    return j.dump(1);
}

std::string report_json(const StabilityReport& rep, const std::string& model_label) {
    json j;
    j["model"] = model_label;
    j["lyapunov_provenance"] = rep.provenance;
    j["classification"] = to_string(rep.classification);
    j["interior_margin"] = rep.interior_margin;
    j["structure_supported"] = rep.structure_supported;
    if (rep.floor) {
        j["floor"] = {{"ok", rep.floor->ok},
                      {"v_star", rep.floor->v_star},
                      {"margin", finite_or_null(rep.floor->margin)},
                      {"block_error", rep.floor->block_error},
                      {"cross_norm", rep.floor->cross_norm}};
    } else {
        j["floor"] = nullptr;
    }
    j["floor_ok"] = rep.floor_ok();
    j["lyapunov"] = {{"ok", rep.lyapunov.ok}, {"max_eig", rep.lyapunov.max_eig}};
    j["lyapunov_ok"] = rep.lyapunov.ok;
    j["asymptotic"] = {{"ok", rep.asymptotic.ok},
                       {"null_count", rep.asymptotic.null_count},
                       {"max_null_angle", rep.asymptotic.max_null_angle},
                       {"reason", rep.asymptotic.reason}};
    j["asymptotic_ok"] = rep.asymptotic.ok;
    if (rep.exponential) {
        j["exponential"] = {{"gamma", rep.exponential->gamma},
                            {"zeta", rep.exponential->zeta},
                            {"margin", rep.exponential->margin}};
    } else {
        j["exponential"] = nullptr;
    }
    if (rep.kappa) {
        j["kappa_hat"] = rep.kappa->kappa_hat;
        j["kappa"] = {{"kappa_hat", rep.kappa->kappa_hat},
                      {"used", rep.kappa->used},
                      {"skipped", rep.kappa->skipped},
                      {"argmin_sample", rep.kappa->argmin_sample},
                      {"argmin_excess", rep.kappa->argmin_excess},
                      {"argmin_distance", rep.kappa->argmin_distance}};
    } else {
        j["kappa_hat"] = nullptr;
    }
    j["samples"] = rep.samples;
    j["falsifier_count"] = rep.falsifier_count;
    j["falsifiers"] = falsifiers_json(rep.falsifiers);
    j["notes"] = rep.notes;
    return j.dump(2);
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    out << text;
    if (!text.empty() && text.back() != '\n') out << '\n';
}

std::vector<double> nice_ticks(double lo, double hi, int target) {
    if (!(hi > lo)) return {lo};
    const double raw = (hi - lo) / std::max(1, target - 1);
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0}) {
        step = m * mag;
        if (step >= raw) break;
    }
    std::vector<double> ticks;
    const long first = static_cast<long>(std::ceil(lo / step - 1e-9));
    const long last = static_cast<long>(std::floor(hi / step + 1e-9));
    for (long k = first; k <= last; ++k) ticks.push_back(static_cast<double>(k) * step);
    return ticks;
}

std::string svg_line_plot(const PlotSpec& spec, const std::vector<Series>& series) {
    constexpr double W = 800, H = 600, left = 90, right = 170, top = 50, bottom = 70;
    const double pw = W - left - right;
    const double ph = H - top - bottom;

    auto ty = [&](double y) { return spec.log_y ? std::log10(y) : y; };
    auto usable = [&](double y) { return std::isfinite(y) && (!spec.log_y || y > 0.0); };

    double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
    for (const auto& s : series) {
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            if (!usable(s.y[i]) || !std::isfinite(s.x[i])) continue;
            xmin = std::min(xmin, s.x[i]);
            xmax = std::max(xmax, s.x[i]);
            ymin = std::min(ymin, ty(s.y[i]));
            ymax = std::max(ymax, ty(s.y[i]));
        }
    }
    if (!std::isfinite(xmin)) xmin = 0, xmax = 1, ymin = 0, ymax = 1;
    if (spec.log_y) ymin = std::max(ymin, ymax - 16.0);

    std::vector<double> xt, yt;
    if (spec.log_y) {
        ymin = std::floor(ymin);
        ymax = std::ceil(ymax);
        if (ymax <= ymin) ymax = ymin + 1;
        const int stride = std::max(1, static_cast<int>(std::ceil((ymax - ymin) / 8.0)));
        for (double e = ymin; e <= ymax + 1e-9; e += stride) yt.push_back(e);
    } else {
        if (ymax - ymin < 1e-12) ymin -= 0.5, ymax += 0.5;
        const double pad = 0.05 * (ymax - ymin);
        ymin -= pad, ymax += pad;
    }
    if (xmax - xmin < 1e-12) xmin -= 0.5, xmax += 0.5;
    if (spec.equal_aspect) {
        const double pad = 0.05 * std::max(xmax - xmin, ymax - ymin);
        xmin -= pad, xmax += pad;
        const double scale = std::max((xmax - xmin) / pw, (ymax - ymin) / ph);
        const double cx = 0.5 * (xmin + xmax), cy = 0.5 * (ymin + ymax);
        xmin = cx - 0.5 * scale * pw, xmax = cx + 0.5 * scale * pw;
        ymin = cy - 0.5 * scale * ph, ymax = cy + 0.5 * scale * ph;
    }
    xt = nice_ticks(xmin, xmax);
    if (!spec.log_y) yt = nice_ticks(ymin, ymax);

    auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
    auto py = [&](double y) { return top + ph - (y - ymin) / (ymax - ymin) * ph; };

    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 800 600\" width=\"800\" height=\"600\">\n";
    o << "<rect x=\"0\" y=\"0\" width=\"800\" height=\"600\" fill=\"white\"/>\n";
    o << "<text x=\"" << fixed2(left + pw / 2) << "\" y=\"30\" text-anchor=\"middle\" font-size=\"18\" "
      << "font-family=\"sans-serif\">" << escape_xml(spec.title) << "</text>\n";
    o << "<rect x=\"" << fixed2(left) << "\" y=\"" << fixed2(top) << "\" width=\"" << fixed2(pw) << "\" height=\""
      << fixed2(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (double x : xt) {
        o << "<line x1=\"" << fixed2(px(x)) << "\" y1=\"" << fixed2(top + ph) << "\" x2=\"" << fixed2(px(x))
          << "\" y2=\"" << fixed2(top + ph + 6) << "\" stroke=\"black\"/>\n";
        o << "<text x=\"" << fixed2(px(x)) << "\" y=\"" << fixed2(top + ph + 22)
          << "\" text-anchor=\"middle\" font-size=\"12\" font-family=\"sans-serif\">" << tick_label(x) << "</text>\n";
    }
    for (double y : yt) {
        const std::string label = spec.log_y ? "1e" + tick_label(y) : tick_label(y);
        o << "<line x1=\"" << fixed2(left - 6) << "\" y1=\"" << fixed2(py(y)) << "\" x2=\"" << fixed2(left)
          << "\" y2=\"" << fixed2(py(y)) << "\" stroke=\"black\"/>\n";
        o << "<text x=\"" << fixed2(left - 10) << "\" y=\"" << fixed2(py(y) + 4)
          << "\" text-anchor=\"end\" font-size=\"12\" font-family=\"sans-serif\">" << label << "</text>\n";
    }
    o << "<text x=\"" << fixed2(left + pw / 2) << "\" y=\"" << fixed2(H - 20)
      << "\" text-anchor=\"middle\" font-size=\"14\" font-family=\"sans-serif\">" << escape_xml(spec.x_label)
      << "</text>\n";
    o << "<text x=\"20\" y=\"" << fixed2(top + ph / 2) << "\" text-anchor=\"middle\" font-size=\"14\" "
      << "font-family=\"sans-serif\" transform=\"rotate(-90 20 " << fixed2(top + ph / 2) << ")\">"
      << escape_xml(spec.y_label) << "</text>\n";

    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        const char* color = kPalette[k % std::size(kPalette)];
        const std::size_t n = std::min(s.x.size(), s.y.size());
        const std::size_t stride = std::max<std::size_t>(1, n / 2000);
        o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        bool first = true;
        for (std::size_t i = 0; i < n; i += stride) {
            const std::size_t j = (i + stride >= n) ? n - 1 : i;
            if (!usable(s.y[j])) continue;
            const double yv = std::clamp(ty(s.y[j]), ymin, ymax);
            o << (first ? "" : " ") << fixed2(px(s.x[j])) << ',' << fixed2(py(yv));
            first = false;
            if (j == n - 1) break;
        }
        o << "\"/>\n";
        const double ly = top + 20 + 22.0 * static_cast<double>(k);
        o << "<line x1=\"" << fixed2(W - right + 15) << "\" y1=\"" << fixed2(ly) << "\" x2=\"" << fixed2(W - right + 40)
          << "\" y2=\"" << fixed2(ly) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        o << "<text x=\"" << fixed2(W - right + 46) << "\" y=\"" << fixed2(ly + 4)
          << "\" font-size=\"12\" font-family=\"sans-serif\">" << escape_xml(s.name) << "</text>\n";
    }
    o << "</svg>\n";
    return o.str();
}

}  // namespace qstab::io
