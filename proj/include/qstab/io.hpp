#pragma once
// Trajectory CSV, JSON documents and SVG line plots.
//
// CSV header: t,re(<label>),im(<label>),...,trace,min_eig
// Numbers use the shortest round-trip representation, so a file read back
// reproduces every value bit for bit.

#include <iosfwd>
#include <string>
#include <vector>

#include "qstab/certify.hpp"
#include "qstab/dynamics.hpp"
#include "qstab/steady.hpp"

namespace qstab::io {

std::vector<std::string> csv_header(const Trajectory& traj);
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);
void write_trajectory_csv(const std::string& path, const Trajectory& traj);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> columns;

    const std::vector<double>& column(const std::string& name) const;
};

CsvTable read_csv(std::istream& in);
CsvTable read_csv(const std::string& path);

// Stored states as {"times": [...], "states": [matrix, ...]}.
std::string states_json(const Trajectory& traj);
std::string steady_json(const InvariantSet& set);
std::string report_json(const StabilityReport& rep, const std::string& model_label);

void write_text(const std::string& path, const std::string& text);

struct Series {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
};

struct PlotSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_y = false;
    bool equal_aspect = false;
};

// Round tick positions covering [lo, hi]: steps of 1, 2 or 5 times a power of ten.
std::vector<double> nice_ticks(double lo, double hi, int target = 6);

std::string svg_line_plot(const PlotSpec& spec, const std::vector<Series>& series);

}  // namespace qstab::io
