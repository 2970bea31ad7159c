#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace imsim {

// Minimal CSV table reader for the report subcommand.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(const std::string& name) const; // -1 if absent
};

CsvTable read_csv(std::istream& in);

// Grouped bar chart, one bar group per run, values normalized against the
// named baseline row (fraction of baseline = 1.0).
void write_svg_bars(std::ostream& out, const std::string& title,
                    const std::vector<std::string>& group_labels,
                    const std::vector<std::string>& series_labels,
                    const std::vector<std::vector<double>>& values);

// Emits one SVG per metric family (writes, energy, cycles) from a results CSV.
// Returns the paths written.
std::vector<std::string> emit_report(const CsvTable& table, const std::string& out_dir,
                                     const std::string& baseline_label);

} // namespace imsim
