#include "imsim/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace imsim {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

} // namespace

int CsvTable::column(const std::string& name) const {
    auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : int(it - header.begin());
}

CsvTable read_csv(std::istream& in) {
    CsvTable t;
    std::string line;
    if (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        t.header = split_csv_line(line);
    }
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        t.rows.push_back(split_csv_line(line));
    }
    return t;
}

void write_svg_bars(std::ostream& out, const std::string& title,
                    const std::vector<std::string>& group_labels,
                    const std::vector<std::string>& series_labels,
                    const std::vector<std::vector<double>>& values) {
    const int bar_w = 18, gap = 8, group_gap = 28;
    const int chart_h = 280, margin_l = 60, margin_t = 50, margin_b = 120;
    static const char* palette[] = {"#4878a8", "#d1605e", "#6aa56a", "#e0b13e",
                                    "#8869b8", "#7f7f7f"};
    size_t groups = group_labels.size();
    size_t series = series_labels.size();
    int group_w = int(series) * (bar_w + gap) + group_gap;
    int width = margin_l + int(groups) * group_w + 40;
    int height = margin_t + chart_h + margin_b;

    double vmax = 1.0;
    for (const auto& row : values)
        for (double v : row) vmax = std::max(vmax, v);

    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width << "' height='" << height
        << "' font-family='sans-serif' font-size='11'>\n";
    out << "<text x='" << margin_l << "' y='20' font-size='14'>" << title << "</text>\n";
    // y axis with a gridline at 1.0 (the baseline)
    for (int tick = 0; tick <= 4; ++tick) {
        double v = vmax * tick / 4.0;
        int y = margin_t + chart_h - int(chart_h * v / vmax);
        out << "<line x1='" << margin_l << "' y1='" << y << "' x2='" << width - 20 << "' y2='"
            << y << "' stroke='#ddd'/>\n";
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.2f", v);
        out << "<text x='" << margin_l - 45 << "' y='" << y + 4 << "'>" << buf << "</text>\n";
    }
    int y1 = margin_t + chart_h - int(chart_h * 1.0 / vmax);
    out << "<line x1='" << margin_l << "' y1='" << y1 << "' x2='" << width - 20 << "' y2='" << y1
        << "' stroke='#999' stroke-dasharray='4 3'/>\n";

    for (size_t g = 0; g < groups; ++g) {
        int gx = margin_l + int(g) * group_w;
        for (size_t s = 0; s < series && g < values.size(); ++s) {
            double v = s < values[g].size() ? values[g][s] : 0.0;
            int h = int(chart_h * v / vmax);
            int x = gx + int(s) * (bar_w + gap);
            int y = margin_t + chart_h - h;
            out << "<rect x='" << x << "' y='" << y << "' width='" << bar_w << "' height='" << h
                << "' fill='" << palette[s % 6] << "'/>\n";
        }
        out << "<text x='" << gx << "' y='" << margin_t + chart_h + 14 << "' transform='rotate(45 "
            << gx << ' ' << margin_t + chart_h + 14 << ")'>" << group_labels[g] << "</text>\n";
    }
    for (size_t s = 0; s < series; ++s) {
        int lx = margin_l + int(s) * 140;
        int ly = height - 16;
        out << "<rect x='" << lx << "' y='" << ly - 10 << "' width='12' height='12' fill='"
            << palette[s % 6] << "'/>\n";
        out << "<text x='" << lx + 16 << "' y='" << ly << "'>" << series_labels[s] << "</text>\n";
    }
    out << "</svg>\n";
}

std::vector<std::string> emit_report(const CsvTable& table, const std::string& out_dir,
                                     const std::string& baseline_label) {
    struct Family {
        const char* file;
        const char* title;
        std::vector<std::string> columns;
    };
    const std::vector<Family> families = {
        {"writes.svg", "Write operations per level (normalized)",
         {"l1_writes", "llc_writes", "pcm_writes"}},
        {"energy.svg", "Dynamic energy (normalized)",
         {"energy_stable_nj", "energy_backup_nj", "energy_restore_nj", "total_energy_nj"}},
        {"cycles.svg", "Execution cycles (normalized)", {"total_cycles", "stall_cycles"}},
    };

    int label_col = table.column("label");
    if (label_col < 0) throw std::runtime_error("results CSV has no 'label' column");

    int base_row = -1;
    for (size_t i = 0; i < table.rows.size(); ++i) {
        if (table.rows[i][size_t(label_col)] == baseline_label) {
            base_row = int(i);
            break;
        }
    }
    if (base_row < 0) base_row = 0; // fall back to the first row

    std::vector<std::string> written;
    for (const auto& fam : families) {
        std::vector<int> cols;
        for (const auto& c : fam.columns) {
            int idx = table.column(c);
            if (idx < 0) throw std::runtime_error("results CSV has no '" + c + "' column");
            cols.push_back(idx);
        }
        std::vector<std::string> groups;
        std::vector<std::vector<double>> values;
        for (const auto& row : table.rows) {
            groups.push_back(row[size_t(label_col)]);
            std::vector<double> vals;
            for (int c : cols) {
                double v = std::stod(row[size_t(c)]);
                double b = std::stod(table.rows[size_t(base_row)][size_t(c)]);
                vals.push_back(b != 0.0 ? v / b : 0.0);
            }
            values.push_back(std::move(vals));
        }
        std::string path = out_dir + "/" + fam.file;
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot write " + path);
        write_svg_bars(out, fam.title, groups, fam.columns, values);
        written.push_back(path);
    }
    return written;
}

} // namespace imsim
