#include "lpw/io.hpp"
#include "lpw/util.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>

namespace lpw {

Config Config::from_file(const std::string& path) {
    Config c;
    std::ifstream f(path);
    if (!f) fail("cannot open config file: " + path);
    std::string line;
    while (std::getline(f, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            auto b = s.find_first_not_of(" \t\r");
            auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        std::string k = trim(line.substr(0, eq));
        std::string v = trim(line.substr(eq + 1));
        if (!k.empty()) c.kv[k] = v;
    }
    return c;
}

std::string Config::get(const std::string& k, const std::string& dflt) const {
    auto it = kv.find(k);
    return it == kv.end() ? dflt : it->second;
}

double Config::get_num(const std::string& k, double dflt) const {
    auto it = kv.find(k);
    if (it == kv.end()) return dflt;
    try {
        return std::stod(it->second);
    } catch (...) {
        fail("config key '" + k + "' is not numeric: " + it->second);
    }
}

long Config::get_int(const std::string& k, long dflt) const {
    auto it = kv.find(k);
    if (it == kv.end()) return dflt;
    try {
        return std::stol(it->second);
    } catch (...) {
        fail("config key '" + k + "' is not an integer: " + it->second);
    }
}

std::string Config::to_text() const {
    std::ostringstream os;
    for (const auto& [k, v] : kv) os << k << " = " << v << "\n";
    return os.str();
}

std::string fmt_g(double v, int prec) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    return buf;
}

void make_dir(const std::string& path) {
    std::error_code ec;
    std::filesystem::create_directories(path, ec);
    if (ec) fail("cannot create directory " + path + ": " + ec.message());
}

void write_text_file(const std::string& path, const std::string& body) {
    std::ofstream f(path);
    if (!f) fail("cannot write " + path);
    f << body;
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& cols)
    : f(path), ncols(cols.size()) {
    if (!f) fail("cannot write " + path);
    for (std::size_t i = 0; i < cols.size(); ++i)
        f << cols[i] << (i + 1 < cols.size() ? "," : "\n");
}

void CsvWriter::row(const std::vector<double>& vals) {
    if (vals.size() != ncols) fail("csv row width mismatch");
    for (std::size_t i = 0; i < vals.size(); ++i)
        f << fmt_g(vals[i]) << (i + 1 < vals.size() ? "," : "\n");
}

void CsvWriter::raw_row(const std::vector<std::string>& vals) {
    if (vals.size() != ncols) fail("csv row width mismatch");
    for (std::size_t i = 0; i < vals.size(); ++i)
        f << vals[i] << (i + 1 < vals.size() ? "," : "\n");
}

// ---------------------------------------------------------------- svg plot

static double tx(double v, double lo, double hi, double a, double b) {
    if (hi <= lo) return 0.5 * (a + b);
    return a + (v - lo) / (hi - lo) * (b - a);
}

void svg_plot(const std::string& path, const std::string& title,
              const std::string& xlabel, const std::string& ylabel,
              const std::vector<SvgSeries>& series, bool logx, bool logy) {
    const int W = 760, H = 520, ml = 70, mr = 20, mt = 40, mb = 50;
    double xlo = 1e300, xhi = -1e300, ylo = 1e300, yhi = -1e300;
    auto fx = [&](double v) { return logx ? std::log10(v) : v; };
    auto fy = [&](double v) { return logy ? std::log10(v) : v; };
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (logx && s.x[i] <= 0) continue;
            if (logy && s.y[i] <= 0) continue;
            xlo = std::min(xlo, fx(s.x[i])); xhi = std::max(xhi, fx(s.x[i]));
            ylo = std::min(ylo, fy(s.y[i])); yhi = std::max(yhi, fy(s.y[i]));
        }
    if (xlo > xhi) { xlo = 0; xhi = 1; }
    if (ylo > yhi) { ylo = 0; yhi = 1; }
    double padx = 0.05 * (xhi - xlo + 1e-12), pady = 0.05 * (yhi - ylo + 1e-12);
    xlo -= padx; xhi += padx; ylo -= pady; yhi += pady;

    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
    os << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
    os << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << title << "</text>\n";
    os << "<text x=\"" << (ml + (W - ml - mr) / 2) << "\" y=\"" << H - 12
       << "\" text-anchor=\"middle\" font-size=\"12\">" << xlabel << (logx ? " (log10)" : "") << "</text>\n";
    os << "<text x=\"16\" y=\"" << (mt + (H - mt - mb) / 2)
       << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 16 "
       << (mt + (H - mt - mb) / 2) << ")\">" << ylabel << (logy ? " (log10)" : "") << "</text>\n";
    os << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << (W - ml - mr)
       << "\" height=\"" << (H - mt - mb) << "\" fill=\"none\" stroke=\"black\"/>\n";
    // axis ticks
    for (int k = 0; k <= 4; ++k) {
        double vx = xlo + k * (xhi - xlo) / 4.0;
        double vy = ylo + k * (yhi - ylo) / 4.0;
        double px = tx(vx, xlo, xhi, ml, W - mr);
        double py = tx(vy, ylo, yhi, H - mb, mt);
        os << "<text x=\"" << fmt_g(px, 6) << "\" y=\"" << H - mb + 16
           << "\" text-anchor=\"middle\" font-size=\"10\">" << fmt_g(vx, 4) << "</text>\n";
        os << "<text x=\"" << ml - 6 << "\" y=\"" << fmt_g(py + 3, 6)
           << "\" text-anchor=\"end\" font-size=\"10\">" << fmt_g(vy, 4) << "</text>\n";
    }
    int ci = 0;
    for (const auto& s : series) {
        const char* col = colors[ci % 6];
        std::ostringstream pts;
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if ((logx && s.x[i] <= 0) || (logy && s.y[i] <= 0)) continue;
            double px = tx(fx(s.x[i]), xlo, xhi, ml, W - mr);
            double py = tx(fy(s.y[i]), ylo, yhi, H - mb, mt);
            pts << fmt_g(px, 8) << "," << fmt_g(py, 8) << " ";
        }
        os << "<polyline fill=\"none\" stroke=\"" << col << "\" stroke-width=\"1.5\" points=\""
           << pts.str() << "\"/>\n";
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if ((logx && s.x[i] <= 0) || (logy && s.y[i] <= 0)) continue;
            double px = tx(fx(s.x[i]), xlo, xhi, ml, W - mr);
            double py = tx(fy(s.y[i]), ylo, yhi, H - mb, mt);
            // keep raw data on each marker so the plot is self-contained
            os << "<circle cx=\"" << fmt_g(px, 8) << "\" cy=\"" << fmt_g(py, 8)
               << "\" r=\"2.5\" fill=\"" << col << "\" data-x=\"" << fmt_g(s.x[i])
               << "\" data-y=\"" << fmt_g(s.y[i]) << "\"/>\n";
        }
        os << "<text x=\"" << W - mr - 8 << "\" y=\"" << mt + 16 + 14 * ci
           << "\" text-anchor=\"end\" font-size=\"11\" fill=\"" << col << "\">" << s.name << "</text>\n";
        ++ci;
    }
    os << "</svg>\n";
    write_text_file(path, os.str());
}

} // namespace lpw
