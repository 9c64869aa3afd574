#pragma once
#include <string>
#include <vector>
#include <map>
#include <fstream>

namespace lpw {

// flat key=value configuration; '#' starts a comment, later keys win
struct Config {
    std::map<std::string, std::string> kv;

    static Config from_file(const std::string& path);
    void set(const std::string& k, const std::string& v) { kv[k] = v; }
    bool has(const std::string& k) const { return kv.count(k) != 0; }
    std::string get(const std::string& k, const std::string& dflt) const;
    double get_num(const std::string& k, double dflt) const;
    long get_int(const std::string& k, long dflt) const;
    // deterministic serialization (sorted keys), used for the config echo
    std::string to_text() const;
};

struct CsvWriter {
    std::ofstream f;
    std::size_t ncols;
    CsvWriter(const std::string& path, const std::vector<std::string>& cols);
    void row(const std::vector<double>& vals);
    void raw_row(const std::vector<std::string>& vals);
};

struct SvgSeries {
    std::string name;
    std::vector<double> x, y;
};

// minimal deterministic line plot; data points are drawn as circles so the
// file carries the numbers, not just the shape
void svg_plot(const std::string& path, const std::string& title,
              const std::string& xlabel, const std::string& ylabel,
              const std::vector<SvgSeries>& series,
              bool logx = false, bool logy = false);

std::string fmt_g(double v, int prec = 12);
void make_dir(const std::string& path);
void write_text_file(const std::string& path, const std::string& body);

} // namespace lpw
