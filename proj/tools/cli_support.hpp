#pragma once
// CSV tables, SVG line plots and argument helpers for the pso-modes tool.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "psomodes/units.hpp"

namespace cli {

/// Raised for bad command-line values; maps to exit code 2.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Shortest round-trip text; identical inputs always give identical bytes.
inline std::string num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (v == 0.0) return "0";  // folds -0
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ec == std::errc() ? ptr : buf.data());
}

/// "4GHz", "50um", "1e9": a number with an optional unit suffix, in SI.
inline double quantity(const std::string& text, const std::string& flag) {
    psomodes::Quantity q;
    std::size_t off = 0;
    if (psomodes::parse_quantity(text, q, off) != psomodes::QuantityStatus::Ok) {
        throw UsageError("--" + flag + ": cannot read '" + text + "' as a quantity");
    }
    return q.value;
}

inline std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(text);
    while (std::getline(in, cur, sep)) {
        if (!cur.empty()) out.push_back(cur);
    }
    return out;
}

/// Field that cannot break a CSV row.
inline std::string field(std::string s) {
    std::replace(s.begin(), s.end(), ',', ';');
    std::replace(s.begin(), s.end(), '\n', ' ');
    return s;
}

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void write(std::ostream& out) const {
        auto line = [&](const std::vector<std::string>& cells) {
            for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
            out << '\n';
        };
        line(header);
        for (const auto& r : rows) line(r);
    }
};

inline bool parse_double(const std::string& s, double& v) {
    if (s == "nan" || s == "inf" || s == "-inf") return false;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    return ec == std::errc() && ptr == s.data() + s.size();
}

/// Line plot of every numeric column against the first numeric column. Axes switch to log
/// when the data are positive and span more than two decades.
inline void write_svg(const Table& t, const std::string& title, std::ostream& out) {
    std::vector<std::size_t> numeric;
    for (std::size_t c = 0; c < t.header.size(); ++c) {
        std::size_t good = 0;
        for (const auto& r : t.rows) {
            double v;
            if (c < r.size() && parse_double(r[c], v)) ++good;
        }
        if (good > 0 && good * 2 >= t.rows.size()) numeric.push_back(c);
    }
    const double W = 760, H = 460, L = 70, R = 180, T = 40, B = 50;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << L << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">" << title << "</text>\n";
    if (numeric.size() < 2 || t.rows.empty()) {
        out << "<text x=\"" << L << "\" y=\"80\" font-family=\"sans-serif\">no numeric series</text>\n</svg>\n";
        return;
    }
    const std::size_t xc = numeric.front();
    auto range = [&](const std::vector<std::size_t>& cols, bool& logscale) {
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        bool positive = true;
        for (const auto& r : t.rows) {
            for (auto c : cols) {
                double v;
                if (!parse_double(r[c], v)) continue;
                lo = std::min(lo, v);
                hi = std::max(hi, v);
                positive = positive && v > 0;
            }
        }
        logscale = positive && hi / lo > 100.0;
        if (logscale) return std::array<double, 2>{std::log10(lo), std::log10(hi)};
        if (lo == hi) return std::array<double, 2>{lo - 1, hi + 1};
        return std::array<double, 2>{lo, hi};
    };
    bool xlog = false, ylog = false;
    const auto xr = range({xc}, xlog);
    const std::vector<std::size_t> ycols(numeric.begin() + 1, numeric.end());
    const auto yr = range(ycols, ylog);
    auto px = [&](double v) { return L + (W - L - R) * ((xlog ? std::log10(v) : v) - xr[0]) / (xr[1] - xr[0]); };
    auto py = [&](double v) { return H - B - (H - T - B) * ((ylog ? std::log10(v) : v) - yr[0]) / (yr[1] - yr[0]); };
    out << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\"" << H - T - B
        << "\" fill=\"none\" stroke=\"black\"/>\n";
    auto label = [&](double x, double y, const std::string& s, const char* anchor) {
        out << "<text x=\"" << x << "\" y=\"" << y << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\""
            << anchor << "\">" << s << "</text>\n";
    };
    auto tick = [](double v, bool lg) { return num(lg ? std::pow(10.0, v) : v).substr(0, 10); };
    label(L, H - B + 16, tick(xr[0], xlog), "start");
    label(W - R, H - B + 16, tick(xr[1], xlog), "end");
    label(L - 4, H - B, tick(yr[0], ylog), "end");
    label(L - 4, T + 10, tick(yr[1], ylog), "end");
    label((L + W - R) / 2, H - 12, t.header[xc] + (xlog ? " (log)" : ""), "middle");
    static const std::array<const char*, 8> colors{"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                                  "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};
    for (std::size_t k = 0; k < ycols.size(); ++k) {
        const char* color = colors[k % colors.size()];
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.2\" points=\"";
        for (const auto& r : t.rows) {
            double x, y;
            if (!parse_double(r[xc], x) || !parse_double(r[ycols[k]], y)) continue;
            if ((xlog && x <= 0) || (ylog && y <= 0)) continue;
            out << px(x) << ',' << py(y) << ' ';
        }
        out << "\"/>\n";
        const double ly = T + 14 + 16 * static_cast<double>(k);
        out << "<line x1=\"" << W - R + 10 << "\" y1=\"" << ly - 4 << "\" x2=\"" << W - R + 30 << "\" y2=\"" << ly - 4
            << "\" stroke=\"" << color << "\"/>\n";
        label(W - R + 34, ly, t.header[ycols[k]] + (ylog && k == 0 ? " (log)" : ""), "start");
    }
    out << "</svg>\n";
}

/// path with its extension (if any) replaced.
inline std::string sibling(const std::string& path, const std::string& ext) {
    const auto slash = path.find_last_of('/');
    const auto dot = path.find_last_of('.');
    const bool has_ext = dot != std::string::npos && (slash == std::string::npos || dot > slash);
    return (has_ext ? path.substr(0, dot) : path) + ext;
}

} // namespace cli
