#pragma once

// Text artifacts: shortest round-trip number formatting, CSV tables, a content
// hash for piecewise functions and a dependency-free SVG line renderer.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "revival/core.hpp"

namespace revival::io {

/// Shortest decimal that reads back to the same double.
inline std::string num(double v) {
    std::array<char, 32> buf{};
    const auto r = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), r.ptr);
}

inline std::string num(long long v) {
    std::array<char, 24> buf{};
    const auto r = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), r.ptr);
}

inline std::string num(int v) { return num(static_cast<long long>(v)); }
inline std::string num(long v) { return num(static_cast<long long>(v)); }
inline std::string num(std::size_t v) { return num(static_cast<long long>(v)); }

inline std::string fixed(double v, int precision) {
    std::array<char, 64> buf{};
    const auto r = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::fixed, precision);
    return std::string(buf.data(), r.ptr);
}

/// Comma-separated table with a header row. Optional '#' comment lines go
/// above the header.
class Csv {
public:
    explicit Csv(std::vector<std::string> header) : columns_(header.size()) {
        body_ = join(header);
    }

    void comment(const std::string& line) { comments_ += "# " + line + "\n"; }

    void row(const std::vector<std::string>& cells) {
        if (cells.size() != columns_) throw InvalidInput("csv row has " + std::to_string(cells.size()) +
                                                         " cells, header has " + std::to_string(columns_));
        body_ += join(cells);
    }

    std::string str() const { return comments_ + body_; }

private:
    static std::string join(const std::vector<std::string>& cells) {
        std::string s;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) s += ',';
            s += cells[i];
        }
        s += '\n';
        return s;
    }

    std::size_t columns_;
    std::string comments_;
    std::string body_;
};

/// FNV-1a over the bit patterns of all segment bounds, coefficients and
/// trigonometric terms.
inline std::string content_hash(const PiecewiseFunction& p) {
    std::uint64_t h = 1469598103934665603ull;
    auto feed = [&](const void* data, std::size_t n) {
        const auto* b = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= b[i];
            h *= 1099511628211ull;
        }
    };
    auto feed_double = [&](double v) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof bits);
        feed(&bits, sizeof bits);
    };
    for (const auto& s : p.segments()) {
        feed_double(s.lo);
        feed_double(s.hi);
        for (double c : s.coeffs) feed_double(c);
    }
    for (const auto& t : p.trig()) {
        const std::int64_t k = t.k;
        feed(&k, sizeof k);
        feed_double(t.cos_coef);
        feed_double(t.sin_coef);
    }
    std::array<char, 17> hex{};
    for (int i = 15; i >= 0; --i) {
        hex[static_cast<std::size_t>(i)] = "0123456789abcdef"[h & 0xf];
        h >>= 4;
    }
    return std::string(hex.data(), 16);
}

// ---------------------------------------------------------------------------
// SVG

struct Series {
    std::string label;
    std::vector<double> y;
    std::string colour = "#1f77b4";
};

namespace detail {

inline std::string escape(const std::string& s) {
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

}  // namespace detail

/// One stacked panel per series over x in [0, 2pi], with dashed vertical
/// marks at the given positions.
inline std::string svg_panels(const std::string& title, const std::vector<double>& x, const std::vector<Series>& series,
                              const std::vector<double>& marks = {}) {
    constexpr double width = 960, left = 70, right = 20, top = 40, panel = 180, gap = 30;
    const double plot_w = width - left - right;
    const double height = top + static_cast<double>(series.size()) * (panel + gap) + 10;
    auto px = [&](double v) { return left + plot_w * v / two_pi; };
    std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fixed(width, 0) + "\" height=\"" +
                    fixed(height, 0) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s += "<text x=\"" + fixed(left, 0) + "\" y=\"22\" font-size=\"15\">" + detail::escape(title) + "</text>\n";
    const std::array<const char*, 5> tick_labels{"0", "π/2", "π", "3π/2", "2π"};
    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& ser = series[k];
        const double y0 = top + static_cast<double>(k) * (panel + gap);
        double lo = 0.0, hi = 0.0;
        if (!ser.y.empty()) {
            const auto [mn, mx] = std::minmax_element(ser.y.begin(), ser.y.end());
            lo = *mn;
            hi = *mx;
        }
        if (!(hi > lo)) {
            lo -= 1.0;
            hi += 1.0;
        }
        const double pad = 0.05 * (hi - lo);
        lo -= pad;
        hi += pad;
        auto py = [&](double v) { return y0 + panel * (hi - v) / (hi - lo); };
        s += "<rect x=\"" + fixed(left, 1) + "\" y=\"" + fixed(y0, 1) + "\" width=\"" + fixed(plot_w, 1) +
             "\" height=\"" + fixed(panel, 1) + "\" fill=\"none\" stroke=\"#444\"/>\n";
        if (lo < 0.0 && hi > 0.0)
            s += "<line x1=\"" + fixed(left, 1) + "\" x2=\"" + fixed(left + plot_w, 1) + "\" y1=\"" + fixed(py(0.0), 2) +
                 "\" y2=\"" + fixed(py(0.0), 2) + "\" stroke=\"#bbb\"/>\n";
        for (double m : marks)
            s += "<line x1=\"" + fixed(px(m), 2) + "\" x2=\"" + fixed(px(m), 2) + "\" y1=\"" + fixed(y0, 1) +
                 "\" y2=\"" + fixed(y0 + panel, 1) + "\" stroke=\"#d62728\" stroke-opacity=\"0.35\" stroke-dasharray=\"3,3\"/>\n";
        for (std::size_t t = 0; t < tick_labels.size(); ++t) {
            const double xt = px(0.5 * pi * static_cast<double>(t));
            s += "<text x=\"" + fixed(xt, 1) + "\" y=\"" + fixed(y0 + panel + 14, 1) + "\" text-anchor=\"middle\">" +
                 tick_labels[t] + "</text>\n";
        }
        s += "<text x=\"" + fixed(left - 6, 1) + "\" y=\"" + fixed(y0 + 10, 1) + "\" text-anchor=\"end\">" +
             fixed(hi - pad, 3) + "</text>\n";
        s += "<text x=\"" + fixed(left - 6, 1) + "\" y=\"" + fixed(y0 + panel, 1) + "\" text-anchor=\"end\">" +
             fixed(lo + pad, 3) + "</text>\n";
        s += "<text x=\"" + fixed(left + 8, 1) + "\" y=\"" + fixed(y0 + 16, 1) + "\">" + detail::escape(ser.label) +
             "</text>\n";
        s += "<polyline fill=\"none\" stroke=\"" + ser.colour + "\" stroke-width=\"1\" points=\"";
        const std::size_t n = std::min(x.size(), ser.y.size());
        for (std::size_t j = 0; j < n; ++j) {
            if (j) s += ' ';
            s += fixed(px(x[j]), 2) + "," + fixed(py(ser.y[j]), 2);
        }
        s += "\"/>\n";
    }
    s += "</svg>\n";
    return s;
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error("write failed for " + path.string());
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read " + path.string());
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace revival::io
