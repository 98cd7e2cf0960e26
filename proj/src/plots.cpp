#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "pcac/artifacts.hpp"

namespace pcac {

namespace {

constexpr double kWidth = 900.0;
constexpr double kPanelHeight = 220.0;
constexpr double kLeft = 80.0, kRight = 20.0, kTop = 30.0, kBottom = 40.0;
constexpr const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#9467bd", "#8c564b",
                                    "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#d62728"};
constexpr const char* kPositive = "#1f77b4";
constexpr const char* kNonPositive = "#d62728";

std::string num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", x);
    return buf;
}

std::string tick_label(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", x);
    return buf;
}

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();

    void add(double v) {
        if (!std::isfinite(v)) return;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    bool empty() const { return !(lo <= hi); }
    void pad() {
        if (empty()) {
            lo = -1.0;
            hi = 1.0;
        } else if (hi - lo < 1e-12 * std::max(1.0, std::abs(hi))) {
            const double d = std::max(1e-6, 0.5 * std::abs(hi));
            lo -= d;
            hi += d;
        } else {
            const double d = 0.05 * (hi - lo);
            lo -= d;
            hi += d;
        }
    }
};

struct Panel {
    std::string title;
    double top = 0.0;
    Range x, y;

    double px(double v) const { return kLeft + (v - x.lo) / (x.hi - x.lo) * (kWidth - kLeft - kRight); }
    double py(double v) const {
        const double h = kPanelHeight - kTop - kBottom;
        return top + kTop + (y.hi - v) / (y.hi - y.lo) * h;
    }
};

class Svg {
   public:
    explicit Svg(int panels) : height_(panels * kPanelHeight) {}

    void frame(const Panel& p) {
        const double x0 = kLeft, x1 = kWidth - kRight;
        const double y0 = p.top + kTop, y1 = p.top + kPanelHeight - kBottom;
        body_ << "<rect x='" << num(x0) << "' y='" << num(y0) << "' width='" << num(x1 - x0) << "' height='"
              << num(y1 - y0) << "' fill='none' stroke='#444'/>\n";
        body_ << "<text x='" << num(x0) << "' y='" << num(p.top + kTop - 8) << "' font-size='14'>" << p.title
              << "</text>\n";
        for (int i = 0; i <= 4; ++i) {
            const double yv = p.y.lo + (p.y.hi - p.y.lo) * i / 4.0;
            const double xv = p.x.lo + (p.x.hi - p.x.lo) * i / 4.0;
            body_ << "<text x='" << num(x0 - 6) << "' y='" << num(p.py(yv) + 4)
                  << "' font-size='11' text-anchor='end'>" << tick_label(yv) << "</text>\n";
            body_ << "<text x='" << num(p.px(xv)) << "' y='" << num(y1 + 16)
                  << "' font-size='11' text-anchor='middle'>" << tick_label(xv) << "</text>\n";
        }
        if (p.y.lo < 0.0 && p.y.hi > 0.0) {
            body_ << "<line x1='" << num(x0) << "' x2='" << num(x1) << "' y1='" << num(p.py(0)) << "' y2='"
                  << num(p.py(0)) << "' stroke='#bbb' stroke-dasharray='4 3'/>\n";
        }
    }

    void polyline(const Panel& p, const std::vector<double>& xs, const std::vector<double>& ys, const char* color) {
        std::ostringstream pts;
        auto flush = [&] {
            if (pts.tellp() > 0) {
                body_ << "<polyline fill='none' stroke-width='1.2' stroke='" << color << "' points='" << pts.str()
                      << "'/>\n";
            }
            pts.str("");
            pts.clear();
        };
        for (std::size_t i = 0; i < xs.size(); ++i) {
            if (!std::isfinite(ys[i])) {
                flush();
                continue;
            }
            pts << num(p.px(xs[i])) << ',' << num(p.py(std::clamp(ys[i], p.y.lo, p.y.hi))) << ' ';
        }
        flush();
    }

    /// One marker per finite sample, colored by the sign of the value.
    void sign_markers(const Panel& p, const std::vector<double>& xs, const std::vector<double>& ys) {
        for (std::size_t i = 0; i < xs.size(); ++i) {
            if (!std::isfinite(ys[i])) continue;
            body_ << "<circle r='1.6' cx='" << num(p.px(xs[i])) << "' cy='"
                  << num(p.py(std::clamp(ys[i], p.y.lo, p.y.hi))) << "' fill='"
                  << (ys[i] > 0.0 ? kPositive : kNonPositive) << "'/>\n";
        }
    }

    void write(const std::filesystem::path& path) const {
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot write " + path.string());
        out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << num(kWidth) << "' height='" << num(height_)
            << "' font-family='sans-serif'>\n<rect width='100%' height='100%' fill='white'/>\n"
            << body_.str() << "</svg>\n";
        if (!out) throw std::runtime_error("failed writing " + path.string());
    }

   private:
    double height_;
    std::ostringstream body_;
};

Panel make_panel(std::string title, int index, const std::vector<double>& ks,
                 const std::vector<const std::vector<double>*>& series) {
    Panel p;
    p.title = std::move(title);
    p.top = index * kPanelHeight;
    for (double k : ks) p.x.add(k);
    if (p.x.empty() || p.x.lo == p.x.hi) {
        p.x.lo -= 0.5;
        p.x.hi += 0.5;
    }
    for (const auto* s : series) {
        for (double v : *s) p.y.add(v);
    }
    p.y.pad();
    return p;
}

std::vector<double> one_minus(const std::vector<double>& v) {
    std::vector<double> out(v.size());
    std::transform(v.begin(), v.end(), out.begin(), [](double a) { return 1.0 - a; });
    return out;
}

}  // namespace

std::vector<std::filesystem::path> emit_plots(const std::filesystem::path& dir) {
    const Table t = read_table(dir / "steps.csv");
    if (t.rows() == 0) {
        std::cerr << "warning: " << (dir / "steps.csv").string() << " has no rows; no plots written\n";
        return {};
    }
    std::vector<std::filesystem::path> written;
    const auto& ks = t.columns[static_cast<std::size_t>(t.column("k"))];

    {
        const auto ys = t.indexed("y");
        const auto us = t.indexed("u");
        const auto thetas = t.indexed("theta");
        auto gather = [&](const std::vector<int>& idx) {
            std::vector<const std::vector<double>*> out;
            for (int i : idx) out.push_back(&t.columns[static_cast<std::size_t>(i)]);
            return out;
        };
        Svg svg(3);
        const std::pair<const char*, std::vector<int>> panels[] = {{"output y", ys}, {"control u", us}, {"theta", thetas}};
        int row = 0;
        for (const auto& [title, idx] : panels) {
            const Panel p = make_panel(title, row++, ks, gather(idx));
            svg.frame(p);
            for (std::size_t s = 0; s < idx.size(); ++s) {
                svg.polyline(p, ks, t.columns[static_cast<std::size_t>(idx[s])], kPalette[s % std::size(kPalette)]);
            }
        }
        const auto path = dir / "response.svg";
        svg.write(path);
        written.push_back(path);
    }

    const int a_cc = t.column("alpha_cc"), b_cc = t.column("beta_cc");
    const int a_tc = t.column("alpha_tc"), b_tc = t.column("beta_tc");
    if (a_cc >= 0 && b_cc >= 0 && a_tc >= 0 && b_tc >= 0) {
        const std::vector<std::pair<std::string, std::vector<double>>> traces = {
            {"circle: 1 - alpha", one_minus(t.columns[static_cast<std::size_t>(a_cc)])},
            {"circle: beta", t.columns[static_cast<std::size_t>(b_cc)]},
            {"tsypkin: 1 - alpha", one_minus(t.columns[static_cast<std::size_t>(a_tc)])},
            {"tsypkin: beta", t.columns[static_cast<std::size_t>(b_tc)]},
        };
        Svg svg(static_cast<int>(traces.size()));
        int row = 0;
        for (const auto& [title, values] : traces) {
            const Panel p = make_panel(title, row++, ks, {&values});
            svg.frame(p);
            svg.sign_markers(p, ks, values);
        }
        const auto path = dir / "certificates.svg";
        svg.write(path);
        written.push_back(path);
    }
    return written;
}

}  // namespace pcac
