#include "beamloc/cli/plots.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace beamloc::cli {

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 400.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 20.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;

constexpr const char* kBarColor = "#4c72b0";
constexpr const char* kHighlightColor = "#c44e52";
constexpr const char* kReferenceColor = "#55a868";
constexpr const char* kTruthColor = "#222222";

std::string escape(const std::string& text) {
    std::string out;
    for (char c : text) {
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

class Canvas {
public:
    explicit Canvas(const std::string& title) {
        body_ += fmt::format(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0f}\" height=\"{:.0f}\" viewBox=\"0 0 {:.0f} {:.0f}\" "
            "font-family=\"sans-serif\" font-size=\"12\">\n",
            kWidth, kHeight, kWidth, kHeight);
        body_ += fmt::format("<rect x=\"0\" y=\"0\" width=\"{:.0f}\" height=\"{:.0f}\" fill=\"white\"/>\n", kWidth, kHeight);
        text(kWidth / 2.0, 22.0, title, "middle", 15);
    }

    static double plot_left() { return kLeft; }
    static double plot_right() { return kWidth - kRight; }
    static double plot_top() { return kTop; }
    static double plot_bottom() { return kHeight - kBottom; }

    void rect(double x, double y, double w, double h, const char* fill) {
        body_ += fmt::format("<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"{}\"/>\n", x, y,
                             w, std::max(h, 0.0), fill);
    }

    void line(double x1, double y1, double x2, double y2, const char* stroke, double width = 1.0,
              const char* dash = nullptr) {
        body_ += fmt::format("<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"{}\" "
                             "stroke-width=\"{:.1f}\"{}/>\n",
                             x1, y1, x2, y2, stroke, width,
                             dash ? fmt::format(" stroke-dasharray=\"{}\"", dash) : std::string());
    }

    void polyline(const std::vector<std::pair<double, double>>& points, const char* stroke) {
        std::string coords;
        for (const auto& [x, y] : points) coords += fmt::format("{:.2f},{:.2f} ", x, y);
        if (!coords.empty()) coords.pop_back();
        body_ += fmt::format("<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"/>\n", coords,
                             stroke);
    }

    void circle(double x, double y, double r, const char* fill) {
        body_ += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"{:.1f}\" fill=\"{}\"/>\n", x, y, r, fill);
    }

    void text(double x, double y, const std::string& s, const char* anchor = "middle", int size = 12,
              bool vertical = false) {
        const std::string rotate = vertical ? fmt::format(" transform=\"rotate(-90 {:.2f} {:.2f})\"", x, y) : "";
        body_ += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"{}\" font-size=\"{}\"{}>{}</text>\n", x, y,
                             anchor, size, rotate, escape(s));
    }

    void axes(const std::string& xlabel, const std::string& ylabel) {
        line(plot_left(), plot_bottom(), plot_right(), plot_bottom(), "black");
        line(plot_left(), plot_top(), plot_left(), plot_bottom(), "black");
        text((plot_left() + plot_right()) / 2.0, kHeight - 12.0, xlabel);
        text(18.0, (plot_top() + plot_bottom()) / 2.0, ylabel, "middle", 12, true);
    }

    void legend(const std::vector<std::pair<std::string, const char*>>& entries) {
        double y = plot_top() + 8.0;
        for (const auto& [label, color] : entries) {
            rect(plot_right() - 150.0, y - 8.0, 10.0, 10.0, color);
            text(plot_right() - 134.0, y + 1.0, label, "start", 11);
            y += 16.0;
        }
    }

    std::string finish() {
        body_ += "</svg>\n";
        return std::move(body_);
    }

private:
    std::string body_;
};

// Linear y ticks at a 1-2-5 spacing covering [0, top].
std::vector<double> linear_ticks(double top) {
    if (!(top > 0.0)) return {0.0};
    const double raw = top / 5.0;
    const double magnitude = std::pow(10.0, std::floor(std::log10(raw)));
    double step = magnitude;
    for (double f : {1.0, 2.0, 5.0, 10.0}) {
        if (f * magnitude >= raw) {
            step = f * magnitude;
            break;
        }
    }
    std::vector<double> ticks;
    for (int k = 0; k * step <= top * (1.0 + 1e-12); ++k) ticks.push_back(k * step);
    return ticks;
}

std::string tick_label(double v) { return fmt::format("{:g}", v); }

struct ElementBars {
    double x0 = 0.0;
    double pitch = 0.0;
    double bar = 0.0;

    explicit ElementBars(Eigen::Index n) {
        x0 = Canvas::plot_left();
        pitch = (Canvas::plot_right() - Canvas::plot_left()) / static_cast<double>(std::max<Eigen::Index>(n, 1));
        bar = 0.7 * pitch;
    }
    double left(Eigen::Index i) const { return x0 + pitch * static_cast<double>(i) + 0.15 * pitch; }
    double centre(Eigen::Index i) const { return x0 + pitch * (static_cast<double>(i) + 0.5); }
};

void element_axis(Canvas& c, const ElementBars& bars, Eigen::Index n) {
    const Eigen::Index every = n > 30 ? 5 : 1;
    for (Eigen::Index i = 0; i < n; ++i) {
        if ((i + 1) % every != 0 && i != 0) continue;
        c.text(bars.centre(i), Canvas::plot_bottom() + 16.0, std::to_string(i + 1));
    }
}

}  // namespace

std::string belief_chart(const FusionTable& fusion, const std::string& title) {
    Canvas c(title);
    const Eigen::Index n = fusion.belief.size();
    double top = std::max(fusion.theta_mass, n > 0 ? fusion.belief.maxCoeff() : 0.0);
    top = top > 0.0 ? 1.1 * top : 1.0;
    const auto ticks = linear_ticks(top);
    top = std::max(top, ticks.back());
    const double span = Canvas::plot_bottom() - Canvas::plot_top();
    auto y_of = [&](double v) { return Canvas::plot_bottom() - span * v / top; };

    for (double t : ticks) {
        c.line(Canvas::plot_left(), y_of(t), Canvas::plot_right(), y_of(t), "#dddddd");
        c.text(Canvas::plot_left() - 6.0, y_of(t) + 4.0, tick_label(t), "end");
    }
    ElementBars bars(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const bool candidate =
            std::find(fusion.candidates.begin(), fusion.candidates.end(), static_cast<int>(i)) != fusion.candidates.end();
        c.rect(bars.left(i), y_of(fusion.belief[i]), bars.bar, Canvas::plot_bottom() - y_of(fusion.belief[i]),
               candidate ? kHighlightColor : kBarColor);
    }
    c.line(Canvas::plot_left(), y_of(fusion.theta_mass), Canvas::plot_right(), y_of(fusion.theta_mass), kReferenceColor,
           1.5, "6,4");
    element_axis(c, bars, n);
    c.axes("element", "fused belief Bel({i})");
    c.legend({{"belief", kBarColor}, {"candidate", kHighlightColor}, {"m(Theta)", kReferenceColor}});
    return c.finish();
}

std::string convergence_chart(const TraceTable& trace, const std::string& title) {
    Canvas c(title);
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (const TraceRow& r : trace.rows) {
        if (r.objective > 0.0 && std::isfinite(r.objective)) {
            lo = std::min(lo, r.objective);
            hi = std::max(hi, r.objective);
        }
    }
    if (!(hi > 0.0)) {
        lo = 1e-3;
        hi = 1.0;
    }
    const int dec_lo = static_cast<int>(std::floor(std::log10(lo)));
    int dec_hi = static_cast<int>(std::ceil(std::log10(hi)));
    if (dec_hi == dec_lo) ++dec_hi;
    const double span = Canvas::plot_bottom() - Canvas::plot_top();
    auto y_of = [&](double v) {
        const double l = std::log10(std::max(v, std::pow(10.0, dec_lo)));
        return Canvas::plot_bottom() - span * (l - dec_lo) / (dec_hi - dec_lo);
    };
    const std::size_t n = trace.rows.size();
    const double width = Canvas::plot_right() - Canvas::plot_left();
    auto x_of = [&](std::size_t k) {
        return Canvas::plot_left() + (n > 1 ? width * static_cast<double>(k) / static_cast<double>(n - 1) : 0.0);
    };

    const int stride = std::max(1, (dec_hi - dec_lo) / 10 + 1);
    for (int d = dec_lo; d <= dec_hi; d += stride) {
        const double y = y_of(std::pow(10.0, d));
        c.line(Canvas::plot_left(), y, Canvas::plot_right(), y, "#dddddd");
        c.text(Canvas::plot_left() - 6.0, y + 4.0, fmt::format("1e{}", d), "end");
    }
    const std::size_t x_every = std::max<std::size_t>(1, (n + 9) / 10);
    for (std::size_t k = 0; k < n; k += x_every) c.text(x_of(k), Canvas::plot_bottom() + 16.0, std::to_string(k));

    for (const StageRow& e : trace.stage_events) {
        if (e.record < 0 || static_cast<std::size_t>(e.record) >= n) continue;
        const double x = x_of(static_cast<std::size_t>(e.record));
        c.line(x, Canvas::plot_top(), x, Canvas::plot_bottom(), kReferenceColor, 1.0, "4,3");
    }
    std::vector<std::pair<double, double>> points;
    for (std::size_t k = 0; k < n; ++k) points.emplace_back(x_of(k), y_of(trace.rows[k].objective));
    c.polyline(points, kBarColor);
    for (std::size_t k = 0; k < n; ++k) {
        c.circle(points[k].first, points[k].second, 2.5, trace.rows[k].accepted ? kBarColor : kHighlightColor);
    }
    c.axes("trace record", "objective J (log scale)");
    c.legend({{"objective", kBarColor}, {"stage transfer", kReferenceColor}});
    return c.finish();
}

std::string modulus_chart(const ProfileTable& profile, const std::string& title) {
    Canvas c(title);
    const Eigen::Index n = profile.identified_gpa.size();
    double top = 0.0;
    for (const Eigen::VectorXd* v : {&profile.identified_gpa, &profile.healthy_gpa, &profile.true_gpa}) {
        if (v->size() > 0) top = std::max(top, v->maxCoeff());
    }
    top = top > 0.0 ? 1.1 * top : 1.0;
    const auto ticks = linear_ticks(top);
    top = std::max(top, ticks.back());
    const double span = Canvas::plot_bottom() - Canvas::plot_top();
    auto y_of = [&](double v) { return Canvas::plot_bottom() - span * v / top; };

    for (double t : ticks) {
        c.line(Canvas::plot_left(), y_of(t), Canvas::plot_right(), y_of(t), "#dddddd");
        c.text(Canvas::plot_left() - 6.0, y_of(t) + 4.0, tick_label(t), "end");
    }
    ElementBars bars(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        c.rect(bars.left(i), y_of(profile.identified_gpa[i]), bars.bar,
               Canvas::plot_bottom() - y_of(profile.identified_gpa[i]), kBarColor);
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        const double l = Canvas::plot_left() + bars.pitch * static_cast<double>(i);
        c.line(l, y_of(profile.healthy_gpa[i]), l + bars.pitch, y_of(profile.healthy_gpa[i]), kReferenceColor, 1.5, "6,4");
        c.line(bars.left(i), y_of(profile.true_gpa[i]), bars.left(i) + bars.bar, y_of(profile.true_gpa[i]), kTruthColor,
               2.0);
    }
    element_axis(c, bars, n);
    c.axes("element", "Young's modulus (GPa)");
    c.legend({{"identified", kBarColor}, {"healthy", kReferenceColor}, {"true", kTruthColor}});
    return c.finish();
}

}  // namespace beamloc::cli
