#include "apa/svg_report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "apa/runner.hpp"

namespace apa {

namespace {

constexpr double kPanelWidth = 520.0;
constexpr double kPanelHeight = 340.0;
constexpr double kMarginLeft = 70.0;
constexpr double kMarginRight = 20.0;
constexpr double kMarginTop = 36.0;
constexpr double kMarginBottom = 50.0;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string fmt(const char* pattern, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), pattern, v);
    return buf;
}

std::string coord(double v) { return fmt("%.2f", v); }

std::string escape(const std::string& s) {
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

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

double nice_step(double span, int target_ticks) {
    const double raw = span / target_ticks;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    const double f = raw / mag;
    const double nice = f < 1.5 ? 1.0 : f < 3.0 ? 2.0 : f < 7.0 ? 5.0 : 10.0;
    return nice * mag;
}

struct Axis {
    double lo = 0.0;
    double hi = 1.0;
    double step = 0.2;
};

Axis make_axis(double lo, double hi) {
    if (!(hi > lo)) {
        const double pad = lo == 0.0 ? 1.0 : std::abs(lo) * 0.1;
        lo -= pad;
        hi += pad;
    }
    Axis a;
    a.step = nice_step(hi - lo, 5);
    a.lo = std::floor(lo / a.step) * a.step;
    a.hi = std::ceil(hi / a.step) * a.step;
    return a;
}

struct PanelSpec {
    std::string title;
    std::string y_label;
    std::vector<std::pair<std::string, std::string>> columns;  // column, series suffix
};

PanelSpec panel_spec(Panel p) {
    switch (p) {
        case Panel::Logits:
            return {"Mean raw discriminator logit", "logit", {{"mean_real_logit", "real"}, {"mean_fake_logit", "fake"}}};
        case Panel::Signs:
            return {"Mean logit sign", "sign", {{"mean_sign_real", "real"}, {"mean_sign_fake", "fake"}}};
        case Panel::Frechet:
            return {"Frechet distance", "frechet", {{"frechet", ""}}};
        case Panel::P:
            return {"Deception probability", "p", {{"p", ""}}};
    }
    throw std::logic_error("unknown panel");
}

void render_panel(std::ostringstream& svg, double x0, const PanelSpec& spec, const std::vector<Series>& series) {
    double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
    for (const auto& s : series) {
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            xmin = std::min(xmin, s.x[i]);
            xmax = std::max(xmax, s.x[i]);
            ymin = std::min(ymin, s.y[i]);
            ymax = std::max(ymax, s.y[i]);
        }
    }
    if (!std::isfinite(xmin)) {
        xmin = 0.0;
        xmax = 1.0;
        ymin = 0.0;
        ymax = 1.0;
    }
    const Axis ax = make_axis(xmin, xmax);
    const Axis ay = make_axis(ymin, ymax);

    const double left = x0 + kMarginLeft;
    const double right = x0 + kPanelWidth - kMarginRight;
    const double top = kMarginTop;
    const double bottom = kPanelHeight - kMarginBottom;
    auto px = [&](double x) { return left + (x - ax.lo) / (ax.hi - ax.lo) * (right - left); };
    auto py = [&](double y) { return bottom - (y - ay.lo) / (ay.hi - ay.lo) * (bottom - top); };

    svg << "<g>\n";
    svg << "<text x=\"" << coord((left + right) / 2) << "\" y=\"22.00\" text-anchor=\"middle\" font-size=\"14\">"
        << escape(spec.title) << "</text>\n";
    svg << "<rect x=\"" << coord(left) << "\" y=\"" << coord(top) << "\" width=\"" << coord(right - left)
        << "\" height=\"" << coord(bottom - top) << "\" fill=\"none\" stroke=\"#000000\"/>\n";

    const int nx = static_cast<int>(std::llround((ax.hi - ax.lo) / ax.step));
    for (int i = 0; i <= nx; ++i) {
        const double v = ax.lo + i * ax.step;
        svg << "<line x1=\"" << coord(px(v)) << "\" y1=\"" << coord(bottom) << "\" x2=\"" << coord(px(v))
            << "\" y2=\"" << coord(bottom + 4) << "\" stroke=\"#000000\"/>\n";
        svg << "<text x=\"" << coord(px(v)) << "\" y=\"" << coord(bottom + 16)
            << "\" text-anchor=\"middle\" font-size=\"10\">" << fmt("%g", v) << "</text>\n";
    }
    const int ny = static_cast<int>(std::llround((ay.hi - ay.lo) / ay.step));
    for (int i = 0; i <= ny; ++i) {
        const double v = ay.lo + i * ay.step;
        const double clean = std::abs(v) < ay.step * 1e-9 ? 0.0 : v;
        svg << "<line x1=\"" << coord(left) << "\" y1=\"" << coord(py(v)) << "\" x2=\"" << coord(right)
            << "\" y2=\"" << coord(py(v)) << "\" stroke=\"#dddddd\"/>\n";
        svg << "<text x=\"" << coord(left - 6) << "\" y=\"" << coord(py(v) + 3)
            << "\" text-anchor=\"end\" font-size=\"10\">" << fmt("%g", clean) << "</text>\n";
    }
    svg << "<text x=\"" << coord((left + right) / 2) << "\" y=\"" << coord(kPanelHeight - 12)
        << "\" text-anchor=\"middle\" font-size=\"12\">step</text>\n";
    svg << "<text x=\"" << coord(x0 + 16) << "\" y=\"" << coord((top + bottom) / 2)
        << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 " << coord(x0 + 16) << " "
        << coord((top + bottom) / 2) << ")\">" << escape(spec.y_label) << "</text>\n";

    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        const char* color = kPalette[k % std::size(kPalette)];
        if (!s.x.empty()) {
            svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.2\" points=\"";
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                svg << (i ? " " : "") << coord(px(s.x[i])) << "," << coord(py(s.y[i]));
            }
            svg << "\"/>\n";
        }
        const double ly = top + 14 + 14 * static_cast<double>(k);
        svg << "<line x1=\"" << coord(right - 150) << "\" y1=\"" << coord(ly - 4) << "\" x2=\"" << coord(right - 132)
            << "\" y2=\"" << coord(ly - 4) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        svg << "<text x=\"" << coord(right - 128) << "\" y=\"" << coord(ly) << "\" font-size=\"10\">"
            << escape(s.label) << "</text>\n";
    }
    svg << "</g>\n";
}

}  // namespace

std::string to_string(Panel panel) {
    switch (panel) {
        case Panel::Logits: return "logits";
        case Panel::Signs: return "signs";
        case Panel::Frechet: return "frechet";
        case Panel::P: return "p";
    }
    return "?";
}

Panel panel_from_string(const std::string& name) {
    for (Panel p : {Panel::Logits, Panel::Signs, Panel::Frechet, Panel::P}) {
        if (to_string(p) == name) return p;
    }
    throw std::invalid_argument("unknown panel '" + name + "' (expected logits, signs, frechet or p)");
}

std::size_t MetricsTable::rows() const { return values.empty() ? 0 : values.begin()->second.size(); }

const std::vector<std::optional<double>>& MetricsTable::column(const std::string& name) const {
    auto it = values.find(name);
    if (it == values.end()) throw std::runtime_error(label + ": missing column '" + name + "'");
    return it->second;
}

MetricsTable read_metrics_csv(const std::filesystem::path& path, const std::string& label) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    MetricsTable t;
    t.label = label;
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path.string() + ": empty file");
    t.columns = split_csv(line);
    for (const auto& required : metric_columns()) {
        if (std::find(t.columns.begin(), t.columns.end(), required) == t.columns.end()) {
            throw std::runtime_error(path.string() + ": missing column '" + required + "'");
        }
    }
    for (const auto& c : t.columns) t.values[c];
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto cells = split_csv(line);
        if (cells.size() != t.columns.size()) {
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": expected " +
                                     std::to_string(t.columns.size()) + " fields");
        }
        for (std::size_t i = 0; i < cells.size(); ++i) {
            auto& col = t.values[t.columns[i]];
            if (cells[i].empty()) {
                col.push_back(std::nullopt);
            } else {
                col.push_back(std::stod(cells[i]));
            }
        }
    }
    return t;
}

std::vector<MetricsTable> load_runs(const std::vector<std::filesystem::path>& runs) {
    std::vector<MetricsTable> tables;
    for (const auto& r : runs) {
        const bool is_dir = std::filesystem::is_directory(r);
        const auto csv = is_dir ? r / "metrics.csv" : r;
        auto dir = is_dir ? r : r.parent_path();
        std::string label = dir.filename().string();
        if (label.empty() || label == ".") label = std::filesystem::absolute(dir).lexically_normal().filename().string();
        tables.push_back(read_metrics_csv(csv, label));
    }
    return tables;
}

Series downsample(const Series& s, std::size_t max_points) {
    if (max_points == 0 || s.x.size() <= max_points) return s;
    Series out;
    out.label = s.label;
    const std::size_t n = s.x.size();
    for (std::size_t b = 0; b < max_points; ++b) {
        const std::size_t lo = b * n / max_points;
        const std::size_t hi = (b + 1) * n / max_points;
        double sx = 0.0, sy = 0.0;
        for (std::size_t i = lo; i < hi; ++i) {
            sx += s.x[i];
            sy += s.y[i];
        }
        const double m = static_cast<double>(hi - lo);
        out.x.push_back(sx / m);
        out.y.push_back(sy / m);
    }
    return out;
}

std::string render_svg(const std::vector<MetricsTable>& runs, const std::vector<Panel>& panels,
                       std::size_t max_points) {
    if (panels.empty()) throw std::invalid_argument("at least one panel is required");
    std::ostringstream svg;
    const double width = kPanelWidth * static_cast<double>(panels.size());
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << coord(width) << "\" height=\""
        << coord(kPanelHeight) << "\" viewBox=\"0 0 " << coord(width) << " " << coord(kPanelHeight)
        << "\" font-family=\"sans-serif\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
    for (std::size_t p = 0; p < panels.size(); ++p) {
        const PanelSpec spec = panel_spec(panels[p]);
        std::vector<Series> series;
        for (const auto& run : runs) {
            const auto& steps = run.column("step");
            for (const auto& [column, suffix] : spec.columns) {
                const auto& ys = run.column(column);
                Series s;
                s.label = suffix.empty() ? run.label : run.label + " " + suffix;
                for (std::size_t i = 0; i < ys.size(); ++i) {
                    if (ys[i] && steps[i] && std::isfinite(*ys[i])) {
                        s.x.push_back(*steps[i]);
                        s.y.push_back(*ys[i]);
                    }
                }
                series.push_back(downsample(s, max_points));
            }
        }
        render_panel(svg, kPanelWidth * static_cast<double>(p), spec, series);
    }
    svg << "</svg>\n";
    return svg.str();
}

void write_report(const std::vector<std::filesystem::path>& runs, const std::vector<Panel>& panels,
                  const std::filesystem::path& out) {
    const std::string svg = render_svg(load_runs(runs), panels);
    if (out.has_parent_path()) std::filesystem::create_directories(out.parent_path());
    std::ofstream f(out, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + out.string());
    f << svg;
}

}  // namespace apa
