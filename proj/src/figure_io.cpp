#include "ppto/figure_io.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "ppto/errors.hpp"
#include "ppto/format.hpp"

namespace ppto {

namespace {

constexpr std::array<const char*, 8> kPalette = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                                 "#9467bd", "#8c564b", "#e377c2", "#17becf"};

std::string csv_field(const std::string& text) {
    if (text.find_first_of(",\"\r\n") == std::string::npos)
        return text;
    std::string out = "\"";
    for (char c : text) {
        if (c == '"')
            out += '"';
        out += c;
    }
    return out + "\"";
}

std::string csv_number(double v) {
    return std::isnan(v) ? std::string() : format_number(v);
}

std::string xml_escape(const std::string& text) {
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

std::string fixed(double v, int digits = 2) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

void check_shape(const FigureDataset& ds) {
    if (ds.series.empty())
        throw ConfigError("dataset '" + ds.figure_id + "' has no series");
    if (ds.x.empty())
        throw ConfigError("dataset '" + ds.figure_id + "' has an empty x grid");
    for (const Series& s : ds.series) {
        if (s.y.size() != ds.x.size())
            throw ConfigError("series '" + s.label + "' does not match the x grid");
        if (!s.se.empty() && s.se.size() != ds.x.size())
            throw ConfigError("error bars of '" + s.label + "' do not match the x grid");
    }
}

// Round step to 1, 2 or 5 times a power of ten.
double nice_step(double span, int target_ticks) {
    const double raw = span / target_ticks;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    const double norm = raw / mag;
    const double step = norm < 1.5 ? 1.0 : norm < 3.5 ? 2.0 : norm < 7.5 ? 5.0 : 10.0;
    return step * mag;
}

std::string tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", std::abs(v) < 1e-12 ? 0.0 : v);
    return buf;
}

class Axis {
  public:
    Axis(double lo, double hi, bool log, double px_lo, double px_hi)
        : log_(log), px_lo_(px_lo), px_hi_(px_hi) {
        if (log_) {
            lo_ = std::log10(lo);
            hi_ = std::log10(hi);
        } else {
            lo_ = lo;
            hi_ = hi;
        }
        if (!(hi_ > lo_)) {
            lo_ -= 0.5;
            hi_ += 0.5;
        }
    }

    double map(double v) const {
        const double t = ((log_ ? std::log10(v) : v) - lo_) / (hi_ - lo_);
        return px_lo_ + t * (px_hi_ - px_lo_);
    }

    std::vector<double> ticks() const {
        std::vector<double> out;
        if (log_) {
            for (double e = std::ceil(lo_ - 1e-9); e <= hi_ + 1e-9; e += 1.0)
                out.push_back(std::pow(10.0, e));
            if (out.size() < 2) {
                out.clear();
                out.push_back(std::pow(10.0, lo_));
                out.push_back(std::pow(10.0, hi_));
            }
            return out;
        }
        const double step = nice_step(hi_ - lo_, 5);
        for (double v = std::ceil(lo_ / step - 1e-9) * step; v <= hi_ + 1e-9 * step; v += step)
            out.push_back(v);
        return out;
    }

  private:
    bool log_;
    double lo_ = 0.0;
    double hi_ = 1.0;
    double px_lo_;
    double px_hi_;
};

}  // namespace

std::string to_csv(const FigureDataset& ds) {
    check_shape(ds);
    std::string out = csv_field(ds.x_label);
    for (const Series& s : ds.series) {
        out += ',' + csv_field(s.label);
        if (!s.se.empty())
            out += ',' + csv_field(s.label + "_se");
    }
    out += "\r\n";
    for (std::size_t i = 0; i < ds.x.size(); ++i) {
        out += csv_number(ds.x[i]);
        for (const Series& s : ds.series) {
            out += ',' + csv_number(s.y[i]);
            if (!s.se.empty())
                out += ',' + csv_number(s.se[i]);
        }
        out += "\r\n";
    }
    return out;
}

CsvTable parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    bool quoted = false;
    bool field_started = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
            continue;
        }
        if (c == '"' && field.empty()) {
            quoted = true;
            field_started = true;
        } else if (c == ',') {
            record.push_back(std::move(field));
            field.clear();
            field_started = true;
        } else if (c == '\r' || c == '\n') {
            if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n')
                ++i;
            record.push_back(std::move(field));
            field.clear();
            records.push_back(std::move(record));
            record.clear();
            field_started = false;
        } else {
            field += c;
            field_started = true;
        }
    }
    if (quoted)
        throw ConfigError("unterminated quoted CSV field");
    if (field_started || !field.empty()) {
        record.push_back(std::move(field));
        records.push_back(std::move(record));
    }
    if (records.empty())
        throw ConfigError("empty CSV document");

    CsvTable table;
    table.header = std::move(records.front());
    for (std::size_t r = 1; r < records.size(); ++r) {
        if (records[r].size() != table.header.size())
            throw ConfigError("CSV row " + std::to_string(r) + " has " + std::to_string(records[r].size()) +
                              " fields, header has " + std::to_string(table.header.size()));
        std::vector<double> row;
        row.reserve(records[r].size());
        for (const std::string& cell : records[r])
            row.push_back(cell.empty() ? std::numeric_limits<double>::quiet_NaN()
                                       : parse_number(cell, "CSV cell in row " + std::to_string(r)));
        table.rows.push_back(std::move(row));
    }
    return table;
}

std::string metadata_hash(const FigureDataset& ds) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&](const std::string& s) {
        for (unsigned char c : s) {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
        h ^= 0xff;
        h *= 0x100000001b3ULL;
    };
    for (const auto& [key, value] : ds.metadata) {
        mix(key);
        mix(value);
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

RenderedFigure render_figure(const FigureDataset& ds, const PlotStyle& style) {
    check_shape(ds);
    const double left = 70.0, right = 170.0, top = 30.0, bottom = 50.0;
    const double plot_w = style.width - left - right;
    const double plot_h = style.height - top - bottom;

    double y_lo = std::numeric_limits<double>::infinity();
    double y_hi = -y_lo;
    std::size_t plotted = 0;
    for (const Series& s : ds.series) {
        if (!s.plotted)
            continue;
        ++plotted;
        for (std::size_t i = 0; i < s.y.size(); ++i) {
            if (!std::isfinite(s.y[i]))
                continue;
            const double e = (!s.se.empty() && std::isfinite(s.se[i])) ? s.se[i] : 0.0;
            y_lo = std::min(y_lo, s.y[i] - e);
            y_hi = std::max(y_hi, s.y[i] + e);
        }
    }
    if (plotted == 0)
        throw ConfigError("dataset '" + ds.figure_id + "' has no plotted series");
    if (!std::isfinite(y_lo)) {
        y_lo = 0.0;
        y_hi = 1.0;
    }
    y_lo = std::min(0.0, y_lo);
    y_hi += 0.05 * (y_hi - y_lo);

    const bool log_x = ds.log_x && ds.x.front() > 0.0;
    const Axis xa(ds.x.front(), ds.x.back(), log_x, left, left + plot_w);
    const Axis ya(y_lo, y_hi, false, top + plot_h, top);

    std::ostringstream svg;
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"no\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << style.width << "\" height=\""
        << style.height << "\" viewBox=\"0 0 " << style.width << ' ' << style.height << "\">\n";
    svg << "<title>" << xml_escape(ds.figure_id + ": " + ds.y_label + " vs " + ds.x_label) << "</title>\n";
    svg << "<metadata>\n";
    for (const auto& [key, value] : ds.metadata)
        svg << xml_escape(key) << '=' << xml_escape(value) << '\n';
    svg << "</metadata>\n";
    svg << "<rect x=\"0\" y=\"0\" width=\"" << style.width << "\" height=\"" << style.height
        << "\" fill=\"white\"/>\n";
    svg << "<rect x=\"" << fixed(left) << "\" y=\"" << fixed(top) << "\" width=\"" << fixed(plot_w)
        << "\" height=\"" << fixed(plot_h) << "\" fill=\"none\" stroke=\"black\"/>\n";

    svg << "<g font-family=\"sans-serif\" font-size=\"11\">\n";
    for (double t : xa.ticks()) {
        const double px = xa.map(t);
        svg << "<line x1=\"" << fixed(px) << "\" y1=\"" << fixed(top + plot_h) << "\" x2=\"" << fixed(px)
            << "\" y2=\"" << fixed(top + plot_h + 5) << "\" stroke=\"black\"/>"
            << "<text x=\"" << fixed(px) << "\" y=\"" << fixed(top + plot_h + 18)
            << "\" text-anchor=\"middle\">" << tick_label(t) << "</text>\n";
    }
    for (double t : ya.ticks()) {
        const double py = ya.map(t);
        svg << "<line x1=\"" << fixed(left - 5) << "\" y1=\"" << fixed(py) << "\" x2=\"" << fixed(left)
            << "\" y2=\"" << fixed(py) << "\" stroke=\"black\"/>"
            << "<text x=\"" << fixed(left - 8) << "\" y=\"" << fixed(py + 4) << "\" text-anchor=\"end\">"
            << tick_label(t) << "</text>\n";
    }
    svg << "<text x=\"" << fixed(left + plot_w / 2) << "\" y=\"" << fixed(style.height - 10.0)
        << "\" text-anchor=\"middle\">" << xml_escape(ds.x_label) << "</text>\n";
    svg << "<text x=\"15\" y=\"" << fixed(top + plot_h / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 15 "
        << fixed(top + plot_h / 2) << ")\">" << xml_escape(ds.y_label) << "</text>\n";
    svg << "</g>\n";

    std::size_t color = 0;
    double legend_y = top + 10.0;
    for (const Series& s : ds.series) {
        if (!s.plotted)
            continue;
        const char* stroke = kPalette[color++ % kPalette.size()];
        const bool has_bars = !s.se.empty();
        svg << "<g class=\"series\" stroke=\"" << stroke << "\" fill=\"none\">\n";
        if (has_bars) {
            for (std::size_t i = 0; i < s.y.size(); ++i) {
                if (!std::isfinite(s.y[i]))
                    continue;
                const double px = xa.map(ds.x[i]);
                svg << "<circle cx=\"" << fixed(px) << "\" cy=\"" << fixed(ya.map(s.y[i])) << "\" r=\"2.5\"/>\n";
                if (style.draw_error_bars && std::isfinite(s.se[i]))
                    svg << "<line class=\"errorbar\" x1=\"" << fixed(px) << "\" y1=\""
                        << fixed(ya.map(s.y[i] - s.se[i])) << "\" x2=\"" << fixed(px) << "\" y2=\""
                        << fixed(ya.map(s.y[i] + s.se[i])) << "\"/>\n";
            }
        } else {
            std::string points;
            auto flush = [&] {
                if (!points.empty())
                    svg << "<polyline stroke-width=\"1.5\" points=\"" << points << "\"/>\n";
                points.clear();
            };
            for (std::size_t i = 0; i < s.y.size(); ++i) {
                if (!std::isfinite(s.y[i])) {
                    flush();
                    continue;
                }
                if (!points.empty())
                    points += ' ';
                points += fixed(xa.map(ds.x[i])) + ',' + fixed(ya.map(s.y[i]));
            }
            flush();
        }
        svg << "</g>\n";
        const double lx = left + plot_w + 10.0;
        svg << "<line x1=\"" << fixed(lx) << "\" y1=\"" << fixed(legend_y) << "\" x2=\"" << fixed(lx + 20)
            << "\" y2=\"" << fixed(legend_y) << "\" stroke=\"" << stroke << "\" stroke-width=\"2\"/>"
            << "<text x=\"" << fixed(lx + 25) << "\" y=\"" << fixed(legend_y + 4)
            << "\" font-family=\"sans-serif\" font-size=\"10\">" << xml_escape(s.label) << "</text>\n";
        legend_y += 16.0;
    }
    svg << "</svg>\n";
    return RenderedFigure{svg.str(), to_csv(ds)};
}

WrittenFigure write_figure(const FigureDataset& ds, const std::filesystem::path& dir, const PlotStyle& style) {
    const RenderedFigure fig = render_figure(ds, style);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
        throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
    const std::string stem = ds.figure_id + "_" + metadata_hash(ds);
    WrittenFigure out{dir / (stem + ".csv"), dir / (stem + ".svg")};
    auto write = [](const std::filesystem::path& path, const std::string& content) {
        std::ofstream file(path, std::ios::binary | std::ios::trunc);
        if (!file)
            throw IoError("cannot open " + path.string() + " for writing");
        file << content;
        file.flush();
        if (!file)
            throw IoError("write failed for " + path.string());
    };
    write(out.csv_path, fig.csv);
    write(out.svg_path, fig.svg);
    return out;
}

}  // namespace ppto
