#include "ghostflow/plot.hpp"

#include "ghostflow/errors.hpp"
#include "ghostflow/export.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>

namespace ghostflow {

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

std::string fmt_tick(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

struct Box {
    double x0 = 0, y0 = 0, x1 = 1, y1 = 1;
    double width() const { return x1 - x0; }
    double height() const { return y1 - y0; }
};

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    void add(double v) {
        if (std::isfinite(v)) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    void pad() {
        if (!(lo <= hi)) {
            lo = -1.0;
            hi = 1.0;
        }
        if (hi - lo < 1e-12) {
            lo -= 1.0;
            hi += 1.0;
        }
        const double m = 0.05 * (hi - lo);
        lo -= m;
        hi += m;
    }
};

// Keeps polylines below ~1200 vertices; the stride is a pure function of the
// series length, so output stays deterministic.
std::size_t plot_stride(std::size_t n) { return n <= 1200 ? 1 : (n + 1199) / 1200; }

class SvgWriter {
public:
    explicit SvgWriter(std::string title) : title_(std::move(title)) {}

    void add_axes(const Box& px, const Range& rx, const Range& ry, const std::string& caption) {
        body_ += "<rect class=\"frame\" x=\"" + fmt(px.x0) + "\" y=\"" + fmt(px.y0) +
                 "\" width=\"" + fmt(px.width()) + "\" height=\"" + fmt(px.height()) + "\"/>\n";
        for (int i = 0; i <= 4; ++i) {
            const double fx = i / 4.0;
            const double x = px.x0 + fx * px.width();
            const double vx = rx.lo + fx * (rx.hi - rx.lo);
            body_ += "<line class=\"tick\" x1=\"" + fmt(x) + "\" y1=\"" + fmt(px.y1) +
                     "\" x2=\"" + fmt(x) + "\" y2=\"" + fmt(px.y1 + 4) + "\"/>\n";
            body_ += "<text class=\"lbl\" x=\"" + fmt(x) + "\" y=\"" + fmt(px.y1 + 14) +
                     "\" text-anchor=\"middle\">" + fmt_tick(vx) + "</text>\n";
            const double y = px.y1 - fx * px.height();
            const double vy = ry.lo + fx * (ry.hi - ry.lo);
            body_ += "<line class=\"tick\" x1=\"" + fmt(px.x0 - 4) + "\" y1=\"" + fmt(y) +
                     "\" x2=\"" + fmt(px.x0) + "\" y2=\"" + fmt(y) + "\"/>\n";
            body_ += "<text class=\"lbl\" x=\"" + fmt(px.x0 - 6) + "\" y=\"" + fmt(y + 3) +
                     "\" text-anchor=\"end\">" + fmt_tick(vy) + "</text>\n";
        }
        body_ += "<text class=\"caption\" x=\"" + fmt(px.x0 + 0.5 * px.width()) + "\" y=\"" +
                 fmt(px.y0 - 6) + "\" text-anchor=\"middle\">" + caption + "</text>\n";
    }

    void add_polyline(const Box& px, const Range& rx, const Range& ry,
                      const std::vector<Vec2>& pts, const std::string& css) {
        body_ += "<polyline class=\"" + css + "\" points=\"";
        const std::size_t stride = plot_stride(pts.size());
        for (std::size_t i = 0; i < pts.size(); i += stride) {
            append_point(px, rx, ry, pts[i].x(), pts[i].y());
        }
        if (!pts.empty() && (pts.size() - 1) % stride != 0) {
            append_point(px, rx, ry, pts.back().x(), pts.back().y());
        }
        body_ += "\"/>\n";
    }

    void add_path(const Box& px, const Range& rx, const Range& ry,
                  const std::vector<double>& xs, const std::vector<double>& ys,
                  const std::string& css) {
        const std::size_t n = std::min(xs.size(), ys.size());
        if (n == 0) return;
        body_ += "<path class=\"" + css + "\" d=\"";
        const std::size_t stride = plot_stride(n);
        bool first = true;
        for (std::size_t i = 0; i < n; i += stride) {
            body_ += first ? "M" : "L";
            first = false;
            body_ += fmt(map_x(px, rx, xs[i])) + " " + fmt(map_y(px, ry, ys[i]));
        }
        body_ += "\"/>\n";
    }

    void add_legend(double x, double y, const std::vector<std::pair<std::string, std::string>>&
                                          entries) {
        double cx = x;
        for (const auto& [label, css] : entries) {
            body_ += "<line class=\"" + css + "\" x1=\"" + fmt(cx) + "\" y1=\"" + fmt(y) +
                     "\" x2=\"" + fmt(cx + 22) + "\" y2=\"" + fmt(y) + "\"/>\n";
            body_ += "<text class=\"lbl\" x=\"" + fmt(cx + 26) + "\" y=\"" + fmt(y + 3) +
                     "\">" + label + "</text>\n";
            cx += 34 + 7.0 * static_cast<double>(label.size());
        }
    }

    std::string finish() const {
        std::string out;
        out +=
            "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"1000\" "
            "height=\"700\" viewBox=\"0 0 1000 700\">\n";
        out += "<desc>" + title_ +
               "; trajectory panel projection: position plane (x, y)</desc>\n";
        out +=
            "<style>\n"
            ".frame{fill:none;stroke:#444;stroke-width:1}\n"
            ".tick{stroke:#444;stroke-width:1}\n"
            ".lbl{font:10px sans-serif;fill:#222}\n"
            ".caption{font:12px sans-serif;fill:#000}\n"
            ".title{font:14px sans-serif;fill:#000}\n"
            "polyline{fill:none}\n"
            ".classical{stroke:#3465a4;stroke-width:0.8;stroke-dasharray:4 3;fill:none}\n"
            ".bohmian{stroke:#cc0000;stroke-width:0.9;fill:none}\n"
            ".bohmian-alt{stroke:#204a87;stroke-width:0.9;fill:none}\n"
            ".centre{stroke:#000000;stroke-width:1.4;fill:none}\n"
            ".curve-a{stroke:#000000;stroke-width:1.1;fill:none}\n"
            ".curve-b{stroke:#bb00bb;stroke-width:1.1;fill:none}\n"
            ".curve-c{stroke:#1a7a1a;stroke-width:1.1;fill:none}\n"
            "</style>\n";
        out += body_;
        out += "</svg>\n";
        return out;
    }

    void add_title(const std::string& t) {
        body_ += "<text class=\"title\" x=\"12\" y=\"20\">" + t + "</text>\n";
    }

private:
    double map_x(const Box& px, const Range& r, double v) const {
        return px.x0 + (v - r.lo) / (r.hi - r.lo) * px.width();
    }
    double map_y(const Box& px, const Range& r, double v) const {
        return px.y1 - (v - r.lo) / (r.hi - r.lo) * px.height();
    }
    void append_point(const Box& px, const Range& rx, const Range& ry, double x, double y) {
        body_ += fmt(map_x(px, rx, x)) + "," + fmt(map_y(px, ry, y)) + " ";
    }

    std::string title_;
    std::string body_;
};

}  // namespace

PlotBundle make_plot_bundle(const SeriesBundle& bundle, const std::string& title) {
    PlotBundle out;
    out.title = title;
    const std::size_t nt = bundle.centre.valid_count();
    out.times.reserve(nt);
    for (std::size_t i = 0; i < nt; ++i) out.times.push_back(bundle.packet.state(i).t);

    PlotFamily fam_cl{"classical", "classical", {}};
    for (const auto& s : bundle.classical) fam_cl.members.push_back(s.positions);
    PlotFamily fam_b{"bohmian", "bohmian", {}};
    for (const auto& s : bundle.bohmian) fam_b.members.push_back(s.positions);
    PlotFamily fam_c{"centre", "centre", {bundle.centre.positions}};
    out.families = {fam_cl, fam_b, fam_c};

    PlotPanel pb{"mean |u|, mean |delta|", {}};
    pb.curves.push_back({"mean |u|", "curve-a", bundle.diag.mean_u_norm});
    pb.curves.push_back({"mean |delta|", "curve-b", bundle.diag.mean_delta_norm});

    PlotPanel pc{"det Lambda(t)", {}};
    PlotCurve det_l{"det Lambda", "curve-c", {}};
    for (std::size_t i = 0; i < nt; ++i) {
        det_l.values.push_back(
            curvature_mismatch(bundle.packet.state(i).A, bundle.packet.model()).determinant());
    }
    pc.curves.push_back(det_l);

    PlotPanel pd{"Q_B(t) (ensemble mean)", {}};
    PlotCurve qb{"Q_B", "curve-a", {}};
    const std::size_t cv = bundle.diag.common_valid;
    for (std::size_t i = 0; i < cv; ++i) {
        double acc = 0.0;
        for (const auto& m : bundle.diag.members) acc += m[i].q_b;
        qb.values.push_back(acc / static_cast<double>(bundle.diag.members.size()));
    }
    pd.curves.push_back(qb);

    out.panels = {pb, pc, pd};
    return out;
}

PlotBundle make_plot_bundle(const BihamComparison& cmp, const std::string& title) {
    PlotBundle out;
    out.title = title;
    const std::size_t nt = cmp.common_valid;
    for (std::size_t i = 0; i < nt; ++i) out.times.push_back(cmp.packet_g.state(i).t);

    PlotFamily fam_cl{"classical (shared)", "classical", {}};
    for (const auto& s : cmp.classical) fam_cl.members.push_back(s.positions);
    PlotFamily fam_g{"bohmian H_g", "bohmian", {}};
    for (const auto& s : cmp.rep_g) fam_g.members.push_back(s.bohmian.positions);
    PlotFamily fam_2{"bohmian H_2", "bohmian-alt", {}};
    for (const auto& s : cmp.rep_2) fam_2.members.push_back(s.bohmian.positions);
    PlotFamily fam_c{"centres", "centre", {}};
    fam_c.members.push_back(centre_series(cmp.packet_g).positions);
    fam_c.members.push_back(centre_series(cmp.packet_2).positions);
    out.families = {fam_cl, fam_g, fam_2, fam_c};

    auto mean_norm = [&](const std::vector<BihamMemberSeries>& reps) {
        std::vector<double> v(nt, 0.0);
        for (std::size_t i = 0; i < nt; ++i) {
            double acc = 0.0;
            for (const auto& r : reps) acc += r.delta[i].norm();
            v[i] = acc / static_cast<double>(reps.size());
        }
        return v;
    };
    PlotPanel pb{"mean |delta_g|, mean |delta_2|", {}};
    pb.curves.push_back({"|delta_g|", "curve-b", mean_norm(cmp.rep_g)});
    pb.curves.push_back({"|delta_2|", "curve-c", mean_norm(cmp.rep_2)});

    PlotPanel pc{"mean gap |q_Bg - q_B2|", {}};
    PlotCurve gap{"gap", "curve-a", std::vector<double>(nt, 0.0)};
    for (std::size_t i = 0; i < nt; ++i) {
        double acc = 0.0;
        for (const auto& g : cmp.gap) acc += g[i];
        gap.values[i] = acc / static_cast<double>(cmp.gap.size());
    }
    pc.curves.push_back(gap);

    auto mean_qb = [&](const std::vector<BihamMemberSeries>& reps) {
        std::vector<double> v(nt, 0.0);
        for (std::size_t i = 0; i < nt; ++i) {
            double acc = 0.0;
            for (const auto& r : reps) acc += r.q_b[i];
            v[i] = acc / static_cast<double>(reps.size());
        }
        return v;
    };
    PlotPanel pd{"Q_B along trajectories", {}};
    pd.curves.push_back({"Q_Bg", "curve-b", mean_qb(cmp.rep_g)});
    pd.curves.push_back({"Q_B2", "curve-c", mean_qb(cmp.rep_2)});

    out.panels = {pb, pc, pd};
    return out;
}

PlotBundle plot_bundle_from_json(const nlohmann::json& doc) {
    if (!doc.contains("records")) throw IoError("plot: JSON document has no 'records'");
    std::map<int, std::vector<Vec2>> bohm_q, bohm_delta;
    std::map<int, std::vector<double>> bohm_qb;
    std::vector<Vec2> centre_q;
    std::vector<double> times, det_lambda;
    for (const auto& r : doc.at("records")) {
        const std::string kind = r.at("kind");
        if (kind == "bohmian") {
            const int id = r.at("member_id");
            bohm_q[id].emplace_back(r.at("qx").get<double>(), r.at("qy").get<double>());
            bohm_delta[id].emplace_back(r.at("dx").get<double>(), r.at("dy").get<double>());
            bohm_qb[id].push_back(r.at("q_b").get<double>());
        } else if (kind == "centre") {
            times.push_back(r.at("t").get<double>());
            centre_q.emplace_back(r.at("qx").get<double>(), r.at("qy").get<double>());
            if (r.contains("det_lambda")) det_lambda.push_back(r.at("det_lambda").get<double>());
        }
    }

    PlotBundle out;
    out.title = doc.contains("metadata") && doc.at("metadata").contains("scenario_name")
                    ? doc.at("metadata").at("scenario_name").get<std::string>()
                    : std::string("series");
    out.times = times;

    PlotFamily fam_cl{"classical", "classical", {}};
    PlotFamily fam_b{"bohmian", "bohmian", {}};
    std::size_t nt_common = centre_q.size();
    for (const auto& [id, qs] : bohm_q) {
        fam_b.members.push_back(qs);
        std::vector<Vec2> cl(qs.size());
        for (std::size_t i = 0; i < qs.size(); ++i) cl[i] = qs[i] - bohm_delta.at(id)[i];
        fam_cl.members.push_back(std::move(cl));
        nt_common = std::min(nt_common, qs.size());
    }
    PlotFamily fam_c{"centre", "centre", {centre_q}};
    out.families = {fam_cl, fam_b, fam_c};

    const std::size_t m = bohm_q.size();
    PlotPanel pb{"mean |u|, mean |delta|", {}};
    if (m > 0) {
        std::vector<double> mu(nt_common, 0.0), md(nt_common, 0.0);
        for (std::size_t i = 0; i < nt_common; ++i) {
            double au = 0.0, ad = 0.0;
            for (const auto& [id, qs] : bohm_q) {
                au += (qs[i] - centre_q[i]).norm();
                ad += bohm_delta.at(id)[i].norm();
            }
            mu[i] = au / static_cast<double>(m);
            md[i] = ad / static_cast<double>(m);
        }
        pb.curves.push_back({"mean |u|", "curve-a", std::move(mu)});
        pb.curves.push_back({"mean |delta|", "curve-b", std::move(md)});
    }

    PlotPanel pc{"det Lambda(t)", {}};
    pc.curves.push_back({"det Lambda", "curve-c", det_lambda});

    PlotPanel pd{"Q_B(t) (ensemble mean)", {}};
    if (m > 0) {
        std::vector<double> qb(nt_common, 0.0);
        for (std::size_t i = 0; i < nt_common; ++i) {
            double acc = 0.0;
            for (const auto& [id, v] : bohm_qb) acc += v[i];
            qb[i] = acc / static_cast<double>(m);
        }
        pd.curves.push_back({"Q_B", "curve-a", std::move(qb)});
    }
    out.panels = {pb, pc, pd};
    return out;
}

std::string render_svg(const PlotBundle& bundle) {
    SvgWriter svg(bundle.title);
    svg.add_title(bundle.title);

    // Panel (a): position plane.
    Box pa{60, 60, 560, 640};
    Range rx, ry;
    for (const auto& fam : bundle.families) {
        for (const auto& mem : fam.members) {
            for (const auto& p : mem) {
                rx.add(p.x());
                ry.add(p.y());
            }
        }
    }
    rx.pad();
    ry.pad();
    svg.add_axes(pa, rx, ry, "(a) trajectories");
    for (const auto& fam : bundle.families) {
        for (const auto& mem : fam.members) svg.add_polyline(pa, rx, ry, mem, fam.css_class);
    }
    std::vector<std::pair<std::string, std::string>> legend;
    for (const auto& fam : bundle.families) legend.emplace_back(fam.label, fam.css_class);
    svg.add_legend(60, 36, legend);

    // Panels (b)-(d): diagnostic time series.
    const char* names[3] = {"(b) ", "(c) ", "(d) "};
    for (std::size_t pi = 0; pi < bundle.panels.size() && pi < 3; ++pi) {
        const PlotPanel& panel = bundle.panels[pi];
        Box pp{640, 60 + 200.0 * static_cast<double>(pi), 960, 200 + 200.0 * static_cast<double>(pi)};
        Range tx, ty;
        for (double t : bundle.times) tx.add(t);
        for (const auto& c : panel.curves) {
            for (double v : c.values) ty.add(v);
        }
        tx.pad();
        ty.pad();
        svg.add_axes(pp, tx, ty, names[pi] + panel.title);
        for (const auto& c : panel.curves) {
            svg.add_path(pp, tx, ty, bundle.times, c.values, c.css_class);
        }
    }
    return svg.finish();
}

void emit_plot(const PlotBundle& bundle, const std::string& path) {
    write_text_file(path, render_svg(bundle));
}

}  // namespace ghostflow
