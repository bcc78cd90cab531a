#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "pcr/harness.hpp"

namespace pcr {

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace {

constexpr const char* kHeader = "epoch,seed,method,metric,value";

void check_field(const std::string& s) {
    if (s.empty() || s.find_first_of(",\n\r\"") != std::string::npos) {
        throw Error("csv: field '" + s + "' must be nonempty and free of commas, quotes and newlines");
    }
}

template <class T>
T parse_number(const std::string& s, std::size_t line) {
    T v{};
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw Error("csv: bad number '" + s + "' on line " + std::to_string(line));
    }
    return v;
}

}  // namespace

std::string format_csv(const MetricsRows& rows) {
    std::string out = kHeader;
    out += '\n';
    for (const MetricsRow& r : rows) {
        check_field(r.method);
        check_field(r.metric);
        out += std::to_string(r.epoch);
        out += ',';
        out += std::to_string(r.seed);
        out += ',';
        out += r.method;
        out += ',';
        out += r.metric;
        out += ',';
        out += format_double(r.value);
        out += '\n';
    }
    return out;
}

MetricsRows parse_csv(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line) || line != kHeader) {
        throw Error("csv: missing header");
    }
    MetricsRows rows;
    std::size_t n = 1;
    while (std::getline(is, line)) {
        ++n;
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) f.push_back(cell);
        if (f.size() != 5) {
            throw Error("csv: expected 5 fields on line " + std::to_string(n));
        }
        rows.push_back(MetricsRow{parse_number<std::size_t>(f[0], n), parse_number<std::uint64_t>(f[1], n), f[2], f[3],
                                  parse_number<double>(f[4], n)});
    }
    return rows;
}

double median(std::vector<double> v) {
    if (v.empty()) throw Error("median of empty set");
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double median_abs_deviation(const std::vector<double>& v) {
    const double m = median(v);
    std::vector<double> d;
    d.reserve(v.size());
    for (double x : v) d.push_back(std::abs(x - m));
    return median(std::move(d));
}

MeanSe mean_and_se(const std::vector<double>& v) {
    if (v.empty()) throw Error("mean of empty set");
    MeanSe r;
    for (double x : v) r.mean += x;
    r.mean /= static_cast<double>(v.size());
    if (v.size() > 1) {
        double ss = 0.0;
        for (double x : v) ss += (x - r.mean) * (x - r.mean);
        r.se = std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
    }
    return r;
}

RunSummary summarize(const MetricsRows& rows) {
    std::map<std::tuple<std::string, std::string, std::size_t>, std::vector<double>> groups;
    std::vector<std::tuple<std::string, std::string, std::size_t>> order;
    for (const MetricsRow& r : rows) {
        auto key = std::make_tuple(r.method, r.metric, r.epoch);
        auto [it, inserted] = groups.try_emplace(key);
        if (inserted) order.push_back(key);
        it->second.push_back(r.value);
    }
    std::sort(order.begin(), order.end());
    RunSummary s;
    for (const auto& key : order) {
        const auto& v = groups[key];
        s.curves.push_back(SummaryRow{std::get<0>(key), std::get<1>(key), std::get<2>(key), median(v),
                                      median_abs_deviation(v), v.size()});
    }
    return s;
}

std::string render_svg(const MetricsRows& rows, const std::string& method, const std::string& metric) {
    std::map<std::uint64_t, std::vector<std::pair<std::size_t, double>>> per_seed;
    std::map<std::size_t, std::vector<double>> per_epoch;
    for (const MetricsRow& r : rows) {
        if (r.method != method || r.metric != metric) continue;
        per_seed[r.seed].emplace_back(r.epoch, r.value);
        per_epoch[r.epoch].push_back(r.value);
    }
    if (per_epoch.empty()) {
        throw Error("render_svg: no rows for " + method + "/" + metric);
    }
    std::vector<std::size_t> epochs;
    std::vector<double> med, lo, hi;
    for (const auto& [e, v] : per_epoch) {
        epochs.push_back(e);
        const double m = median(v), d = median_abs_deviation(v);
        med.push_back(m);
        lo.push_back(m - d);
        hi.push_back(m + d);
    }
    double ymin = *std::min_element(lo.begin(), lo.end());
    double ymax = *std::max_element(hi.begin(), hi.end());
    for (const MetricsRow& r : rows) {
        if (r.method != method || r.metric != metric) continue;
        ymin = std::min(ymin, r.value);
        ymax = std::max(ymax, r.value);
    }
    if (ymax - ymin < 1e-12) {
        ymin -= 1.0;
        ymax += 1.0;
    }
    const double xmin = static_cast<double>(epochs.front());
    const double xmax = std::max(xmin + 1.0, static_cast<double>(epochs.back()));
    const double w = 640, h = 400, ml = 60, mr = 20, mt = 30, mb = 40;
    auto px = [&](double e) { return ml + (e - xmin) / (xmax - xmin) * (w - ml - mr); };
    auto py = [&](double v) { return h - mb - (v - ymin) / (ymax - ymin) * (h - mt - mb); };
    auto pt = [&](double e, double v) { return format_double(std::round(px(e) * 100) / 100) + "," +
                                               format_double(std::round(py(v) * 100) / 100); };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << ml << "\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">" << method << " / "
       << metric << "</text>\n";
    os << "<line x1=\"" << ml << "\" y1=\"" << h - mb << "\" x2=\"" << w - mr << "\" y2=\"" << h - mb
       << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << h - mb
       << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << ml << "\" y=\"" << h - 10 << "\" font-family=\"sans-serif\" font-size=\"11\">epoch "
       << epochs.front() << "</text>\n";
    os << "<text x=\"" << w - mr - 80 << "\" y=\"" << h - 10 << "\" font-family=\"sans-serif\" font-size=\"11\">epoch "
       << epochs.back() << "</text>\n";
    os << "<text x=\"4\" y=\"" << mt + 10 << "\" font-family=\"sans-serif\" font-size=\"11\">"
       << format_double(ymax) << "</text>\n";
    os << "<text x=\"4\" y=\"" << h - mb << "\" font-family=\"sans-serif\" font-size=\"11\">" << format_double(ymin)
       << "</text>\n";

    os << "<polygon class=\"mad\" fill=\"steelblue\" fill-opacity=\"0.25\" stroke=\"none\" points=\"";
    for (std::size_t i = 0; i < epochs.size(); ++i) os << pt(static_cast<double>(epochs[i]), hi[i]) << ' ';
    for (std::size_t i = epochs.size(); i-- > 0;) os << pt(static_cast<double>(epochs[i]), lo[i]) << ' ';
    os << "\"/>\n";
    for (const auto& [seed, series] : per_seed) {
        os << "<path class=\"seed\" data-seed=\"" << seed
           << "\" fill=\"none\" stroke=\"steelblue\" stroke-opacity=\"0.3\" d=\"";
        for (std::size_t i = 0; i < series.size(); ++i) {
            os << (i ? " L" : "M") << pt(static_cast<double>(series[i].first), series[i].second);
        }
        os << "\"/>\n";
    }
    os << "<path class=\"median\" fill=\"none\" stroke=\"black\" stroke-width=\"2\" d=\"";
    for (std::size_t i = 0; i < epochs.size(); ++i) {
        os << (i ? " L" : "M") << pt(static_cast<double>(epochs[i]), med[i]);
    }
    os << "\"/>\n</svg>\n";
    return os.str();
}

std::vector<std::string> emit_outputs(const MetricsRows& rows, const std::string& out_dir, const std::string& stem) {
    if (rows.empty()) {
        throw Error("emit_outputs: no rows");
    }
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    std::vector<std::string> written;
    auto write = [&](const std::string& name, const std::string& body) {
        const std::string path = (fs::path(out_dir) / name).string();
        std::ofstream os(path, std::ios::binary | std::ios::trunc);
        if (!os) throw Error("emit_outputs: cannot write '" + path + "'");
        os << body;
        written.push_back(path);
    };
    write(stem + ".csv", format_csv(rows));

    const RunSummary s = summarize(rows);
    std::string sum = "method,metric,epoch,median,mad,count\n";
    for (const SummaryRow& r : s.curves) {
        sum += r.method + "," + r.metric + "," + std::to_string(r.epoch) + "," + format_double(r.median) + "," +
               format_double(r.mad) + "," + std::to_string(r.count) + "\n";
    }
    write(stem + "_summary.csv", sum);

    std::map<std::pair<std::string, std::string>, std::set<std::size_t>> curves;
    for (const MetricsRow& r : rows) curves[{r.method, r.metric}].insert(r.epoch);
    for (const auto& [key, epochs] : curves) {
        if (epochs.size() < 2) continue;
        write(stem + "_" + key.first + "_" + key.second + ".svg", render_svg(rows, key.first, key.second));
    }
    return written;
}

}  // namespace pcr
