#include "netclutter/io_formats.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"

namespace netclutter {

using nlohmann::json;

FileFormat format_from_string(std::string_view s) {
    if (s == "auto" || s.empty()) return FileFormat::auto_detect;
    if (s == "geojson" || s == "json") return FileFormat::geojson;
    if (s == "csv") return FileFormat::csv;
    throw ValidationError("unknown format '" + std::string(s) + "' (use auto, geojson, csv)");
}

std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

FileFormat detect_format(const std::filesystem::path& path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (ext == ".geojson" || ext == ".json") return FileFormat::geojson;
    if (ext == ".csv" || ext == ".txt") return FileFormat::csv;
    throw ValidationError("cannot infer format from extension '" + ext +
                          "', pass it explicitly");
}

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    return out;
}

std::string trim(std::string s) {
    const auto issp = [](unsigned char c) { return std::isspace(c); };
    while (!s.empty() && issp(s.back())) s.pop_back();
    size_t i = 0;
    while (i < s.size() && issp(s[i])) ++i;
    return s.substr(i);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

// Rows of a CSV file with named columns; '#' lines and blanks skipped.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(const std::string& name) const {
        for (size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return static_cast<int>(i);
        return -1;
    }
};

CsvTable read_csv(const std::filesystem::path& path) {
    auto in = open_input(path);
    CsvTable table;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        auto cells = split_csv_line(t);
        if (table.header.empty()) {
            for (auto& c : cells)
                std::transform(c.begin(), c.end(), c.begin(),
                               [](unsigned char ch) { return std::tolower(ch); });
            table.header = std::move(cells);
        } else {
            table.rows.push_back(std::move(cells));
        }
    }
    if (table.header.empty()) throw IoError("empty file: " + path.string());
    return table;
}

double parse_double(const std::string& cell, const char* what, size_t row) {
    try {
        size_t used = 0;
        const double v = std::stod(cell, &used);
        if (used != cell.size()) throw std::invalid_argument(cell);
        return v;
    } catch (const std::exception&) {
        throw IoError(std::string("bad ") + what + " value '" + cell + "' at data row " +
                      std::to_string(row + 1));
    }
}

long long parse_int(const std::string& cell, const char* what, size_t row) {
    try {
        size_t used = 0;
        const long long v = std::stoll(cell, &used);
        if (used != cell.size()) throw std::invalid_argument(cell);
        return v;
    } catch (const std::exception&) {
        throw IoError(std::string("bad ") + what + " value '" + cell + "' at data row " +
                      std::to_string(row + 1));
    }
}

json parse_json_file(const std::filesystem::path& path) {
    auto in = open_input(path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw IoError("invalid JSON in " + path.string() + ": " + e.what());
    }
    return j;
}

void collect_linestring(const json& coords, std::vector<RawSegment>& out) {
    if (!coords.is_array() || coords.size() < 2)
        throw IoError("LineString needs at least 2 coordinates");
    for (size_t i = 0; i + 1 < coords.size(); ++i) {
        const auto& a = coords[i];
        const auto& b = coords[i + 1];
        if (!a.is_array() || a.size() < 2 || !b.is_array() || b.size() < 2)
            throw IoError("coordinate entries must be [x, y] arrays");
        out.push_back({a[0].get<double>(), a[1].get<double>(), b[0].get<double>(),
                       b[1].get<double>()});
    }
}

void collect_geometry_segments(const json& geom, std::vector<RawSegment>& out) {
    if (!geom.is_object() || !geom.contains("type"))
        throw IoError("geometry without a type");
    const std::string type = geom["type"].get<std::string>();
    if (type == "LineString") {
        collect_linestring(geom.at("coordinates"), out);
    } else if (type == "MultiLineString") {
        for (const auto& line : geom.at("coordinates")) collect_linestring(line, out);
    } else if (type == "GeometryCollection") {
        for (const auto& g : geom.at("geometries")) collect_geometry_segments(g, out);
    }
    // other geometry types are skipped silently (mixed collections happen)
}

void collect_geometry_points(const json& geom, std::vector<std::pair<double, double>>& out) {
    if (!geom.is_object() || !geom.contains("type")) throw IoError("geometry without a type");
    const std::string type = geom["type"].get<std::string>();
    if (type == "Point") {
        const auto& c = geom.at("coordinates");
        if (!c.is_array() || c.size() < 2) throw IoError("Point needs [x, y]");
        out.emplace_back(c[0].get<double>(), c[1].get<double>());
    } else if (type == "MultiPoint") {
        for (const auto& c : geom.at("coordinates")) {
            if (!c.is_array() || c.size() < 2) throw IoError("MultiPoint needs [x, y] entries");
            out.emplace_back(c[0].get<double>(), c[1].get<double>());
        }
    } else if (type == "GeometryCollection") {
        for (const auto& g : geom.at("geometries")) collect_geometry_points(g, out);
    }
}

std::string geojson_unit(const json& j) {
    if (j.contains("unit") && j["unit"].is_string()) return j["unit"].get<std::string>();
    if (j.contains("properties") && j["properties"].is_object() &&
        j["properties"].contains("unit") && j["properties"]["unit"].is_string())
        return j["properties"]["unit"].get<std::string>();
    return "unit";
}

}  // namespace

LinearNetwork read_network_geojson(const std::filesystem::path& path,
                                   std::optional<double> merge_tol) {
    const json j = parse_json_file(path);
    std::vector<RawSegment> raw;
    if (j.contains("type") && j["type"] == "FeatureCollection") {
        for (const auto& f : j.at("features"))
            if (f.contains("geometry") && !f["geometry"].is_null())
                collect_geometry_segments(f["geometry"], raw);
    } else if (j.contains("type") && j["type"] == "Feature") {
        collect_geometry_segments(j.at("geometry"), raw);
    } else {
        collect_geometry_segments(j, raw);
    }
    if (raw.empty()) throw IoError("no line geometry in " + path.string());
    const std::string unit = geojson_unit(j);
    if (merge_tol) return build_network(raw, *merge_tol, unit);
    return build_network(raw, unit);
}

LinearNetwork read_network_csv(const std::filesystem::path& path,
                               std::optional<double> merge_tol, const std::string& unit) {
    const CsvTable table = read_csv(path);
    const int cx1 = table.column("x1"), cy1 = table.column("y1");
    const int cx2 = table.column("x2"), cy2 = table.column("y2");
    if (cx1 < 0 || cy1 < 0 || cx2 < 0 || cy2 < 0)
        throw IoError("network CSV needs columns x1,y1,x2,y2");
    std::vector<RawSegment> raw;
    raw.reserve(table.rows.size());
    for (size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const size_t need = static_cast<size_t>(std::max({cx1, cy1, cx2, cy2})) + 1;
        if (row.size() < need)
            throw IoError("short row " + std::to_string(r + 1) + " in " + path.string());
        raw.push_back({parse_double(row[cx1], "x1", r), parse_double(row[cy1], "y1", r),
                       parse_double(row[cx2], "x2", r), parse_double(row[cy2], "y2", r)});
    }
    if (raw.empty()) throw IoError("no segments in " + path.string());
    if (merge_tol) return build_network(raw, *merge_tol, unit);
    return build_network(raw, unit);
}

LinearNetwork read_network(const std::filesystem::path& path, FileFormat format,
                           std::optional<double> merge_tol, const std::string& unit) {
    if (format == FileFormat::auto_detect) format = detect_format(path);
    if (format == FileFormat::geojson) return read_network_geojson(path, merge_tol);
    return read_network_csv(path, merge_tol, unit);
}

void write_segments_csv(const LinearNetwork& net, const std::filesystem::path& path) {
    auto out = open_output(path);
    out << "id,a,b,length\n";
    for (const auto& s : net.segments())
        out << s.id << ',' << s.a << ',' << s.b << ',' << format_double(s.length) << '\n';
}

void write_vertices_csv(const LinearNetwork& net, const std::filesystem::path& path) {
    auto out = open_output(path);
    out << "id,x,y\n";
    for (const auto& v : net.vertices())
        out << v.id << ',' << format_double(v.x) << ',' << format_double(v.y) << '\n';
}

namespace {

NetPoint snap_to_network(const LinearNetwork& net, double x, double y, double snap_tol,
                         double* dist_out) {
    double best_d2 = std::numeric_limits<double>::infinity();
    NetPoint best{-1, 0.0};
    for (const auto& s : net.segments()) {
        const Vertex& a = net.vertex(s.a);
        const Vertex& b = net.vertex(s.b);
        const double dx = b.x - a.x, dy = b.y - a.y;
        const double den = dx * dx + dy * dy;
        double t = den > 0.0 ? ((x - a.x) * dx + (y - a.y) * dy) / den : 0.0;
        t = std::clamp(t, 0.0, 1.0);
        const double px = a.x + t * dx, py = a.y + t * dy;
        const double d2 = (x - px) * (x - px) + (y - py) * (y - py);
        if (d2 < best_d2) {
            best_d2 = d2;
            best = {s.id, std::clamp(t * s.length, 0.0, s.length)};
        }
    }
    const double d = std::sqrt(best_d2);
    if (dist_out) *dist_out = d;
    if (d > snap_tol) best.segment_id = -1;
    return best;
}

PatternLoad snap_points(const LinearNetwork& net,
                        const std::vector<std::pair<double, double>>& xy, double snap_tol) {
    PatternLoad load;
    for (size_t i = 0; i < xy.size(); ++i) {
        double d = 0.0;
        const NetPoint p = snap_to_network(net, xy[i].first, xy[i].second, snap_tol, &d);
        if (p.segment_id < 0) {
            load.snap.rejected_rows.push_back(static_cast<int>(i) + 1);
            continue;
        }
        load.snap.max_snap_distance = std::max(load.snap.max_snap_distance, d);
        ++load.snap.accepted;
        load.points.push_back(p);
        load.labels.emplace_back(std::nullopt);
    }
    return load;
}

}  // namespace

PatternLoad read_points_csv(const std::filesystem::path& path, const LinearNetwork& net,
                            double snap_tol) {
    const CsvTable table = read_csv(path);
    const int cseg = table.column("segment_id");
    const int coff = table.column("offset");
    const int clab = table.column("label");
    PatternLoad load;
    if (cseg >= 0 && coff >= 0) {
        for (size_t r = 0; r < table.rows.size(); ++r) {
            const auto& row = table.rows[r];
            const size_t need = static_cast<size_t>(std::max(cseg, coff)) + 1;
            if (row.size() < need)
                throw IoError("short row " + std::to_string(r + 1) + " in " + path.string());
            NetPoint p{static_cast<int>(parse_int(row[cseg], "segment_id", r)),
                       parse_double(row[coff], "offset", r)};
            net.validate_point(p);
            load.points.push_back(p);
            if (clab >= 0 && static_cast<size_t>(clab) < row.size() && !row[clab].empty())
                load.labels.emplace_back(label_from_string(row[clab]));
            else
                load.labels.emplace_back(std::nullopt);
            ++load.snap.accepted;
        }
        return load;
    }
    const int cx = table.column("x"), cy = table.column("y");
    if (cx < 0 || cy < 0)
        throw IoError("point CSV needs columns segment_id,offset or x,y");
    std::vector<std::pair<double, double>> xy;
    for (size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const size_t need = static_cast<size_t>(std::max(cx, cy)) + 1;
        if (row.size() < need)
            throw IoError("short row " + std::to_string(r + 1) + " in " + path.string());
        xy.emplace_back(parse_double(row[cx], "x", r), parse_double(row[cy], "y", r));
    }
    return snap_points(net, xy, snap_tol);
}

PatternLoad read_points_geojson(const std::filesystem::path& path, const LinearNetwork& net,
                                double snap_tol) {
    const json j = parse_json_file(path);
    std::vector<std::pair<double, double>> xy;
    if (j.contains("type") && j["type"] == "FeatureCollection") {
        for (const auto& f : j.at("features"))
            if (f.contains("geometry") && !f["geometry"].is_null())
                collect_geometry_points(f["geometry"], xy);
    } else if (j.contains("type") && j["type"] == "Feature") {
        collect_geometry_points(j.at("geometry"), xy);
    } else {
        collect_geometry_points(j, xy);
    }
    if (xy.empty()) throw IoError("no point geometry in " + path.string());
    return snap_points(net, xy, snap_tol);
}

PatternLoad read_points(const std::filesystem::path& path, const LinearNetwork& net,
                        FileFormat format, double snap_tol) {
    if (format == FileFormat::auto_detect) format = detect_format(path);
    if (format == FileFormat::geojson) return read_points_geojson(path, net, snap_tol);
    return read_points_csv(path, net, snap_tol);
}

void write_points_csv(const LinearNetwork& net, std::span<const NetPoint> pts,
                      std::span<const Label> labels, const std::filesystem::path& path) {
    if (!labels.empty() && labels.size() != pts.size())
        throw ValidationError("labels/points length mismatch");
    auto out = open_output(path);
    out << "index,segment_id,offset,x,y";
    if (!labels.empty()) out << ",label";
    out << '\n';
    for (size_t i = 0; i < pts.size(); ++i) {
        const Vertex at = net.locate(pts[i]);
        out << i << ',' << pts[i].segment_id << ',' << format_double(pts[i].offset) << ','
            << format_double(at.x) << ',' << format_double(at.y);
        if (!labels.empty()) out << ',' << to_string(labels[i]);
        out << '\n';
    }
}

void write_labelled_csv(const LinearNetwork& net, std::span<const NetPoint> pts,
                        const Eigen::ArrayXd& volumes, const Classification& cls,
                        const std::filesystem::path& path) {
    if (pts.size() != cls.labels.size() ||
        static_cast<Eigen::Index>(pts.size()) != volumes.size() ||
        volumes.size() != cls.fit.delta.size())
        throw ValidationError("labelled table inputs disagree in length");
    auto out = open_output(path);
    out << "index,segment_id,offset,x,y,s_k,delta,label\n";
    for (size_t i = 0; i < pts.size(); ++i) {
        const Vertex at = net.locate(pts[i]);
        const auto ei = static_cast<Eigen::Index>(i);
        out << i << ',' << pts[i].segment_id << ',' << format_double(pts[i].offset) << ','
            << format_double(at.x) << ',' << format_double(at.y) << ','
            << format_double(volumes[ei]) << ',' << format_double(cls.fit.delta[ei]) << ','
            << to_string(cls.labels[i]) << '\n';
    }
}

void write_volumes_csv(std::span<const VolumeSample> samples, const std::filesystem::path& path) {
    auto out = open_output(path);
    out << "index,d_k,s_k\n";
    for (const auto& s : samples)
        out << s.point_index << ',' << format_double(s.d_k) << ',' << format_double(s.s_k)
            << '\n';
}

void write_entropy_csv(const EntropyCurve& curve, const std::filesystem::path& path) {
    auto out = open_output(path);
    if (!curve.degenerate_ks.empty()) {
        out << "# degenerate_ks=";
        for (size_t i = 0; i < curve.degenerate_ks.size(); ++i)
            out << (i ? ";" : "") << curve.degenerate_ks[i];
        out << '\n';
    }
    out << "k,entropy\n";
    for (size_t i = 0; i < curve.ks.size(); ++i)
        out << curve.ks[i] << ',' << format_double(curve.entropies[i]) << '\n';
}

std::vector<std::pair<int, std::string>> read_partition_csv(const std::filesystem::path& path) {
    const CsvTable table = read_csv(path);
    const int cseg = table.column("segment_id");
    const int czone = table.column("zone_id");
    if (cseg < 0 || czone < 0) throw IoError("partition CSV needs columns segment_id,zone_id");
    std::vector<std::pair<int, std::string>> out;
    out.reserve(table.rows.size());
    for (size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const size_t need = static_cast<size_t>(std::max(cseg, czone)) + 1;
        if (row.size() < need)
            throw IoError("short row " + std::to_string(r + 1) + " in " + path.string());
        if (row[czone].empty()) throw IoError("empty zone_id at data row " + std::to_string(r + 1));
        out.emplace_back(static_cast<int>(parse_int(row[cseg], "segment_id", r)), row[czone]);
    }
    return out;
}

namespace {

std::string opt_cell(const std::optional<double>& v) {
    return v ? format_double(*v) : std::string("na");
}

}  // namespace

void write_rates_csv(const RatesReport& report, const std::filesystem::path& path) {
    auto out = open_output(path);
    out << "# seed=" << report.seed << '\n';
    out << "design,policy,reps,failures,mean_points,mean_feature_points,"
           "tpr,fpr,acc,k_mean,k_sd\n";
    for (const auto& pr : report.policies) {
        out << report.design_name << ',' << pr.policy_label << ',' << report.reps << ','
            << pr.failures << ',' << format_double(report.mean_total_points) << ','
            << format_double(report.mean_feature_points) << ',' << opt_cell(pr.mean_tpr) << ','
            << opt_cell(pr.mean_fpr) << ',' << opt_cell(pr.mean_acc) << ','
            << opt_cell(pr.k_mean) << ',' << opt_cell(pr.k_sd) << '\n';
    }
}

std::string rates_to_json(const RatesReport& report) {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["design"] = report.design_name;
    j["seed"] = report.seed;
    j["reps"] = report.reps;
    j["mean_points"] = report.mean_total_points;
    j["mean_feature_points"] = report.mean_feature_points;
    j["layers"] = json::array();
    for (const auto& layer : report.layers) {
        j["layers"].push_back({{"role", to_string(layer.role)},
                               {"lambda", layer.lambda},
                               {"region_length", layer.region_length},
                               {"expected_count", layer.expected_count}});
    }
    j["policies"] = json::array();
    for (const auto& pr : report.policies) {
        json p;
        p["policy"] = pr.policy_label;
        p["failures"] = pr.failures;
        if (pr.mean_tpr) p["tpr"] = *pr.mean_tpr;
        if (pr.mean_fpr) p["fpr"] = *pr.mean_fpr;
        if (pr.mean_acc) p["acc"] = *pr.mean_acc;
        if (pr.k_mean) p["k_mean"] = *pr.k_mean;
        if (pr.k_sd) p["k_sd"] = *pr.k_sd;
        j["policies"].push_back(std::move(p));
    }
    return j.dump(2);
}

void write_rep_outcomes_csv(const RatesReport& report, const std::filesystem::path& path) {
    auto out = open_output(path);
    out << "# design=" << report.design_name << " seed=" << report.seed << '\n';
    out << "policy,rep,failed,reason,n_points,n_feature_truth,k_used,tpr,fpr,acc\n";
    for (const auto& pr : report.policies) {
        for (size_t r = 0; r < pr.reps.size(); ++r) {
            const RepOutcome& o = pr.reps[r];
            std::string reason = o.failure_reason;
            std::replace(reason.begin(), reason.end(), ',', ';');
            out << pr.policy_label << ',' << r << ',' << (o.failed ? 1 : 0) << ',' << reason
                << ',' << o.n_points << ',' << o.n_feature_truth << ',' << o.k_used << ',';
            if (o.failed)
                out << "na,na,na\n";
            else
                out << opt_cell(o.tpr) << ',' << opt_cell(o.fpr) << ',' << format_double(o.acc)
                    << '\n';
        }
    }
}

}  // namespace netclutter
