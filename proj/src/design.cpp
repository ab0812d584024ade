#include "netclutter/design.hpp"

#include <fstream>

#include "json.hpp"
#include "netclutter/io_formats.hpp"

namespace netclutter {

using nlohmann::json;

namespace {

double num_or(const json& j, const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number()) throw IoError(std::string("design field '") + key + "' must be a number");
    return j[key].get<double>();
}

int int_or(const json& j, const char* key, int fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number_integer())
        throw IoError(std::string("design field '") + key + "' must be an integer");
    return j[key].get<int>();
}

std::shared_ptr<RegionedNetwork> build_geometry(const json& jn,
                                                const std::filesystem::path& base_dir) {
    if (!jn.is_object() || !jn.contains("kind"))
        throw IoError("design network needs a 'kind'");
    const std::string kind = jn["kind"].get<std::string>();
    auto geo = std::make_shared<RegionedNetwork>();
    if (kind == "grid_loops") {
        *geo = make_grid_loops(num_or(jn, "total_length", 31150.0), int_or(jn, "rows", 14),
                               int_or(jn, "cols", 14), num_or(jn, "feature_length", 2991.0),
                               num_or(jn, "nested_length", 11731.0));
    } else if (kind == "tree") {
        *geo = make_branching_tree(int_or(jn, "depth", 8), num_or(jn, "total_length", 1934.0),
                                   num_or(jn, "feature_length", 778.0));
    } else if (kind == "two_road_grid") {
        *geo = make_two_road_grid(num_or(jn, "total_length", 128690.0), int_or(jn, "rows", 8),
                                  int_or(jn, "cols", 42), num_or(jn, "road1_length", 8320.0),
                                  num_or(jn, "road2_length", 3680.0));
    } else if (kind == "grid") {
        geo->net = make_grid(int_or(jn, "rows", 10), int_or(jn, "cols", 10),
                             num_or(jn, "edge_length", 1.0));
    } else if (kind == "chain") {
        geo->net = make_chain(int_or(jn, "segments", 100),
                              num_or(jn, "total_length", 10000.0));
    } else if (kind == "file") {
        if (!jn.contains("path")) throw IoError("file geometry needs 'path'");
        std::filesystem::path p = jn["path"].get<std::string>();
        if (p.is_relative()) p = base_dir / p;
        const FileFormat fmt = format_from_string(
            jn.contains("format") ? jn["format"].get<std::string>() : "auto");
        std::optional<double> tol;
        if (jn.contains("merge_tol")) tol = jn["merge_tol"].get<double>();
        geo->net = read_network(p, fmt, tol,
                                jn.contains("unit") ? jn["unit"].get<std::string>() : "unit");
    } else {
        throw IoError("unknown network kind '" + kind + "'");
    }
    return geo;
}

std::optional<std::vector<int>> resolve_region(const json& region,
                                               const RegionedNetwork& geo) {
    if (region.is_null()) return std::nullopt;
    if (region.is_string()) {
        const std::string name = region.get<std::string>();
        if (name == "full") return std::nullopt;
        if (name == "feature") {
            if (geo.feature_ids.empty())
                throw IoError("geometry has no 'feature' region");
            return geo.feature_ids;
        }
        if (name == "nested") {
            if (geo.nested_ids.empty()) throw IoError("geometry has no 'nested' region");
            return geo.nested_ids;
        }
        throw IoError("unknown region '" + name + "' (use full, feature, nested, or an id list)");
    }
    if (region.is_array()) {
        std::vector<int> ids;
        for (const auto& v : region) {
            if (!v.is_number_integer()) throw IoError("region id lists must hold integers");
            ids.push_back(v.get<int>());
        }
        return ids;
    }
    throw IoError("layer region must be a string or an id list");
}

}  // namespace

LoadedDesign load_design(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw IoError("invalid JSON in " + path.string() + ": " + e.what());
    }
    if (!j.is_object()) throw IoError("design file must hold a JSON object");

    LoadedDesign out;
    out.geometry = build_geometry(j.contains("network") ? j["network"] : json(),
                                  path.has_parent_path() ? path.parent_path()
                                                         : std::filesystem::path("."));
    out.spec.network = &out.geometry->net;
    out.spec.name = j.contains("name") ? j["name"].get<std::string>() : path.stem().string();
    out.spec.reps = int_or(j, "reps", 100);
    out.spec.seed = j.contains("seed") ? j["seed"].get<std::uint64_t>() : 0;

    if (!j.contains("layers") || !j["layers"].is_array() || j["layers"].empty())
        throw IoError("design needs a nonempty 'layers' array");
    for (const auto& jl : j["layers"]) {
        DesignLayer layer;
        layer.region_ids = resolve_region(jl.contains("region") ? jl["region"] : json(),
                                          *out.geometry);
        if (!jl.contains("lambda")) throw IoError("layer needs 'lambda'");
        layer.lambda = jl["lambda"].get<double>();
        if (!jl.contains("role")) throw IoError("layer needs 'role'");
        layer.role = label_from_string(jl["role"].get<std::string>());
        out.spec.layers.push_back(std::move(layer));
    }

    if (j.contains("k_policies")) {
        for (const auto& jp : j["k_policies"]) {
            KPolicy pol;
            const std::string mode = jp.contains("mode") ? jp["mode"].get<std::string>() : "";
            if (mode == "fixed") {
                pol.mode = KMode::fixed;
                pol.fixed_k = int_or(jp, "k", 0);
            } else if (mode == "auto") {
                pol.mode = KMode::automatic;
                pol.k_max = int_or(jp, "k_max", 35);
            } else {
                throw IoError("k policy mode must be 'fixed' or 'auto'");
            }
            out.spec.k_policies.push_back(pol);
        }
    } else {
        out.spec.k_policies = {{KMode::fixed, 5, 35}, {KMode::fixed, 10, 35},
                               {KMode::automatic, 0, 35}};
    }

    if (j.contains("em") && j["em"].is_object()) {
        out.spec.em.tol = num_or(j["em"], "tol", out.spec.em.tol);
        out.spec.em.max_iter = int_or(j["em"], "max_iter", out.spec.em.max_iter);
    }
    return out;
}

}  // namespace netclutter
