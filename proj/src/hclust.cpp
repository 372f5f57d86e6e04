#include "hiertree/hclust.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "hiertree/error.hpp"
#include "hiertree/io_util.hpp"
#include "hiertree/version.hpp"

using json = nlohmann::json;

namespace hiertree {

std::string to_string(Linkage l) {
    switch (l) {
        case Linkage::single: return "single";
        case Linkage::complete: return "complete";
        case Linkage::average: return "average";
        case Linkage::weighted: return "weighted";
        case Linkage::ward: return "ward";
    }
    return "?";
}

Linkage linkage_from_string(const std::string& s) {
    if (s == "single") return Linkage::single;
    if (s == "complete") return Linkage::complete;
    if (s == "average") return Linkage::average;
    if (s == "weighted") return Linkage::weighted;
    if (s == "ward") return Linkage::ward;
    fail_validation("unknown linkage '" + s + "'");
}

std::vector<uint32_t> Dendrogram::parent_ids() const {
    std::vector<uint32_t> parent(2 * size_t(n_leaves) - 1, root_id());
    for (size_t i = 0; i < merges.size(); ++i) {
        parent[merges[i].left] = n_leaves + static_cast<uint32_t>(i);
        parent[merges[i].right] = n_leaves + static_cast<uint32_t>(i);
    }
    return parent;
}

void Dendrogram::validate() const {
    if (n_leaves < 2) fail_validation("dendrogram needs at least 2 leaves");
    if (labels.size() != n_leaves) fail_validation("dendrogram label count does not match n_leaves");
    if (merges.size() != size_t(n_leaves) - 1)
        fail_validation("dendrogram must contain exactly n_leaves-1 merges");
    {
        std::set<std::string> seen(labels.begin(), labels.end());
        if (seen.size() != labels.size()) fail_validation("duplicate label name in dendrogram");
    }
    std::vector<uint32_t> size(2 * size_t(n_leaves) - 1, 0);
    std::vector<bool> used(2 * size_t(n_leaves) - 1, false);
    for (uint32_t i = 0; i < n_leaves; ++i) size[i] = 1;
    for (size_t i = 0; i < merges.size(); ++i) {
        const Merge& m = merges[i];
        const uint32_t id = n_leaves + static_cast<uint32_t>(i);
        if (m.left >= id || m.right >= id) fail_validation("merge child id out of range");
        if (m.left == m.right) fail_validation("merge with identical children");
        if (m.left > m.right) fail_validation("merge children not ordered (left < right)");
        if (used[m.left] || used[m.right]) fail_validation("cluster merged twice");
        used[m.left] = used[m.right] = true;
        if (!std::isfinite(m.height) || m.height < 0.0) fail_validation("merge height must be finite and >= 0");
        size[id] = size[m.left] + size[m.right];
        if (m.size != size[id]) fail_validation("merge size inconsistent with children");
    }
    if (size.back() != n_leaves) fail_validation("root does not cover all leaves");
}

namespace {

double lw_update(Linkage linkage, double d_sv, double d_tv, double d_st,
                 uint32_t n_s, uint32_t n_t, uint32_t n_v) {
    switch (linkage) {
        case Linkage::single:
            return std::min(d_sv, d_tv);
        case Linkage::complete:
            return std::max(d_sv, d_tv);
        case Linkage::average:
            return (double(n_s) * d_sv + double(n_t) * d_tv) / double(n_s + n_t);
        case Linkage::weighted:
            return (d_sv + d_tv) / 2.0;
        case Linkage::ward: {
            const double total = double(n_s) + double(n_t) + double(n_v);
            double arg = ((double(n_v) + n_s) * d_sv * d_sv + (double(n_v) + n_t) * d_tv * d_tv -
                          double(n_v) * d_st * d_st) /
                         total;
            // d_st is the current minimum, so the argument is >= d_st^2 up
            // to rounding; never let an ulp push it negative.
            if (arg < 0.0) arg = 0.0;
            return std::sqrt(arg);
        }
    }
    return 0.0;
}

} // namespace

Dendrogram agglomerate(const DistanceMatrix& d, Linkage linkage) {
    d.validate();
    const uint32_t n = d.size();
    const uint32_t total = 2 * n - 1;

    // Distances indexed by cluster id; merge step i creates id n+i. A plain
    // global argmin scan per step keeps the merge order identical to the
    // naive reference by construction; ~N^3/6 lookups is well under a
    // second at N=600.
    std::vector<double> dist(size_t(total) * total, 0.0);
    for (uint32_t i = 0; i < n; ++i) {
        for (uint32_t j = 0; j < n; ++j) dist[size_t(i) * total + j] = d.at(i, j);
    }
    std::vector<uint32_t> size(total, 1);
    std::vector<uint32_t> active(n);
    for (uint32_t i = 0; i < n; ++i) active[i] = i;

    Dendrogram t;
    t.n_leaves = n;
    t.labels = d.labels;
    t.linkage = to_string(linkage);
    t.measure = to_string(d.source);
    t.merges.reserve(n - 1);

    for (uint32_t step = 0; step + 1 < n; ++step) {
        // `active` stays ascending (new ids only grow), so scanning pairs in
        // order and keeping the first strict minimum realizes the
        // lexicographic (min id, max id) tie rule exactly.
        double best = std::numeric_limits<double>::infinity();
        uint32_t best_x = 0, best_y = 1;
        for (size_t x = 0; x + 1 < active.size(); ++x) {
            const double* row = dist.data() + size_t(active[x]) * total;
            for (size_t y = x + 1; y < active.size(); ++y) {
                const double v = row[active[y]];
                if (v < best) {
                    best = v;
                    best_x = static_cast<uint32_t>(x);
                    best_y = static_cast<uint32_t>(y);
                }
            }
        }
        const uint32_t s = active[best_x];
        const uint32_t tt = active[best_y];
        const uint32_t merged = n + step;
        const double height = best;

        for (size_t x = 0; x < active.size(); ++x) {
            const uint32_t v = active[x];
            if (v == s || v == tt) continue;
            const double nd = lw_update(linkage, dist[size_t(s) * total + v],
                                        dist[size_t(tt) * total + v], height,
                                        size[s], size[tt], size[v]);
            dist[size_t(merged) * total + v] = nd;
            dist[size_t(v) * total + merged] = nd;
        }
        size[merged] = size[s] + size[tt];
        t.merges.push_back(Merge{s, tt, height, size[merged]});

        active.erase(active.begin() + best_y);
        active.erase(active.begin() + best_x);
        active.push_back(merged);
    }
    return t;
}

namespace {

struct Dsu {
    std::vector<uint32_t> parent;

    explicit Dsu(uint32_t n) : parent(n) {
        for (uint32_t i = 0; i < n; ++i) parent[i] = i;
    }
    uint32_t find(uint32_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
    void unite(uint32_t a, uint32_t b) { parent[find(a)] = find(b); }
};

} // namespace

CutAssignment cut(const Dendrogram& t, uint32_t k) {
    const uint32_t n = t.n_leaves;
    if (k < 1 || k > n)
        fail_validation("cut k=" + std::to_string(k) + " out of range 1.." + std::to_string(n));

    // Undoing the last k-1 merges means applying the first n-k.
    Dsu dsu(n);
    std::vector<uint32_t> rep(2 * size_t(n) - 1, 0); // cluster id -> any member leaf
    for (uint32_t i = 0; i < n; ++i) rep[i] = i;
    for (uint32_t i = 0; i < n - k; ++i) {
        const Merge& m = t.merges[i];
        dsu.unite(rep[m.left], rep[m.right]);
        rep[n + i] = rep[m.left];
    }

    CutAssignment cutout;
    cutout.k = k;
    cutout.member.assign(n, 0);
    std::vector<int64_t> cluster_of_root(n, -1);
    uint32_t next = 0;
    for (uint32_t label = 0; label < n; ++label) {
        const uint32_t root = dsu.find(label);
        if (cluster_of_root[root] < 0) cluster_of_root[root] = next++;
        cutout.member[label] = static_cast<uint32_t>(cluster_of_root[root]);
    }
    return cutout;
}

TreeFormat tree_format_from_string(const std::string& s) {
    if (s == "newick") return TreeFormat::newick;
    if (s == "json") return TreeFormat::json;
    if (s == "dot") return TreeFormat::dot;
    fail_validation("unknown tree format '" + s + "' (expected newick, json or dot)");
}

namespace {

bool newick_needs_quotes(const std::string& name) {
    return name.find_first_of(" ()[]{}:;,'\"\t\n") != std::string::npos;
}

std::string newick_name(const std::string& name) {
    if (!newick_needs_quotes(name)) return name;
    std::string out = "'";
    for (char c : name) {
        if (c == '\'') out += "''";
        else out.push_back(c);
    }
    out += "'";
    return out;
}

void newick_emit(const Dendrogram& t, const std::vector<double>& height, uint32_t id,
                 double parent_height, bool is_root, std::string& out) {
    if (id < t.n_leaves) {
        out += newick_name(t.labels[id]);
    } else {
        const Merge& m = t.merges[id - t.n_leaves];
        out += '(';
        newick_emit(t, height, m.left, height[id], false, out);
        out += ',';
        newick_emit(t, height, m.right, height[id], false, out);
        out += ')';
    }
    if (!is_root) {
        out += ':';
        out += format_sig12(parent_height - height[id]);
    }
}

std::string dot_quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    out += "\"";
    return out;
}

} // namespace

std::string export_newick(const Dendrogram& t) {
    t.validate();
    std::vector<double> height(2 * size_t(t.n_leaves) - 1, 0.0);
    for (size_t i = 0; i < t.merges.size(); ++i) height[t.n_leaves + i] = t.merges[i].height;
    std::string out;
    newick_emit(t, height, t.root_id(), 0.0, true, out);
    out += ";\n";
    return out;
}

std::string export_dot(const Dendrogram& t) {
    t.validate();
    std::string out = "digraph dendrogram {\n  rankdir=TB;\n";
    for (uint32_t i = 0; i < t.n_leaves; ++i) {
        out += "  n" + std::to_string(i) + " [shape=box, label=" + dot_quote(t.labels[i]) + "];\n";
    }
    for (size_t i = 0; i < t.merges.size(); ++i) {
        const uint32_t id = t.n_leaves + static_cast<uint32_t>(i);
        out += "  n" + std::to_string(id) + " [shape=ellipse, label=\"h=" +
               format_sig12(t.merges[i].height) + "\"];\n";
        out += "  n" + std::to_string(id) + " -> n" + std::to_string(t.merges[i].left) + ";\n";
        out += "  n" + std::to_string(id) + " -> n" + std::to_string(t.merges[i].right) + ";\n";
    }
    out += "}\n";
    return out;
}

std::string export_tree_json(const Dendrogram& t) {
    t.validate();
    json j;
    j["format"] = "hiertree-tree";
    j["generator"] = version_string();
    j["n_leaves"] = t.n_leaves;
    j["labels"] = t.labels;
    j["linkage"] = t.linkage;
    j["measure"] = t.measure;
    json merges = json::array();
    for (const Merge& m : t.merges) {
        json e;
        e["left"] = m.left;
        e["right"] = m.right;
        e["height"] = m.height;
        e["size"] = m.size;
        merges.push_back(std::move(e));
    }
    j["merges"] = std::move(merges);
    return j.dump(2) + "\n";
}

Dendrogram parse_tree_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        fail_validation(std::string("malformed tree JSON: ") + e.what());
    }
    if (!j.is_object() || j.value("format", "") != "hiertree-tree")
        fail_validation("not a hiertree tree (missing format tag)");

    Dendrogram t;
    try {
        t.n_leaves = j.at("n_leaves").get<uint32_t>();
        t.labels = j.at("labels").get<std::vector<std::string>>();
        t.linkage = j.value("linkage", "");
        t.measure = j.value("measure", "");
        for (const json& e : j.at("merges")) {
            Merge m;
            m.left = e.at("left").get<uint32_t>();
            m.right = e.at("right").get<uint32_t>();
            m.height = e.at("height").get<double>();
            m.size = e.at("size").get<uint32_t>();
            t.merges.push_back(m);
        }
    } catch (const json::exception& e) {
        fail_validation(std::string("malformed tree JSON: ") + e.what());
    }
    t.validate();
    return t;
}

Dendrogram parse_tree_json(std::istream& stream) {
    std::string text((std::istreambuf_iterator<char>(stream)), std::istreambuf_iterator<char>());
    return parse_tree_json(text);
}

std::string export_tree(const Dendrogram& t, TreeFormat format) {
    switch (format) {
        case TreeFormat::newick: return export_newick(t);
        case TreeFormat::json: return export_tree_json(t);
        case TreeFormat::dot: return export_dot(t);
    }
    return {};
}

void write_tree_file(const Dendrogram& t, const std::string& path) {
    write_file_atomic(path, export_tree_json(t));
}

Dendrogram read_tree_file(const std::string& path) {
    return parse_tree_json(read_file(path));
}

} // namespace hiertree
