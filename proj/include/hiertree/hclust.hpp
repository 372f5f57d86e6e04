#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "hiertree/cooccur.hpp"

namespace hiertree {

enum class Linkage { single, complete, average, weighted, ward };

std::string to_string(Linkage l);
Linkage linkage_from_string(const std::string& s);

struct Merge {
    uint32_t left = 0;   // child cluster id, left < right
    uint32_t right = 0;
    double height = 0.0; // inter-cluster distance at merge time
    uint32_t size = 0;   // leaves in the merged cluster
};

// Binary merge tree over N leaves. Leaf ids are 0..N-1; merge i creates
// internal cluster id N+i. merges.size() == N-1 and the last entry is the
// root.
struct Dendrogram {
    uint32_t n_leaves = 0;
    std::vector<std::string> labels;
    std::vector<Merge> merges;
    std::string linkage;  // provenance, may be empty
    std::string measure;  // provenance, may be empty

    uint32_t root_id() const { return 2 * n_leaves - 2; }

    // parent[id] = merge-created cluster id containing it; parent[root] = root.
    std::vector<uint32_t> parent_ids() const;

    void validate() const; // structural invariants, throws Error(validation)
};

// Agglomerative clustering under Lance-Williams updates. At every step the
// active pair with minimal distance is merged; exact-equality ties resolve
// to the lexicographically smallest (min id, max id). Matches a naive
// reference that rescans all cluster pairs each step.
Dendrogram agglomerate(const DistanceMatrix& d, Linkage linkage);

struct CutAssignment {
    uint32_t k = 0;
    std::vector<uint32_t> member; // label id -> cluster index in 0..k-1
};

// Undo the last k-1 merges; cluster indices are assigned in order of the
// smallest member label id.
CutAssignment cut(const Dendrogram& t, uint32_t k);

enum class TreeFormat { newick, json, dot };

TreeFormat tree_format_from_string(const std::string& s);

// Newick with merge heights as branch lengths: a node's branch is its
// parent's height minus its own (leaves have height 0). Names needing it
// are single-quoted. Output ends with ";\n".
std::string export_newick(const Dendrogram& t);

std::string export_dot(const Dendrogram& t);

// Canonical JSON (sorted keys, round-trip float formatting): export ->
// parse -> export is byte-identical.
std::string export_tree_json(const Dendrogram& t);
Dendrogram parse_tree_json(std::istream& stream);
Dendrogram parse_tree_json(const std::string& text);

std::string export_tree(const Dendrogram& t, TreeFormat format);

void write_tree_file(const Dendrogram& t, const std::string& path);
Dendrogram read_tree_file(const std::string& path);

} // namespace hiertree
