#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "pacman/procedure.hpp"

namespace pacman {

// Slice ordinals are assigned by smallest contained op index, so identical
// input always yields identical ids.
struct Slice {
    int ordinal = 0;
    std::vector<int> op_indexes;  // ascending
};

struct LocalDependencyGraph {
    std::string proc;
    std::vector<Slice> slices;
    std::vector<std::pair<int, int>> edges;  // (slice, slice) ordinals, sorted

    int slice_of_op(int op) const;
};

// Decomposes one procedure into the finest partition where mutually
// data-dependent ops share a slice, in-slice flow pairs are closed under
// betweenness, and the slice-level flow graph is acyclic.
LocalDependencyGraph build_local_graph(const ProcedureIR& ir);

struct AnalyzedProcedure {
    ProcedureIR ir;
    std::vector<DepEdge> flow;
    std::vector<DepEdge> data;
    LocalDependencyGraph ldg;
};

AnalyzedProcedure analyze_procedure(ProcedureIR ir);

struct SliceRef {
    int proc = 0;     // index into the input procedure list
    int ordinal = 0;  // slice ordinal within that procedure

    auto operator<=>(const SliceRef&) const = default;
};

struct Block {
    int id = 0;
    std::vector<SliceRef> slices;  // sorted
};

struct GlobalDependencyGraph {
    std::vector<std::string> proc_names;
    std::vector<Block> blocks;
    std::vector<std::pair<int, int>> edges;  // (block, block), sorted

    // merged per-procedure slice inside each block: (proc, block) -> op list
    std::map<std::pair<int, int>, std::vector<int>> catalog;

    // block whose slices modify the table; unique because data-dependent
    // slices always share a block
    std::map<std::string, int> table_owner;
    // every block with any access to the table
    std::map<std::string, std::set<int>> table_readers;

    int proc_index(const std::string& name) const;
    // blocks this procedure contributes pieces to, ascending
    std::vector<int> blocks_of_proc(int proc) const;
};

GlobalDependencyGraph build_global_graph(const std::vector<AnalyzedProcedure>& procs);

// Deterministic DOT rendering; slice/block labels are 1-based like the
// usual presentation of these graphs.
std::string export_dot(const LocalDependencyGraph& ldg);
std::string export_dot(const GlobalDependencyGraph& gdg,
                       const std::vector<AnalyzedProcedure>& procs);

std::string export_global_json(const GlobalDependencyGraph& gdg,
                               const std::vector<AnalyzedProcedure>& procs);

}  // namespace pacman
