#include "pacman/analysis.hpp"

#include <algorithm>
#include <cassert>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace pacman {

namespace {

struct UnionFind {
    explicit UnionFind(size_t n) : parent(n) {
        std::iota(parent.begin(), parent.end(), 0);
    }
    int find(int x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
    bool unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        if (b < a) std::swap(a, b);  // keep the smaller id as root
        parent[b] = a;
        return true;
    }
    std::vector<int> parent;
};

// groups of vertex ids that are mutually reachable (size > 1)
std::vector<std::vector<int>> strongly_connected_groups(
    int n, const std::set<std::pair<int, int>>& edges) {
    // Tarjan, iterative-enough for our graph sizes via recursion
    std::vector<std::vector<int>> adj(n);
    for (auto& [a, b] : edges) adj[a].push_back(b);
    std::vector<int> index(n, -1), low(n, 0), stack;
    std::vector<bool> on_stack(n, false);
    std::vector<std::vector<int>> groups;
    int counter = 0;

    std::vector<std::tuple<int, size_t>> call;
    for (int start = 0; start < n; start++) {
        if (index[start] != -1) continue;
        call.emplace_back(start, 0);
        while (!call.empty()) {
            auto& [v, ei] = call.back();
            if (ei == 0) {
                index[v] = low[v] = counter++;
                stack.push_back(v);
                on_stack[v] = true;
            }
            if (ei < adj[v].size()) {
                int w = adj[v][ei++];
                if (index[w] == -1) {
                    call.emplace_back(w, 0);
                } else if (on_stack[w]) {
                    low[v] = std::min(low[v], index[w]);
                }
                continue;
            }
            if (low[v] == index[v]) {
                std::vector<int> group;
                while (true) {
                    int w = stack.back();
                    stack.pop_back();
                    on_stack[w] = false;
                    group.push_back(w);
                    if (w == v) break;
                }
                if (group.size() > 1) groups.push_back(std::move(group));
            }
            int finished = v;
            call.pop_back();
            if (!call.empty()) {
                int parent = std::get<0>(call.back());
                low[parent] = std::min(low[parent], low[finished]);
            }
        }
    }
    return groups;
}

bool is_acyclic(int n, const std::vector<std::pair<int, int>>& edges) {
    std::vector<int> indeg(n, 0);
    std::vector<std::vector<int>> adj(n);
    for (auto& [a, b] : edges) {
        adj[a].push_back(b);
        indeg[b]++;
    }
    std::vector<int> q;
    for (int i = 0; i < n; i++)
        if (indeg[i] == 0) q.push_back(i);
    int seen = 0;
    while (!q.empty()) {
        int v = q.back();
        q.pop_back();
        seen++;
        for (int w : adj[v])
            if (--indeg[w] == 0) q.push_back(w);
    }
    return seen == n;
}

std::string op_list_string(const std::vector<int>& ops) {
    std::ostringstream os;
    for (size_t i = 0; i < ops.size(); i++) {
        if (i) os << ",";
        os << ops[i];
    }
    return os.str();
}

}  // namespace

int LocalDependencyGraph::slice_of_op(int op) const {
    for (const Slice& s : slices)
        if (std::binary_search(s.op_indexes.begin(), s.op_indexes.end(), op))
            return s.ordinal;
    return -1;
}

LocalDependencyGraph build_local_graph(const ProcedureIR& ir) {
    const int n = static_cast<int>(ir.ops.size());
    auto flow = extract_flow_deps(ir);
    auto data = extract_data_deps(ir);

    UnionFind uf(n);
    bool changed = true;
    while (changed) {
        changed = false;
        // merge mutually data-dependent ops
        for (const DepEdge& e : data) changed |= uf.unite(e.from, e.to);

        // break cycles: merge mutually (indirectly) dependent slices
        std::set<std::pair<int, int>> quotient;
        for (const DepEdge& e : flow) {
            int a = uf.find(e.from), b = uf.find(e.to);
            if (a != b) quotient.insert({a, b});
        }
        for (const auto& group : strongly_connected_groups(n, quotient))
            for (size_t i = 1; i < group.size(); i++)
                changed |= uf.unite(group[0], group[i]);

        // betweenness: in-slice flow pair (x,y) pulls in every op between
        for (const DepEdge& e : flow) {
            if (uf.find(e.from) != uf.find(e.to)) continue;
            for (int z = e.from + 1; z < e.to; z++)
                changed |= uf.unite(e.from, z);
        }
    }

    LocalDependencyGraph ldg;
    ldg.proc = ir.name;
    std::map<int, std::vector<int>> groups;
    for (int i = 0; i < n; i++) groups[uf.find(i)].push_back(i);
    std::map<int, int> root_to_ordinal;  // roots are minimal members, already sorted
    for (auto& [root, ops] : groups) {
        Slice s;
        s.ordinal = static_cast<int>(ldg.slices.size());
        s.op_indexes = ops;
        root_to_ordinal[root] = s.ordinal;
        ldg.slices.push_back(std::move(s));
    }
    std::set<std::pair<int, int>> edges;
    for (const DepEdge& e : flow) {
        int a = root_to_ordinal[uf.find(e.from)];
        int b = root_to_ordinal[uf.find(e.to)];
        if (a != b) edges.insert({a, b});
    }
    ldg.edges.assign(edges.begin(), edges.end());
    assert(is_acyclic(static_cast<int>(ldg.slices.size()), ldg.edges));
    return ldg;
}

AnalyzedProcedure analyze_procedure(ProcedureIR ir) {
    AnalyzedProcedure p;
    p.flow = extract_flow_deps(ir);
    p.data = extract_data_deps(ir);
    p.ldg = build_local_graph(ir);
    p.ir = std::move(ir);
    return p;
}

int GlobalDependencyGraph::proc_index(const std::string& name) const {
    for (size_t i = 0; i < proc_names.size(); i++)
        if (proc_names[i] == name) return static_cast<int>(i);
    return -1;
}

std::vector<int> GlobalDependencyGraph::blocks_of_proc(int proc) const {
    std::vector<int> out;
    for (auto& [key, ops] : catalog)
        if (key.first == proc) out.push_back(key.second);
    return out;
}

GlobalDependencyGraph build_global_graph(const std::vector<AnalyzedProcedure>& procs) {
    // flatten slices to global indexes
    std::vector<SliceRef> refs;
    std::vector<int> proc_slice_base(procs.size() + 1, 0);
    for (size_t p = 0; p < procs.size(); p++) {
        proc_slice_base[p + 1] =
            proc_slice_base[p] + static_cast<int>(procs[p].ldg.slices.size());
        for (size_t s = 0; s < procs[p].ldg.slices.size(); s++)
            refs.push_back({static_cast<int>(p), static_cast<int>(s)});
    }
    const int total = static_cast<int>(refs.size());
    auto global_index = [&](int proc, int ordinal) {
        return proc_slice_base[proc] + ordinal;
    };

    // per-slice table access summary for cross-procedure data dependence
    struct Access {
        std::set<std::string> reads, writes;
    };
    std::vector<Access> access(total);
    for (int g = 0; g < total; g++) {
        int p = refs[g].proc, s = refs[g].ordinal;
        for (int op : procs[p].ldg.slices[s].op_indexes) {
            const Operation& o = procs[p].ir.ops[op];
            if (is_modification(o.kind))
                access[g].writes.insert(o.table);
            else
                access[g].reads.insert(o.table);
        }
    }
    auto slices_data_dependent = [&](int a, int b) {
        for (const std::string& t : access[a].writes)
            if (access[b].writes.count(t) || access[b].reads.count(t)) return true;
        for (const std::string& t : access[b].writes)
            if (access[a].reads.count(t)) return true;
        return false;
    };

    UnionFind uf(total);
    for (int a = 0; a < total; a++)
        for (int b = a + 1; b < total; b++)
            if (refs[a].proc != refs[b].proc && slices_data_dependent(a, b))
                uf.unite(a, b);

    // block edges from same-procedure slice flow edges, then collapse cycles
    auto build_edges = [&] {
        std::set<std::pair<int, int>> edges;
        for (size_t p = 0; p < procs.size(); p++) {
            for (auto& [a, b] : procs[p].ldg.edges) {
                int ga = uf.find(global_index(static_cast<int>(p), a));
                int gb = uf.find(global_index(static_cast<int>(p), b));
                if (ga != gb) edges.insert({ga, gb});
            }
        }
        return edges;
    };
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& group : strongly_connected_groups(total, build_edges()))
            for (size_t i = 1; i < group.size(); i++)
                changed |= uf.unite(group[0], group[i]);
    }

    GlobalDependencyGraph gdg;
    for (const auto& p : procs) gdg.proc_names.push_back(p.ir.name);

    std::map<int, std::vector<SliceRef>> groups;
    for (int g = 0; g < total; g++) groups[uf.find(g)].push_back(refs[g]);
    std::vector<std::pair<SliceRef, int>> ordering;  // (min ref, root)
    for (auto& [root, members] : groups)
        ordering.emplace_back(*std::min_element(members.begin(), members.end()), root);
    std::sort(ordering.begin(), ordering.end());

    std::map<int, int> root_to_block;
    for (auto& [min_ref, root] : ordering) {
        Block b;
        b.id = static_cast<int>(gdg.blocks.size());
        b.slices = groups[root];
        std::sort(b.slices.begin(), b.slices.end());
        root_to_block[root] = b.id;
        gdg.blocks.push_back(std::move(b));
    }

    std::set<std::pair<int, int>> edges;
    for (auto& [a, b] : build_edges()) edges.insert({root_to_block[a], root_to_block[b]});
    gdg.edges.assign(edges.begin(), edges.end());
    if (!is_acyclic(static_cast<int>(gdg.blocks.size()), gdg.edges))
        throw std::logic_error("global dependency graph has a cycle");

    // merge same-procedure slices within a block into the catalog entry
    for (const Block& b : gdg.blocks) {
        for (const SliceRef& ref : b.slices) {
            auto& ops = gdg.catalog[{ref.proc, b.id}];
            const auto& slice_ops = procs[ref.proc].ldg.slices[ref.ordinal].op_indexes;
            ops.insert(ops.end(), slice_ops.begin(), slice_ops.end());
        }
    }
    for (auto& [key, ops] : gdg.catalog) std::sort(ops.begin(), ops.end());

    for (auto& [key, ops] : gdg.catalog) {
        for (int op : ops) {
            const Operation& o = procs[key.first].ir.ops[op];
            gdg.table_readers[o.table].insert(key.second);
            if (is_modification(o.kind)) {
                auto [it, inserted] = gdg.table_owner.emplace(o.table, key.second);
                if (!inserted && it->second != key.second)
                    throw std::logic_error("table owned by two blocks: " + o.table);
            }
        }
    }
    return gdg;
}

std::string export_dot(const LocalDependencyGraph& ldg) {
    std::ostringstream os;
    os << "digraph local_" << ldg.proc << " {\n";
    os << "  rankdir=TB;\n  node [shape=box];\n";
    for (const Slice& s : ldg.slices) {
        os << "  s" << (s.ordinal + 1) << " [label=\"" << ldg.proc << ".s"
           << (s.ordinal + 1) << "\\nops " << op_list_string(s.op_indexes) << "\"];\n";
    }
    for (auto& [a, b] : ldg.edges)
        os << "  s" << (a + 1) << " -> s" << (b + 1) << ";\n";
    os << "}\n";
    return os.str();
}

std::string export_dot(const GlobalDependencyGraph& gdg,
                       const std::vector<AnalyzedProcedure>& procs) {
    std::ostringstream os;
    os << "digraph global {\n";
    os << "  rankdir=TB;\n  compound=true;\n  node [shape=box];\n";
    std::vector<std::string> anchor(gdg.blocks.size());
    for (const Block& b : gdg.blocks) {
        os << "  subgraph cluster_b" << (b.id + 1) << " {\n";
        os << "    label=\"B" << (b.id + 1) << "\";\n    style=dashed;\n";
        for (const SliceRef& ref : b.slices) {
            std::string node =
                procs[ref.proc].ir.name + "_s" + std::to_string(ref.ordinal + 1);
            if (anchor[b.id].empty()) anchor[b.id] = node;
            os << "    " << node << " [label=\"" << procs[ref.proc].ir.name << ".s"
               << (ref.ordinal + 1) << "\"];\n";
        }
        os << "  }\n";
    }
    for (auto& [a, b] : gdg.edges) {
        os << "  " << anchor[a] << " -> " << anchor[b] << " [ltail=cluster_b" << (a + 1)
           << ", lhead=cluster_b" << (b + 1) << "];\n";
    }
    os << "}\n";
    return os.str();
}

std::string export_global_json(const GlobalDependencyGraph& gdg,
                               const std::vector<AnalyzedProcedure>& procs) {
    nlohmann::json j;
    j["procedures"] = gdg.proc_names;
    j["blocks"] = nlohmann::json::array();
    for (const Block& b : gdg.blocks) {
        nlohmann::json jb;
        jb["id"] = b.id;
        jb["slices"] = nlohmann::json::array();
        for (const SliceRef& ref : b.slices) {
            nlohmann::json js;
            js["proc"] = procs[ref.proc].ir.name;
            js["slice"] = ref.ordinal;
            js["ops"] = procs[ref.proc].ldg.slices[ref.ordinal].op_indexes;
            jb["slices"].push_back(js);
        }
        j["blocks"].push_back(jb);
    }
    j["edges"] = nlohmann::json::array();
    for (auto& [a, b] : gdg.edges) j["edges"].push_back({a, b});
    return j.dump(2) + "\n";
}

}  // namespace pacman
