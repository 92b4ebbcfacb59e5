#include "jcns/lattice.hpp"

#include "jcns/errors.hpp"

namespace jcns {

BlockOffset offset_of(BlockLabel label) noexcept {
    switch (label) {
        case BlockLabel::C: return {0, 0};
        case BlockLabel::NW: return {-1, -1};
        case BlockLabel::N: return {-1, 0};
        case BlockLabel::NE: return {-1, 1};
        case BlockLabel::W: return {0, -1};
        case BlockLabel::E: return {0, 1};
        case BlockLabel::SW: return {1, -1};
        case BlockLabel::S: return {1, 0};
        case BlockLabel::SE: return {1, 1};
    }
    return {0, 0};
}

std::string to_string(BlockLabel label) {
    static const char* kNames[] = {"C", "NW", "N", "NE", "W", "E", "SW", "S", "SE"};
    return kNames[static_cast<int>(label)];
}

std::string to_string(MacroLattice lattice) {
    return "L" + std::to_string(static_cast<int>(lattice) + 1);
}

MacroLattice parse_lattice(const std::string& name) {
    if (name == "L1") return MacroLattice::L1;
    if (name == "L2") return MacroLattice::L2;
    if (name == "L3") return MacroLattice::L3;
    if (name == "L4") return MacroLattice::L4;
    throw InvalidArgument("unknown macro-lattice '" + name + "' (expected L1..L4)");
}

const std::vector<BlockLabel>& neighbor_labels(MacroLattice lattice) {
    using enum BlockLabel;
    static const std::vector<BlockLabel> kL1{};
    static const std::vector<BlockLabel> kL2{NW, NE, SW, SE};
    static const std::vector<BlockLabel> kL3{N, W, E, S};
    static const std::vector<BlockLabel> kL4{NW, N, NE, W, E, SW, S, SE};
    switch (lattice) {
        case MacroLattice::L1: return kL1;
        case MacroLattice::L2: return kL2;
        case MacroLattice::L3: return kL3;
        case MacroLattice::L4: return kL4;
    }
    return kL1;
}

LatticeAssignment tile(int blocks_w, int blocks_h) {
    if (blocks_w <= 0 || blocks_h <= 0) {
        throw InvalidArgument("block grid dimensions must be positive");
    }
    LatticeAssignment a;
    a.blocks_w = blocks_w;
    a.blocks_h = blocks_h;
    a.assignment.resize(static_cast<std::size_t>(blocks_w) * blocks_h);
    for (int bi = 0; bi < blocks_h; ++bi) {
        for (int bj = 0; bj < blocks_w; ++bj) {
            const bool row_odd = bi % 2 == 1;
            const bool col_odd = bj % 2 == 1;
            MacroLattice l;
            if (!row_odd && !col_odd) {
                l = MacroLattice::L1;
            } else if (row_odd && col_odd) {
                l = MacroLattice::L2;
            } else if (!row_odd) {
                l = MacroLattice::L3;
            } else {
                l = MacroLattice::L4;
            }
            const int idx = bi * blocks_w + bj;
            a.assignment[static_cast<std::size_t>(idx)] = l;
            a.blocks_by_lattice[static_cast<int>(l)].push_back(idx);
        }
    }
    return a;
}

Neighborhood neighborhood(const LatticeAssignment& assign, int block) {
    if (block < 0 || block >= assign.blocks_w * assign.blocks_h) {
        throw InvalidArgument("block index out of range");
    }
    Neighborhood nb;
    nb.center = block;
    nb.lattice = assign.assignment[static_cast<std::size_t>(block)];
    const int bi = block / assign.blocks_w;
    const int bj = block % assign.blocks_w;
    for (BlockLabel label : neighbor_labels(nb.lattice)) {
        const BlockOffset o = offset_of(label);
        const int ni = bi + o.di;
        const int nj = bj + o.dj;
        if (ni < 0 || nj < 0 || ni >= assign.blocks_h || nj >= assign.blocks_w) {
            continue;
        }
        nb.labels.push_back(label);
        nb.neighbor_blocks.push_back(ni * assign.blocks_w + nj);
    }
    nb.n_blocks = 1 + static_cast<int>(nb.labels.size());
    return nb;
}

}  // namespace jcns
