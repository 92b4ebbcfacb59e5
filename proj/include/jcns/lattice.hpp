#pragma once

#include <array>
#include <string>
#include <vector>

namespace jcns {

enum class MacroLattice { L1 = 0, L2 = 1, L3 = 2, L4 = 3 };

inline constexpr std::array<MacroLattice, 4> kAllLattices = {MacroLattice::L1, MacroLattice::L2,
                                                              MacroLattice::L3, MacroLattice::L4};

// Block position relative to a central block, in units of 8x8 blocks.
struct BlockOffset {
    int di = 0;  // rows, positive = south
    int dj = 0;  // columns, positive = east

    bool operator==(const BlockOffset&) const = default;
};

enum class BlockLabel { C, NW, N, NE, W, E, SW, S, SE };

BlockOffset offset_of(BlockLabel label) noexcept;
std::string to_string(BlockLabel label);
std::string to_string(MacroLattice lattice);
MacroLattice parse_lattice(const std::string& name);

// Conditioning neighbours used for a block of each macro-lattice, in the order in
// which they follow the central block:
//   L1: none; L2: NW NE SW SE; L3: N W E S; L4: NW N NE W E SW S SE.
const std::vector<BlockLabel>& neighbor_labels(MacroLattice lattice);

struct LatticeAssignment {
    int blocks_w = 0;
    int blocks_h = 0;
    std::vector<MacroLattice> assignment;              // row-major, blocks_h x blocks_w
    std::array<std::vector<int>, 4> blocks_by_lattice;  // row-major block indices

    MacroLattice at(int bi, int bj) const { return assignment[static_cast<std::size_t>(bi) * blocks_w + bj]; }
};

struct Neighborhood {
    int center = 0;                      // row-major block index
    MacroLattice lattice = MacroLattice::L1;
    std::vector<BlockLabel> labels;      // neighbours that exist in the grid
    std::vector<int> neighbor_blocks;    // their block indices, same order
    int n_blocks = 1;                    // 1 + labels.size()
};

// Parity tiling: (even, even) -> L1, (odd, odd) -> L2, (even, odd) -> L3, (odd, even) -> L4.
LatticeAssignment tile(int blocks_w, int blocks_h);

// Neighbours outside the grid are dropped.
Neighborhood neighborhood(const LatticeAssignment& assign, int block);

}  // namespace jcns
