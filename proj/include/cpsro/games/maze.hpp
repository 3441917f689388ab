#pragma once

#include <string>

#include "cpsro/game.hpp"

namespace cpsro::maze {

// Grid geometry. Cells are (row, col), 1-based, row 1 at the top.
inline constexpr int kRows = 4;
inline constexpr int kCols = 7;
inline constexpr int kHumanStartRow = 4, kHumanStartCol = 3;
inline constexpr int kMonsterStartRow = 1, kMonsterStartCol = 1;
inline constexpr int kShelterRow = 1, kShelterCol = 7;
// Cell where the winning composite policy hands over from pi2 to pi1.
inline constexpr int kSwitchRow = 3, kSwitchCol = 6;
inline constexpr int kMaxStepPairs = 40;

// Global action ids. The human may move one cell; the monster may also move
// two cells in the same direction.
inline constexpr Action kUp = 0, kDown = 1, kLeft = 2, kRight = 3;
inline constexpr Action kUp2 = 4, kDown2 = 5, kLeft2 = 6, kRight2 = 7;

// Deterministic fixture policies. "pi1", "pi2", "pi3" and "switch" control
// the human; "monster" is the greedy chaser (Manhattan distance, ties broken
// up/down/left/right, two steps whenever that strictly beats one).
bool is_script_id(const std::string& id);
Action scripted_action(const std::string& script_id, const State& state);
// Same decision computed from an information-state key instead of a state.
Action scripted_action_from_key(const std::string& script_id, const std::string& key);

}  // namespace cpsro::maze
