#pragma once

#include <functional>
#include <memory>
#include <string>

#include "cpsro/game.hpp"

namespace cpsro {

std::shared_ptr<const Game> make_kuhn();
std::shared_ptr<const Game> make_leduc();
std::shared_ptr<const Game> make_goofspiel(int num_cards);
std::shared_ptr<const Game> make_liars_dice(bool imperfect_recall);
std::shared_ptr<const Game> make_maze();

}  // namespace cpsro
