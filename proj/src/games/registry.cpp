#include <map>

#include "cpsro/game.hpp"
#include "games/registry.hpp"

namespace cpsro {

namespace {

using Factory = std::shared_ptr<const Game> (*)();

const std::map<std::string, Factory>& factories() {
  static const std::map<std::string, Factory> kFactories = {
      {"kuhn", +[]() { return make_kuhn(); }},
      {"leduc", +[]() { return make_leduc(); }},
      {"goofspiel5", +[]() { return make_goofspiel(5); }},
      {"liars_dice", +[]() { return make_liars_dice(false); }},
      {"liars_dice_ir", +[]() { return make_liars_dice(true); }},
      {"maze", +[]() { return make_maze(); }},
  };
  return kFactories;
}

}  // namespace

std::shared_ptr<const Game> make_game(const std::string& id) {
  auto it = factories().find(id);
  if (it == factories().end()) {
    throw ConfigError("unknown game id '" + id + "'");
  }
  return it->second();
}

std::vector<std::string> registered_games() {
  std::vector<std::string> ids;
  for (const auto& [id, factory] : factories()) ids.push_back(id);
  return ids;
}

}  // namespace cpsro
