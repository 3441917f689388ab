#include "cpsro/population.hpp"

#include <fstream>

#include "cpsro/error.hpp"
#include "json.hpp"

namespace cpsro {

PolicySnapshot PolicySnapshot::uniform_random(int iteration) {
  PolicySnapshot s;
  s.kind = Kind::kUniformRandom;
  s.tag = "uniform";
  s.created_iteration = iteration;
  return s;
}

PolicySnapshot PolicySnapshot::from_net(QNetwork net, std::string tag, int iteration,
                                        std::vector<StateSample> buffer) {
  PolicySnapshot s;
  s.kind = Kind::kNet;
  s.net = std::make_shared<QNetwork>(std::move(net));
  s.tag = std::move(tag);
  s.created_iteration = iteration;
  s.state_buffer = std::move(buffer);
  return s;
}

PolicySnapshot PolicySnapshot::scripted(std::string script_id, int iteration) {
  PolicySnapshot s;
  s.kind = Kind::kScripted;
  s.script = std::move(script_id);
  s.tag = s.script;
  s.created_iteration = iteration;
  return s;
}

PolicySnapshot PolicySnapshot::tabular(
    std::unordered_map<std::string, std::vector<double>> table, std::string tag, int iteration) {
  PolicySnapshot s;
  s.kind = Kind::kTabular;
  s.table = std::make_shared<std::unordered_map<std::string, std::vector<double>>>(std::move(table));
  s.tag = std::move(tag);
  s.created_iteration = iteration;
  return s;
}

PolicySnapshot PolicySnapshot::deep_copy() const {
  PolicySnapshot copy = *this;
  if (net) copy.net = std::make_shared<QNetwork>(*net);
  if (table) {
    copy.table = std::make_shared<std::unordered_map<std::string, std::vector<double>>>(*table);
  }
  return copy;
}

std::shared_ptr<const Policy> PolicySnapshot::as_policy(int num_actions) const {
  switch (kind) {
    case Kind::kUniformRandom:
      return std::make_shared<UniformRandomPolicy>();
    case Kind::kNet:
      return std::make_shared<NetPolicy>(net);
    case Kind::kScripted:
      return std::make_shared<ScriptedPolicy>(script, num_actions);
    case Kind::kTabular:
      return std::make_shared<TabularPolicy>(*table);
  }
  throw ContractViolation("PolicySnapshot: unknown kind");
}

std::vector<PolicyRef> Population::policies(int num_actions) const {
  std::vector<PolicyRef> out;
  out.reserve(members.size());
  for (const auto& member : members) out.push_back(member.as_policy(num_actions));
  return out;
}

namespace {

using nlohmann::json;

std::string blob_name(int player, int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "p%d_%03d", player, index);
  return buf;
}

json buffer_to_json(const std::vector<StateSample>& buffer) {
  json arr = json::array();
  for (const auto& sample : buffer) {
    arr.push_back({{"key", sample.key},
                   {"features", sample.features},
                   {"legal", std::vector<int>(sample.legal.begin(), sample.legal.end())}});
  }
  return arr;
}

std::vector<StateSample> buffer_from_json(const json& arr) {
  std::vector<StateSample> buffer;
  for (const auto& item : arr) {
    StateSample sample;
    sample.key = item.at("key").get<std::string>();
    sample.features = item.at("features").get<std::vector<double>>();
    for (int bit : item.at("legal").get<std::vector<int>>()) {
      sample.legal.push_back(static_cast<uint8_t>(bit));
    }
    buffer.push_back(std::move(sample));
  }
  return buffer;
}

}  // namespace

void save_population(const std::filesystem::path& dir, const Population& pop, int player) {
  json manifest = json::array();
  for (int i = 0; i < pop.size(); ++i) {
    const auto& member = pop.members[i];
    json entry = {{"tag", member.tag}, {"created_iteration", member.created_iteration}};
    switch (member.kind) {
      case PolicySnapshot::Kind::kUniformRandom:
        entry["kind"] = "uniform";
        break;
      case PolicySnapshot::Kind::kNet: {
        entry["kind"] = "net";
        const auto name = blob_name(player, i);
        entry["blob"] = name + ".qnet";
        save_network(*member.net, dir / (name + ".qnet"));
        std::ofstream buffer_out(dir / (name + ".buffer.json"));
        buffer_out << buffer_to_json(member.state_buffer);
        entry["buffer"] = name + ".buffer.json";
        break;
      }
      case PolicySnapshot::Kind::kScripted:
        entry["kind"] = "scripted";
        entry["script"] = member.script;
        break;
      case PolicySnapshot::Kind::kTabular: {
        entry["kind"] = "tabular";
        json table = json::object();
        for (const auto& [key, dist] : *member.table) table[key] = dist;
        entry["table"] = std::move(table);
        break;
      }
    }
    manifest.push_back(std::move(entry));
  }
  std::ofstream out(dir / ("population" + std::to_string(player) + ".json"));
  if (!out) throw ConfigError("save_population: cannot write manifest");
  out << manifest.dump(1);
}

Population load_population(const std::filesystem::path& dir, int player) {
  std::ifstream in(dir / ("population" + std::to_string(player) + ".json"));
  if (!in) {
    throw ConfigError("load_population: missing manifest for player " + std::to_string(player));
  }
  json manifest = json::parse(in);
  Population pop;
  for (const auto& entry : manifest) {
    const std::string kind = entry.at("kind").get<std::string>();
    PolicySnapshot member;
    if (kind == "uniform") {
      member = PolicySnapshot::uniform_random(entry.at("created_iteration").get<int>());
      member.tag = entry.at("tag").get<std::string>();
    } else if (kind == "net") {
      member.kind = PolicySnapshot::Kind::kNet;
      member.net =
          std::make_shared<QNetwork>(load_network(dir / entry.at("blob").get<std::string>()));
      member.tag = entry.at("tag").get<std::string>();
      member.created_iteration = entry.at("created_iteration").get<int>();
      std::ifstream buffer_in(dir / entry.at("buffer").get<std::string>());
      if (buffer_in) member.state_buffer = buffer_from_json(json::parse(buffer_in));
    } else if (kind == "scripted") {
      member = PolicySnapshot::scripted(entry.at("script").get<std::string>(),
                                        entry.at("created_iteration").get<int>());
      member.tag = entry.at("tag").get<std::string>();
    } else if (kind == "tabular") {
      std::unordered_map<std::string, std::vector<double>> table;
      for (const auto& [key, dist] : entry.at("table").items()) {
        table[key] = dist.get<std::vector<double>>();
      }
      member = PolicySnapshot::tabular(std::move(table), entry.at("tag").get<std::string>(),
                                       entry.at("created_iteration").get<int>());
    } else {
      throw ConfigError("load_population: unknown member kind '" + kind + "'");
    }
    pop.members.push_back(std::move(member));
  }
  return pop;
}

}  // namespace cpsro
