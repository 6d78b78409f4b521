#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "autobid/agents.hpp"
#include "autobid/learner.hpp"

namespace autobid {

// Text checkpoint, version 1:
//
//   autobid-checkpoint 1
//   meta <key> <value>                  (any number)
//   action_grid <size> <first> <step>
//   observation_scaling budget/initial value*1 timesteps/episode_length
//   network <name> agents <n> layers <L>
//   dense <out> <in>
//   w <out*in reals, row-major>
//   b <out reals>
//   ...
//   end
//
// Reals use the shortest representation that round-trips exactly.
struct Checkpoint {
  std::map<std::string, std::string> meta;
  std::vector<std::pair<std::string, QNet>> networks;

  const QNet* find(const std::string& name) const;
};

inline constexpr int kCheckpointVersion = 1;

void write_checkpoint(std::ostream& out, const Checkpoint& checkpoint);
// Throws SchemaError on an unknown version, mismatched grid or malformed body.
Checkpoint read_checkpoint(std::istream& in);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Bundle <-> checkpoint: kind tag, temperature and fixed bar go to meta;
// bidder (and bar) networks are stored under "bidder" and "bar".
Checkpoint to_checkpoint(const AgentBundle& bundle);
AgentBundle bundle_from_checkpoint(const Checkpoint& checkpoint);

}  // namespace autobid
