#pragma once

#include <filesystem>
#include <string>

#include "tvmpc/net/policy_network.hpp"
#include "tvmpc/net/value_network.hpp"

namespace tvmpc {

/// Text checkpoint, version 1:
///
///   tvmpc-checkpoint 1
///   kind value|policy
///   activation tanh
///   state_dim <n>
///   output_scale <s>              (value networks: V = s/2 |r|^2; 1 for policies)
///   dims <L+1 integers: input, hidden..., output>
///   input_offset <input values>
///   input_scale <input values>
///   input_periodic <input 0/1 flags>
///   weight <l> <rows> <cols>      followed by <rows> lines of <cols> values (row-major)
///   bias <l> <rows>               followed by one line of <rows> values
///   ... (one weight/bias pair per layer)
///   end
///
/// Doubles are written in shortest round-trip form, so save -> load is bit-exact.
struct Checkpoint {
  std::string kind;
  int state_dim = 0;
  double output_scale = 1.0;
  Mlp mlp;
};

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
/// Throws ParseError (with line number) on malformed or truncated files.
Checkpoint read_checkpoint(const std::filesystem::path& path);

void save_checkpoint(const ValueNetwork& net, const std::filesystem::path& path);
ValueNetwork load_checkpoint(const std::filesystem::path& path);
/// Also checks that the stored network matches the environment; throws ContractViolation otherwise.
ValueNetwork load_checkpoint(const std::filesystem::path& path, int state_dim, int context_dim);

void save_policy(const PolicyNetwork& policy, const std::filesystem::path& path);
PolicyNetwork load_policy(const std::filesystem::path& path);

}  // namespace tvmpc
