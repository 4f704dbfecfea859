#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>

#include "psim/ecm.hpp"

namespace psim {

/// Parse failure with the 1-based line where it was detected.
class SnapshotError : public std::runtime_error {
 public:
  SnapshotError(int line, const std::string& what)
      : std::runtime_error("snapshot line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

struct Snapshot {
  ClipNetwork net;
  AgentConfig agent;
};

/// Versioned text format: a header (format version, architecture,
/// dimensions, agent config), then the h-matrices row by row in full
/// decimal precision. save/load round-trips are bit-exact.
void save_snapshot(const ClipNetwork& net, const AgentConfig& agent, std::ostream& os);
Snapshot load_snapshot(std::istream& is);

void save_snapshot_file(const ClipNetwork& net, const AgentConfig& agent, const std::string& path);
Snapshot load_snapshot_file(const std::string& path);

}  // namespace psim
