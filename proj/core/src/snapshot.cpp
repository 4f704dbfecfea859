#include "psim/snapshot.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "psim/csv.hpp"

namespace psim {

namespace {

constexpr const char* kMagic = "psim-snapshot v1";

const char* arch_name(Architecture a) {
  return a == Architecture::two_layer ? "two_layer" : "three_layer";
}

void write_matrix(std::ostream& os, const Matrix& m) {
  for (int r = 0; r < m.rows(); ++r) {
    const auto row = m.row(r);
    for (int c = 0; c < m.cols(); ++c) {
      if (c) os << ' ';
      os << format_double(row[c]);
    }
    os << '\n';
  }
}

class LineReader {
 public:
  explicit LineReader(std::istream& is) : is_(is) {}

  std::string next(const char* what) {
    std::string line;
    if (!std::getline(is_, line)) {
      throw SnapshotError(line_no_ + 1, std::string("unexpected end of file, expected ") + what);
    }
    ++line_no_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
  }

  int line_no() const { return line_no_; }

 private:
  std::istream& is_;
  int line_no_ = 0;
};

std::string expect_field(LineReader& in, const std::string& key) {
  const std::string line = in.next(key.c_str());
  if (line.rfind(key + ' ', 0) != 0) {
    throw SnapshotError(in.line_no(), "expected '" + key + " <value>', got '" + line + "'");
  }
  return line.substr(key.size() + 1);
}

long long parse_int(LineReader& in, const std::string& key) {
  const std::string text = expect_field(in, key);
  long long value = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw SnapshotError(in.line_no(), "malformed integer for '" + key + "': '" + text + "'");
  }
  return value;
}

double parse_double_text(LineReader& in, const std::string& text, const std::string& what) {
  double value = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw SnapshotError(in.line_no(), "malformed number for " + what + ": '" + text + "'");
  }
  return value;
}

double parse_number(LineReader& in, const std::string& key) {
  return parse_double_text(in, expect_field(in, key), "'" + key + "'");
}

void read_matrix(LineReader& in, Matrix& m, const char* name) {
  const std::string header = in.next(name);
  if (header != name) {
    throw SnapshotError(in.line_no(), std::string("expected '") + name + "' section");
  }
  for (int r = 0; r < m.rows(); ++r) {
    const std::string line = in.next("matrix row");
    std::istringstream fields(line);
    std::string cell;
    for (int c = 0; c < m.cols(); ++c) {
      if (!(fields >> cell)) {
        throw SnapshotError(in.line_no(), std::string(name) + " row has too few entries");
      }
      m(r, c) = parse_double_text(in, cell, std::string(name) + " entry");
      if (!(m(r, c) > 0.0)) {
        throw SnapshotError(in.line_no(), std::string(name) + " entry must be positive");
      }
    }
    if (fields >> cell) {
      throw SnapshotError(in.line_no(), std::string(name) + " row has too many entries");
    }
  }
}

}  // namespace

void save_snapshot(const ClipNetwork& net, const AgentConfig& agent, std::ostream& os) {
  os << kMagic << '\n';
  os << "architecture " << arch_name(net.architecture()) << '\n';
  os << "num_percepts " << net.num_percepts() << '\n';
  os << "num_intermediate " << net.num_intermediate() << '\n';
  os << "num_experiments " << net.num_experiments() << '\n';
  os << "values_per_variable " << net.values_per_variable() << '\n';
  os << "gamma " << format_double(agent.gamma) << '\n';
  os << "reward_magnitude " << format_double(agent.reward_magnitude) << '\n';
  os << "boredom_threshold " << format_double(agent.boredom_threshold) << '\n';
  os << "max_redraws " << agent.max_redraws << '\n';
  os << "h1\n";
  write_matrix(os, net.h1());
  if (net.architecture() == Architecture::three_layer) {
    os << "h2\n";
    write_matrix(os, net.h2());
  }
  os << "end\n";
}

Snapshot load_snapshot(std::istream& is) {
  LineReader in(is);
  if (in.next("header") != kMagic) {
    throw SnapshotError(1, std::string("not a snapshot file (expected '") + kMagic + "')");
  }
  const std::string arch_text = expect_field(in, "architecture");
  Architecture arch;
  if (arch_text == "two_layer") {
    arch = Architecture::two_layer;
  } else if (arch_text == "three_layer") {
    arch = Architecture::three_layer;
  } else {
    throw SnapshotError(in.line_no(), "unknown architecture '" + arch_text + "'");
  }

  const long long num_percepts = parse_int(in, "num_percepts");
  const long long num_intermediate = parse_int(in, "num_intermediate");
  const long long num_experiments = parse_int(in, "num_experiments");
  const long long values = parse_int(in, "values_per_variable");

  Snapshot snap;
  snap.agent.gamma = parse_number(in, "gamma");
  snap.agent.reward_magnitude = parse_number(in, "reward_magnitude");
  snap.agent.boredom_threshold = parse_number(in, "boredom_threshold");
  snap.agent.max_redraws = static_cast<int>(parse_int(in, "max_redraws"));

  try {
    if (arch == Architecture::two_layer) {
      if (num_intermediate != 0) {
        throw std::invalid_argument("two_layer snapshot with intermediate clips");
      }
      snap.net = ClipNetwork::two_layer(static_cast<int>(num_percepts),
                                        static_cast<int>(num_experiments),
                                        static_cast<int>(values));
    } else {
      snap.net = ClipNetwork::three_layer(
          static_cast<int>(num_percepts), static_cast<int>(num_intermediate),
          static_cast<int>(num_experiments), static_cast<int>(values));
    }
    snap.agent.validate(static_cast<int>(values));
  } catch (const std::invalid_argument& e) {
    throw SnapshotError(in.line_no(), e.what());
  }

  read_matrix(in, snap.net.h1(), "h1");
  if (arch == Architecture::three_layer) read_matrix(in, snap.net.h2(), "h2");
  if (in.next("end") != "end") throw SnapshotError(in.line_no(), "expected trailing 'end'");
  return snap;
}

void save_snapshot_file(const ClipNetwork& net, const AgentConfig& agent,
                        const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  save_snapshot(net, agent, os);
  os.flush();
  if (!os) throw std::runtime_error("write failed: " + path);
}

Snapshot load_snapshot_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open: " + path);
  return load_snapshot(is);
}

}  // namespace psim
