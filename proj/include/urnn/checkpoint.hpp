#pragma once

#include <string>
#include <vector>

#include "urnn/model.hpp"
#include "urnn/optim.hpp"

namespace urnn {

// Versioned little-endian binary: magic, u32 version, length-prefixed
// config echo, then named tensor groups (u32 name length, name bytes,
// u32 rank, u64 dims, float64 payload). Optimizer state rides along as
// groups under "opt.". Round trips are bitwise exact.
struct Checkpoint {
  uint32_t version = 1;
  std::string config_text;
  struct Group {
    std::string name;
    std::vector<uint64_t> dims;
    std::vector<double> data;
  };
  std::vector<Group> groups;

  const Group* find(const std::string& name) const;
};

void save_checkpoint(const std::string& path, const SequenceModel& model,
                     const RmsProp* opt, const std::string& config_text);

Checkpoint load_checkpoint(const std::string& path);

// Copies the checkpoint's parameter groups into the model, validating
// names and shapes; returns optimizer state if present.
void restore_model(const Checkpoint& ck, SequenceModel& model, RmsProp* opt);

}  // namespace urnn
