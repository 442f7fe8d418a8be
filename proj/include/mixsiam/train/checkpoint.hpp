#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "mixsiam/autodiff/tensor.hpp"
#include "mixsiam/train/config.hpp"

namespace mixsiam::train {

inline constexpr int kCheckpointFormatVersion = 1;
inline constexpr char kCheckpointMagic[8] = {'M', 'X', 'S', 'M', 'C', 'K', 'P', 'T'};

struct TensorRecord {
    std::string name;
    ad::Shape shape;
    std::vector<double> values;  // exact image of the stored float or double values
};

// File layout: 8-byte magic, u64 LE header length, JSON header, then the
// tensor payload as little-endian IEEE values (f32 for 32-bit runs, f64 for
// 64-bit runs). The header lists every tensor with its name, shape, dtype
// and byte offset into the payload.
struct Checkpoint {
    int format_version = kCheckpointFormatVersion;
    TrainConfig config;
    std::uint64_t config_hash = 0;
    std::size_t epoch = 0;  // completed epochs
    std::size_t step = 0;   // completed optimizer steps
    std::vector<TensorRecord> params;
    std::vector<TensorRecord> buffers;
    std::vector<TensorRecord> momentum;  // empty before the first step
    std::vector<double> loss_tail;       // last total losses, oldest first
};

inline constexpr std::size_t kLossTailLength = 64;

std::string checkpoint_filename(std::size_t epoch);

void write_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
// Throws ParseError on a malformed file.
Checkpoint read_checkpoint(const std::filesystem::path& path);

}  // namespace mixsiam::train
